#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vropt/vec.hpp"

namespace vropt {

// One example a_i, stored as (index, value) pairs with strictly ascending
// 0-based indices. Explicitly stored zeros are permitted.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  double dot(const DenseVec& x) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) acc += values[k] * x[indices[k]];
    return acc;
  }

  double squared_norm() const {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return acc;
  }

  // out += c * this
  void add_scaled_to(double c, DenseVec& out) const {
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] += c * values[k];
  }

  bool empty_support() const {
    for (double v : values)
      if (v != 0.0) return false;
    return true;
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? "parse error: " + what
                                     : "parse error at line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Immutable after construction; safe to share across threads.
struct SparseDataset {
  std::vector<SparseVector> rows;
  std::vector<double> labels;  // +-1 for classification, arbitrary finite for regression
  std::size_t dim = 0;
  bool normalized = false;
  std::size_t zero_rows = 0;  // rows with empty support, kept as-is

  std::size_t size() const { return rows.size(); }
};

// LIBSVM/SVMlight text: `label idx:val [idx:val ...]` per line, 1-based
// ascending indices, `#` starts a comment. LF or CRLF line endings.
SparseDataset parse_libsvm(std::string_view text);
SparseDataset load_libsvm_file(const std::string& path);
std::string to_libsvm(const SparseDataset& ds);

// Scales every nonzero row to unit Euclidean length. All-zero rows pass
// through unchanged and are counted in zero_rows.
SparseDataset normalize_rows(SparseDataset ds);

// Dense unit-norm rows from a seeded PRNG; labels = <a_i, x_true> + noise.
// Deterministic given (n, d, noise_std, seed).
SparseDataset synth_regression(std::size_t n, std::size_t d, double noise_std, std::uint64_t seed);

// Same rows as synth_regression; labels are the sign (+-1) of the regression label.
SparseDataset synth_classification(std::size_t n, std::size_t d, double noise_std,
                                   std::uint64_t seed);

// Checks structural invariants, throws std::invalid_argument on violation.
void validate(const SparseDataset& ds);

}  // namespace vropt
