#include "vropt/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace vropt {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view next_token(std::string_view line, std::size_t& pos) {
  while (pos < line.size() && is_blank(line[pos])) ++pos;
  const std::size_t start = pos;
  while (pos < line.size() && !is_blank(line[pos])) ++pos;
  return line.substr(start, pos - start);
}

double parse_real(std::string_view tok, std::size_t line_no, const char* what) {
  double v = 0.0;
  std::string_view body = tok;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);  // from_chars rejects '+'
  const auto* first = body.data();
  const auto* last = body.data() + body.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(std::string("malformed ") + what + " '" + std::string(tok) + "'", line_no);
  if (!std::isfinite(v))
    throw ParseError(std::string("non-finite ") + what + " '" + std::string(tok) + "'", line_no);
  return v;
}

std::size_t count_zero_rows(const std::vector<SparseVector>& rows) {
  std::size_t z = 0;
  for (const auto& r : rows)
    if (r.empty_support()) ++z;
  return z;
}

}  // namespace

SparseDataset parse_libsvm(std::string_view text) {
  SparseDataset ds;
  std::size_t line_no = 0;
  std::size_t max_index = 0;  // 1-based
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::size_t cur = 0;
    std::string_view label_tok = next_token(line, cur);
    if (label_tok.empty()) continue;  // blank or comment-only line

    SparseVector row;
    const double label = parse_real(label_tok, line_no, "label");
    std::uint64_t prev_index = 0;  // 1-based, 0 = none yet
    for (;;) {
      std::string_view tok = next_token(line, cur);
      if (tok.empty()) break;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError("malformed feature token '" + std::string(tok) + "'", line_no);
      std::uint64_t idx = 0;
      const auto* ifirst = tok.data();
      const auto* ilast = tok.data() + colon;
      auto [iptr, iec] = std::from_chars(ifirst, ilast, idx);
      if (iec != std::errc{} || iptr != ilast)
        throw ParseError("malformed feature index in '" + std::string(tok) + "'", line_no);
      if (idx < 1) throw ParseError("feature index must be >= 1", line_no);
      if (idx <= prev_index) throw ParseError("non-ascending indices", line_no);
      const double val = parse_real(tok.substr(colon + 1), line_no, "feature value");
      row.indices.push_back(static_cast<std::uint32_t>(idx - 1));
      row.values.push_back(val);
      prev_index = idx;
    }
    max_index = std::max<std::size_t>(max_index, prev_index);
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }
  if (ds.rows.empty()) throw ParseError("empty dataset", 0);
  if (max_index == 0) throw ParseError("dataset has no features", 0);
  ds.dim = max_index;
  ds.normalized = false;
  ds.zero_rows = count_zero_rows(ds.rows);
  return ds;
}

SparseDataset load_libsvm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_libsvm(buf.str());
}

std::string to_libsvm(const SparseDataset& ds) {
  std::ostringstream out;
  char buf[64];
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", ds.labels[i]);
    out << buf;
    const auto& row = ds.rows[i];
    for (std::size_t k = 0; k < row.indices.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", row.values[k]);
      out << ' ' << (row.indices[k] + 1) << ':' << buf;
    }
    out << '\n';
  }
  return out.str();
}

SparseDataset normalize_rows(SparseDataset ds) {
  std::size_t zero = 0;
  for (auto& row : ds.rows) {
    const double sq = row.squared_norm();
    if (sq == 0.0) {
      ++zero;
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : row.values) v *= inv;
  }
  ds.normalized = true;
  ds.zero_rows = zero;
  return ds;
}

SparseDataset synth_regression(std::size_t n, std::size_t d, double noise_std,
                               std::uint64_t seed) {
  if (n == 0 || d == 0) throw std::invalid_argument("synthetic dataset needs n >= 1 and d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  DenseVec x_true(d);
  for (double& v : x_true) v = gauss(rng);

  SparseDataset ds;
  ds.rows.reserve(n);
  ds.labels.reserve(n);
  ds.dim = d;
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector row;
    row.indices.resize(d);
    row.values.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      row.indices[j] = static_cast<std::uint32_t>(j);
      row.values[j] = gauss(rng);
    }
    const double sq = row.squared_norm();
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& v : row.values) v *= inv;
    }
    // the noise draw is unconditional so rows and x_true are shared across
    // noise settings of the same seed; noise_std = 0 keeps labels exact
    const double label = row.dot(x_true) + noise_std * gauss(rng);
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }
  ds.normalized = true;
  ds.zero_rows = count_zero_rows(ds.rows);
  return ds;
}

SparseDataset synth_classification(std::size_t n, std::size_t d, double noise_std,
                                   std::uint64_t seed) {
  SparseDataset ds = synth_regression(n, d, noise_std, seed);
  for (double& b : ds.labels) b = b >= 0.0 ? 1.0 : -1.0;
  return ds;
}

void validate(const SparseDataset& ds) {
  if (ds.rows.empty()) throw std::invalid_argument("dataset: n must be >= 1");
  if (ds.dim == 0) throw std::invalid_argument("dataset: dim must be >= 1");
  if (ds.rows.size() != ds.labels.size())
    throw std::invalid_argument("dataset: rows and labels differ in length");
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& row = ds.rows[i];
    if (row.indices.size() != row.values.size())
      throw std::invalid_argument("dataset: indices/values length mismatch");
    std::uint64_t prev = 0;
    bool first = true;
    for (std::size_t k = 0; k < row.indices.size(); ++k) {
      const std::uint64_t idx = row.indices[k];
      if (!first && idx <= prev) throw std::invalid_argument("dataset: indices not ascending");
      if (idx >= ds.dim) throw std::invalid_argument("dataset: index out of range");
      if (!std::isfinite(row.values[k]))
        throw std::invalid_argument("dataset: non-finite feature value");
      prev = idx;
      first = false;
    }
    if (!std::isfinite(ds.labels[i])) throw std::invalid_argument("dataset: non-finite label");
    if (ds.normalized && !row.empty_support()) {
      const double nrm = std::sqrt(row.squared_norm());
      if (std::abs(nrm - 1.0) > 1e-12)
        throw std::invalid_argument("dataset: normalized flag set but row norm differs from 1");
    }
  }
}

}  // namespace vropt
