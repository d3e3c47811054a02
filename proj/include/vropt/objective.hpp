#pragma once

#include <memory>
#include <optional>

#include "vropt/dataset.hpp"
#include "vropt/vec.hpp"

namespace vropt {

enum class LossKind { Logistic, Squared };

// g(x) = (lambda1/2) ||x||^2 + lambda2 ||x||_1
struct Regularizer {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  double value(const DenseVec& x) const {
    double v = 0.0;
    if (lambda1 > 0.0) v += 0.5 * lambda1 * squared_norm(x);
    if (lambda2 > 0.0) v += lambda2 * l1_norm(x);
    return v;
  }

  bool smooth() const { return lambda2 == 0.0; }
};

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// argmin_x (1/2 eta) ||x - y||^2 + g(x), componentwise soft(y, eta*l2)/(1 + eta*l1).
double prox_scalar(const Regularizer& reg, double eta, double y);
void prox_into(const Regularizer& reg, double eta, const DenseVec& y, DenseVec& out);
DenseVec prox(const Regularizer& reg, double eta, const DenseVec& y);

enum class LipschitzSource { Analytic, Override };

struct LipschitzInfo {
  double value = 0.0;
  LipschitzSource source = LipschitzSource::Analytic;
};

// F(x) = (1/n) sum_i f_i(x) + g(x) over a shared immutable dataset.
//
// With smooth_fold the (lambda1/2)||x||^2 term moves into every f_i (the
// effective g is then the L1 part, which must be zero); otherwise g is kept
// whole and handled through its gradient or proximal operator.
class CompositeObjective {
 public:
  CompositeObjective(std::shared_ptr<const SparseDataset> data, LossKind loss, Regularizer reg,
                     bool smooth_fold);

  static bool default_fold(const Regularizer& reg) { return reg.lambda2 == 0.0; }

  std::size_t n() const { return data_->size(); }
  std::size_t dim() const { return data_->dim; }
  LossKind loss() const { return loss_; }
  const Regularizer& reg() const { return reg_; }
  // The part of g the update rules must handle; folding moves the L2 term
  // into the components, leaving an empty g.
  Regularizer effective_reg() const { return fold_ ? Regularizer{0.0, 0.0} : reg_; }
  bool smooth_fold() const { return fold_; }
  const SparseDataset& data() const { return *data_; }
  const std::vector<double>& labels() const { return labels_; }
  std::size_t remapped_labels() const { return remapped_; }

  double margin(std::size_t i, const DenseVec& x) const { return data_->rows[i].dot(x); }
  double loss_core(std::size_t i, double margin) const;  // d phi / d margin
  double loss_term(std::size_t i, double margin) const;  // phi, fold excluded

  double component_value(std::size_t i, const DenseVec& x) const;
  void component_grad_into(std::size_t i, const DenseVec& x, DenseVec& out) const;
  DenseVec component_grad(std::size_t i, const DenseVec& x) const;

  double loss_value(const DenseVec& x) const;  // f(x), includes the folded term
  void full_grad_into(const DenseVec& x, DenseVec& out) const;
  DenseVec full_grad(const DenseVec& x) const;
  double reg_value(const DenseVec& x) const;  // unfolded part of g
  double value(const DenseVec& x) const;      // F(x)

  LipschitzInfo lipschitz() const;
  void set_lipschitz_override(double L);
  void clear_lipschitz_override() { l_override_.reset(); }
  double max_row_squared_norm() const { return max_row_sq_; }

  // Fixed contiguous chunks with a fixed-order reduction; results are bitwise
  // reproducible for a given chunk count. 1 = sequential.
  void set_eval_chunks(unsigned c) { chunks_ = c == 0 ? 1 : c; }
  unsigned eval_chunks() const { return chunks_; }

 private:
  void accumulate_grad_range(std::size_t begin, std::size_t end, const DenseVec& x,
                             DenseVec& acc) const;
  double sum_loss_range(std::size_t begin, std::size_t end, const DenseVec& x) const;

  std::shared_ptr<const SparseDataset> data_;
  std::vector<double> labels_;
  LossKind loss_;
  Regularizer reg_;
  bool fold_;
  double max_row_sq_ = 0.0;
  std::size_t remapped_ = 0;
  std::optional<double> l_override_;
  unsigned chunks_ = 1;
};

}  // namespace vropt
