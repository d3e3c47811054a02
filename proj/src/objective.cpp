#include "vropt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace vropt {

namespace {

// 1 / (1 + exp(-u)) without overflow on either tail.
double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

struct ChunkRange {
  std::size_t begin, end;
};

std::vector<ChunkRange> make_chunks(std::size_t n, unsigned chunks) {
  const std::size_t c = std::max<std::size_t>(1, std::min<std::size_t>(chunks, n));
  std::vector<ChunkRange> out;
  out.reserve(c);
  for (std::size_t k = 0; k < c; ++k) out.push_back({n * k / c, n * (k + 1) / c});
  return out;
}

}  // namespace

double prox_scalar(const Regularizer& reg, double eta, double y) {
  if (eta <= 0.0) throw std::invalid_argument("prox: eta must be positive");
  return soft_threshold(y, eta * reg.lambda2) / (1.0 + eta * reg.lambda1);
}

void prox_into(const Regularizer& reg, double eta, const DenseVec& y, DenseVec& out) {
  if (eta <= 0.0) throw std::invalid_argument("prox: eta must be positive");
  out.resize(y.size());
  const double t = eta * reg.lambda2;
  const double denom = 1.0 + eta * reg.lambda1;
  for (std::size_t j = 0; j < y.size(); ++j) out[j] = soft_threshold(y[j], t) / denom;
}

DenseVec prox(const Regularizer& reg, double eta, const DenseVec& y) {
  DenseVec out;
  prox_into(reg, eta, y, out);
  return out;
}

CompositeObjective::CompositeObjective(std::shared_ptr<const SparseDataset> data, LossKind loss,
                                       Regularizer reg, bool smooth_fold)
    : data_(std::move(data)), loss_(loss), reg_(reg), fold_(smooth_fold) {
  if (!data_) throw std::invalid_argument("objective: null dataset");
  validate(*data_);
  if (!(std::isfinite(reg_.lambda1) && reg_.lambda1 >= 0.0) ||
      !(std::isfinite(reg_.lambda2) && reg_.lambda2 >= 0.0))
    throw std::invalid_argument("objective: regularization weights must be finite and >= 0");
  if (fold_ && reg_.lambda2 != 0.0)
    throw std::invalid_argument("objective: smooth_fold requires lambda2 == 0");

  labels_ = data_->labels;
  if (loss_ == LossKind::Logistic) {
    bool pm1 = true, zero_one = true;
    for (double b : labels_) {
      if (b != -1.0 && b != 1.0) pm1 = false;
      if (b != 0.0 && b != 1.0) zero_one = false;
    }
    if (!pm1) {
      if (!zero_one)
        throw std::invalid_argument("objective: logistic loss requires labels in {-1,+1}");
      for (double& b : labels_) {
        if (b == 0.0) {
          b = -1.0;
          ++remapped_;
        }
      }
    }
  }

  for (const auto& row : data_->rows) max_row_sq_ = std::max(max_row_sq_, row.squared_norm());
}

double CompositeObjective::loss_core(std::size_t i, double margin) const {
  const double b = labels_[i];
  if (loss_ == LossKind::Squared) return margin - b;
  return -b * sigmoid(-b * margin);
}

double CompositeObjective::loss_term(std::size_t i, double margin) const {
  const double b = labels_[i];
  if (loss_ == LossKind::Squared) {
    const double r = margin - b;
    return 0.5 * r * r;
  }
  const double u = b * margin;  // log(1 + exp(-u)), stable on both tails
  return u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
}

double CompositeObjective::component_value(std::size_t i, const DenseVec& x) const {
  double v = loss_term(i, margin(i, x));
  if (fold_) v += 0.5 * reg_.lambda1 * squared_norm(x);
  return v;
}

void CompositeObjective::component_grad_into(std::size_t i, const DenseVec& x,
                                             DenseVec& out) const {
  if (i >= n()) throw std::out_of_range("component_grad: index out of range");
  out.assign(dim(), 0.0);
  const double core = loss_core(i, margin(i, x));
  data_->rows[i].add_scaled_to(core, out);
  if (fold_) axpy(reg_.lambda1, x, out);
}

DenseVec CompositeObjective::component_grad(std::size_t i, const DenseVec& x) const {
  DenseVec out;
  component_grad_into(i, x, out);
  return out;
}

void CompositeObjective::accumulate_grad_range(std::size_t begin, std::size_t end,
                                               const DenseVec& x, DenseVec& acc) const {
  for (std::size_t i = begin; i < end; ++i) {
    const double core = loss_core(i, margin(i, x));
    data_->rows[i].add_scaled_to(core, acc);
  }
}

double CompositeObjective::sum_loss_range(std::size_t begin, std::size_t end,
                                          const DenseVec& x) const {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += loss_term(i, margin(i, x));
  return acc;
}

void CompositeObjective::full_grad_into(const DenseVec& x, DenseVec& out) const {
  const std::size_t nn = n();
  out.assign(dim(), 0.0);
  const auto chunks = make_chunks(nn, chunks_);
  if (chunks.size() == 1) {
    accumulate_grad_range(0, nn, x, out);
  } else {
    std::vector<DenseVec> parts(chunks.size(), DenseVec(dim(), 0.0));
    std::vector<std::thread> workers;
    workers.reserve(chunks.size());
    for (std::size_t k = 0; k < chunks.size(); ++k)
      workers.emplace_back([&, k] { accumulate_grad_range(chunks[k].begin, chunks[k].end, x, parts[k]); });
    for (auto& w : workers) w.join();
    for (const auto& part : parts)
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += part[j];
  }
  const double inv_n = 1.0 / static_cast<double>(nn);
  for (double& v : out) v *= inv_n;
  if (fold_) axpy(reg_.lambda1, x, out);
}

DenseVec CompositeObjective::full_grad(const DenseVec& x) const {
  DenseVec out;
  full_grad_into(x, out);
  return out;
}

double CompositeObjective::loss_value(const DenseVec& x) const {
  const std::size_t nn = n();
  const auto chunks = make_chunks(nn, chunks_);
  double total = 0.0;
  if (chunks.size() == 1) {
    total = sum_loss_range(0, nn, x);
  } else {
    std::vector<double> parts(chunks.size(), 0.0);
    std::vector<std::thread> workers;
    workers.reserve(chunks.size());
    for (std::size_t k = 0; k < chunks.size(); ++k)
      workers.emplace_back([&, k] { parts[k] = sum_loss_range(chunks[k].begin, chunks[k].end, x); });
    for (auto& w : workers) w.join();
    for (double part : parts) total += part;
  }
  total /= static_cast<double>(nn);
  if (fold_) total += 0.5 * reg_.lambda1 * squared_norm(x);
  return total;
}

double CompositeObjective::reg_value(const DenseVec& x) const {
  if (fold_) return reg_.lambda2 > 0.0 ? reg_.lambda2 * l1_norm(x) : 0.0;
  return reg_.value(x);
}

double CompositeObjective::value(const DenseVec& x) const { return loss_value(x) + reg_value(x); }

LipschitzInfo CompositeObjective::lipschitz() const {
  if (l_override_) return {*l_override_, LipschitzSource::Override};
  const double factor = loss_ == LossKind::Logistic ? 0.25 : 1.0;
  double L = factor * max_row_sq_;
  if (fold_) L += reg_.lambda1;
  if (!(L > 0.0)) throw std::runtime_error("objective: analytic Lipschitz bound is not positive");
  return {L, LipschitzSource::Analytic};
}

void CompositeObjective::set_lipschitz_override(double L) {
  if (!(std::isfinite(L) && L > 0.0))
    throw std::invalid_argument("objective: Lipschitz override must be finite and positive");
  l_override_ = L;
}

}  // namespace vropt
