#include "vropt/estimator.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace vropt {

SnapshotContext make_snapshot(const CompositeObjective& obj, DenseVec x_tilde) {
  SnapshotContext ctx;
  ctx.mu_tilde = obj.full_grad(x_tilde);
  ctx.x_tilde = std::move(x_tilde);
  return ctx;
}

void svrg_estimate_into(const CompositeObjective& obj, const SnapshotContext& ctx, std::size_t i,
                        const DenseVec& x, DenseVec& out) {
  if (i >= obj.n()) throw std::out_of_range("svrg_estimate: index out of range");
  out = ctx.mu_tilde;
  const double core_x = obj.loss_core(i, obj.margin(i, x));
  const double core_t = obj.loss_core(i, obj.margin(i, ctx.x_tilde));
  obj.data().rows[i].add_scaled_to(core_x - core_t, out);
  if (obj.smooth_fold()) {
    const double l1 = obj.reg().lambda1;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += l1 * (x[j] - ctx.x_tilde[j]);
  }
}

DenseVec svrg_estimate(const CompositeObjective& obj, const SnapshotContext& ctx, std::size_t i,
                       const DenseVec& x) {
  DenseVec out;
  svrg_estimate_into(obj, ctx, i, x, out);
  return out;
}

void minibatch_estimate_into(const CompositeObjective& obj, const SnapshotContext& ctx,
                             std::span<const std::size_t> batch, const DenseVec& x,
                             DenseVec& out) {
  if (batch.empty()) throw std::invalid_argument("minibatch_estimate: empty batch");
  out = ctx.mu_tilde;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    if (i >= obj.n()) throw std::out_of_range("minibatch_estimate: index out of range");
    const double core_x = obj.loss_core(i, obj.margin(i, x));
    const double core_t = obj.loss_core(i, obj.margin(i, ctx.x_tilde));
    obj.data().rows[i].add_scaled_to(inv_b * (core_x - core_t), out);
  }
  if (obj.smooth_fold()) {
    const double l1 = obj.reg().lambda1;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += l1 * (x[j] - ctx.x_tilde[j]);
  }
}

DenseVec minibatch_estimate(const CompositeObjective& obj, const SnapshotContext& ctx,
                            std::span<const std::size_t> batch, const DenseVec& x) {
  DenseVec out;
  minibatch_estimate_into(obj, ctx, batch, x, out);
  return out;
}

double delta_b(std::size_t n, std::size_t b) {
  if (n <= 1 || b == n) return 0.0;
  return static_cast<double>(n - b) / (static_cast<double>(n - 1) * static_cast<double>(b));
}

namespace {

// C(n, b), capped at limit + 1 so callers only learn "fits" or "does not".
std::uint64_t combinations_capped(std::size_t n, std::size_t b, std::uint64_t limit) {
  if (b > n) return 0;
  b = std::min(b, n - b);
  long double c = 1.0L;
  for (std::size_t k = 1; k <= b; ++k) {
    c = c * static_cast<long double>(n - b + k) / static_cast<long double>(k);
    if (c > static_cast<long double>(limit)) return limit + 1;
  }
  return static_cast<std::uint64_t>(c + 0.5L);
}

}  // namespace

VarianceDiag variance_diag(const CompositeObjective& obj, const SnapshotContext& ctx,
                           const DenseVec& x, std::size_t b, double f_star,
                           std::uint64_t sample_seed) {
  const std::size_t n = obj.n();
  if (b < 1 || b > n) throw std::invalid_argument("variance_diag: batch size out of range");

  VarianceDiag diag;
  diag.delta_b = delta_b(n, b);
  diag.sample_seed = sample_seed;

  const DenseVec grad = obj.full_grad(x);
  DenseVec est;

  const std::uint64_t outcomes = combinations_capped(n, b, kExhaustiveLimit);
  if (outcomes <= kExhaustiveLimit) {
    diag.exhaustive = true;
    std::vector<std::size_t> idx(b);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double acc = 0.0;
    std::uint64_t count = 0;
    for (;;) {
      minibatch_estimate_into(obj, ctx, idx, x, est);
      acc += squared_distance(est, grad);
      ++count;
      std::size_t i = b;
      while (i > 0 && idx[i - 1] == n - b + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < b; ++j) idx[j] = idx[j - 1] + 1;
    }
    diag.empirical_mse = acc / static_cast<double>(count);
  } else {
    diag.exhaustive = false;
    std::mt19937_64 rng(sample_seed);
    std::vector<std::size_t> idx;
    idx.reserve(b);
    std::vector<char> taken(n, 0);
    double acc = 0.0, acc_sq = 0.0;
    for (std::size_t t = 0; t < kSampleCount; ++t) {
      idx.clear();
      // Floyd's subset sampling: uniform over b-subsets of [0, n)
      for (std::size_t j = n - b; j < n; ++j) {
        const std::size_t r = std::uniform_int_distribution<std::size_t>(0, j)(rng);
        const std::size_t pick = taken[r] ? j : r;
        taken[pick] = 1;
        idx.push_back(pick);
      }
      for (std::size_t v : idx) taken[v] = 0;
      minibatch_estimate_into(obj, ctx, idx, x, est);
      const double sq = squared_distance(est, grad);
      acc += sq;
      acc_sq += sq * sq;
    }
    const double mean = acc / static_cast<double>(kSampleCount);
    const double var = std::max(0.0, acc_sq / static_cast<double>(kSampleCount) - mean * mean);
    diag.empirical_mse = mean;
    diag.std_error = std::sqrt(var / static_cast<double>(kSampleCount));
  }

  const double L = obj.lipschitz().value;
  const double gap_x = obj.value(x) - f_star;
  const double gap_t = obj.value(ctx.x_tilde) - f_star;
  diag.bound = 4.0 * L * diag.delta_b * (gap_x + gap_t);
  return diag;
}

}  // namespace vropt
