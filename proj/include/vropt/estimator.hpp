#pragma once

#include <cstdint>
#include <span>

#include "vropt/objective.hpp"

namespace vropt {

// Per-epoch anchor: snapshot point and the full gradient taken there.
struct SnapshotContext {
  DenseVec x_tilde;
  DenseVec mu_tilde;
};

SnapshotContext make_snapshot(const CompositeObjective& obj, DenseVec x_tilde);

// grad f_i(x) - grad f_i(x_tilde) + mu_tilde
void svrg_estimate_into(const CompositeObjective& obj, const SnapshotContext& ctx, std::size_t i,
                        const DenseVec& x, DenseVec& out);
DenseVec svrg_estimate(const CompositeObjective& obj, const SnapshotContext& ctx, std::size_t i,
                       const DenseVec& x);

// (1/b) sum_{i in batch} [grad f_i(x) - grad f_i(x_tilde)] + mu_tilde
void minibatch_estimate_into(const CompositeObjective& obj, const SnapshotContext& ctx,
                             std::span<const std::size_t> batch, const DenseVec& x, DenseVec& out);
DenseVec minibatch_estimate(const CompositeObjective& obj, const SnapshotContext& ctx,
                            std::span<const std::size_t> batch, const DenseVec& x);

// (n - b) / ((n - 1) b); 0 when b == n or n == 1.
double delta_b(std::size_t n, std::size_t b);

struct VarianceDiag {
  double empirical_mse = 0.0;  // E || estimate - grad f(x) ||^2
  double bound = 0.0;          // 4 L delta(b) [F(x) - F* + F(x_tilde) - F*]
  double delta_b = 0.0;
  double std_error = 0.0;  // of the Monte-Carlo mean; 0 when exhaustive
  bool exhaustive = true;
  std::uint64_t sample_seed = 0;
};

// Exact expectation over all batches when the outcome count is at most
// kExhaustiveLimit, otherwise kSampleCount seeded draws.
inline constexpr std::uint64_t kExhaustiveLimit = 100000;
inline constexpr std::size_t kSampleCount = 10000;

VarianceDiag variance_diag(const CompositeObjective& obj, const SnapshotContext& ctx,
                           const DenseVec& x, std::size_t b, double f_star,
                           std::uint64_t sample_seed = 0);

}  // namespace vropt
