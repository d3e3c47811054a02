#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "vropt/estimator.hpp"
#include "vropt/objective.hpp"

namespace vropt {

enum class Algo {
  SvrgI,
  SvrgII,
  ProxSvrg,
  VrsgdI,
  VrsgdII,
  KatyushaI,
  KatyushaII,
  Sgd,
  FullProxGd,
};

std::string algo_name(Algo a);
std::optional<Algo> algo_from_name(std::string_view name);

// Snapshot x_tilde^s from the epoch's inner iterates:
//   LastIterate  x^s_m
//   FullAverage  (1/m) sum_{k=1..m} x^s_k
//   TailAverage  (1/(m-1)) sum_{k=1..m-1} x^s_k
enum class SnapshotRule { LastIterate, FullAverage, TailAverage };

// Starting point of the next epoch: the last inner iterate, or the snapshot.
enum class StartRule { LastIterate, Snapshot };

// SmoothGradient: x <- x - eta [v + grad g(x)]   (requires lambda2 == 0)
// Proximal:       x <- prox_{eta,g}(x - eta v)
enum class UpdateMode { SmoothGradient, Proximal };

struct OptimizerSpec {
  Algo algo = Algo::VrsgdI;
  double eta0 = 0.1;
  bool eta_is_auto = false;  // Katyusha only: eta = 1/(3 w1 L) per epoch
  double alpha = 1.0;        // learning-rate schedule constant, 1.0 disables growth
  bool fixed_lr = true;
  std::size_t m = 0;  // inner steps per epoch; 0 resolves to 2n
  std::size_t epochs = 10;
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  UpdateMode update_mode = UpdateMode::SmoothGradient;
  DenseVec init;  // empty = zero vector

  // Test hook: when nonempty, indices are consumed from this list instead of
  // the seeded stream (batches take `batch` consecutive entries).
  std::vector<std::size_t> pinned_indices;
};

struct TraceRecord {
  std::size_t epoch = 0;
  double passes = 0.0;
  double wall_s = 0.0;
  double objective = 0.0;
  double gap = std::numeric_limits<double>::quiet_NaN();
};

struct Trace {
  std::vector<TraceRecord> records;
  DenseVec final_point;
  double final_objective = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  std::size_t diverged_epoch = 0;

  // Output-selection candidates of the iterate-averaged algorithms:
  // F(x_tilde^S) and F of the mean of all epoch snapshots.
  double candidate_last = std::numeric_limits<double>::quiet_NaN();
  double candidate_mean = std::numeric_limits<double>::quiet_NaN();
};

// eta_s = eta0 / max{alpha, 2/(s+1)}, s >= 1
double vrsgd_step_size(double eta0, double alpha, std::size_t s);

// eta_k = eta0 / (1 + floor(k b / n)): decay per effective data pass
double sgd_step_size(double eta0, std::size_t k, std::size_t n, std::size_t b);

double katyusha_combine(double w1, double w2, double y, double x_tilde, double z);
double katyusha_w1(std::size_t m, double mu, double L, std::size_t epoch);

Trace run_vrsgd_sc(const CompositeObjective& obj, const OptimizerSpec& spec);
Trace run_vrsgd_nsc(const CompositeObjective& obj, const OptimizerSpec& spec);
Trace run_svrg(const CompositeObjective& obj, const OptimizerSpec& spec);
Trace run_katyusha(const CompositeObjective& obj, const OptimizerSpec& spec);
Trace run_sgd(const CompositeObjective& obj, const OptimizerSpec& spec);

struct ProxGdResult {
  DenseVec x_star;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::infinity();  // prox-gradient mapping norm
  bool converged = false;
  std::size_t iterations = 0;
};

ProxGdResult run_full_proxgd(const CompositeObjective& obj, double eta, double tol,
                             std::size_t max_iters, DenseVec init = {});

// Full-batch proximal gradient as a trace (one record per iteration).
Trace run_proxgd_trace(const CompositeObjective& obj, const OptimizerSpec& spec);

// Dispatch on spec.algo.
Trace run(const CompositeObjective& obj, const OptimizerSpec& spec);

}  // namespace vropt
