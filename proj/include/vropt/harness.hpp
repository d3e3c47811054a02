#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vropt/optimizers.hpp"

namespace vropt {

struct ReferenceSolution {
  enum class Method { FullProxGd, LongVrsgd, File };

  DenseVec x_star;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::infinity();
  Method method = Method::FullProxGd;
};

std::string method_name(ReferenceSolution::Method m);

// Hash of the dataset plus objective parameters; keys the reference cache.
std::uint64_t content_hash(const CompositeObjective& obj);

// Full proximal gradient at eta = 1/L down to `tol` on the prox-gradient
// mapping norm, then 100 epochs of vrsgd-i at eta = 1/(10L); the lower of the
// two objective values wins. Cached to cache_path when given.
ReferenceSolution compute_reference(const CompositeObjective& obj, double tol = 1e-12,
                                    const std::string& cache_path = "",
                                    std::size_t max_iters = 1000000);

void write_reference_cache(const std::string& path, std::uint64_t hash,
                           const ReferenceSolution& ref);
std::optional<ReferenceSolution> read_reference_cache(const std::string& path,
                                                      std::uint64_t hash);

// Runs the optimizer selected by the OptimizerSpec and fills the per-epoch gap column
// against ref.f_star; gaps within -1e-10 of zero are clamped to 0.
Trace run_experiment(const CompositeObjective& obj, const OptimizerSpec& spec,
                     const ReferenceSolution& ref);

// One trace per learning rate, shared seed and reference. Individual
// divergences are recorded per trace, not raised.
std::vector<Trace> sweep_learning_rates(const CompositeObjective& obj, const OptimizerSpec& base,
                                        const std::vector<double>& etas,
                                        const ReferenceSolution& ref, bool parallel = true);

// Trace CSV: header `epoch,passes,wall_s,objective,gap`, 17 significant digits.
void write_trace_csv(std::ostream& os, const Trace& trace);
void write_trace_csv_file(const std::string& path, const Trace& trace);
Trace read_trace_csv(std::istream& is);
Trace read_trace_csv_file(const std::string& path);
std::string trace_filename(Algo algo, double eta, std::uint64_t seed);

struct VarianceRow {
  std::size_t b = 0;
  double delta_b = 0.0;
  double empirical_mse = 0.0;
  double bound = 0.0;
};

// CSV: header `b,delta_b,empirical_mse,bound`.
void write_variance_csv(std::ostream& os, const std::vector<VarianceRow>& rows);

}  // namespace vropt
