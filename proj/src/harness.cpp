#include "vropt/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace vropt {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_mix_double(std::uint64_t& h, double v) { fnv_mix(h, &v, sizeof v); }
void fnv_mix_u64(std::uint64_t& h, std::uint64_t v) { fnv_mix(h, &v, sizeof v); }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double_strict(std::string_view tok, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw std::runtime_error(std::string("malformed ") + what + " '" + std::string(tok) + "'");
  return v;
}

}  // namespace

std::string method_name(ReferenceSolution::Method m) {
  switch (m) {
    case ReferenceSolution::Method::FullProxGd: return "full_proxgd";
    case ReferenceSolution::Method::LongVrsgd: return "long_vrsgd";
    case ReferenceSolution::Method::File: return "file";
  }
  return "unknown";
}

std::uint64_t content_hash(const CompositeObjective& obj) {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, "vropt1", 6);
  fnv_mix_u64(h, obj.loss() == LossKind::Logistic ? 1 : 2);
  fnv_mix_double(h, obj.reg().lambda1);
  fnv_mix_double(h, obj.reg().lambda2);
  fnv_mix_u64(h, obj.smooth_fold() ? 1 : 0);
  const SparseDataset& ds = obj.data();
  fnv_mix_u64(h, ds.size());
  fnv_mix_u64(h, ds.dim);
  fnv_mix_u64(h, ds.normalized ? 1 : 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& row = ds.rows[i];
    for (std::size_t k = 0; k < row.indices.size(); ++k) {
      fnv_mix_u64(h, row.indices[k]);
      fnv_mix_double(h, row.values[k]);
    }
    fnv_mix_double(h, obj.labels()[i]);
  }
  return h;
}

ReferenceSolution compute_reference(const CompositeObjective& obj, double tol,
                                    const std::string& cache_path, std::size_t max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("compute_reference: tol must be positive");
  const std::uint64_t hash = content_hash(obj);
  if (!cache_path.empty()) {
    if (auto cached = read_reference_cache(cache_path, hash)) return *cached;
  }

  const double L = obj.lipschitz().value;
  ProxGdResult pg = run_full_proxgd(obj, 1.0 / L, tol, max_iters);
  if (!pg.converged)
    throw std::runtime_error(
        "compute_reference: proximal gradient did not reach tol within " +
        std::to_string(max_iters) + " iterations; increase max_iters");

  OptimizerSpec refine;
  refine.algo = Algo::VrsgdI;
  refine.eta0 = 1.0 / (10.0 * L);
  refine.epochs = 100;
  refine.m = 0;
  refine.seed = 0x5eedULL;
  refine.update_mode =
      obj.reg().smooth() ? UpdateMode::SmoothGradient : UpdateMode::Proximal;
  refine.init = pg.x_star;
  const Trace t = run_vrsgd_sc(obj, refine);

  ReferenceSolution ref;
  ref.residual = pg.residual;
  if (!t.diverged && std::isfinite(t.final_objective) && t.final_objective < pg.f_star) {
    ref.x_star = t.final_point;
    ref.f_star = t.final_objective;
    ref.method = ReferenceSolution::Method::LongVrsgd;
  } else {
    ref.x_star = std::move(pg.x_star);
    ref.f_star = pg.f_star;
    ref.method = ReferenceSolution::Method::FullProxGd;
  }
  if (!cache_path.empty()) write_reference_cache(cache_path, hash, ref);
  return ref;
}

void write_reference_cache(const std::string& path, std::uint64_t hash,
                           const ReferenceSolution& ref) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write reference cache '" + path + "'");
  out << "vropt-fstar-cache 1\n";
  out << "hash " << hash << "\n";
  out << "method " << method_name(ref.method) << "\n";
  out << "f_star " << fmt17(ref.f_star) << "\n";
  out << "residual " << fmt17(ref.residual) << "\n";
  out << "dim " << ref.x_star.size() << "\n";
  for (double v : ref.x_star) out << "x " << fmt17(v) << "\n";
}

std::optional<ReferenceSolution> read_reference_cache(const std::string& path,
                                                      std::uint64_t hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string word;
  std::uint64_t file_hash = 0;
  ReferenceSolution ref;
  ref.method = ReferenceSolution::Method::File;
  if (!(in >> word) || word != "vropt-fstar-cache") return std::nullopt;
  int version = 0;
  if (!(in >> version) || version != 1) return std::nullopt;
  if (!(in >> word) || word != "hash" || !(in >> file_hash)) return std::nullopt;
  if (file_hash != hash) return std::nullopt;  // stale cache, force recompute
  std::string method_str;
  if (!(in >> word) || word != "method" || !(in >> method_str)) return std::nullopt;
  std::string num;
  if (!(in >> word) || word != "f_star" || !(in >> num)) return std::nullopt;
  ref.f_star = parse_double_strict(num, "f_star");
  if (!(in >> word) || word != "residual" || !(in >> num)) return std::nullopt;
  ref.residual = parse_double_strict(num, "residual");
  std::size_t dim = 0;
  if (!(in >> word) || word != "dim" || !(in >> dim)) return std::nullopt;
  ref.x_star.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    if (!(in >> word) || word != "x" || !(in >> num)) return std::nullopt;
    ref.x_star[j] = parse_double_strict(num, "x_star entry");
  }
  return ref;
}

Trace run_experiment(const CompositeObjective& obj, const OptimizerSpec& spec,
                     const ReferenceSolution& ref) {
  if (spec.epochs < 1) throw std::invalid_argument("run_experiment: empty trace (epochs < 1)");
  Trace t = run(obj, spec);
  for (auto& r : t.records) {
    r.gap = r.objective - ref.f_star;
    if (r.gap < 0.0 && r.gap >= -1e-10) r.gap = 0.0;
  }
  return t;
}

std::vector<Trace> sweep_learning_rates(const CompositeObjective& obj, const OptimizerSpec& base,
                                        const std::vector<double>& etas,
                                        const ReferenceSolution& ref, bool parallel) {
  if (etas.empty()) throw std::invalid_argument("sweep: etas must be nonempty");
  std::vector<Trace> out(etas.size());
  auto run_one = [&](std::size_t i) {
    OptimizerSpec spec = base;
    spec.eta0 = etas[i];
    spec.eta_is_auto = false;
    out[i] = run_experiment(obj, spec, ref);
  };
  if (!parallel || etas.size() == 1) {
    for (std::size_t i = 0; i < etas.size(); ++i) run_one(i);
    return out;
  }
  std::vector<std::thread> workers;
  workers.reserve(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) workers.emplace_back(run_one, i);
  for (auto& w : workers) w.join();
  return out;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "epoch,passes,wall_s,objective,gap\n";
  char buf[320];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.passes, r.wall_s,
                  r.objective, r.gap);
    os << buf;
  }
}

void write_trace_csv_file(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
  write_trace_csv(out, trace);
}

Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trace csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "epoch,passes,wall_s,objective,gap")
    throw std::runtime_error("trace csv: unexpected header '" + line + "'");
  Trace t;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    TraceRecord r;
    std::string_view rest = line;
    auto take = [&rest](const char* what) {
      const auto comma = rest.find(',');
      std::string_view tok = comma == std::string_view::npos ? rest : rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (tok.empty()) throw std::runtime_error(std::string("trace csv: missing ") + what);
      return tok;
    };
    const auto epoch_tok = take("epoch");
    std::size_t epoch = 0;
    auto [p, ec] = std::from_chars(epoch_tok.data(), epoch_tok.data() + epoch_tok.size(), epoch);
    if (ec != std::errc{} || p != epoch_tok.data() + epoch_tok.size())
      throw std::runtime_error("trace csv: malformed epoch");
    r.epoch = epoch;
    r.passes = parse_double_strict(take("passes"), "passes");
    r.wall_s = parse_double_strict(take("wall_s"), "wall_s");
    r.objective = parse_double_strict(take("objective"), "objective");
    r.gap = parse_double_strict(take("gap"), "gap");
    t.records.push_back(r);
  }
  return t;
}

Trace read_trace_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trace file '" + path + "'");
  return read_trace_csv(in);
}

std::string trace_filename(Algo algo, double eta, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", eta);
  return algo_name(algo) + "_" + buf + "_" + std::to_string(seed) + ".csv";
}

void write_variance_csv(std::ostream& os, const std::vector<VarianceRow>& rows) {
  os << "b,delta_b,empirical_mse,bound\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.b, r.delta_b, r.empirical_mse,
                  r.bound);
    os << buf;
  }
}

}  // namespace vropt
