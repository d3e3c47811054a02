#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vropt/harness.hpp"

namespace fs = std::filesystem;
using namespace vropt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataOptions {
  std::string data;
  bool normalize = true;
  std::size_t dim_override = 0;
};

struct ObjectiveOptions {
  std::string loss = "logistic";
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::string mode = "auto";  // smooth | prox | auto
  double l_override = 0.0;    // 0 = analytic
};

struct RunOptions {
  std::string algo = "vrsgd-i";
  std::string eta = "auto";
  double alpha = 1.0;
  std::string m = "2n";
  std::size_t epochs = 30;
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  std::string init_file;
  std::string fstar_cache;
  double ref_tol = 1e-12;
  std::size_t ref_max_iters = 1000000;
};

double parse_double_or_fail(std::string_view tok, const std::string& what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw ConfigError("malformed " + what + " '" + std::string(tok) + "'");
  return v;
}

std::size_t parse_size_or_fail(std::string_view tok, const std::string& what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw ConfigError("malformed " + what + " '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

// `synth:<kind>,n=...,d=...[,noise=...][,seed=...]`; kind is ridge, lasso,
// regression (all regression labels) or logistic (labels in {-1,+1}).
SparseDataset make_synth(const std::string& spec) {
  if (spec.rfind("synth:", 0) != 0) throw ConfigError("synth spec must start with 'synth:'");
  const auto body = spec.substr(std::string("synth:").size());
  const auto parts = split(body, ',');
  if (parts.empty() || parts[0].empty()) throw ConfigError("synth spec needs a kind");
  const std::string kind = parts[0];
  std::size_t n = 0, d = 0;
  double noise = 0.1;
  std::uint64_t seed = 0;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos)
      throw ConfigError("synth spec entry '" + parts[i] + "' is not key=value");
    const std::string key = parts[i].substr(0, eq);
    const std::string val = parts[i].substr(eq + 1);
    if (key == "n")
      n = parse_size_or_fail(val, "synth n");
    else if (key == "d")
      d = parse_size_or_fail(val, "synth d");
    else if (key == "noise")
      noise = parse_double_or_fail(val, "synth noise");
    else if (key == "seed")
      seed = parse_size_or_fail(val, "synth seed");
    else
      throw ConfigError("unknown synth key '" + key + "'");
  }
  if (n == 0 || d == 0) throw ConfigError("synth spec needs n >= 1 and d >= 1");
  if (kind == "ridge" || kind == "lasso" || kind == "regression")
    return synth_regression(n, d, noise, seed);
  if (kind == "logistic") return synth_classification(n, d, noise, seed);
  throw ConfigError("unknown synth kind '" + kind + "'");
}

std::shared_ptr<const SparseDataset> load_data(const DataOptions& opt) {
  SparseDataset ds;
  if (opt.data.rfind("synth:", 0) == 0) {
    ds = make_synth(opt.data);
  } else {
    try {
      ds = load_libsvm_file(opt.data);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (opt.normalize) ds = normalize_rows(std::move(ds));
  }
  if (opt.dim_override != 0) {
    if (opt.dim_override < ds.dim)
      throw ConfigError("--dim may only raise the dimension (dataset has " +
                        std::to_string(ds.dim) + ")");
    ds.dim = opt.dim_override;
  }
  if (ds.zero_rows > 0)
    std::cerr << "warning: " << ds.zero_rows << " all-zero row(s) kept unnormalized\n";
  return std::make_shared<const SparseDataset>(std::move(ds));
}

UpdateMode resolve_mode(const ObjectiveOptions& oopt, Algo algo, bool& fold) {
  UpdateMode mode;
  if (oopt.mode == "smooth") {
    if (oopt.lambda2 != 0.0) throw ConfigError("--mode smooth requires lambda2 == 0");
    mode = UpdateMode::SmoothGradient;
  } else if (oopt.mode == "prox") {
    mode = UpdateMode::Proximal;
  } else if (oopt.mode == "auto") {
    switch (algo) {
      case Algo::ProxSvrg:
      case Algo::KatyushaII:
      case Algo::FullProxGd:
        mode = UpdateMode::Proximal;
        break;
      case Algo::KatyushaI:
        if (oopt.lambda2 != 0.0) throw ConfigError("katyusha-i requires lambda2 == 0");
        mode = UpdateMode::SmoothGradient;
        break;
      default:
        mode = oopt.lambda2 == 0.0 ? UpdateMode::SmoothGradient : UpdateMode::Proximal;
        break;
    }
  } else {
    throw ConfigError("--mode must be smooth, prox or auto");
  }
  // katyusha-i keeps g explicit in its gradient updates
  fold = mode == UpdateMode::SmoothGradient && algo != Algo::KatyushaI;
  return mode;
}

CompositeObjective build_objective(std::shared_ptr<const SparseDataset> data,
                                   const ObjectiveOptions& oopt, bool fold) {
  LossKind loss;
  if (oopt.loss == "logistic")
    loss = LossKind::Logistic;
  else if (oopt.loss == "squared")
    loss = LossKind::Squared;
  else
    throw ConfigError("--loss must be logistic or squared");
  if (oopt.lambda1 < 0.0 || oopt.lambda2 < 0.0)
    throw ConfigError("regularization weights must be >= 0");
  CompositeObjective obj(std::move(data), loss, Regularizer{oopt.lambda1, oopt.lambda2}, fold);
  if (obj.remapped_labels() > 0)
    std::cerr << "warning: remapped " << obj.remapped_labels() << " label(s) from 0/1 to -1/+1\n";
  if (oopt.l_override != 0.0) obj.set_lipschitz_override(oopt.l_override);
  if (const char* env = std::getenv("VROPT_THREADS")) {
    const auto chunks = parse_size_or_fail(env, "VROPT_THREADS");
    obj.set_eval_chunks(static_cast<unsigned>(chunks == 0 ? 1 : chunks));
  }
  return obj;
}

// Accepts a plain number, `<c>/L`, or `auto`.
double resolve_eta(const std::string& tok, Algo algo, double L, bool& is_auto) {
  is_auto = false;
  if (tok == "auto") {
    switch (algo) {
      case Algo::VrsgdI:
      case Algo::VrsgdII:
        return 3.0 / (7.0 * L);
      case Algo::SvrgI:
      case Algo::SvrgII:
      case Algo::ProxSvrg:
      case Algo::Sgd:
        return 1.0 / (10.0 * L);
      case Algo::KatyushaI:
      case Algo::KatyushaII:
        is_auto = true;  // per-epoch 1/(3 w1 L)
        return 0.0;
      case Algo::FullProxGd:
        return 1.0 / L;
    }
  }
  double eta;
  if (tok.size() > 2 && tok.substr(tok.size() - 2) == "/L")
    eta = parse_double_or_fail(tok.substr(0, tok.size() - 2), "eta") / L;
  else
    eta = parse_double_or_fail(tok, "eta");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  return eta;
}

std::size_t resolve_m(const std::string& tok, std::size_t n) {
  if (tok == "2n") return 2 * n;
  const std::size_t m = parse_size_or_fail(tok, "m");
  if (m == 0) throw ConfigError("m must be >= 1");
  return m;
}

DenseVec read_init_file(const std::string& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open init file '" + path + "'");
  DenseVec x;
  std::string tok;
  while (in >> tok) x.push_back(parse_double_or_fail(tok, "init value"));
  if (x.size() != d)
    throw ConfigError("init file has " + std::to_string(x.size()) + " values, expected " +
                      std::to_string(d));
  return x;
}

OptimizerSpec build_spec(const RunOptions& ropt, Algo algo, const CompositeObjective& obj,
                         UpdateMode mode) {
  OptimizerSpec spec;
  spec.algo = algo;
  spec.update_mode = mode;
  spec.alpha = ropt.alpha;
  spec.fixed_lr = ropt.alpha >= 1.0;
  spec.m = resolve_m(ropt.m, obj.n());
  spec.epochs = ropt.epochs;
  spec.batch = ropt.batch;
  spec.seed = ropt.seed;
  spec.eta0 = resolve_eta(ropt.eta, algo, obj.lipschitz().value, spec.eta_is_auto);
  if (!ropt.init_file.empty()) spec.init = read_init_file(ropt.init_file, obj.dim());
  return spec;
}

Algo parse_algo(const std::string& name) {
  const auto a = algo_from_name(name);
  if (!a) throw ConfigError("unknown algorithm '" + name + "'");
  return *a;
}

void add_data_options(CLI::App* cmd, DataOptions& opt) {
  cmd->add_option("--data,-d", opt.data,
                  "LIBSVM file or synth:<kind>,n=..,d=..[,noise=..][,seed=..]")
      ->required();
  cmd->add_flag("!--no-normalize", opt.normalize,
                "Skip unit-length row normalization of file data");
  cmd->add_option("--dim", opt.dim_override, "Raise the feature dimension (never lowers it)");
}

void add_objective_options(CLI::App* cmd, ObjectiveOptions& opt) {
  cmd->add_option("--loss", opt.loss, "Loss: logistic | squared")->capture_default_str();
  cmd->add_option("--lambda1", opt.lambda1, "L2 weight")->capture_default_str();
  cmd->add_option("--lambda2", opt.lambda2, "L1 weight")->capture_default_str();
  cmd->add_option("--mode", opt.mode, "Update rule: smooth | prox | auto")->capture_default_str();
  cmd->add_option("--L", opt.l_override, "Override the Lipschitz constant");
}

void add_run_options(CLI::App* cmd, RunOptions& opt, bool with_algo_eta = true) {
  if (with_algo_eta) {
    cmd->add_option("--algo", opt.algo,
                    "vrsgd-i | vrsgd-ii | svrg-i | svrg-ii | prox-svrg | katyusha-i | "
                    "katyusha-ii | sgd | full-proxgd")
        ->capture_default_str();
    cmd->add_option("--eta", opt.eta, "Step size: number, <c>/L, or auto")->capture_default_str();
    cmd->add_option("--alpha", opt.alpha, "Step-size schedule constant in (0,1]; 1 = fixed")
        ->capture_default_str();
    cmd->add_option("--m", opt.m, "Inner steps per epoch (number or 2n)")->capture_default_str();
    cmd->add_option("--epochs", opt.epochs, "Number of epochs S")->capture_default_str();
    cmd->add_option("--batch", opt.batch, "Mini-batch size b")->capture_default_str();
    cmd->add_option("--init-file", opt.init_file, "Initial point, one value per line (default 0)");
  }
  cmd->add_option("--seed", opt.seed, "Sampling seed")->capture_default_str();
  cmd->add_option("--fstar-cache", opt.fstar_cache, "Reference-solution cache file");
  cmd->add_option("--ref-tol", opt.ref_tol, "Reference prox-gradient mapping tolerance")
      ->capture_default_str();
  cmd->add_option("--ref-max-iters", opt.ref_max_iters, "Reference solver iteration cap")
      ->capture_default_str();
}

int cmd_run(const DataOptions& dopt, const ObjectiveOptions& oopt, const RunOptions& ropt,
            const std::string& out) {
  const Algo algo = parse_algo(ropt.algo);
  bool fold = false;
  const UpdateMode mode = resolve_mode(oopt, algo, fold);
  const CompositeObjective obj = build_objective(load_data(dopt), oopt, fold);
  const OptimizerSpec spec = build_spec(ropt, algo, obj, mode);
  const ReferenceSolution ref =
      compute_reference(obj, ropt.ref_tol, ropt.fstar_cache, ropt.ref_max_iters);

  const Trace trace = run_experiment(obj, spec, ref);
  write_trace_csv_file(out, trace);
  std::printf("algo=%s eta=%.17g L=%.17g f_star=%.17g method=%s records=%zu out=%s\n",
              algo_name(algo).c_str(), spec.eta0, obj.lipschitz().value, ref.f_star,
              method_name(ref.method).c_str(), trace.records.size(), out.c_str());
  if (trace.diverged) {
    std::fprintf(stderr, "error: %s diverged at epoch %zu (trace written)\n",
                 algo_name(algo).c_str(), trace.diverged_epoch);
    return kExitDiverged;
  }
  if (!trace.records.empty())
    std::printf("final objective=%.17g gap=%.17g\n", trace.final_objective,
                trace.records.back().gap);
  return kExitOk;
}

int cmd_sweep(const DataOptions& dopt, const ObjectiveOptions& oopt, const RunOptions& ropt,
              const std::string& etas_arg, const std::string& out_dir) {
  const Algo algo = parse_algo(ropt.algo);
  bool fold = false;
  const UpdateMode mode = resolve_mode(oopt, algo, fold);
  const CompositeObjective obj = build_objective(load_data(dopt), oopt, fold);
  const OptimizerSpec base = build_spec(ropt, algo, obj, mode);

  std::vector<double> etas;
  const double L = obj.lipschitz().value;
  for (const auto& tok : split(etas_arg, ',')) {
    bool dummy = false;
    etas.push_back(resolve_eta(tok, algo, L, dummy));
  }

  const ReferenceSolution ref =
      compute_reference(obj, ropt.ref_tol, ropt.fstar_cache, ropt.ref_max_iters);
  const auto traces = sweep_learning_rates(obj, base, etas, ref);

  fs::create_directories(out_dir);
  bool any_diverged = false;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto path = fs::path(out_dir) / trace_filename(algo, etas[i], base.seed);
    write_trace_csv_file(path.string(), traces[i]);
    std::printf("eta=%.17g diverged=%d records=%zu file=%s\n", etas[i],
                traces[i].diverged ? 1 : 0, traces[i].records.size(), path.string().c_str());
    any_diverged |= traces[i].diverged;
  }
  return any_diverged ? kExitDiverged : kExitOk;
}

int cmd_variance(const DataOptions& dopt, const ObjectiveOptions& oopt, const RunOptions& ropt,
                 const std::string& b_arg, const std::string& out) {
  bool fold = false;
  resolve_mode(oopt, Algo::VrsgdI, fold);
  const CompositeObjective obj = build_objective(load_data(dopt), oopt, fold);
  const std::size_t n = obj.n();

  std::vector<std::size_t> bs;
  for (const auto& tok : split(b_arg, ',')) {
    if (tok == "n")
      bs.push_back(n);
    else
      bs.push_back(parse_size_or_fail(tok, "batch size"));
  }

  const ReferenceSolution ref =
      compute_reference(obj, ropt.ref_tol, ropt.fstar_cache, ropt.ref_max_iters);

  // Seeded diagnostic points with ||x|| around 1.
  std::mt19937_64 rng(ropt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sc = 1.0 / std::sqrt(static_cast<double>(obj.dim()));
  DenseVec x_tilde(obj.dim()), x(obj.dim());
  for (double& v : x_tilde) v = sc * gauss(rng);
  for (double& v : x) v = sc * gauss(rng);
  const SnapshotContext ctx = make_snapshot(obj, x_tilde);

  std::vector<VarianceRow> rows;
  for (std::size_t b : bs) {
    const auto diag = variance_diag(obj, ctx, x, b, ref.f_star, ropt.seed);
    rows.push_back({b, diag.delta_b, diag.empirical_mse, diag.bound});
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + out + "'");
  write_variance_csv(os, rows);
  std::printf("variance table with %zu row(s) written to %s\n", rows.size(), out.c_str());
  return kExitOk;
}

int cmd_reference(const DataOptions& dopt, const ObjectiveOptions& oopt, const RunOptions& ropt,
                  const std::string& out) {
  bool fold = false;
  resolve_mode(oopt, Algo::FullProxGd, fold);
  const CompositeObjective obj = build_objective(load_data(dopt), oopt, fold);
  const ReferenceSolution ref = compute_reference(obj, ropt.ref_tol, out, ropt.ref_max_iters);
  std::printf("f_star=%.17g residual=%.17g method=%s cache=%s\n", ref.f_star, ref.residual,
              method_name(ref.method).c_str(), out.c_str());
  return kExitOk;
}

int cmd_synth(const std::string& spec, const std::string& out) {
  const SparseDataset ds = make_synth(spec);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + out + "'");
  os << to_libsvm(ds);
  std::printf("n=%zu d=%zu normalized=%d file=%s\n", ds.size(), ds.dim, ds.normalized ? 1 : 0,
              out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-reduced stochastic optimization benchmark"};
  app.require_subcommand(1);

  DataOptions dopt;
  ObjectiveOptions oopt;
  RunOptions ropt;
  std::string out = "trace.csv";
  std::string etas_arg;
  std::string b_arg = "1";
  std::string synth_spec;

  auto* run_cmd = app.add_subcommand("run", "Run one optimizer and write its trace CSV");
  add_data_options(run_cmd, dopt);
  add_objective_options(run_cmd, oopt);
  add_run_options(run_cmd, ropt);
  run_cmd->add_option("--out", out, "Trace CSV path")->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one optimizer across several step sizes");
  add_data_options(sweep_cmd, dopt);
  add_objective_options(sweep_cmd, oopt);
  add_run_options(sweep_cmd, ropt);
  sweep_cmd->add_option("--etas", etas_arg, "Comma list of step sizes (number or <c>/L)")
      ->required();
  sweep_cmd->add_option("--out", out, "Output directory for per-eta trace files")->required();

  auto* variance_cmd = app.add_subcommand("variance", "Estimator variance diagnostics as CSV");
  add_data_options(variance_cmd, dopt);
  add_objective_options(variance_cmd, oopt);
  add_run_options(variance_cmd, ropt, /*with_algo_eta=*/false);
  variance_cmd->add_option("--b", b_arg, "Comma list of batch sizes; `n` means the full batch")
      ->capture_default_str();
  variance_cmd->add_option("--out", out, "Variance CSV path")->capture_default_str();

  auto* reference_cmd = app.add_subcommand("reference", "Compute and cache a reference optimum");
  add_data_options(reference_cmd, dopt);
  add_objective_options(reference_cmd, oopt);
  add_run_options(reference_cmd, ropt, /*with_algo_eta=*/false);
  reference_cmd->add_option("--out", out, "Cache file path")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset as LIBSVM text");
  synth_cmd->add_option("--spec", synth_spec, "synth:<kind>,n=..,d=..[,noise=..][,seed=..]")
      ->required();
  synth_cmd->add_option("--out", out, "Output LIBSVM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(dopt, oopt, ropt, out);
    if (sweep_cmd->parsed()) return cmd_sweep(dopt, oopt, ropt, etas_arg, out);
    if (variance_cmd->parsed()) return cmd_variance(dopt, oopt, ropt, b_arg, out);
    if (reference_cmd->parsed()) return cmd_reference(dopt, oopt, ropt, out);
    if (synth_cmd->parsed()) return cmd_synth(synth_spec, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
