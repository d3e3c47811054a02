#include "vropt/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace vropt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class IndexStream {
 public:
  IndexStream(std::uint64_t seed, const std::vector<std::size_t>& pinned)
      : rng_(seed), pinned_(pinned) {}

  std::size_t next(std::size_t n) {
    if (!pinned_.empty()) {
      if (pos_ >= pinned_.size()) throw std::logic_error("pinned index stream exhausted");
      const std::size_t i = pinned_[pos_++];
      if (i >= n) throw std::logic_error("pinned index out of range");
      return i;
    }
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  // b distinct indices, uniform over subsets (Floyd's sampling).
  void batch(std::size_t n, std::size_t b, std::vector<std::size_t>& out) {
    out.clear();
    if (!pinned_.empty()) {
      for (std::size_t k = 0; k < b; ++k) out.push_back(next(n));
      return;
    }
    if (b == n) {
      out.resize(n);
      std::iota(out.begin(), out.end(), std::size_t{0});
      return;
    }
    if (b > 48) {
      std::unordered_set<std::size_t> seen;
      for (std::size_t j = n - b; j < n; ++j) {
        const std::size_t r = std::uniform_int_distribution<std::size_t>(0, j)(rng_);
        out.push_back(seen.insert(r).second ? r : (seen.insert(j), j));
      }
      return;
    }
    for (std::size_t j = n - b; j < n; ++j) {
      const std::size_t r = std::uniform_int_distribution<std::size_t>(0, j)(rng_);
      bool seen = false;
      for (std::size_t v : out)
        if (v == r) {
          seen = true;
          break;
        }
      out.push_back(seen ? j : r);
    }
  }

 private:
  std::mt19937_64 rng_;
  const std::vector<std::size_t>& pinned_;
  std::size_t pos_ = 0;
};

void common_validate(const CompositeObjective& obj, const OptimizerSpec& spec,
                     bool eta_required = true) {
  if (spec.epochs < 1) throw std::invalid_argument("optimizer: epochs must be >= 1");
  if (spec.batch < 1 || spec.batch > obj.n())
    throw std::invalid_argument("optimizer: batch size must be in [1, n]");
  if (eta_required && !(std::isfinite(spec.eta0) && spec.eta0 > 0.0))
    throw std::invalid_argument("optimizer: eta0 must be finite and positive");
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0))
    throw std::invalid_argument("optimizer: alpha must be in (0, 1]");
  if (spec.update_mode == UpdateMode::SmoothGradient && !obj.reg().smooth())
    throw std::invalid_argument("optimizer: smooth update mode requires lambda2 == 0");
  if (!spec.init.empty() && spec.init.size() != obj.dim())
    throw std::invalid_argument("optimizer: init point has wrong dimension");
}

DenseVec initial_point(const CompositeObjective& obj, const OptimizerSpec& spec) {
  return spec.init.empty() ? DenseVec(obj.dim(), 0.0) : spec.init;
}

double divergence_guard(double f_init) {
  return f_init > 0.0 ? 1e10 * f_init : std::numeric_limits<double>::infinity();
}

// x <- x - eta [v + grad g(x)]; with the L2 term folded into f the g-gradient
// contribution is already inside v.
void smooth_step(const CompositeObjective& obj, double eta, const DenseVec& v, DenseVec& x) {
  const double g1 = obj.smooth_fold() ? 0.0 : obj.reg().lambda1;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] -= eta * (v[j] + g1 * x[j]);
}

// x <- prox_{eta,g}(x - eta v)
void prox_step(const CompositeObjective& obj, double eta, const DenseVec& v, DenseVec& x,
               DenseVec& tmp) {
  tmp.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) tmp[j] = x[j] - eta * v[j];
  prox_into(obj.effective_reg(), eta, tmp, x);
}

struct DriverCfg {
  SnapshotRule snap = SnapshotRule::LastIterate;
  StartRule start = StartRule::Snapshot;
  bool schedule = false;       // per-epoch eta growth
  bool output_select = false;  // pick the better of x_tilde^S and the snapshot mean
};

Trace epoch_driver(const CompositeObjective& obj, const OptimizerSpec& spec,
                   const DriverCfg& cfg) {
  common_validate(obj, spec);
  const std::size_t n = obj.n();
  const std::size_t d = obj.dim();
  const std::size_t m = spec.m == 0 ? 2 * n : spec.m;
  const std::size_t b = spec.batch;
  if (m < 1) throw std::invalid_argument("optimizer: m must be >= 1");
  if (cfg.snap == SnapshotRule::TailAverage && m < 2)
    throw std::invalid_argument("optimizer: tail-average snapshot requires m >= 2");

  Trace tr;
  DenseVec x = initial_point(obj, spec);
  DenseVec x_tilde = x;
  DenseVec v(d), tmp(d), snap_acc(d, 0.0), snap_sum(d, 0.0);
  std::vector<std::size_t> batch_idx;
  IndexStream stream(spec.seed, spec.pinned_indices);

  const double guard = divergence_guard(obj.value(x));
  double passes = 0.0;
  const auto t0 = Clock::now();

  for (std::size_t s = 1; s <= spec.epochs; ++s) {
    const SnapshotContext ctx = make_snapshot(obj, x_tilde);
    const double eta =
        cfg.schedule && !spec.fixed_lr ? vrsgd_step_size(spec.eta0, spec.alpha, s) : spec.eta0;

    std::fill(snap_acc.begin(), snap_acc.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      if (b == 1) {
        svrg_estimate_into(obj, ctx, stream.next(n), x, v);
      } else {
        stream.batch(n, b, batch_idx);
        minibatch_estimate_into(obj, ctx, batch_idx, x, v);
      }
      if (spec.update_mode == UpdateMode::SmoothGradient)
        smooth_step(obj, eta, v, x);
      else
        prox_step(obj, eta, v, x, tmp);

      if (cfg.snap == SnapshotRule::FullAverage ||
          (cfg.snap == SnapshotRule::TailAverage && k + 1 <= m - 1))
        axpy(1.0, x, snap_acc);
    }

    switch (cfg.snap) {
      case SnapshotRule::LastIterate:
        x_tilde = x;
        break;
      case SnapshotRule::FullAverage:
        for (std::size_t j = 0; j < d; ++j) x_tilde[j] = snap_acc[j] / static_cast<double>(m);
        break;
      case SnapshotRule::TailAverage:
        for (std::size_t j = 0; j < d; ++j) x_tilde[j] = snap_acc[j] / static_cast<double>(m - 1);
        break;
    }
    if (cfg.start == StartRule::Snapshot) x = x_tilde;

    passes += 1.0 + static_cast<double>(m) * static_cast<double>(b) / static_cast<double>(n);
    const double fs = obj.value(x_tilde);
    if (!std::isfinite(fs) || fs > guard) {
      tr.diverged = true;
      tr.diverged_epoch = s;
      break;
    }
    tr.records.push_back({s, passes, elapsed_s(t0), fs,
                          std::numeric_limits<double>::quiet_NaN()});
    if (cfg.output_select) axpy(1.0, x_tilde, snap_sum);
  }

  if (cfg.output_select && !tr.diverged && !tr.records.empty()) {
    DenseVec xbar(d);
    const double inv_s = 1.0 / static_cast<double>(spec.epochs);
    for (std::size_t j = 0; j < d; ++j) xbar[j] = snap_sum[j] * inv_s;
    const double f_last = tr.records.back().objective;
    const double f_mean = obj.value(xbar);
    tr.candidate_last = f_last;
    tr.candidate_mean = f_mean;
    if (f_last <= f_mean) {
      tr.final_point = x_tilde;
      tr.final_objective = f_last;
    } else {
      tr.final_point = std::move(xbar);
      tr.final_objective = f_mean;
    }
  } else {
    tr.final_point = x_tilde;
    if (!tr.records.empty()) tr.final_objective = tr.records.back().objective;
  }
  return tr;
}

}  // namespace

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::SvrgI: return "svrg-i";
    case Algo::SvrgII: return "svrg-ii";
    case Algo::ProxSvrg: return "prox-svrg";
    case Algo::VrsgdI: return "vrsgd-i";
    case Algo::VrsgdII: return "vrsgd-ii";
    case Algo::KatyushaI: return "katyusha-i";
    case Algo::KatyushaII: return "katyusha-ii";
    case Algo::Sgd: return "sgd";
    case Algo::FullProxGd: return "full-proxgd";
  }
  return "unknown";
}

std::optional<Algo> algo_from_name(std::string_view name) {
  for (Algo a : {Algo::SvrgI, Algo::SvrgII, Algo::ProxSvrg, Algo::VrsgdI, Algo::VrsgdII,
                 Algo::KatyushaI, Algo::KatyushaII, Algo::Sgd, Algo::FullProxGd})
    if (algo_name(a) == name) return a;
  return std::nullopt;
}

double vrsgd_step_size(double eta0, double alpha, std::size_t s) {
  return eta0 / std::max(alpha, 2.0 / (static_cast<double>(s) + 1.0));
}

double sgd_step_size(double eta0, std::size_t k, std::size_t n, std::size_t b) {
  const double pass = std::floor(static_cast<double>(k) * static_cast<double>(b) /
                                 static_cast<double>(n));
  return eta0 / (1.0 + pass);
}

double katyusha_combine(double w1, double w2, double y, double x_tilde, double z) {
  return w1 * y + w2 * x_tilde + (1.0 - w1 - w2) * z;
}

double katyusha_w1(std::size_t m, double mu, double L, std::size_t epoch) {
  if (mu > 0.0) return std::min(std::sqrt(static_cast<double>(m) * mu / (3.0 * L)), 0.5);
  return 2.0 / (static_cast<double>(epoch) + 4.0);
}

Trace run_vrsgd_sc(const CompositeObjective& obj, const OptimizerSpec& spec) {
  if (!spec.fixed_lr)
    throw std::invalid_argument("vrsgd-sc: requires a fixed learning rate (fixed_lr = true)");
  DriverCfg cfg;
  cfg.snap = spec.algo == Algo::VrsgdII ? SnapshotRule::FullAverage : SnapshotRule::TailAverage;
  cfg.start = StartRule::LastIterate;
  cfg.schedule = false;
  cfg.output_select = true;
  return epoch_driver(obj, spec, cfg);
}

Trace run_vrsgd_nsc(const CompositeObjective& obj, const OptimizerSpec& spec) {
  DriverCfg cfg;
  cfg.snap = spec.algo == Algo::VrsgdII ? SnapshotRule::FullAverage : SnapshotRule::TailAverage;
  cfg.start = StartRule::LastIterate;
  cfg.schedule = true;
  cfg.output_select = true;
  return epoch_driver(obj, spec, cfg);
}

Trace run_svrg(const CompositeObjective& obj, const OptimizerSpec& spec) {
  DriverCfg cfg;
  cfg.start = StartRule::Snapshot;
  OptimizerSpec s = spec;
  switch (spec.algo) {
    case Algo::SvrgI:
      cfg.snap = SnapshotRule::LastIterate;
      break;
    case Algo::SvrgII:
      cfg.snap = SnapshotRule::FullAverage;
      break;
    case Algo::ProxSvrg:
      cfg.snap = SnapshotRule::FullAverage;
      s.update_mode = UpdateMode::Proximal;
      break;
    default:
      throw std::invalid_argument("run_svrg: unsupported algorithm");
  }
  return epoch_driver(obj, s, cfg);
}

Trace run_katyusha(const CompositeObjective& obj, const OptimizerSpec& spec) {
  common_validate(obj, spec, /*eta_required=*/!spec.eta_is_auto);
  const bool smooth_variant = spec.algo == Algo::KatyushaI;
  if (smooth_variant && !obj.reg().smooth())
    throw std::invalid_argument("katyusha-i: gradient updates require lambda2 == 0");

  const std::size_t n = obj.n();
  const std::size_t d = obj.dim();
  const std::size_t m = spec.m == 0 ? 2 * n : spec.m;
  const std::size_t b = spec.batch;
  const double L = obj.lipschitz().value;
  const double mu = obj.reg().lambda1;
  const double w2 = 0.5;
  const double g1 = obj.smooth_fold() ? 0.0 : obj.reg().lambda1;

  Trace tr;
  DenseVec x_tilde = initial_point(obj, spec);
  DenseVec y = x_tilde, z = x_tilde;
  DenseVec xk(d), v(d), tmp(d), z_acc(d);
  std::vector<std::size_t> batch_idx;
  IndexStream stream(spec.seed, spec.pinned_indices);

  const double guard = divergence_guard(obj.value(x_tilde));
  double passes = 0.0;
  const auto t0 = Clock::now();

  for (std::size_t s = 1; s <= spec.epochs; ++s) {
    const double w1 = katyusha_w1(m, mu, L, s);
    if (w1 + w2 > 1.0)
      throw std::invalid_argument("katyusha: momentum weights w1 + w2 exceed 1");
    const double eta = spec.eta_is_auto ? 1.0 / (3.0 * w1 * L) : spec.eta0;

    const SnapshotContext ctx = make_snapshot(obj, x_tilde);
    std::fill(z_acc.begin(), z_acc.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < d; ++j)
        xk[j] = katyusha_combine(w1, w2, y[j], x_tilde[j], z[j]);
      if (b == 1) {
        svrg_estimate_into(obj, ctx, stream.next(n), xk, v);
      } else {
        stream.batch(n, b, batch_idx);
        minibatch_estimate_into(obj, ctx, batch_idx, xk, v);
      }
      if (smooth_variant) {
        for (std::size_t j = 0; j < d; ++j) {
          const double gv = v[j] + g1 * xk[j];
          y[j] -= eta * gv;
          z[j] = xk[j] - gv / (3.0 * L);
        }
      } else {
        const Regularizer geff = obj.effective_reg();
        for (std::size_t j = 0; j < d; ++j) tmp[j] = y[j] - eta * v[j];
        prox_into(geff, eta, tmp, y);
        for (std::size_t j = 0; j < d; ++j) tmp[j] = xk[j] - v[j] / (3.0 * L);
        prox_into(geff, 1.0 / (3.0 * L), tmp, z);
      }
      // snapshot from the short-step sequence; averaging the long-step
      // (mirror) iterates is unstable at eta = 1/(3 w1 L)
      axpy(1.0, z, z_acc);
    }
    for (std::size_t j = 0; j < d; ++j) x_tilde[j] = z_acc[j] / static_cast<double>(m);

    passes += 1.0 + static_cast<double>(m) * static_cast<double>(b) / static_cast<double>(n);
    const double fs = obj.value(x_tilde);
    if (!std::isfinite(fs) || fs > guard) {
      tr.diverged = true;
      tr.diverged_epoch = s;
      break;
    }
    tr.records.push_back({s, passes, elapsed_s(t0), fs,
                          std::numeric_limits<double>::quiet_NaN()});
  }

  tr.final_point = x_tilde;
  if (!tr.records.empty() && !tr.diverged) tr.final_objective = tr.records.back().objective;
  return tr;
}

Trace run_sgd(const CompositeObjective& obj, const OptimizerSpec& spec) {
  common_validate(obj, spec);
  const std::size_t n = obj.n();
  const std::size_t d = obj.dim();
  const std::size_t m = spec.m == 0 ? 2 * n : spec.m;
  const std::size_t b = spec.batch;
  const double l1 = obj.reg().lambda1;

  Trace tr;
  DenseVec x = initial_point(obj, spec);
  DenseVec v(d), tmp(d);
  std::vector<std::size_t> batch_idx;
  IndexStream stream(spec.seed, spec.pinned_indices);

  const double guard = divergence_guard(obj.value(x));
  double passes = 0.0;
  std::size_t step = 0;
  const auto t0 = Clock::now();

  for (std::size_t s = 1; s <= spec.epochs; ++s) {
    for (std::size_t k = 0; k < m; ++k) {
      v.assign(d, 0.0);
      if (b == 1) {
        const std::size_t i = stream.next(n);
        obj.data().rows[i].add_scaled_to(obj.loss_core(i, obj.margin(i, x)), v);
      } else {
        stream.batch(n, b, batch_idx);
        const double inv_b = 1.0 / static_cast<double>(b);
        for (std::size_t i : batch_idx)
          obj.data().rows[i].add_scaled_to(inv_b * obj.loss_core(i, obj.margin(i, x)), v);
      }
      if (obj.smooth_fold()) axpy(l1, x, v);
      const double eta = sgd_step_size(spec.eta0, step, n, b);
      if (spec.update_mode == UpdateMode::SmoothGradient)
        smooth_step(obj, eta, v, x);
      else
        prox_step(obj, eta, v, x, tmp);
      ++step;
    }
    passes += static_cast<double>(m) * static_cast<double>(b) / static_cast<double>(n);
    const double fs = obj.value(x);
    if (!std::isfinite(fs) || fs > guard) {
      tr.diverged = true;
      tr.diverged_epoch = s;
      break;
    }
    tr.records.push_back({s, passes, elapsed_s(t0), fs,
                          std::numeric_limits<double>::quiet_NaN()});
  }

  tr.final_point = x;
  if (!tr.records.empty() && !tr.diverged) tr.final_objective = tr.records.back().objective;
  return tr;
}

ProxGdResult run_full_proxgd(const CompositeObjective& obj, double eta, double tol,
                             std::size_t max_iters, DenseVec init) {
  if (!(std::isfinite(eta) && eta > 0.0))
    throw std::invalid_argument("full_proxgd: eta must be finite and positive");
  if (!(tol >= 0.0)) throw std::invalid_argument("full_proxgd: tol must be >= 0");
  const std::size_t d = obj.dim();
  if (!init.empty() && init.size() != d)
    throw std::invalid_argument("full_proxgd: init point has wrong dimension");

  ProxGdResult res;
  const Regularizer geff = obj.effective_reg();
  DenseVec x = init.empty() ? DenseVec(d, 0.0) : std::move(init);
  DenseVec g(d), xn(d), tmp(d);
  for (std::size_t it = 1; it <= max_iters; ++it) {
    obj.full_grad_into(x, g);
    for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] - eta * g[j];
    prox_into(geff, eta, tmp, xn);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double dj = x[j] - xn[j];
      sq += dj * dj;
    }
    res.residual = std::sqrt(sq) / eta;
    x.swap(xn);
    res.iterations = it;
    if (res.residual <= tol) {
      res.converged = true;
      break;
    }
  }
  res.f_star = obj.value(x);
  res.x_star = std::move(x);
  return res;
}

Trace run_proxgd_trace(const CompositeObjective& obj, const OptimizerSpec& spec) {
  common_validate(obj, spec);
  const std::size_t d = obj.dim();
  Trace tr;
  const Regularizer geff = obj.effective_reg();
  DenseVec x = initial_point(obj, spec);
  DenseVec g(d), xn(d), tmp(d);
  const double guard = divergence_guard(obj.value(x));
  double passes = 0.0;
  const auto t0 = Clock::now();
  for (std::size_t it = 1; it <= spec.epochs; ++it) {
    obj.full_grad_into(x, g);
    for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] - spec.eta0 * g[j];
    prox_into(geff, spec.eta0, tmp, xn);
    x.swap(xn);
    passes += 1.0;
    const double fs = obj.value(x);
    if (!std::isfinite(fs) || fs > guard) {
      tr.diverged = true;
      tr.diverged_epoch = it;
      break;
    }
    tr.records.push_back({it, passes, elapsed_s(t0), fs,
                          std::numeric_limits<double>::quiet_NaN()});
  }
  tr.final_point = x;
  if (!tr.records.empty() && !tr.diverged) tr.final_objective = tr.records.back().objective;
  return tr;
}

Trace run(const CompositeObjective& obj, const OptimizerSpec& spec) {
  switch (spec.algo) {
    case Algo::SvrgI:
    case Algo::SvrgII:
    case Algo::ProxSvrg:
      return run_svrg(obj, spec);
    case Algo::VrsgdI:
    case Algo::VrsgdII:
      return spec.fixed_lr ? run_vrsgd_sc(obj, spec) : run_vrsgd_nsc(obj, spec);
    case Algo::KatyushaI:
    case Algo::KatyushaII:
      return run_katyusha(obj, spec);
    case Algo::Sgd:
      return run_sgd(obj, spec);
    case Algo::FullProxGd:
      return run_proxgd_trace(obj, spec);
  }
  throw std::invalid_argument("run: unknown algorithm");
}

}  // namespace vropt
