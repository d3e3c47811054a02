#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "vropt/estimator.hpp"
#include "vropt/harness.hpp"

using namespace vropt;

namespace {

DenseVec random_point(std::mt19937_64& rng, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseVec x(d);
  for (double& v : x) v = scale * gauss(rng);
  return x;
}

}  // namespace

TEST_CASE("estimator at the snapshot returns mu_tilde for every index") {
  std::mt19937_64 rng(3);
  const auto ds = std::make_shared<const SparseDataset>(synth_regression(20, 3, 0.2, 1));
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{0.01, 0.0}, true);
  const DenseVec xt = random_point(rng, 3);
  const SnapshotContext ctx = make_snapshot(obj, xt);
  for (std::size_t i = 0; i < obj.n(); ++i) {
    const DenseVec v = svrg_estimate(obj, ctx, i, xt);
    for (std::size_t j = 0; j < 3; ++j) CHECK(v[j] == ctx.mu_tilde[j]);
  }
  CHECK_THROWS_AS(svrg_estimate(obj, ctx, obj.n(), xt), std::out_of_range);
}

TEST_CASE("estimator mean over all indices equals the full gradient") {
  std::mt19937_64 rng(5);
  const auto ds = std::make_shared<const SparseDataset>(synth_regression(20, 3, 0.2, 2));
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{0.0, 0.0}, false);
  for (int trial = 0; trial < 10; ++trial) {
    const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
    const DenseVec x = random_point(rng, 3);
    const DenseVec g = obj.full_grad(x);
    DenseVec mean(3, 0.0);
    for (std::size_t i = 0; i < obj.n(); ++i) axpy(1.0, svrg_estimate(obj, ctx, i, x), mean);
    scale(mean, 1.0 / static_cast<double>(obj.n()));
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(std::abs(mean[j] - g[j]) <= 1e-12 * std::max(1.0, std::abs(g[j])));
  }
}

TEST_CASE("estimator on the two-component quadratic toy") {
  // f_i(x) = (x - c_i)^2 / 2 with c = (0, 2); at x = x_tilde = 0 the estimate
  // collapses to the full gradient -1 for every i.
  const auto ds = oracles::quadratic_toy({0.0, 2.0});
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{}, false);
  const SnapshotContext ctx = make_snapshot(obj, {0.0});
  CHECK(ctx.mu_tilde[0] == -1.0);
  CHECK(svrg_estimate(obj, ctx, 1, {0.0})[0] == -1.0);
  CHECK(svrg_estimate(obj, ctx, 0, {0.0})[0] == -1.0);

  // against the longhand component-gradient oracle at a displaced point
  const DenseVec x{0.1};
  const DenseVec want = oracles::vr_estimate(obj, 0, x, ctx.x_tilde, ctx.mu_tilde);
  const DenseVec got = svrg_estimate(obj, ctx, 0, x);
  CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-15));
  CHECK(got[0] == doctest::Approx(-0.9).epsilon(1e-15));
}

TEST_CASE("minibatch estimator degenerate cases") {
  std::mt19937_64 rng(7);
  const auto ds = std::make_shared<const SparseDataset>(synth_regression(12, 4, 0.3, 3));
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{0.02, 0.0}, true);
  const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 4));
  const DenseVec x = random_point(rng, 4);

  // b = 1 equals the single-index estimator
  const std::vector<std::size_t> one{5};
  CHECK(minibatch_estimate(obj, ctx, one, x) == svrg_estimate(obj, ctx, 5, x));

  // b = n equals the full gradient (zero variance)
  std::vector<std::size_t> all(obj.n());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const DenseVec full = minibatch_estimate(obj, ctx, all, x);
  const DenseVec g = obj.full_grad(x);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(full[j] - g[j]) <= 1e-12 * std::max(1.0, std::abs(g[j])));

  CHECK_THROWS_AS(minibatch_estimate(obj, ctx, std::vector<std::size_t>{}, x),
                  std::invalid_argument);
}

TEST_CASE("minibatch estimator is unbiased over all C(5,2) subsets") {
  std::mt19937_64 rng(11);
  const auto ds = std::make_shared<const SparseDataset>(synth_regression(5, 3, 0.2, 4));
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{0.0, 0.0}, false);
  const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
  const DenseVec x = random_point(rng, 3);
  const DenseVec g = obj.full_grad(x);

  DenseVec mean(3, 0.0);
  std::size_t count = 0;
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a + 1; b < 5; ++b) {
      const std::vector<std::size_t> batch{a, b};
      axpy(1.0, minibatch_estimate(obj, ctx, batch, x), mean);
      ++count;
    }
  CHECK(count == 10);
  scale(mean, 1.0 / static_cast<double>(count));
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(std::abs(mean[j] - g[j]) <= 1e-12 * std::max(1.0, std::abs(g[j])));
}

TEST_CASE("delta_b endpoints and formula") {
  CHECK(delta_b(20, 1) == 1.0);
  CHECK(delta_b(20, 20) == 0.0);
  CHECK(delta_b(1, 1) == 0.0);
  CHECK(delta_b(20, 5) == doctest::Approx(15.0 / (19.0 * 5.0)).epsilon(1e-15));
}

TEST_CASE("variance_diag on the smooth fixture") {
  const auto ds = std::make_shared<const SparseDataset>(synth_regression(20, 3, 0.1, 7));
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{0.0, 0.0}, false);
  const ReferenceSolution ref = compute_reference(obj);
  std::mt19937_64 rng(13);

  SUBCASE("full batch has zero variance and zero delta") {
    const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
    const auto diag = variance_diag(obj, ctx, random_point(rng, 3), 20, ref.f_star);
    CHECK(diag.delta_b == 0.0);
    CHECK(diag.empirical_mse <= 1e-24);
    CHECK(diag.exhaustive);
  }

  SUBCASE("b = 1 satisfies the smooth variance bound at seeded pairs") {
    for (int trial = 0; trial < 50; ++trial) {
      const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
      const DenseVec x = random_point(rng, 3);
      const auto diag = variance_diag(obj, ctx, x, 1, ref.f_star);
      CHECK(diag.delta_b == 1.0);
      CHECK(diag.exhaustive);
      CHECK(diag.empirical_mse <= diag.bound + 1e-10);
    }
  }

  SUBCASE("mini-batch bound and monotonicity in b") {
    const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
    const DenseVec x = random_point(rng, 3);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t b : {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{20}}) {
      const auto diag = variance_diag(obj, ctx, x, b, ref.f_star);
      CHECK(diag.exhaustive);
      CHECK(diag.empirical_mse <= diag.bound + 1e-10);
      CHECK(diag.empirical_mse <= prev + 1e-12);
      prev = diag.empirical_mse;
    }
  }

  SUBCASE("batch size is validated") {
    const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
    CHECK_THROWS_AS(variance_diag(obj, ctx, random_point(rng, 3), 0, ref.f_star),
                    std::invalid_argument);
    CHECK_THROWS_AS(variance_diag(obj, ctx, random_point(rng, 3), 21, ref.f_star),
                    std::invalid_argument);
  }
}

TEST_CASE("variance_diag non-smooth bound uses the composite objective") {
  // elastic-net regularized instance: the bound holds with F-gaps
  const auto ds = std::make_shared<const SparseDataset>(synth_regression(15, 3, 0.2, 9));
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{1e-3, 1e-3}, false);
  const ReferenceSolution ref = compute_reference(obj);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
    const DenseVec x = random_point(rng, 3);
    const auto diag = variance_diag(obj, ctx, x, 1, ref.f_star);
    CHECK(diag.empirical_mse <= diag.bound + 1e-10);
  }
}

TEST_CASE("variance_diag falls back to seeded sampling on large outcome counts") {
  const auto ds = std::make_shared<const SparseDataset>(synth_regression(60, 3, 0.2, 21));
  const CompositeObjective obj(ds, LossKind::Squared, Regularizer{0.0, 0.0}, false);
  const ReferenceSolution ref = compute_reference(obj);
  std::mt19937_64 rng(19);
  const SnapshotContext ctx = make_snapshot(obj, random_point(rng, 3));
  const DenseVec x = random_point(rng, 3);
  // C(60, 10) is far beyond the exhaustive limit
  const auto a = variance_diag(obj, ctx, x, 10, ref.f_star, 42);
  const auto b = variance_diag(obj, ctx, x, 10, ref.f_star, 42);
  CHECK_FALSE(a.exhaustive);
  CHECK(a.std_error > 0.0);
  CHECK(a.empirical_mse == b.empirical_mse);  // same sample seed, same estimate
  CHECK(a.empirical_mse <= a.bound + 5.0 * a.std_error);
}
