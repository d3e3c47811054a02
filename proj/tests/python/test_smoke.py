"""Smoke tests for the python module: dataset handling, objective values,
estimators and a short optimizer run."""

import math

import pytest

import vropt


def test_parse_and_roundtrip():
    ds = vropt.parse_libsvm("+1 1:0.5 3:0.5\n-1 2:1\n")
    assert len(ds) == 2
    assert ds.dim == 3
    assert ds.labels == [1.0, -1.0]
    back = vropt.parse_libsvm(vropt.to_libsvm(ds))
    assert back.labels == ds.labels
    assert [r.values for r in back.rows] == [r.values for r in ds.rows]

    with pytest.raises(ValueError):
        vropt.parse_libsvm("1 2:0.3 1:0.2\n")


def test_normalize_rows():
    ds = vropt.normalize_rows(vropt.parse_libsvm("1 1:3 2:4\n"))
    assert ds.normalized
    assert ds.rows[0].values == pytest.approx([0.6, 0.8], abs=1e-15)


def test_objective_reference_values():
    ds = vropt.synth_classification(10, 3, 0.1, 4)
    obj = vropt.CompositeObjective(ds, vropt.LossKind.Logistic, vropt.Regularizer(0.0, 0.0), False)
    assert obj.value([0.0, 0.0, 0.0]) == pytest.approx(math.log(2.0), abs=1e-15)
    assert obj.lipschitz().value == pytest.approx(0.25, abs=1e-12)


def test_prox_soft_threshold():
    p = vropt.prox(vropt.Regularizer(0.0, 0.15), 2.0, [1.0, -0.2])
    assert p == pytest.approx([0.7, 0.0], abs=1e-15)


def test_estimator_identities():
    ds = vropt.synth_regression(20, 3, 0.1, 7)
    obj = vropt.CompositeObjective(ds, vropt.LossKind.Squared, vropt.Regularizer(0.0, 0.0), False)
    x_tilde = [0.1, -0.2, 0.3]
    ctx = vropt.make_snapshot(obj, x_tilde)
    for i in range(obj.n):
        assert vropt.svrg_estimate(obj, ctx, i, x_tilde) == ctx.mu_tilde

    x = [0.5, 0.0, -0.1]
    mean = [0.0] * 3
    for i in range(obj.n):
        est = vropt.svrg_estimate(obj, ctx, i, x)
        mean = [m + e / obj.n for m, e in zip(mean, est)]
    grad = obj.full_grad(x)
    assert mean == pytest.approx(grad, rel=1e-12, abs=1e-14)

    assert vropt.delta_b(20, 1) == 1.0
    assert vropt.delta_b(20, 20) == 0.0


def test_vrsgd_run_converges_and_is_deterministic():
    ds = vropt.synth_regression(200, 10, 0.1, 1)
    obj = vropt.CompositeObjective(ds, vropt.LossKind.Squared, vropt.Regularizer(1e-4, 0.0), True)
    ref = vropt.compute_reference(obj)

    spec = vropt.OptimizerSpec()
    spec.algo = vropt.Algo.VrsgdI
    spec.eta0 = 3.0 / (7.0 * obj.lipschitz().value)
    spec.epochs = 15
    spec.seed = 3
    tr_a = vropt.run_experiment(obj, spec, ref)
    tr_b = vropt.run_experiment(obj, spec, ref)

    assert len(tr_a.records) == 15
    assert tr_a.records[-1].gap <= 1e-9
    assert all(r.gap >= 0.0 for r in tr_a.records)
    assert [r.objective for r in tr_a.records] == [r.objective for r in tr_b.records]
    assert tr_a.final_objective == min(tr_a.candidate_last, tr_a.candidate_mean)


def test_variance_diag_bound():
    ds = vropt.synth_regression(20, 3, 0.1, 9)
    obj = vropt.CompositeObjective(ds, vropt.LossKind.Squared, vropt.Regularizer(0.0, 0.0), False)
    ref = vropt.compute_reference(obj)
    ctx = vropt.make_snapshot(obj, [0.2, -0.1, 0.4])
    diag = vropt.variance_diag(obj, ctx, [0.0, 0.3, -0.2], 1, ref.f_star)
    assert diag.exhaustive
    assert diag.delta_b == 1.0
    assert diag.empirical_mse <= diag.bound + 1e-10


def test_sweep_and_trace_csv(tmp_path):
    ds = vropt.synth_regression(150, 8, 0.1, 2)
    obj = vropt.CompositeObjective(ds, vropt.LossKind.Squared, vropt.Regularizer(1e-4, 0.0), True)
    L = obj.lipschitz().value
    ref = vropt.compute_reference(obj)

    base = vropt.OptimizerSpec()
    base.algo = vropt.Algo.VrsgdI
    base.epochs = 8
    base.seed = 4
    etas = [0.1 / L, 0.2 / L, 0.3 / L, 0.4 / L]
    traces = vropt.sweep_learning_rates(obj, base, etas, ref)
    assert len(traces) == 4
    assert not any(t.diverged for t in traces)

    path = tmp_path / vropt.trace_filename(base.algo, etas[0], base.seed)
    vropt.write_trace_csv_file(str(path), traces[0])
    back = vropt.read_trace_csv_file(str(path))
    assert [r.objective for r in back.records] == [r.objective for r in traces[0].records]
    assert [r.gap for r in back.records] == [r.gap for r in traces[0].records]
    assert path.name.startswith("vrsgd-i_")
