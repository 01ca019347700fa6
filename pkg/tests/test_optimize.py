import numpy as np
import pytest

from npboot import (
    ArdLogisticModel,
    ArdPenalty,
    ComponentCollapseError,
    ConfigurationError,
    GaussianMixtureModel,
    GmmParams,
    NormalLocationModel,
    OptimConfig,
    WeightedDataset,
    minibatch_gradient,
    normal_location_minimizer,
    run_quasi_newton,
    run_weighted_em,
)

from oracles import grid_minimize, textbook_em_run


def random_weights(rng, n):
    w = rng.gamma(1.0, size=n)
    return w / w.sum()


def mixture_dataset(rng, n, uniform=False):
    y = np.concatenate(
        [rng.normal(0.0, 1.0, size=n // 2), rng.normal(3.0, 1.0, size=n - n // 2)]
    ).reshape(-1, 1)
    w = np.full(n, 1.0 / n) if uniform else random_weights(rng, n)
    return WeightedDataset(y, w, n)


# ---------------------------------------------------------------------------
# weighted EM driver
# ---------------------------------------------------------------------------


def test_em_converges_immediately_at_fixed_point(rng):
    model = GaussianMixtureModel(1, 1)
    ds = mixture_dataset(rng, 30)
    y, w = ds.atoms, ds.weights
    mean = w @ y
    var = w @ (y - mean) ** 2
    fixed_point = GmmParams([1.0], mean.reshape(1, 1), var.reshape(1, 1))
    result = run_weighted_em(model, ds, fixed_point)
    assert result.converged
    assert result.iterations <= 2
    np.testing.assert_allclose(result.theta, fixed_point.to_vector(), rtol=1e-9)


def test_em_uniform_weights_matches_textbook_run(rng):
    model = GaussianMixtureModel(2, 1)
    ds = mixture_dataset(rng, 50, uniform=True)
    init = GmmParams([0.5, 0.5], [[0.5], [2.5]], [[1.0], [1.0]])
    result = run_weighted_em(model, ds, init)
    mixing, means, variances = textbook_em_run(
        np.array([0.5, 0.5]),
        np.array([[0.5], [2.5]]),
        np.array([[1.0], [1.0]]),
        ds.atoms,
        n_steps=result.iterations,
    )
    oracle_theta = GmmParams(mixing, means, variances).to_vector()
    np.testing.assert_allclose(result.theta, oracle_theta, atol=1e-6)


def test_em_objective_trace_non_increasing(rng):
    model = GaussianMixtureModel(2, 1)
    for _ in range(20):
        ds = mixture_dataset(rng, 40)
        params = GmmParams(
            rng.dirichlet([1, 1]), rng.uniform(-1, 4, (2, 1)), 0.5 + rng.random((2, 1))
        )
        trace = [model.weighted_loss(params.to_vector(), ds)]
        for _ in range(15):
            params = model.em_step(params, ds)
            trace.append(model.weighted_loss(params.to_vector(), ds))
        diffs = np.diff(trace)
        assert np.all(diffs <= 1e-9)


def test_em_driver_objective_matches_recomputation(rng):
    model = GaussianMixtureModel(2, 1)
    ds = mixture_dataset(rng, 60)
    result = run_weighted_em(
        model, ds, GmmParams([0.5, 0.5], [[0.0], [3.0]], [[1.0], [1.0]])
    )
    assert result.objective == pytest.approx(
        model.weighted_loss(result.theta, ds), abs=1e-10
    )


def test_em_fixed_point_invariant(rng):
    # at a converged result, one more step moves parameters < 10 * tolerance
    model = GaussianMixtureModel(2, 1)
    y = np.concatenate(
        [rng.normal(0.0, 1.0, size=60), rng.normal(30.0, 1.0, size=60)]
    ).reshape(-1, 1)
    ds = WeightedDataset(y, np.full(120, 1 / 120), 120)
    config = OptimConfig(max_iterations=500, tolerance=1e-8)
    result = run_weighted_em(
        model, ds, GmmParams([0.5, 0.5], [[-1.0], [25.0]], [[1.0], [1.0]]), config
    )
    assert result.converged
    params = model.unpack(result.theta)
    stepped = model.em_step(params, ds)
    assert np.max(np.abs(stepped.to_vector() - result.theta)) < 10 * config.tolerance


def test_em_degenerate_component_reports_iteration():
    model = GaussianMixtureModel(2, 1)
    ds = WeightedDataset(
        np.array([[0.0], [0.1]]), np.array([0.5, 0.5]), 2
    )
    far = GmmParams([0.5, 0.5], [[0.0], [1e8]], [[1.0], [1.0]])
    with pytest.raises(ComponentCollapseError, match="iteration 1"):
        run_weighted_em(model, ds, far)


def test_em_iteration_cap(rng):
    model = GaussianMixtureModel(2, 1)
    ds = mixture_dataset(rng, 50)
    config = OptimConfig(max_iterations=2, tolerance=1e-15)
    result = run_weighted_em(
        model, ds, GmmParams([0.5, 0.5], [[0.0], [3.0]], [[1.0], [1.0]]), config
    )
    assert result.iterations == 2
    assert not result.converged


# ---------------------------------------------------------------------------
# quasi-Newton driver
# ---------------------------------------------------------------------------


def test_quasi_newton_solves_weighted_quadratic(rng):
    model = NormalLocationModel()
    y = rng.normal(size=12)
    ds = WeightedDataset(y.reshape(-1, 1), random_weights(rng, 12), 12)
    result = run_quasi_newton(model, ds, np.array([5.0]))
    assert result.converged
    assert result.iterations <= 5
    assert result.theta[0] == pytest.approx(normal_location_minimizer(ds), abs=1e-8)


def test_quasi_newton_matches_grid_search(rng):
    # small non-separable logistic problem, no penalty
    model = ArdLogisticModel(2, ArdPenalty(1.0, 1.0, 0.0))
    x = rng.normal(size=(10, 2))
    y = np.array([0, 1, 0, 1, 1, 0, 1, 0, 0, 1], dtype=float)
    ds = WeightedDataset(np.column_stack([y, x]), np.full(10, 0.1), 10)
    result = run_quasi_newton(model, ds, np.zeros(3))

    step = 0.1
    axis = np.arange(-5.0, 5.0 + step / 2, step)

    def losses(points):
        z = points[:, :2] @ x.T + points[:, 2:]
        log_sig = -np.logaddexp(0.0, -z)
        log_sig_neg = -np.logaddexp(0.0, z)
        return -(0.1 * (y * log_sig + (1 - y) * log_sig_neg)).sum(axis=1)

    best = grid_minimize(losses, [axis, axis, axis])
    np.testing.assert_allclose(result.theta, best, atol=step)


def test_quasi_newton_descends(rng):
    model = ArdLogisticModel(3, ArdPenalty(1.0, 1.0, 0.2))
    x = rng.normal(size=(30, 3))
    y = (rng.random(30) < 0.5).astype(float)
    ds = WeightedDataset(np.column_stack([y, x]), random_weights(rng, 30), 30)
    for _ in range(10):
        init = rng.normal(scale=2.0, size=4)
        result = run_quasi_newton(model, ds, init)
        assert result.objective <= model.weighted_loss(init, ds) + 1e-12


def test_quasi_newton_unique_optimum_independent_of_init(rng):
    model = NormalLocationModel()
    y = rng.normal(size=25)
    ds = WeightedDataset(y.reshape(-1, 1), random_weights(rng, 25), 25)
    solutions = [
        run_quasi_newton(model, ds, np.array([start])).theta[0]
        for start in (-20.0, 0.0, 13.0)
    ]
    np.testing.assert_allclose(solutions, solutions[0], atol=1e-6)


def test_quasi_newton_requires_gradient(rng):
    model = GaussianMixtureModel(2, 1)
    ds = mixture_dataset(rng, 10)
    with pytest.raises(ConfigurationError):
        run_quasi_newton(model, ds, np.zeros(model.param_dim))


def test_quasi_newton_rejects_bad_init(rng):
    model = NormalLocationModel()
    ds = mixture_dataset(rng, 10)
    with pytest.raises(ConfigurationError):
        run_quasi_newton(model, ds, np.array([np.inf]))


# ---------------------------------------------------------------------------
# mini-batch gradient
# ---------------------------------------------------------------------------


def test_minibatch_single_atom_is_exact(rng):
    model = ArdLogisticModel(2, ArdPenalty(1.0, 1.0, 0.5))
    atoms = np.array([[1.0, 0.3, -0.2]])
    ds = WeightedDataset(atoms, np.array([1.0]), 1)
    theta = rng.normal(size=3)
    np.testing.assert_allclose(
        minibatch_gradient(model, theta, ds, 4, rng),
        model.weighted_gradient(theta, ds),
        rtol=1e-12,
    )


def test_minibatch_concentrated_weights(rng):
    model = NormalLocationModel()
    ds = WeightedDataset(
        np.array([[1.0], [2.0], [3.0]]), np.array([0.0, 1.0, 0.0]), 3
    )
    theta = np.array([0.5])
    target = WeightedDataset(np.array([[2.0]]), np.array([1.0]), 1)
    for _ in range(10):
        np.testing.assert_allclose(
            minibatch_gradient(model, theta, ds, 3, rng),
            model.weighted_gradient(theta, target),
            rtol=1e-12,
        )


def test_minibatch_unbiased_location(rng):
    model = NormalLocationModel()
    ds = WeightedDataset(
        np.array([[0.0], [1.0], [5.0]]), np.array([0.2, 0.5, 0.3]), 3
    )
    theta = np.array([0.7])
    draws = np.array(
        [minibatch_gradient(model, theta, ds, 1, rng)[0] for _ in range(100_000)]
    )
    full = model.weighted_gradient(theta, ds)[0]
    assert abs(draws.mean() - full) < 3 * draws.std() / np.sqrt(len(draws))


def test_minibatch_unbiased_logistic_per_coordinate(rng):
    model = ArdLogisticModel(2, ArdPenalty(1.0, 1.0, 0.3))
    ds = WeightedDataset(
        np.column_stack([(rng.random(6) < 0.5).astype(float), rng.normal(size=(6, 2))]),
        random_weights(rng, 6),
        6,
    )
    theta = rng.normal(size=3)
    draws = np.array(
        [minibatch_gradient(model, theta, ds, 2, rng) for _ in range(20_000)]
    )
    full = model.weighted_gradient(theta, ds)
    for j in range(3):
        se = draws[:, j].std() / np.sqrt(draws.shape[0])
        assert abs(draws[:, j].mean() - full[j]) < 3 * se


def test_optim_config_validation():
    with pytest.raises(ConfigurationError):
        OptimConfig(max_iterations=0)
    with pytest.raises(ConfigurationError):
        OptimConfig(tolerance=0.0)
    with pytest.raises(ConfigurationError):
        OptimConfig(gradient_tolerance=-1.0)
