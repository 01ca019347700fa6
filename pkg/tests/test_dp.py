import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as stn

from npboot import (
    AdaptiveTruncation,
    ConfigurationError,
    DpConfig,
    EmpiricalMeasure,
    FixedTruncation,
    Normal,
    ParametricMeasure,
    ProductMeasure,
    WeightedDataset,
    alpha_from_mean_variance,
    draw_dirichlet_weights,
    draw_dp_posterior_dataset,
    draw_gem_weights_adaptive,
)
from npboot.dp import _stick_breaking_run

from oracles import simulate_stick_breaking_count


class CountingMeasure(ParametricMeasure):
    """Instrumented centering measure recording how often it is sampled."""

    def __init__(self, calls):
        super().__init__(Normal(0.0, 1.0))
        self._calls = calls

    def sample(self, rng, size):
        self._calls.append(size)
        return super().sample(rng, size)


# ---------------------------------------------------------------------------
# draw_dirichlet_weights
# ---------------------------------------------------------------------------


def test_single_atom_forces_weight_one(rng):
    np.testing.assert_array_equal(draw_dirichlet_weights(1, 0.0, 0, rng), [1.0])


def test_flat_dirichlet_moments(rng):
    # Dirichlet(1,1,1): mean 1/3, variance (n-1)/(n^2(n+1)) = 2/36
    draws = np.array([draw_dirichlet_weights(3, 0.0, 0, rng) for _ in range(100_000)])
    np.testing.assert_allclose(draws.mean(axis=0), 1.0 / 3.0, atol=0.01)
    np.testing.assert_allclose(draws.var(axis=0), 2.0 / 36.0, atol=0.005)


def test_pseudo_atom_means(rng):
    # concentrations (1, 1, 0.5, 0.5, 0.5, 0.5): observed mean 1/4, pseudo 1/8
    draws = np.array([draw_dirichlet_weights(2, 2.0, 4, rng) for _ in range(100_000)])
    np.testing.assert_allclose(draws[:, :2].mean(axis=0), 0.25, atol=0.005)
    np.testing.assert_allclose(draws[:, 2:].mean(axis=0), 0.125, atol=0.005)


def test_dirichlet_weight_configuration_errors(rng):
    with pytest.raises(ConfigurationError):
        draw_dirichlet_weights(0, 0.0, 0, rng)
    with pytest.raises(ConfigurationError):
        draw_dirichlet_weights(5, 1.0, 0, rng)  # alpha > 0 needs pseudo slots
    with pytest.raises(ConfigurationError):
        draw_dirichlet_weights(5, 0.0, 3, rng)  # alpha = 0 forbids them
    with pytest.raises(ConfigurationError):
        draw_dirichlet_weights(5, -1.0, 3, rng)


@settings(max_examples=50, deadline=None)
@given(
    n=stn.integers(1, 30),
    alpha=stn.floats(0.0, 50.0),
    t=stn.integers(1, 40),
    seed=stn.integers(0, 2**31),
)
def test_dirichlet_weights_always_a_distribution(n, alpha, t, seed):
    rng = np.random.default_rng(seed)
    n_pseudo = t if alpha > 0 else 0
    w = draw_dirichlet_weights(n, alpha, n_pseudo, rng)
    assert len(w) == n + n_pseudo
    assert np.all(w >= 0)
    assert abs(w.sum() - 1.0) <= 1e-12


# ---------------------------------------------------------------------------
# draw_gem_weights_adaptive
# ---------------------------------------------------------------------------


def test_gem_leftover_below_epsilon(rng):
    for _ in range(200):
        _, leftover = _stick_breaking_run(5.0, 0.5, rng)
        assert leftover < 0.5


def test_gem_weights_sum_to_one(rng):
    for mass, eps in [(0.5, 0.3), (10.0, 0.01), (300.0, 0.05)]:
        w = draw_gem_weights_adaptive(mass, eps, rng)
        assert abs(w.sum() - 1.0) <= 1e-12
        assert np.all(w >= 0)


def test_gem_first_stick_mean(rng):
    # First stick is Beta(1, mass) with mean 1/(1+mass); epsilon is tight
    # enough that renormalization shifts the mean by < 1e-3 relative.
    mass, n_draws = 1000.0, 4000
    first = np.array(
        [draw_gem_weights_adaptive(mass, 1e-3, rng)[0] for _ in range(n_draws)]
    )
    expected = 1.0 / (1.0 + mass)
    standard_error = first.std() / np.sqrt(n_draws)
    assert abs(first.mean() - expected) < 3 * standard_error + expected * 1.1e-3


def test_gem_stick_count_matches_brute_force(rng):
    # Same truncated process simulated one stick at a time, independent code.
    n_draws = 10_000
    counts = np.array(
        [len(draw_gem_weights_adaptive(1.0, 0.01, rng)) for _ in range(n_draws)]
    )
    oracle_rng = np.random.default_rng(987)
    oracle_counts = np.array(
        [simulate_stick_breaking_count(1.0, 0.01, oracle_rng) for _ in range(n_draws)]
    )
    combined_se = np.sqrt(
        counts.var() / n_draws + oracle_counts.var() / n_draws
    )
    assert abs(counts.mean() - oracle_counts.mean()) < 3 * combined_se


def test_gem_invalid_inputs(rng):
    with pytest.raises(ConfigurationError):
        draw_gem_weights_adaptive(0.0, 0.5, rng)
    with pytest.raises(ConfigurationError):
        draw_gem_weights_adaptive(1.0, 0.0, rng)
    with pytest.raises(ConfigurationError):
        draw_gem_weights_adaptive(1.0, 1.0, rng)


# ---------------------------------------------------------------------------
# draw_dp_posterior_dataset
# ---------------------------------------------------------------------------


def test_single_observation_bayesian_bootstrap(rng):
    ds = draw_dp_posterior_dataset(np.array([[3.5]]), None, DpConfig(alpha=0.0), rng)
    np.testing.assert_array_equal(ds.atoms, [[3.5]])
    np.testing.assert_array_equal(ds.weights, [1.0])
    assert ds.n_observed == 1


def test_symmetric_dirichlet_mean_weight(rng):
    data = rng.normal(size=(1000, 1))
    mean_w = np.zeros(1000)
    n_draws = 200
    for _ in range(n_draws):
        ds = draw_dp_posterior_dataset(data, None, DpConfig(alpha=0.0), rng)
        mean_w += ds.weights
    mean_w /= n_draws
    # each weight has mean 1/n and sd ~ 1/n; the bound is per-coordinate
    # across n=1000 coordinates, so use 5 standard errors
    np.testing.assert_allclose(mean_w, 1e-3, atol=5 * 1e-3 / np.sqrt(n_draws))
    assert mean_w.mean() == pytest.approx(1e-3, abs=1e-12)


def test_pseudo_mass_aggregation(rng):
    # total pseudo weight is Beta(alpha, n): mean alpha/(alpha+n) = 1/101
    data = rng.normal(size=(100, 1))
    cfg = DpConfig(alpha=1.0, truncation=FixedTruncation(100))
    centering = ParametricMeasure(Normal(0.0, 1.0))
    n_draws = 2000
    totals = np.array(
        [
            draw_dp_posterior_dataset(data, centering, cfg, rng).weights[100:].sum()
            for _ in range(n_draws)
        ]
    )
    expected = 1.0 / 101.0
    assert abs(totals.mean() - expected) < 3 * totals.std() / np.sqrt(n_draws)


def test_alpha_zero_never_touches_centering(rng):
    calls = []
    measure = CountingMeasure(calls)
    data = rng.normal(size=(20, 1))
    for _ in range(50):
        draw_dp_posterior_dataset(data, measure, DpConfig(alpha=0.0), rng)
    assert calls == []


def test_fixed_truncation_layout(rng):
    data = rng.normal(size=(30, 2))
    centering = ParametricMeasure(Normal(0.0, 1.0), n_dims=2)
    cfg = DpConfig(alpha=2.0, truncation=FixedTruncation(7))
    ds = draw_dp_posterior_dataset(data, centering, cfg, rng)
    assert ds.atoms.shape == (37, 2)
    assert ds.n_observed == 30
    assert ds.n_pseudo == 7
    np.testing.assert_array_equal(ds.atoms[:30], data)


def test_adaptive_dataset_valid_and_observed_first(rng):
    data = rng.normal(size=(40, 1))
    centering = ParametricMeasure(Normal(0.0, 1.0))
    cfg = DpConfig(alpha=3.0, truncation=AdaptiveTruncation(0.01))
    for _ in range(25):
        ds = draw_dp_posterior_dataset(data, centering, cfg, rng)
        assert ds.n_observed == 40
        np.testing.assert_array_equal(ds.atoms[:40], data)
        assert abs(ds.weights.sum() - 1.0) <= 1e-12
        assert np.all(ds.weights >= 0)


def test_adaptive_pseudo_mass_aggregation(rng):
    data = rng.normal(size=(50, 1))
    centering = ParametricMeasure(Normal(0.0, 1.0))
    cfg = DpConfig(alpha=5.0, truncation=AdaptiveTruncation(0.001))
    n_draws = 800
    totals = np.array(
        [
            draw_dp_posterior_dataset(data, centering, cfg, rng).weights[50:].sum()
            for _ in range(n_draws)
        ]
    )
    expected = 5.0 / 55.0
    assert abs(totals.mean() - expected) < 3 * totals.std() / np.sqrt(n_draws) + 0.001


def test_posterior_dataset_determinism():
    data = np.random.default_rng(5).normal(size=(60, 1))
    centering = ParametricMeasure(Normal(0.0, 1.0))
    cfg = DpConfig(alpha=2.0, truncation=FixedTruncation(20))
    a = draw_dp_posterior_dataset(data, centering, cfg, np.random.default_rng(42))
    b = draw_dp_posterior_dataset(data, centering, cfg, np.random.default_rng(42))
    np.testing.assert_array_equal(a.atoms, b.atoms)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_posterior_dataset_errors(rng):
    with pytest.raises(ConfigurationError):
        draw_dp_posterior_dataset(np.empty((0, 1)), None, DpConfig(alpha=0.0), rng)
    with pytest.raises(ConfigurationError):
        draw_dp_posterior_dataset(
            np.ones((3, 1)), None, DpConfig(alpha=1.0), rng
        )  # centering required
    wrong_width = ParametricMeasure(Normal(0.0, 1.0), n_dims=2)
    with pytest.raises(ConfigurationError):
        draw_dp_posterior_dataset(
            np.ones((3, 1)), wrong_width, DpConfig(alpha=1.0), rng
        )


# ---------------------------------------------------------------------------
# centering measures and weighted datasets
# ---------------------------------------------------------------------------


def test_empirical_measure_samples_rows(rng):
    atoms = np.array([[1.0, 2.0], [3.0, 4.0]])
    measure = EmpiricalMeasure(atoms)
    draws = measure.sample(rng, 500)
    assert draws.shape == (500, 2)
    assert all(any(np.array_equal(row, a) for a in atoms) for row in draws[:20])


def test_product_measure_concatenates(rng):
    measure = ProductMeasure(
        (ParametricMeasure(Normal(0.0, 1.0)), EmpiricalMeasure(np.ones((4, 3))))
    )
    assert measure.width == 4
    draws = measure.sample(rng, 10)
    assert draws.shape == (10, 4)
    np.testing.assert_array_equal(draws[:, 1:], np.ones((10, 3)))


def test_weighted_dataset_invariants():
    with pytest.raises(ConfigurationError):
        WeightedDataset(np.ones((2, 1)), np.array([0.7, 0.4]), 2)  # sum != 1
    with pytest.raises(ConfigurationError):
        WeightedDataset(np.ones((2, 1)), np.array([1.2, -0.2]), 2)  # negative
    with pytest.raises(ConfigurationError):
        WeightedDataset(np.ones((2, 1)), np.array([1.0]), 2)  # length mismatch
    ds = WeightedDataset(np.ones((3, 1)), np.array([0.2, 0.3, 0.5]), 2)
    assert ds.n_pseudo == 1


# ---------------------------------------------------------------------------
# alpha elicitation
# ---------------------------------------------------------------------------


def test_alpha_from_mean_variance_values():
    assert alpha_from_mean_variance(1.0, 2.0) == pytest.approx(1.0)
    assert alpha_from_mean_variance(2.0, 2.0) == 0.0
    assert alpha_from_mean_variance(0.5, 5.0) == pytest.approx(9.0)
    assert alpha_from_mean_variance(10.0, 2.0) == 0.0  # clamps below at zero


def test_alpha_from_mean_variance_domain():
    with pytest.raises(ConfigurationError):
        alpha_from_mean_variance(0.0, 1.0)
    with pytest.raises(ConfigurationError):
        alpha_from_mean_variance(1.0, -2.0)


def test_truncation_validation():
    with pytest.raises(ConfigurationError):
        FixedTruncation(0)
    with pytest.raises(ConfigurationError):
        AdaptiveTruncation(0.0)
    with pytest.raises(ConfigurationError):
        DpConfig(alpha=-0.5)
