"""Posterior-predictive metrics, summaries, an importance-sampling baseline,
and the sparsity-path sweep for the penalized logistic family."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import logsumexp

from .distributions import Distribution
from .dp import CenteringMeasure, DpConfig
from .errors import ConfigurationError, NumericalError
from .models import ArdLogisticModel, ArdPenalty, LossModel
from .optimize import OptimConfig
from .sampler import PosteriorSamples, RestartPolicy, SamplerConfig, posterior_bootstrap

__all__ = [
    "PredictiveReport",
    "PosteriorSummary",
    "SweepConfig",
    "SweepResult",
    "SnisResult",
    "default_b_grid",
    "mean_lppd",
    "mse_and_accuracy",
    "sparsity_fraction",
    "posterior_summary",
    "snis_mean_lppd",
    "sparsity_path_sweep",
]

SWEEP_INTERVAL_MASS = 0.8


def _sample_matrix(samples) -> np.ndarray:
    matrix = samples.samples if isinstance(samples, PosteriorSamples) else samples
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[0] < 1:
        raise ConfigurationError("need at least one posterior sample")
    return matrix


def _batched_log_densities(model, thetas, points, rows_per_chunk=None) -> np.ndarray:
    """(B, M) log predictive densities, evaluated in row chunks."""
    if rows_per_chunk is None:
        rows_per_chunk = max(1, 500_000 // max(points.shape[0], 1))
    parts = [
        model.batch_log_predictive_density(thetas[i : i + rows_per_chunk], points)
        for i in range(0, thetas.shape[0], rows_per_chunk)
    ]
    return np.vstack(parts)


@dataclass(frozen=True)
class PredictiveReport:
    """Held-out predictive metrics; mse/accuracy apply to binary tasks only."""

    mean_lppd: float
    n_test: int
    mse: float | None = None
    accuracy_percent: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.mean_lppd):
            raise NumericalError("mean LPPD is not finite")
        if self.n_test < 1:
            raise ConfigurationError("n_test must be >= 1")
        if self.mse is not None and not math.isfinite(self.mse):
            raise NumericalError("MSE is not finite")
        if self.accuracy_percent is not None and not (
            0.0 <= self.accuracy_percent <= 100.0
        ):
            raise NumericalError(
                f"accuracy {self.accuracy_percent!r} outside [0, 100]"
            )


def mean_lppd(model: LossModel, samples, test_points: np.ndarray) -> float:
    """Mean log pointwise predictive density over held-out points.

    The predictive density at each point is the Monte Carlo average of the
    per-sample densities, formed with log-sum-exp.
    """
    matrix = _sample_matrix(samples)
    points = np.atleast_2d(np.asarray(test_points, dtype=float))
    if points.shape[0] == 0:
        raise ConfigurationError("test set must be non-empty")
    log_dens = _batched_log_densities(model, matrix, points)
    per_point = logsumexp(log_dens, axis=0) - math.log(matrix.shape[0])
    bad = np.nonzero(~np.isfinite(per_point))[0]
    if bad.size:
        raise NumericalError(
            f"predictive density underflowed at test point {bad[0]}",
            context=int(bad[0]),
        )
    return float(per_point.mean())


def mse_and_accuracy(
    model: ArdLogisticModel, samples, test_points: np.ndarray
) -> tuple[float, float]:
    """Brier-style MSE and thresholded accuracy (percent) on binary test data.

    Test atoms carry the label in column 0. The predictive probability of
    the positive class is averaged over the posterior samples; predictions
    threshold it at one half.
    """
    matrix = _sample_matrix(samples)
    points = np.atleast_2d(np.asarray(test_points, dtype=float))
    labels = points[:, 0]
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise ConfigurationError("labels must lie in {0, 1}")
    prob_positive = model.positive_probability_matrix(matrix, points[:, 1:]).mean(
        axis=0
    )
    mse = float(np.mean((prob_positive - labels) ** 2))
    accuracy = 100.0 * float(np.mean((prob_positive > 0.5) == (labels == 1.0)))
    return mse, accuracy


def sparsity_fraction(model: ArdLogisticModel, samples, epsilon: float) -> float:
    """Percent of coefficients whose posterior-mean magnitude is below epsilon.

    The intercept is excluded via the model's coefficient block.
    """
    if not epsilon > 0:
        raise ConfigurationError("epsilon must be > 0")
    matrix = _sample_matrix(samples)
    coef_mean = matrix[:, model.coefficient_slice].mean(axis=0)
    return 100.0 * float(np.mean(np.abs(coef_mean) < epsilon))


@dataclass(frozen=True)
class PosteriorSummary:
    """Per-coordinate posterior mean, median, and central-interval bounds."""

    mean: np.ndarray
    median: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    interval_mass: float


def _nearest_rank(position: float, n: int) -> int:
    # Tiny relative backoff so ranks that are integers in real arithmetic
    # are not pushed up by binary round-off of the interval mass.
    rank = math.ceil(position - 1e-12 * max(position, 1.0))
    return min(max(rank, 1), n)


def posterior_summary(samples, interval_mass: float) -> PosteriorSummary:
    """Order-statistic summary: nearest-rank median and central interval.

    For mass q and B samples, the lower bound sits at rank
    ``ceil(B (1 - q) / 2)`` and the upper at ``ceil(B (1 + q) / 2)``
    (1-based, no interpolation); the median uses rank ``ceil(B / 2)``.
    """
    if not 0.0 < interval_mass < 1.0:
        raise ConfigurationError("interval_mass must lie in (0, 1)")
    matrix = _sample_matrix(samples)
    n = matrix.shape[0]
    if n < 2:
        raise ConfigurationError("posterior summary needs at least 2 samples")
    ordered = np.sort(matrix, axis=0)
    lower = ordered[_nearest_rank(n * (1.0 - interval_mass) / 2.0, n) - 1]
    upper = ordered[_nearest_rank(n * (1.0 + interval_mass) / 2.0, n) - 1]
    median = ordered[_nearest_rank(n * 0.5, n) - 1]
    return PosteriorSummary(
        mean=matrix.mean(axis=0),
        median=median.copy(),
        lower=lower.copy(),
        upper=upper.copy(),
        interval_mass=interval_mass,
    )


class SnisResult(NamedTuple):
    mean_lppd: float
    ess: float


def snis_mean_lppd(
    model: LossModel,
    prior: Distribution,
    proposal: Distribution,
    data: np.ndarray,
    test_points: np.ndarray,
    n_draws: int,
    rng: np.random.Generator,
    param_transform: Callable[[np.ndarray], np.ndarray] | None = None,
) -> SnisResult:
    """Self-normalized importance sampling baseline with its effective sample size.

    Draws parameter vectors from the proposal, weights them by
    ``log-likelihood + log-prior - log-proposal`` (self-normalized via
    log-sum-exp), and evaluates the weighted posterior predictive on the
    test points. ``param_transform`` maps proposal-space rows to the model's
    parameter layout when the two differ (e.g. scales versus variances);
    prior and proposal densities are always taken in proposal space.

    Returns the mean LPPD and ``ESS = 1 / sum(normalized_weights^2)``.
    """
    if n_draws < 1:
        raise ConfigurationError("n_draws must be >= 1")
    data = np.atleast_2d(np.asarray(data, dtype=float))
    test_points = np.atleast_2d(np.asarray(test_points, dtype=float))
    draws = np.atleast_2d(proposal.sample(rng, size=n_draws))

    log_weights = np.empty(n_draws)
    chunk = max(1, 500_000 // max(data.shape[0], 1))
    model_rows_chunks = []
    for start in range(0, n_draws, chunk):
        rows = draws[start : start + chunk]
        model_rows = rows if param_transform is None else param_transform(rows)
        model_rows_chunks.append(model_rows)
        log_lik = model.batch_log_predictive_density(model_rows, data).sum(axis=1)
        log_weights[start : start + chunk] = (
            log_lik + prior.log_density(rows) - proposal.log_density(rows)
        )

    total = logsumexp(log_weights)
    if not np.isfinite(total):
        raise NumericalError("all importance weights underflowed")
    log_norm_weights = log_weights - total
    ess = float(np.exp(-logsumexp(2.0 * log_norm_weights)))

    per_chunk = []
    for start, model_rows in zip(range(0, n_draws, chunk), model_rows_chunks):
        log_dens = model.batch_log_predictive_density(model_rows, test_points)
        per_chunk.append(
            logsumexp(
                log_norm_weights[start : start + chunk, None] + log_dens, axis=0
            )
        )
    log_predictive = logsumexp(np.stack(per_chunk), axis=0)
    bad = np.nonzero(~np.isfinite(log_predictive))[0]
    if bad.size:
        raise NumericalError(
            f"weighted predictive underflowed at test point {bad[0]}",
            context=int(bad[0]),
        )
    return SnisResult(mean_lppd=float(log_predictive.mean()), ess=ess)


def default_b_grid(count: int = 450, decay: float = 0.98) -> np.ndarray:
    """Geometric penalty-scale grid ``decay ** (t - 1)`` for t = 1..count."""
    if count < 1 or not 0.0 < decay < 1.0:
        raise ConfigurationError("need count >= 1 and decay in (0, 1)")
    return decay ** np.arange(count)


@dataclass(frozen=True)
class SweepConfig:
    """Penalty-scale sweep: fixed shape ``a``, grid over ``b``."""

    a: float = 1.0
    b_grid: np.ndarray = field(default_factory=default_b_grid)
    samples_per_point: int = 4000

    def __post_init__(self):
        grid = np.asarray(self.b_grid, dtype=float)
        object.__setattr__(self, "b_grid", grid)
        if not self.a > 0:
            raise ConfigurationError("a must be > 0")
        if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0):
            raise ConfigurationError("b_grid must be a non-empty positive vector")
        if self.samples_per_point < 1:
            raise ConfigurationError("samples_per_point must be >= 1")

    @property
    def log_c_grid(self) -> np.ndarray:
        return np.log(self.b_grid / self.a)


@dataclass(frozen=True)
class SweepResult:
    """Per grid point and coefficient: median and central-interval bounds."""

    b_grid: np.ndarray
    log_c: np.ndarray
    medians: np.ndarray  # (grid, coefficients)
    lower: np.ndarray
    upper: np.ndarray
    interval_mass: float
    statuses: tuple[str, ...]

    @property
    def n_failed(self) -> int:
        return sum(1 for s in self.statuses if s != "ok")


def sparsity_path_sweep(
    model: ArdLogisticModel,
    data: np.ndarray,
    dp: DpConfig,
    policy: RestartPolicy,
    sweep: SweepConfig,
    config: SamplerConfig,
    centering: CenteringMeasure | None = None,
    optim: OptimConfig | None = None,
) -> SweepResult:
    """Trace coefficient posteriors along the penalty-scale grid.

    Every grid point runs a full posterior bootstrap with penalty
    ``(a, b_t, gamma = 1/n_train)`` and records the 80% central interval of
    each coefficient. Grid point t seeds its samples from
    ``(master_seed, t, i)``, so points are independent and the whole sweep
    is reproducible. A failed point is recorded in ``statuses`` (its rows
    are NaN) and the sweep continues.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    gamma = 1.0 / data.shape[0]
    n_coef = model.n_features
    n_grid = sweep.b_grid.size
    medians = np.full((n_grid, n_coef), np.nan)
    lower = np.full((n_grid, n_coef), np.nan)
    upper = np.full((n_grid, n_coef), np.nan)
    statuses = []
    for t, b in enumerate(sweep.b_grid, start=1):
        point_model = replace(
            model, penalty=ArdPenalty(a=sweep.a, b=float(b), gamma=gamma)
        )
        point_config = SamplerConfig(
            n_samples=sweep.samples_per_point,
            master_seed=config.master_seed,
            workers=config.workers,
        )
        try:
            draws = posterior_bootstrap(
                point_model,
                data,
                centering,
                dp,
                policy,
                point_config,
                optim=optim,
                seed_path=(t,),
            )
            summary = posterior_summary(
                draws.samples[:, point_model.coefficient_slice], SWEEP_INTERVAL_MASS
            )
        except NumericalError as err:
            statuses.append(f"failed: {err}")
            continue
        medians[t - 1] = summary.median
        lower[t - 1] = summary.lower
        upper[t - 1] = summary.upper
        statuses.append("ok")
    return SweepResult(
        b_grid=sweep.b_grid.copy(),
        log_c=np.log(sweep.b_grid / sweep.a),
        medians=medians,
        lower=lower,
        upper=upper,
        interval_mass=SWEEP_INTERVAL_MASS,
        statuses=tuple(statuses),
    )
