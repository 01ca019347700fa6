"""Randomized weights and atom sets defining Dirichlet-process posterior draws.

A single posterior draw is represented as a :class:`WeightedDataset`: the
observed data points, optionally extended with pseudo-samples from a prior
centering measure, together with one random probability vector over all
atoms. Minimizing a loss under these weights (see :mod:`npboot.sampler`)
yields one exact sample from the nonparametric posterior.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution
from .errors import ConfigurationError, NumericalError

__all__ = [
    "FixedTruncation",
    "AdaptiveTruncation",
    "DpConfig",
    "CenteringMeasure",
    "ParametricMeasure",
    "EmpiricalMeasure",
    "ProductMeasure",
    "WeightedDataset",
    "draw_dirichlet_weights",
    "draw_gem_weights_adaptive",
    "draw_dp_posterior_dataset",
    "alpha_from_mean_variance",
]

WEIGHT_SUM_TOL = 1e-12

# Default pseudo-sample count when concentration > 0 and the caller gives none.
DEFAULT_PSEUDO_SAMPLES = 100

_MAX_GAMMA_RETRIES = 8


@dataclass(frozen=True)
class FixedTruncation:
    """Approximate the posterior DP with a finite Dirichlet over T pseudo-atoms."""

    n_pseudo: int = DEFAULT_PSEUDO_SAMPLES

    def __post_init__(self):
        if self.n_pseudo < 1:
            raise ConfigurationError(
                f"fixed truncation requires n_pseudo >= 1, got {self.n_pseudo}"
            )


@dataclass(frozen=True)
class AdaptiveTruncation:
    """Stick-break until the leftover mass drops below ``epsilon``."""

    epsilon: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigurationError(
                f"adaptive truncation requires 0 < epsilon < 1, got {self.epsilon}"
            )


@dataclass(frozen=True)
class DpConfig:
    """Prior concentration and truncation scheme for posterior draws.

    ``alpha = 0`` is the noninformative special case: no pseudo-samples are
    drawn, the truncation field is ignored, and the weights reduce to a flat
    Dirichlet over the observed data (the Bayesian bootstrap).
    """

    alpha: float = 0.0
    truncation: FixedTruncation | AdaptiveTruncation = field(
        default_factory=FixedTruncation
    )

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if not isinstance(self.truncation, (FixedTruncation, AdaptiveTruncation)):
            raise ConfigurationError(
                "truncation must be FixedTruncation or AdaptiveTruncation"
            )


class CenteringMeasure(abc.ABC):
    """Prior centering measure: a sampler over data atoms.

    ``sample(rng, size)`` returns a ``(size, width)`` float array whose rows
    are i.i.d. atoms in the same coordinate layout as the observed data.
    """

    @property
    @abc.abstractmethod
    def width(self) -> int:
        """Number of coordinates per atom."""

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        ...

    def log_density(self, atoms: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no log-density")


@dataclass(frozen=True)
class ParametricMeasure(CenteringMeasure):
    """I.i.d. coordinates from a named scalar distribution."""

    distribution: Distribution
    n_dims: int = 1

    def __post_init__(self):
        if self.n_dims < 1:
            raise ConfigurationError(f"n_dims must be >= 1, got {self.n_dims}")

    @property
    def width(self):
        return self.n_dims

    def sample(self, rng, size):
        draws = self.distribution.sample(rng, size=size * self.n_dims)
        return np.asarray(draws, dtype=float).reshape(size, self.n_dims)

    def log_density(self, atoms):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        return np.sum(self.distribution.log_density(atoms), axis=-1)


@dataclass(frozen=True)
class EmpiricalMeasure(CenteringMeasure):
    """Uniform distribution over a fixed, non-empty atom list."""

    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        if atoms.ndim != 2 or atoms.shape[0] == 0:
            raise ConfigurationError("empirical measure needs a non-empty 2-D atom array")
        object.__setattr__(self, "atoms", atoms)

    @property
    def width(self):
        return self.atoms.shape[1]

    def sample(self, rng, size):
        idx = rng.integers(0, self.atoms.shape[0], size=size)
        return self.atoms[idx]


@dataclass(frozen=True)
class ProductMeasure(CenteringMeasure):
    """Independent component measures concatenated along the coordinate axis.

    Covers factored priors such as a label distribution times an empirical
    covariate distribution; the component widths must tile the atom layout
    exactly once, in order.
    """

    components: tuple[CenteringMeasure, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ConfigurationError("product measure needs at least one component")
        object.__setattr__(self, "components", components)

    @property
    def width(self):
        return sum(c.width for c in self.components)

    def sample(self, rng, size):
        return np.hstack([c.sample(rng, size) for c in self.components])


@dataclass(frozen=True)
class WeightedDataset:
    """Atoms (observed first, pseudo-samples after) with probability weights."""

    atoms: np.ndarray  # (n_observed + n_pseudo, width)
    weights: np.ndarray  # (n_observed + n_pseudo,)
    n_observed: int

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        self.validate()

    def validate(self):
        if self.atoms.ndim != 2:
            raise ConfigurationError("atoms must form a 2-D array")
        if self.weights.ndim != 1 or len(self.weights) != len(self.atoms):
            raise ConfigurationError(
                f"{len(self.atoms)} atoms but {len(self.weights)} weights"
            )
        if not 1 <= self.n_observed <= len(self.atoms):
            raise ConfigurationError(
                f"n_observed={self.n_observed} out of range for {len(self.atoms)} atoms"
            )
        if np.any(self.weights < 0):
            raise ConfigurationError("weights must be nonnegative")
        total = float(self.weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ConfigurationError(f"weights sum to {total!r}, not 1")

    @property
    def n_pseudo(self) -> int:
        return len(self.atoms) - self.n_observed

    @property
    def width(self) -> int:
        return self.atoms.shape[1]


def draw_dirichlet_weights(
    n_observed: int,
    alpha: float,
    n_pseudo: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one weight vector from Dir(1, ..., 1, alpha/T, ..., alpha/T).

    The first ``n_observed`` concentrations are 1 (one per observed atom) and
    the remaining ``n_pseudo`` are ``alpha / n_pseudo``. Implemented as
    independent Gamma(shape, 1) draws normalized by their sum, which is valid
    for shapes below 1. An all-zero Gamma vector (extreme underflow) is
    resampled a bounded number of times before raising.
    """
    if n_observed < 1:
        raise ConfigurationError(f"n_observed must be >= 1, got {n_observed}")
    if alpha < 0:
        raise ConfigurationError(f"alpha must be >= 0, got {alpha}")
    if alpha > 0 and n_pseudo < 1:
        raise ConfigurationError("alpha > 0 requires at least one pseudo-sample slot")
    if alpha == 0 and n_pseudo != 0:
        raise ConfigurationError("alpha = 0 forbids pseudo-sample slots")

    shape = np.ones(n_observed + n_pseudo)
    if n_pseudo:
        shape[n_observed:] = alpha / n_pseudo
    for _ in range(_MAX_GAMMA_RETRIES):
        gammas = rng.gamma(shape)
        total = gammas.sum()
        if np.isfinite(total) and total > 0.0:
            return gammas / total
    raise NumericalError(
        f"Gamma draws underflowed to an all-zero vector {_MAX_GAMMA_RETRIES} times"
    )


def draw_gem_weights_adaptive(
    mass: float,
    epsilon: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Stick-breaking weights, truncated once the leftover mass is < epsilon.

    Sticks are ``w_k = v_k * prod_{j<k}(1 - v_j)`` with ``v_k ~ Beta(1, mass)``.
    Generation stops as soon as the remaining mass ``prod(1 - v_j)`` falls
    below ``epsilon``; that leftover is discarded and the weights are
    renormalized to sum exactly to one.
    """
    weights, _ = _stick_breaking_run(mass, epsilon, rng)
    return weights / weights.sum()


def _stick_breaking_run(
    mass: float, epsilon: float, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Raw stick weights and the discarded leftover mass (< epsilon)."""
    if not mass > 0:
        raise ConfigurationError(f"mass must be > 0, got {mass}")
    if not 0.0 < epsilon < 1.0:
        raise ConfigurationError(f"epsilon must lie in (0, 1), got {epsilon}")

    # Beta draws arrive in chunks; expected stick count is ~ mass * log(1/eps).
    chunk = int(min(max(64, mass), 65536))
    pieces = []
    leftover = 1.0
    while leftover >= epsilon:
        v = rng.beta(1.0, mass, size=chunk)
        remaining = leftover * np.cumprod(1.0 - v)
        sticks = v * np.concatenate(([leftover], remaining[:-1]))
        crossed = np.nonzero(remaining < epsilon)[0]
        if crossed.size:
            stop = crossed[0] + 1
            pieces.append(sticks[:stop])
            leftover = remaining[stop - 1]
            break
        pieces.append(sticks)
        leftover = remaining[-1]
    return np.concatenate(pieces), float(leftover)


def draw_dp_posterior_dataset(
    data: np.ndarray,
    centering: CenteringMeasure | None,
    config: DpConfig,
    rng: np.random.Generator,
) -> WeightedDataset:
    """Draw one weighted dataset from the posterior DP over the sampling law.

    With ``alpha = 0`` the observed atoms get flat-Dirichlet weights and the
    centering measure is never touched. With fixed truncation, T pseudo-atoms
    are sampled i.i.d. from the centering measure and the finite Dirichlet of
    :func:`draw_dirichlet_weights` is attached. With adaptive truncation,
    stick-breaking weights over the posterior base measure are allocated to
    observed atoms (merging duplicates) or fresh pseudo-atoms.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    n = data.shape[0]
    if n == 0:
        raise ConfigurationError("data must be non-empty")

    if config.alpha == 0.0:
        weights = draw_dirichlet_weights(n, 0.0, 0, rng)
        return WeightedDataset(atoms=data, weights=weights, n_observed=n)

    if centering is None:
        raise ConfigurationError("alpha > 0 requires a centering measure")
    if centering.width != data.shape[1]:
        raise ConfigurationError(
            f"centering atoms have width {centering.width}, data has {data.shape[1]}"
        )

    if isinstance(config.truncation, FixedTruncation):
        n_pseudo = config.truncation.n_pseudo
        pseudo = centering.sample(rng, n_pseudo)
        weights = draw_dirichlet_weights(n, config.alpha, n_pseudo, rng)
        return WeightedDataset(
            atoms=np.vstack([data, pseudo]), weights=weights, n_observed=n
        )

    # Adaptive: each stick lands on an observed atom with probability
    # n / (alpha + n) (uniformly among them), otherwise on a fresh draw
    # from the centering measure. Observed-atom sticks are merged.
    mass = config.alpha + n
    sticks = draw_gem_weights_adaptive(mass, config.truncation.epsilon, rng)
    on_observed = rng.random(len(sticks)) < n / mass
    observed_weights = np.zeros(n)
    idx = rng.integers(0, n, size=int(on_observed.sum()))
    np.add.at(observed_weights, idx, sticks[on_observed])
    pseudo_sticks = sticks[~on_observed]
    if pseudo_sticks.size:
        pseudo = centering.sample(rng, pseudo_sticks.size)
        atoms = np.vstack([data, pseudo])
        weights = np.concatenate([observed_weights, pseudo_sticks])
    else:
        atoms = data
        weights = observed_weights
    return WeightedDataset(atoms=atoms, weights=weights, n_observed=n)


def alpha_from_mean_variance(target_var: float, var_under_centering: float) -> float:
    """Elicit the concentration from a target prior variance of the mean.

    The mean functional of a DP draw has variance
    ``var_under_centering / (1 + alpha)``; inverting gives
    ``alpha = var_under_centering / target_var - 1``, clamped below at 0
    when the target is at least the centering variance.
    """
    if not target_var > 0:
        raise ConfigurationError(f"target_var must be > 0, got {target_var}")
    if not var_under_centering > 0:
        raise ConfigurationError(
            f"var_under_centering must be > 0, got {var_under_centering}"
        )
    return max(var_under_centering / target_var - 1.0, 0.0)
