"""Synthetic data generators used by the docs, tests, and benchmark configs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError

__all__ = [
    "make_mixture_data",
    "SparseLogisticData",
    "make_sparse_logistic_data",
    "SPARSE_COEF_INDICES",
    "SPARSE_COEF_VALUES",
]

# Default sparse-coefficient pattern: 5 non-zero entries out of 50,
# at (0-based) positions 9, 13, 23, 30, 36.
SPARSE_COEF_INDICES = (9, 13, 23, 30, 36)
SPARSE_COEF_VALUES = (-0.2538, 0.4578, -0.1873, -0.1498, 0.0996)


def make_mixture_data(
    n_samples: int,
    mixing=(0.1, 0.3, 0.6),
    means=(0.0, 2.0, 4.0),
    variances=(1.0, 1.0, 1.0),
    seed: int = 0,
) -> np.ndarray:
    """Univariate Gaussian-mixture draws as an (n, 1) atom array."""
    mixing = np.asarray(mixing, dtype=float)
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if not (len(mixing) == len(means) == len(variances)):
        raise ConfigurationError("mixing, means and variances must share a length")
    rng = np.random.default_rng(seed)
    components = rng.choice(len(mixing), size=n_samples, p=mixing / mixing.sum())
    draws = rng.normal(means[components], np.sqrt(variances[components]))
    return draws.reshape(-1, 1)


@dataclass(frozen=True)
class SparseLogisticData:
    atoms: np.ndarray  # (n, 1 + d): label column then standardized covariates
    coef: np.ndarray  # (d,) generating coefficients (no intercept)
    nonzero_indices: tuple[int, ...]

    @property
    def labels(self) -> np.ndarray:
        return self.atoms[:, 0]

    @property
    def covariates(self) -> np.ndarray:
        return self.atoms[:, 1:]


def make_sparse_logistic_data(
    n_samples: int = 500,
    n_features: int = 50,
    block_size: int = 5,
    within_block_correlation: float = 0.5,
    coef_indices: tuple[int, ...] = SPARSE_COEF_INDICES,
    coef_values: tuple[float, ...] = SPARSE_COEF_VALUES,
    seed: int = 0,
) -> SparseLogisticData:
    """Binary labels from a sparse logistic model over block-correlated covariates.

    Covariates share a common factor within each block of ``block_size``
    consecutive columns (pairwise correlation ``within_block_correlation``)
    and are standardized to mean 0, standard deviation 1. Labels are
    Bernoulli with success probability ``sigmoid(x @ coef)`` (no intercept).
    """
    if not 0.0 <= within_block_correlation < 1.0:
        raise ConfigurationError("within_block_correlation must lie in [0, 1)")
    if len(coef_indices) != len(coef_values):
        raise ConfigurationError("coef_indices and coef_values must share a length")
    if coef_indices and max(coef_indices) >= n_features:
        raise ConfigurationError("coefficient index outside the feature range")
    rng = np.random.default_rng(seed)
    rho = within_block_correlation
    n_blocks = -(-n_features // block_size)
    factors = rng.normal(size=(n_samples, n_blocks))
    noise = rng.normal(size=(n_samples, n_features))
    block_of = np.arange(n_features) // block_size
    x = np.sqrt(rho) * factors[:, block_of] + np.sqrt(1.0 - rho) * noise
    x = (x - x.mean(axis=0)) / x.std(axis=0)

    coef = np.zeros(n_features)
    coef[list(coef_indices)] = coef_values
    labels = (rng.random(n_samples) < expit(x @ coef)).astype(float)
    return SparseLogisticData(
        atoms=np.column_stack([labels, x]),
        coef=coef,
        nonzero_indices=tuple(coef_indices),
    )
