"""Pluggable model families: weighted loss, gradients or EM steps, predictives.

Each family works on a flat parameter vector with a documented block layout,
so posterior samples stack into a plain ``(B, p)`` matrix:

* normal location: ``[location]``
* Gaussian mixture (diagonal): ``[mixing (K), means (K*d), variances (K*d)]``
* penalized logistic regression: ``[coefficients (d), intercept]``

Atoms are rows of a 2-D float array. Supervised atoms put the binary label
in column 0 and the covariates after it.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .distributions import Dirichlet, Distribution, InverseGamma, Normal, Uniform
from .dp import WeightedDataset
from .errors import ComponentCollapseError, ConfigurationError, NumericalError

__all__ = [
    "LossModel",
    "NormalLocationModel",
    "normal_location_minimizer",
    "GmmParams",
    "GaussianMixtureModel",
    "ArdPenalty",
    "ArdLogisticModel",
]

GMM_VARIANCE_FLOOR = 1e-6
_MIXING_SUM_TOL = 1e-10
_STARVATION_FLOOR = 1e-300


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp; rows of all -inf stay -inf."""
    peak = np.max(a, axis=1)
    finite = np.isfinite(peak)
    with np.errstate(divide="ignore", invalid="ignore"):
        shifted = np.exp(a - np.where(finite, peak, 0.0)[:, None])
        summed = np.log(shifted.sum(axis=1))
    return np.where(finite, peak + summed, peak)


class LossModel(abc.ABC):
    """Contract every model family implements.

    Capability flags tell the optimizer drivers which route applies:
    a closed-form minimizer beats an EM step beats a gradient method.
    All operations are pure functions of their arguments; instances are
    immutable and safe to share across worker processes.
    """

    has_gradient: bool = False
    has_em_step: bool = False
    has_closed_form: bool = False

    @property
    @abc.abstractmethod
    def param_dim(self) -> int:
        ...

    @property
    @abc.abstractmethod
    def atom_width(self) -> int:
        ...

    @abc.abstractmethod
    def weighted_loss(self, theta: np.ndarray, dataset: WeightedDataset) -> float:
        ...

    def weighted_gradient(self, theta, dataset) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} exposes no gradient")

    def closed_form_minimizer(self, dataset) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no closed form")

    @abc.abstractmethod
    def log_predictive_density(self, theta: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Log density (or log mass) of each point row under ``theta``."""

    def batch_log_predictive_density(self, thetas, points) -> np.ndarray:
        """(C, M) log densities for C parameter rows and M points."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        return np.stack([self.log_predictive_density(t, points) for t in thetas])

    @abc.abstractmethod
    def param_blocks(self) -> tuple[tuple[str, int], ...]:
        """Named parameter blocks, in vector order."""

    @abc.abstractmethod
    def default_init_blocks(self) -> dict[str, Distribution]:
        """Proper per-block distributions usable for random restarts."""

    def param_names(self) -> list[str]:
        names = []
        for block, width in self.param_blocks():
            if width == 1:
                names.append(block)
            else:
                names.extend(f"{block}_{i + 1}" for i in range(width))
        return names

    def check_dataset(self, dataset: WeightedDataset):
        if dataset.width != self.atom_width:
            raise ConfigurationError(
                f"{type(self).__name__} expects atoms of width {self.atom_width}, "
                f"got {dataset.width}"
            )


# ---------------------------------------------------------------------------
# Normal location
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalLocationModel(LossModel):
    """Squared-error location model; predictive is normal with known variance."""

    noise_variance: float = 1.0

    has_gradient = True
    has_closed_form = True

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise ConfigurationError("noise_variance must be > 0")

    @property
    def param_dim(self):
        return 1

    @property
    def atom_width(self):
        return 1

    def weighted_loss(self, theta, dataset):
        self.check_dataset(dataset)
        y = dataset.atoms[:, 0]
        return float(dataset.weights @ (y - theta[0]) ** 2)

    def weighted_gradient(self, theta, dataset):
        self.check_dataset(dataset)
        y = dataset.atoms[:, 0]
        return np.array([-2.0 * (dataset.weights @ (y - theta[0]))])

    def closed_form_minimizer(self, dataset):
        self.check_dataset(dataset)
        return np.array([normal_location_minimizer(dataset)])

    def log_predictive_density(self, theta, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        # a squared deviation overflowing to inf legitimately yields -inf
        with np.errstate(over="ignore"):
            z2 = (points[:, 0] - theta[0]) ** 2 / self.noise_variance
        return -0.5 * (z2 + math.log(2.0 * math.pi * self.noise_variance))

    def param_blocks(self):
        return (("location", 1),)

    def default_init_blocks(self):
        return {"location": Normal(0.0, 1.0)}

    def param_names(self):
        return ["location"]


def normal_location_minimizer(dataset: WeightedDataset) -> float:
    """Exact minimizer of the weighted squared error: the weighted mean."""
    if dataset.width != 1:
        raise ConfigurationError("normal location expects scalar atoms")
    return float(dataset.weights @ dataset.atoms[:, 0])


# ---------------------------------------------------------------------------
# Diagonal-covariance Gaussian mixture
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GmmParams:
    """Mixture parameters: mixing simplex, component means, diagonal variances."""

    mixing: np.ndarray  # (K,)
    means: np.ndarray  # (K, d)
    variances: np.ndarray  # (K, d)

    def __post_init__(self):
        mixing = np.asarray(self.mixing, dtype=float)
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        variances = np.atleast_2d(np.asarray(self.variances, dtype=float))
        object.__setattr__(self, "mixing", mixing)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        k = len(mixing)
        if means.shape[0] != k or variances.shape != means.shape:
            raise ConfigurationError("mixing, means and variances disagree on K or d")

    @property
    def n_components(self):
        return len(self.mixing)

    @property
    def n_features(self):
        return self.means.shape[1]

    def validate(self, variance_floor: float = GMM_VARIANCE_FLOOR):
        if np.any(self.mixing < 0):
            raise ConfigurationError("mixing weights must be nonnegative")
        if abs(float(self.mixing.sum()) - 1.0) > _MIXING_SUM_TOL:
            raise ConfigurationError(
                f"mixing weights sum to {float(self.mixing.sum())!r}, not 1"
            )
        if np.any(self.variances < variance_floor):
            raise ConfigurationError(f"variances must be >= {variance_floor}")

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.mixing, self.means.ravel(), self.variances.ravel()]
        )

    @classmethod
    def from_vector(cls, theta, n_components: int, n_features: int) -> "GmmParams":
        theta = np.asarray(theta, dtype=float)
        k, d = n_components, n_features
        if theta.shape != (k * (1 + 2 * d),):
            raise ConfigurationError(
                f"expected parameter vector of length {k * (1 + 2 * d)}, "
                f"got {theta.shape}"
            )
        return cls(
            mixing=theta[:k],
            means=theta[k : k + k * d].reshape(k, d),
            variances=theta[k + k * d :].reshape(k, d),
        )


@dataclass(frozen=True)
class GaussianMixtureModel(LossModel):
    """K-component diagonal GMM scored by its weighted negative log-likelihood."""

    n_components: int
    n_features: int = 1
    variance_floor: float = GMM_VARIANCE_FLOOR

    has_em_step = True

    def __post_init__(self):
        if self.n_components < 1:
            raise ConfigurationError("n_components must be >= 1")
        if self.n_features < 1:
            raise ConfigurationError("n_features must be >= 1")
        if not self.variance_floor > 0:
            raise ConfigurationError("variance_floor must be > 0")

    @property
    def param_dim(self):
        return self.n_components * (1 + 2 * self.n_features)

    @property
    def atom_width(self):
        return self.n_features

    def unpack(self, theta) -> GmmParams:
        return GmmParams.from_vector(theta, self.n_components, self.n_features)

    def _log_joint(self, params: GmmParams, points: np.ndarray) -> np.ndarray:
        """(n, K) matrix of log(pi_k) + log N(y_i; mu_k, diag var_k)."""
        diff = points[:, None, :] - params.means[None, :, :]
        quad = np.sum(diff * diff / params.variances[None, :, :], axis=-1)
        logdet = np.sum(np.log(2.0 * math.pi * params.variances), axis=-1)
        with np.errstate(divide="ignore"):
            log_mixing = np.log(params.mixing)
        return log_mixing[None, :] - 0.5 * (quad + logdet[None, :])

    def _log_density(self, params: GmmParams, points: np.ndarray) -> np.ndarray:
        return _logsumexp_rows(self._log_joint(params, points))

    def weighted_loss(self, theta, dataset):
        self.check_dataset(dataset)
        log_dens = self._log_density(self.unpack(theta), dataset.atoms)
        bad = np.nonzero(~np.isfinite(log_dens))[0]
        if bad.size:
            raise NumericalError(
                f"mixture log-density non-finite at atom {bad[0]}", context=int(bad[0])
            )
        return float(-(dataset.weights @ log_dens))

    def em_step(
        self,
        params: GmmParams,
        dataset: WeightedDataset,
        variance_floor: float | None = None,
    ) -> GmmParams:
        """One weighted E-step and M-step.

        Responsibilities are formed in log-space from the current parameters;
        the M-step reweights them by the dataset weights. Updated variances
        are clamped at the floor. A component whose updated mixing weight
        vanishes entirely raises :class:`ComponentCollapseError`; retry policy
        is the caller's concern.
        """
        self.check_dataset(dataset)
        floor = self.variance_floor if variance_floor is None else variance_floor
        y = dataset.atoms
        _, updated = self._em_sweep(
            params.mixing, params.means, params.variances,
            y, y * y, dataset.weights, floor,
        )
        return GmmParams(*updated)

    def _em_sweep(self, mixing, means, variances, y, y_squared, weights, floor,
                  update=True):
        """Fused E-step: returns the weighted log-likelihood of the inputs
        plus (when ``update`` is set) the M-step parameter arrays.

        The per-component log densities are evaluated in the expanded
        quadratic form, two small matrix products per sweep, so the EM
        driver pays for one density matrix per iteration.
        """
        with np.errstate(divide="ignore"):
            log_mixing = np.log(mixing)
        linear = means / variances  # (K, d)
        half_precision = 0.5 / variances
        const = log_mixing - 0.5 * np.sum(
            np.log(2.0 * math.pi * variances) + means * means / variances, axis=1
        )
        log_joint = y @ linear.T - y_squared @ half_precision.T + const[None, :]
        log_norm = _logsumexp_rows(log_joint)
        log_likelihood = float(weights @ log_norm)
        if not update:
            return log_likelihood, None

        resp = np.exp(log_joint - log_norm[:, None])
        weighted_resp = weights[:, None] * resp  # (n, K)
        new_mixing = weighted_resp.sum(axis=0)
        starved = np.nonzero(new_mixing < _STARVATION_FLOOR)[0]
        if starved.size:
            raise ComponentCollapseError(
                f"component {starved[0]} starved (mixing weight "
                f"{new_mixing[starved[0]]!r})",
                component=int(starved[0]),
            )
        new_means = (weighted_resp.T @ y) / new_mixing[:, None]
        new_variances = np.empty_like(new_means)
        for k in range(self.n_components):
            diff = y - new_means[k]
            new_variances[k] = (weighted_resp[:, k] @ (diff * diff)) / new_mixing[k]
        np.maximum(new_variances, floor, out=new_variances)
        return log_likelihood, (new_mixing, new_means, new_variances)

    def log_predictive_density(self, theta, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self._log_density(self.unpack(theta), points)

    def batch_log_predictive_density(self, thetas, points):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k, d = self.n_components, self.n_features
        mixing = thetas[:, :k]
        means = thetas[:, k : k + k * d].reshape(-1, k, d)
        variances = thetas[:, k + k * d :].reshape(-1, k, d)
        diff = points[None, :, None, :] - means[:, None, :, :]  # (C, M, K, d)
        quad = np.sum(diff * diff / variances[:, None, :, :], axis=-1)
        logdet = np.sum(np.log(2.0 * math.pi * variances), axis=-1)  # (C, K)
        with np.errstate(divide="ignore"):
            log_mixing = np.log(mixing)
        return logsumexp(
            log_mixing[:, None, :] - 0.5 * (quad + logdet[:, None, :]), axis=2
        )

    def param_blocks(self):
        k, d = self.n_components, self.n_features
        return (("mixing", k), ("means", k * d), ("variances", k * d))

    def default_init_blocks(self):
        return {
            "mixing": Dirichlet((1.0,) * self.n_components),
            "means": Uniform(-2.0, 6.0),
            "variances": InverseGamma(1.0, 1.0),
        }

    def param_names(self):
        k, d = self.n_components, self.n_features
        names = [f"pi_{i + 1}" for i in range(k)]
        if d == 1:
            names += [f"mu_{i + 1}" for i in range(k)]
            names += [f"var_{i + 1}" for i in range(k)]
        else:
            names += [f"mu_{i + 1}_{j + 1}" for i in range(k) for j in range(d)]
            names += [f"var_{i + 1}_{j + 1}" for i in range(k) for j in range(d)]
        return names


# ---------------------------------------------------------------------------
# Logistic regression with a heavy-tailed sparsity penalty
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArdPenalty:
    """Student-t style penalty on coefficients with loss scaling ``gamma``.

    The penalty per unit weight is
    ``gamma * (2a + 1) / 2 * sum_j log(1 + beta_j^2 / (2b))``; the implied
    squared scale of the marginal prior is ``b / a``. A common choice is
    ``gamma = 1 / n_train``, which matches the usual likelihood-to-prior
    weighting; resolve that upstream where the training size is known.
    """

    a: float = 1.0
    b: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ConfigurationError("penalty requires a > 0 and b > 0")
        if self.gamma < 0:
            raise ConfigurationError("gamma must be >= 0")

    @property
    def squared_scale(self) -> float:
        return self.b / self.a


def _log_sigmoid(z):
    # log sigma(z) = -log(1 + exp(-z)), stable for large |z|
    return -np.logaddexp(0.0, -z)


@dataclass(frozen=True)
class ArdLogisticModel(LossModel):
    """Binary logistic regression with the penalty of :class:`ArdPenalty`.

    Atoms are ``[label, x_1, ..., x_d]`` rows with labels in {0, 1}.
    """

    n_features: int
    penalty: ArdPenalty = ArdPenalty()

    has_gradient = True

    def __post_init__(self):
        if self.n_features < 1:
            raise ConfigurationError("n_features must be >= 1")

    @property
    def param_dim(self):
        return self.n_features + 1

    @property
    def atom_width(self):
        return self.n_features + 1

    @property
    def coefficient_slice(self) -> slice:
        return slice(0, self.n_features)

    def _split(self, atoms):
        return atoms[:, 0], atoms[:, 1:]

    def _linear(self, theta, x):
        return x @ theta[: self.n_features] + theta[self.n_features]

    def _penalty_value(self, beta):
        pen = self.penalty
        return (
            pen.gamma
            * (2.0 * pen.a + 1.0)
            / 2.0
            * float(np.sum(np.log1p(beta * beta / (2.0 * pen.b))))
        )

    def weighted_loss(self, theta, dataset):
        self.check_dataset(dataset)
        theta = np.asarray(theta, dtype=float)
        y, x = self._split(dataset.atoms)
        # overflow at absurd parameter values surfaces as NumericalError below
        with np.errstate(over="ignore", invalid="ignore"):
            z = self._linear(theta, x)
            log_lik = y * _log_sigmoid(z) + (1.0 - y) * _log_sigmoid(-z)
        bad = np.nonzero(~np.isfinite(log_lik))[0]
        if bad.size:
            raise NumericalError(
                f"log-likelihood non-finite at atom {bad[0]}", context=int(bad[0])
            )
        total_weight = float(dataset.weights.sum())
        penalty = total_weight * self._penalty_value(theta[: self.n_features])
        return float(-(dataset.weights @ log_lik) + penalty)

    def weighted_gradient(self, theta, dataset):
        self.check_dataset(dataset)
        theta = np.asarray(theta, dtype=float)
        y, x = self._split(dataset.atoms)
        beta = theta[: self.n_features]
        z = self._linear(theta, x)
        resid = dataset.weights * (y - expit(z))
        pen = self.penalty
        penalty_grad = (
            float(dataset.weights.sum())
            * pen.gamma
            * (2.0 * pen.a + 1.0)
            * beta
            / (2.0 * pen.b + beta * beta)
        )
        grad_beta = -(x.T @ resid) + penalty_grad
        return np.concatenate([grad_beta, [-resid.sum()]])

    def log_predictive_density(self, theta, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        theta = np.asarray(theta, dtype=float)
        y, x = self._split(points)
        z = self._linear(theta, x)
        return y * _log_sigmoid(z) + (1.0 - y) * _log_sigmoid(-z)

    def batch_log_predictive_density(self, thetas, points):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        points = np.atleast_2d(np.asarray(points, dtype=float))
        y, x = self._split(points)
        z = self.decision_values(thetas, x)
        return y[None, :] * _log_sigmoid(z) + (1.0 - y)[None, :] * _log_sigmoid(-z)

    def decision_values(self, thetas, x) -> np.ndarray:
        """(C, M) linear predictor for C parameter rows and M covariate rows."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        return thetas[:, : self.n_features] @ np.asarray(x).T + thetas[
            :, self.n_features :
        ]

    def positive_probability_matrix(self, thetas, x) -> np.ndarray:
        """(C, M) probability of label 1 under each parameter row."""
        return expit(self.decision_values(thetas, x))

    def param_blocks(self):
        return (("coefficients", self.n_features), ("intercept", 1))

    def default_init_blocks(self):
        return {"coefficients": Normal(0.0, 1.0), "intercept": Normal(0.0, 1.0)}

    def param_names(self):
        return [f"beta_{j + 1}" for j in range(self.n_features)] + ["intercept"]
