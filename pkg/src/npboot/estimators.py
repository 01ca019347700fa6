"""Scikit-learn style estimators wrapping the posterior bootstrap.

``fit`` draws the posterior sample matrix; prediction methods average the
per-sample predictive over it. Constructor arguments are stored verbatim
(sklearn convention), all validation happens in ``fit``, and fitted state
lives in trailing-underscore attributes, so ``get_params``/``set_params``
and ``clone`` work as usual.
"""

from __future__ import annotations

import numbers

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, ClassifierMixin, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .distributions import Bernoulli
from .dp import (
    AdaptiveTruncation,
    CenteringMeasure,
    DpConfig,
    EmpiricalMeasure,
    FixedTruncation,
    ParametricMeasure,
    ProductMeasure,
)
from .errors import ConfigurationError
from .evaluate import mean_lppd, posterior_summary
from .models import ArdLogisticModel, ArdPenalty, GaussianMixtureModel, NormalLocationModel
from .optimize import OptimConfig
from .sampler import FixedInit, NoImprovement, RandomRestart, SamplerConfig, posterior_bootstrap

__all__ = ["NPLGaussianMixture", "NPLLogisticRegression", "NPLLocation"]


def _resolve_seed(random_state) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().entropy % (2**63))
    if isinstance(random_state, numbers.Integral):
        return int(random_state)
    raise ConfigurationError("random_state must be an integer or None")


class _PosteriorBootstrapMixin:
    """Shared fit plumbing; subclasses build the model, policy and centering."""

    def _dp_config(self) -> DpConfig:
        if self.adaptive_epsilon is not None:
            truncation = AdaptiveTruncation(float(self.adaptive_epsilon))
        else:
            truncation = FixedTruncation(int(self.pseudo_samples))
        return DpConfig(alpha=float(self.alpha), truncation=truncation)

    def _policy(self):
        if self.theta_init is not None:
            return FixedInit(np.asarray(self.theta_init, dtype=float))
        stopping = (
            None if self.stopping_patience is None else NoImprovement(self.stopping_patience)
        )
        return RandomRestart(
            restarts=self.restarts, init_blocks=self.init_blocks, stopping=stopping
        )

    def _run(self, model, atoms, centering, optim=None):
        seed = _resolve_seed(self.random_state)
        result = posterior_bootstrap(
            model,
            atoms,
            centering,
            self._dp_config(),
            self._policy(),
            SamplerConfig(
                n_samples=self.n_bootstrap, master_seed=seed, workers=self.workers
            ),
            optim=optim,
        )
        self.model_ = model
        self.master_seed_ = seed
        self.result_ = result
        self.samples_ = result.samples
        self.objectives_ = result.objectives
        self.n_failures_ = len(result.failures)
        return result

    def posterior_summary(self, interval_mass: float = 0.8):
        check_is_fitted(self, "samples_")
        return posterior_summary(self.samples_, interval_mass)


class NPLGaussianMixture(_PosteriorBootstrapMixin, DensityMixin, BaseEstimator):
    """Posterior over a diagonal Gaussian mixture via random-restart bootstrap.

    Parameters mirror the sampler: ``alpha`` and the truncation arguments
    set the prior strength, ``restarts``/``theta_init`` choose between full
    mode exploration and single-mode sampling, and ``n_bootstrap`` is the
    number of posterior samples drawn by :meth:`fit`.
    """

    def __init__(
        self,
        n_components=1,
        *,
        alpha=0.0,
        pseudo_samples=100,
        adaptive_epsilon=None,
        centering=None,
        restarts=10,
        stopping_patience=None,
        init_blocks=None,
        theta_init=None,
        n_bootstrap=1000,
        variance_floor=1e-6,
        max_iter=500,
        tol=1e-6,
        workers=None,
        random_state=0,
    ):
        self.n_components = n_components
        self.alpha = alpha
        self.pseudo_samples = pseudo_samples
        self.adaptive_epsilon = adaptive_epsilon
        self.centering = centering
        self.restarts = restarts
        self.stopping_patience = stopping_patience
        self.init_blocks = init_blocks
        self.theta_init = theta_init
        self.n_bootstrap = n_bootstrap
        self.variance_floor = variance_floor
        self.max_iter = max_iter
        self.tol = tol
        self.workers = workers
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True, dtype=float)
        model = GaussianMixtureModel(
            n_components=self.n_components,
            n_features=X.shape[1],
            variance_floor=self.variance_floor,
        )
        optim = OptimConfig(
            max_iterations=self.max_iter,
            tolerance=self.tol,
            em_variance_floor=self.variance_floor,
        )
        self._run(model, X, self.centering, optim=optim)
        return self

    def score_samples(self, X):
        """Log posterior-predictive density of each row."""
        check_is_fitted(self, "samples_")
        X = check_array(X, ensure_2d=True, dtype=float)
        log_dens = self.model_.batch_log_predictive_density(self.samples_, X)
        return logsumexp(log_dens, axis=0) - np.log(self.samples_.shape[0])

    def score(self, X, y=None):
        """Mean log posterior-predictive density (LPPD) of the data."""
        check_is_fitted(self, "samples_")
        X = check_array(X, ensure_2d=True, dtype=float)
        return mean_lppd(self.model_, self.samples_, X)


class NPLLogisticRegression(_PosteriorBootstrapMixin, ClassifierMixin, BaseEstimator):
    """Sparse Bayesian-style logistic classifier via the posterior bootstrap.

    The penalty is the heavy-tailed coefficient penalty of
    :class:`~npboot.models.ArdPenalty`; ``gamma=None`` resolves to
    ``1 / n_train`` at fit time. The default centering measure (used when
    ``alpha > 0``) is an independent Bernoulli(0.5) label times the
    empirical covariate distribution.
    """

    def __init__(
        self,
        *,
        penalty_shape=1.0,
        penalty_scale=1.0,
        gamma=None,
        alpha=0.0,
        pseudo_samples=100,
        adaptive_epsilon=None,
        centering=None,
        restarts=1,
        stopping_patience=None,
        init_blocks=None,
        theta_init=None,
        n_bootstrap=1000,
        max_iter=200,
        tol=1e-6,
        gradient_tol=1e-5,
        workers=None,
        random_state=0,
    ):
        self.penalty_shape = penalty_shape
        self.penalty_scale = penalty_scale
        self.gamma = gamma
        self.alpha = alpha
        self.pseudo_samples = pseudo_samples
        self.adaptive_epsilon = adaptive_epsilon
        self.centering = centering
        self.restarts = restarts
        self.stopping_patience = stopping_patience
        self.init_blocks = init_blocks
        self.theta_init = theta_init
        self.n_bootstrap = n_bootstrap
        self.max_iter = max_iter
        self.tol = tol
        self.gradient_tol = gradient_tol
        self.workers = workers
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        self.classes_ = np.unique(y)
        if len(self.classes_) != 2:
            raise ConfigurationError(
                f"binary classifier needs exactly 2 classes, got {len(self.classes_)}"
            )
        labels = (y == self.classes_[1]).astype(float)
        gamma = self.gamma if self.gamma is not None else 1.0 / X.shape[0]
        model = ArdLogisticModel(
            n_features=X.shape[1],
            penalty=ArdPenalty(
                a=self.penalty_shape, b=self.penalty_scale, gamma=float(gamma)
            ),
        )
        atoms = np.column_stack([labels, X])
        centering: CenteringMeasure | None = self.centering
        if centering is None and self.alpha > 0:
            centering = ProductMeasure(
                (ParametricMeasure(Bernoulli(0.5)), EmpiricalMeasure(X))
            )
        optim = OptimConfig(
            max_iterations=self.max_iter,
            tolerance=self.tol,
            gradient_tolerance=self.gradient_tol,
        )
        self._run(model, atoms, centering, optim=optim)
        self.coef_ = self.samples_[:, : X.shape[1]].mean(axis=0).reshape(1, -1)
        self.intercept_ = self.samples_[:, X.shape[1] :].mean(axis=0)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "samples_")
        X = check_array(X, ensure_2d=True, dtype=float)
        positive = self.model_.positive_probability_matrix(self.samples_, X).mean(axis=0)
        return np.column_stack([1.0 - positive, positive])

    def predict(self, X):
        positive = self.predict_proba(X)[:, 1]
        return self.classes_[(positive > 0.5).astype(int)]

    def score_lppd(self, X, y):
        """Mean log posterior-predictive mass of the true labels."""
        check_is_fitted(self, "samples_")
        X, y = check_X_y(X, y, dtype=float)
        labels = (y == self.classes_[1]).astype(float)
        return mean_lppd(self.model_, self.samples_, np.column_stack([labels, X]))


class NPLLocation(_PosteriorBootstrapMixin, BaseEstimator):
    """Posterior over the mean functional of scalar data (exact closed form)."""

    def __init__(
        self,
        *,
        noise_variance=1.0,
        alpha=0.0,
        pseudo_samples=100,
        adaptive_epsilon=None,
        centering=None,
        n_bootstrap=1000,
        workers=None,
        random_state=0,
    ):
        self.noise_variance = noise_variance
        self.alpha = alpha
        self.pseudo_samples = pseudo_samples
        self.adaptive_epsilon = adaptive_epsilon
        self.centering = centering
        self.n_bootstrap = n_bootstrap
        self.workers = workers
        self.random_state = random_state

    # closed-form family: restart settings are irrelevant
    restarts = 1
    stopping_patience = None
    init_blocks = None
    theta_init = None

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[1] != 1:
            raise ConfigurationError("location model expects a single column")
        model = NormalLocationModel(noise_variance=self.noise_variance)
        self._run(model, X, self.centering)
        self.location_samples_ = self.samples_[:, 0]
        return self

    def score(self, X, y=None):
        check_is_fitted(self, "samples_")
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        return mean_lppd(self.model_, self.samples_, X)
