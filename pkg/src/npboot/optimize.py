"""Local minimization of weighted losses.

Three drivers: a weighted EM loop for mixture models, a limited-memory
quasi-Newton wrapper (scipy's L-BFGS-B, unconstrained) for smooth penalized
losses, and an unbiased mini-batch gradient for stochastic subsampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .dp import WeightedDataset
from .errors import ComponentCollapseError, ConfigurationError
from .models import GaussianMixtureModel, GmmParams, LossModel

__all__ = [
    "OptimConfig",
    "OptimResult",
    "DEFAULT_EM_CONFIG",
    "DEFAULT_QUASI_NEWTON_CONFIG",
    "run_weighted_em",
    "run_quasi_newton",
    "minibatch_gradient",
]

_QUASI_NEWTON_MEMORY = 10


@dataclass(frozen=True)
class OptimConfig:
    """Stopping controls shared by the optimizer drivers.

    ``tolerance`` is a relative objective-change stop; ``gradient_tolerance``
    is a sup-norm stop for gradient methods; ``em_variance_floor`` clamps
    mixture variances during EM.
    """

    max_iterations: int = 500
    tolerance: float = 1e-6
    gradient_tolerance: float = 1e-5
    em_variance_floor: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        for name in ("tolerance", "gradient_tolerance", "em_variance_floor"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0")


DEFAULT_EM_CONFIG = OptimConfig(max_iterations=500)
DEFAULT_QUASI_NEWTON_CONFIG = OptimConfig(max_iterations=200)


@dataclass(frozen=True)
class OptimResult:
    theta: np.ndarray
    objective: float
    iterations: int
    converged: bool


def run_weighted_em(
    model: GaussianMixtureModel,
    dataset: WeightedDataset,
    init: GmmParams | np.ndarray,
    config: OptimConfig = DEFAULT_EM_CONFIG,
) -> OptimResult:
    """Iterate weighted EM until the relative log-likelihood gain is small.

    The weighted log-likelihood cannot decrease across a step, so the trace
    of reported objectives (its negation) is non-increasing. The returned
    objective is the weighted negative log-likelihood of the final
    parameters, recomputed exactly.
    """
    params = init if isinstance(init, GmmParams) else model.unpack(init)
    # Init variances below the floor are raised to it, mirroring the M-step.
    params = GmmParams(
        params.mixing,
        params.means,
        np.maximum(params.variances, config.em_variance_floor),
    )
    params.validate(config.em_variance_floor)
    model.check_dataset(dataset)

    y = dataset.atoms
    y_squared = y * y
    state = (params.mixing, params.means, params.variances)
    previous = None
    converged = False
    iterations = config.max_iterations
    # sweep t computes the log-likelihood of the parameters after t-1 steps,
    # so one extra evaluation-only sweep closes the convergence check at the cap
    for step in range(1, config.max_iterations + 2):
        at_cap = step == config.max_iterations + 1
        try:
            log_lik, updated = model._em_sweep(
                *state, y, y_squared, dataset.weights,
                config.em_variance_floor, update=not at_cap,
            )
        except ComponentCollapseError as err:
            raise ComponentCollapseError(
                f"EM iteration {step}: {err}", component=err.component
            ) from err
        if previous is not None:
            gain = log_lik - previous
            if gain <= config.tolerance * max(abs(log_lik), abs(previous), 1e-12):
                converged = True
                iterations = step - 1
                break
        if at_cap:
            break
        previous = log_lik
        state = updated
    return OptimResult(
        theta=GmmParams(*state).to_vector(),
        objective=float(-log_lik),
        iterations=iterations,
        converged=converged,
    )


def run_quasi_newton(
    model: LossModel,
    dataset: WeightedDataset,
    init: np.ndarray,
    config: OptimConfig = DEFAULT_QUASI_NEWTON_CONFIG,
) -> OptimResult:
    """Limited-memory quasi-Newton descent on a smooth weighted loss.

    Wraps scipy's L-BFGS-B with no bounds and memory length 10. Stops on
    the sup-norm gradient test, the relative objective-change test, or the
    iteration cap; a failed line search surfaces as ``converged=False`` with
    the best iterate found. The result never exceeds the initial objective.
    """
    if not model.has_gradient:
        raise ConfigurationError(f"{type(model).__name__} exposes no gradient")
    init = np.asarray(init, dtype=float)
    if init.shape != (model.param_dim,) or not np.all(np.isfinite(init)):
        raise ConfigurationError("init must be a finite vector of the model dimension")
    initial_objective = model.weighted_loss(init, dataset)

    result = minimize(
        lambda theta: model.weighted_loss(theta, dataset),
        init,
        jac=lambda theta: model.weighted_gradient(theta, dataset),
        method="L-BFGS-B",
        options={
            "maxiter": config.max_iterations,
            "maxcor": _QUASI_NEWTON_MEMORY,
            "ftol": config.tolerance,
            "gtol": config.gradient_tolerance,
        },
    )
    objective = model.weighted_loss(result.x, dataset)
    if not np.isfinite(objective) or objective > initial_objective:
        return OptimResult(
            theta=init,
            objective=float(initial_objective),
            iterations=int(result.nit),
            converged=False,
        )
    return OptimResult(
        theta=np.asarray(result.x, dtype=float),
        objective=float(objective),
        iterations=int(result.nit),
        converged=bool(result.success),
    )


def minibatch_gradient(
    model: LossModel,
    theta: np.ndarray,
    dataset: WeightedDataset,
    batch_size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Unbiased subsampled gradient of the weighted loss.

    Draws ``batch_size`` atoms i.i.d. from the categorical distribution the
    weights define and averages their per-atom gradients; the expectation
    equals the full weighted gradient.
    """
    if batch_size < 1:
        raise ConfigurationError("batch_size must be >= 1")
    idx = rng.choice(len(dataset.weights), size=batch_size, p=dataset.weights)
    batch = WeightedDataset(
        atoms=dataset.atoms[idx],
        weights=np.full(batch_size, 1.0 / batch_size),
        n_observed=batch_size,
    )
    return model.weighted_gradient(theta, batch)
