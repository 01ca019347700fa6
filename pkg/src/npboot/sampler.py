"""The posterior bootstrap: independent posterior samples by randomized optimization.

Each of the B samples draws one weighted dataset from the posterior DP and
minimizes the weighted loss over it, either from R random initializations
(keeping the best restart, for full multimodal exploration) or from one
fixed initialization (to stay inside a chosen mode). Samples are seeded
individually from the master seed, so the output is a pure function of the
configuration: any worker count, including serial execution, produces
bit-identical results.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Mapping

import numpy as np

from .distributions import Distribution, VectorBlocks
from .dp import CenteringMeasure, DpConfig, WeightedDataset, draw_dp_posterior_dataset
from .errors import ConfigurationError, NumericalError
from .models import LossModel
from .optimize import (
    DEFAULT_EM_CONFIG,
    DEFAULT_QUASI_NEWTON_CONFIG,
    OptimConfig,
    OptimResult,
    run_quasi_newton,
    run_weighted_em,
)

__all__ = [
    "NoImprovement",
    "RandomRestart",
    "FixedInit",
    "SamplerConfig",
    "PosteriorSamples",
    "posterior_bootstrap",
    "derive_sample_stream",
]

DEFAULT_RESTARTS = 10
_MAX_SAMPLE_RETRIES = 3
_FAILURE_FRACTION_ABORT = 0.01


@dataclass(frozen=True)
class NoImprovement:
    """Stop restarting after ``patience`` repeats without a better objective."""

    patience: int

    def __post_init__(self):
        if self.patience < 1:
            raise ConfigurationError("patience must be >= 1")


@dataclass(frozen=True)
class RandomRestart:
    """R local optimizations from fresh initialization draws per sample.

    ``init_blocks`` maps every parameter block of the model to a proper
    distribution; ``None`` falls back to the model's defaults. The restart
    with the lowest weighted loss wins, ties broken by the lowest restart
    index.
    """

    restarts: int = DEFAULT_RESTARTS
    init_blocks: Mapping[str, Distribution] | None = None
    stopping: NoImprovement | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ConfigurationError("restarts must be >= 1")


@dataclass(frozen=True)
class FixedInit:
    """One local optimization per sample, always from the same start point."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 1 or not np.all(np.isfinite(theta)):
            raise ConfigurationError("theta must be a finite 1-D vector")
        object.__setattr__(self, "theta", theta)


RestartPolicy = RandomRestart | FixedInit


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 1000
    master_seed: int = 0
    workers: int | None = None  # None means one worker per CPU

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise ConfigurationError("workers must be >= 1 when given")

    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else (os.cpu_count() or 1)


@dataclass(frozen=True)
class PosteriorSamples:
    """B posterior parameter vectors with per-sample run records.

    ``sample_indices[i]`` is the 1-based index that seeded row ``i`` (gaps
    mark failed samples, which are listed in ``failures``).
    """

    samples: np.ndarray  # (B_ok, p)
    objectives: np.ndarray  # (B_ok,)
    restart_indices: np.ndarray  # (B_ok,) chosen restart, 0-based
    sample_indices: np.ndarray  # (B_ok,) 1-based seed index
    failures: tuple[tuple[int, str], ...] = ()
    metadata: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def param_dim(self) -> int:
        return self.samples.shape[1]


def derive_sample_stream(master_seed: int, sample_index: int) -> np.random.Generator:
    """Reproducible, statistically independent stream for one sample.

    Built from a seed sequence over ``(master_seed, sample_index)``, so the
    stream depends only on those two integers, never on scheduling or
    worker count.
    """
    return _derive_stream(master_seed, (sample_index,))


def _derive_stream(master_seed: int, path: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(master_seed), *path)))


def _init_vector_sampler(model: LossModel, policy: RandomRestart) -> VectorBlocks:
    blocks = model.param_blocks()
    provided = dict(policy.init_blocks) if policy.init_blocks is not None else None
    if provided is None:
        provided = model.default_init_blocks()
    missing = [name for name, _ in blocks if name not in provided]
    if missing:
        raise ConfigurationError(
            f"init_blocks missing parameter block(s): {', '.join(missing)}"
        )
    unknown = sorted(set(provided) - {name for name, _ in blocks})
    if unknown:
        raise ConfigurationError(
            f"init_blocks name(s) not in the model layout: {', '.join(unknown)}"
        )
    return VectorBlocks(
        tuple((name, provided[name], width) for name, width in blocks)
    )


def _local_optimize(
    model: LossModel,
    dataset: WeightedDataset,
    init: np.ndarray | None,
    optim: OptimConfig,
) -> OptimResult:
    if model.has_closed_form:
        theta = model.closed_form_minimizer(dataset)
        return OptimResult(
            theta=theta,
            objective=float(model.weighted_loss(theta, dataset)),
            iterations=0,
            converged=True,
        )
    if init is None:
        raise ConfigurationError("model without a closed form needs an init vector")
    if model.has_em_step:
        return run_weighted_em(model, dataset, init, optim)
    return run_quasi_newton(model, dataset, init, optim)


def _optimize_under_policy(
    model: LossModel,
    dataset: WeightedDataset,
    policy: RestartPolicy,
    rng: np.random.Generator,
    optim: OptimConfig,
    perturb: bool,
) -> tuple[np.ndarray, float, int]:
    """Run the restart policy once; returns (theta, objective, restart index).

    ``perturb`` switches a fixed initialization to a jittered copy; it is
    only set on retry passes after every restart of a sample failed.
    """
    if isinstance(policy, FixedInit):
        init = policy.theta
        if perturb:
            init = init + rng.normal(scale=0.05 * (1.0 + np.abs(init)))
        result = _local_optimize(model, dataset, init, optim)
        return result.theta, result.objective, 0

    init_sampler = _init_vector_sampler(model, policy)
    best: OptimResult | None = None
    best_restart = -1
    since_improvement = 0
    last_error: NumericalError | None = None
    for restart in range(policy.restarts):
        if (
            policy.stopping is not None
            and best is not None
            and since_improvement >= policy.stopping.patience
        ):
            break
        init = init_sampler.sample(rng)
        try:
            result = _local_optimize(model, dataset, init, optim)
        except NumericalError as err:
            last_error = err
            since_improvement += 1
            continue
        if best is None or result.objective < best.objective:
            best = result
            best_restart = restart
            since_improvement = 0
        else:
            since_improvement += 1
    if best is None:
        raise NumericalError(
            f"all {policy.restarts} restart(s) failed; last error: {last_error}"
        )
    return best.theta, best.objective, best_restart


@dataclass(frozen=True)
class _SamplePlan:
    """Everything a worker needs; shipped once per task chunk."""

    model: LossModel
    data: np.ndarray
    centering: CenteringMeasure | None
    dp: DpConfig
    policy: RestartPolicy
    optim: OptimConfig
    master_seed: int
    seed_path: tuple[int, ...]


def _run_sample(plan: _SamplePlan, index: int):
    rng = _derive_stream(plan.master_seed, (*plan.seed_path, index))
    dataset = draw_dp_posterior_dataset(plan.data, plan.centering, plan.dp, rng)
    last_error = None
    for attempt in range(1 + _MAX_SAMPLE_RETRIES):
        attempt_rng = (
            rng
            if attempt == 0
            else _derive_stream(plan.master_seed, (*plan.seed_path, index, attempt))
        )
        try:
            theta, objective, restart = _optimize_under_policy(
                plan.model,
                dataset,
                plan.policy,
                attempt_rng,
                plan.optim,
                perturb=attempt > 0,
            )
            return index, theta, objective, restart, None
        except NumericalError as err:
            last_error = err
    return index, None, None, None, f"{last_error}"


def _run_sample_batch(plan: _SamplePlan, indices: list[int]):
    return [_run_sample(plan, i) for i in indices]


def _chunked(indices, n_chunks):
    size = max(1, -(-len(indices) // n_chunks))
    return [indices[i : i + size] for i in range(0, len(indices), size)]


def posterior_bootstrap(
    model: LossModel,
    data: np.ndarray,
    centering: CenteringMeasure | None,
    dp: DpConfig,
    policy: RestartPolicy,
    config: SamplerConfig,
    optim: OptimConfig | None = None,
    seed_path: tuple[int, ...] = (),
) -> PosteriorSamples:
    """Draw B independent posterior samples by randomized weighted optimization.

    For each sample index i (1-based), a private stream is derived from
    ``(master_seed, *seed_path, i)``; the weighted dataset is drawn once per
    sample and the restart policy varies only the initialization. A sample
    whose every restart fails numerically is retried from perturbed
    initializations (fresh sub-stream, same weights) up to 3 times, then
    recorded as failed; more than 1% failed samples aborts the run.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[0] == 0:
        raise ConfigurationError("data must be non-empty")
    if data.shape[1] != model.atom_width:
        raise ConfigurationError(
            f"data atoms have width {data.shape[1]}, model expects {model.atom_width}"
        )
    if isinstance(policy, FixedInit) and policy.theta.shape != (model.param_dim,):
        raise ConfigurationError(
            f"fixed init has length {policy.theta.shape[0]}, "
            f"model has {model.param_dim} parameters"
        )
    if isinstance(policy, RandomRestart):
        _init_vector_sampler(model, policy)  # validate block coverage up front
    if optim is None:
        optim = DEFAULT_EM_CONFIG if model.has_em_step else DEFAULT_QUASI_NEWTON_CONFIG

    plan = _SamplePlan(
        model=model,
        data=data,
        centering=centering,
        dp=dp,
        policy=policy,
        optim=optim,
        master_seed=config.master_seed,
        seed_path=tuple(int(t) for t in seed_path),
    )
    indices = list(range(1, config.n_samples + 1))
    workers = config.resolved_workers()
    started = time.perf_counter()
    if workers == 1:
        outcomes = _run_sample_batch(plan, indices)
    else:
        chunks = _chunked(indices, workers * 8)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = pool.map(partial(_run_sample_batch, plan), chunks)
            outcomes = [outcome for batch in batches for outcome in batch]
    elapsed = time.perf_counter() - started

    kept = [o for o in outcomes if o[4] is None]
    failures = tuple((o[0], o[4]) for o in outcomes if o[4] is not None)
    if len(failures) > _FAILURE_FRACTION_ABORT * config.n_samples:
        raise NumericalError(
            f"{len(failures)} of {config.n_samples} samples failed "
            f"(> {_FAILURE_FRACTION_ABORT:.0%}); first failure: {failures[0]}"
        )
    if not kept:
        raise NumericalError("every sample failed")
    return PosteriorSamples(
        samples=np.array([o[1] for o in kept]),
        objectives=np.array([o[2] for o in kept]),
        restart_indices=np.array([o[3] for o in kept], dtype=int),
        sample_indices=np.array([o[0] for o in kept], dtype=int),
        failures=failures,
        metadata={
            "model": type(model).__name__,
            "param_names": model.param_names(),
            "n_requested": config.n_samples,
            "master_seed": config.master_seed,
            "seed_path": list(plan.seed_path),
            "workers": workers,
            "elapsed_seconds": elapsed,
        },
    )
