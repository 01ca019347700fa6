"""Command-line front end.

Verbs: ``sample`` (run the posterior bootstrap and write an archive),
``evaluate`` (held-out metrics for an archive), ``sweep`` (penalty-scale
path), and ``ingest-check`` (validate a data file). Exit codes are stable:
0 success, 2 configuration error, 3 data error, 4 numerical failure,
5 partially failed sweep.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import evaluate as ev
from .distributions import (
    Bernoulli,
    Dirichlet,
    Gamma,
    InverseGamma,
    LogNormal,
    Normal,
    Uniform,
)
from .dp import (
    AdaptiveTruncation,
    DpConfig,
    EmpiricalMeasure,
    FixedTruncation,
    ParametricMeasure,
    ProductMeasure,
)
from .errors import ConfigurationError, DataFormatError, NumericalError
from .io import ingest_csv, metadata_path, read_archive, write_archive
from .models import ArdLogisticModel, ArdPenalty, GaussianMixtureModel, NormalLocationModel
from .sampler import FixedInit, NoImprovement, RandomRestart, SamplerConfig, posterior_bootstrap
from .optimize import OptimConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
EXIT_PARTIAL_SWEEP = 5

_DIST_BUILDERS = {
    "normal": lambda s: Normal(float(s.get("mean", 0.0)), float(s.get("sd", 1.0))),
    "uniform": lambda s: Uniform(float(s["low"]), float(s["high"])),
    "gamma": lambda s: Gamma(float(s.get("shape", 1.0)), float(s.get("scale", 1.0))),
    "inverse_gamma": lambda s: InverseGamma(
        float(s.get("shape", 1.0)), float(s.get("scale", 1.0))
    ),
    "lognormal": lambda s: LogNormal(float(s.get("mu", 0.0)), float(s.get("sigma", 1.0))),
    "bernoulli": lambda s: Bernoulli(float(s.get("p", 0.5))),
    "dirichlet": lambda s: Dirichlet(tuple(float(c) for c in s["concentration"])),
}


class _ConfigErrors:
    """Collects every config problem so they are all reported at once."""

    def __init__(self):
        self.problems: list[str] = []

    def add(self, field: str, message: str):
        self.problems.append(f"{field}: {message}")

    def raise_if_any(self):
        if self.problems:
            raise ConfigurationError(
                "invalid configuration:\n  " + "\n  ".join(self.problems)
            )


def _require(config: dict, field: str, errors: _ConfigErrors, context: str = ""):
    if field not in config:
        errors.add(f"{context}{field}", "missing required field")
        return None
    return config[field]


def _load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        config = yaml.safe_load(path.read_text())
    except yaml.YAMLError as err:
        raise ConfigurationError(f"config is not valid YAML: {err}")
    if not isinstance(config, dict):
        raise ConfigurationError("config must be a mapping")
    return config


def _validate_config(config: dict, need_sweep: bool = False):
    """Total validation pass: every problem is reported before any work."""
    errors = _ConfigErrors()

    model = _require(config, "model", errors)
    family = None
    if isinstance(model, dict):
        family = _require(model, "family", errors, "model.")
        if family not in (None, "gmm", "logistic", "normal_location"):
            errors.add("model.family", f"unknown family {family!r}")
        if family == "gmm":
            k = model.get("n_components")
            if not isinstance(k, int) or k < 1:
                errors.add("model.n_components", f"need a positive integer, got {k!r}")
            floor = model.get("variance_floor", 1e-6)
            if not isinstance(floor, (int, float)) or not floor > 0:
                errors.add("model.variance_floor", f"need a positive real, got {floor!r}")
        if family == "logistic":
            pen = model.get("penalty", {})
            if not isinstance(pen, dict):
                errors.add("model.penalty", "must be a mapping")
            else:
                for name, default in (("a", 1.0), ("b", 1.0)):
                    v = pen.get(name, default)
                    if not isinstance(v, (int, float)) or not v > 0:
                        errors.add(f"model.penalty.{name}", f"need a positive real, got {v!r}")
                g = pen.get("gamma")
                if g is not None and (not isinstance(g, (int, float)) or g < 0):
                    errors.add("model.penalty.gamma", f"need a nonnegative real, got {g!r}")
        if family == "normal_location":
            v = model.get("noise_variance", 1.0)
            if not isinstance(v, (int, float)) or not v > 0:
                errors.add("model.noise_variance", f"need a positive real, got {v!r}")
    elif model is not None:
        errors.add("model", "must be a mapping")

    data = _require(config, "data", errors)
    if isinstance(data, dict):
        _require(data, "path", errors, "data.")
        kind = data.get("kind", "features")
        if kind not in ("features", "labeled"):
            errors.add("data.kind", f"must be 'features' or 'labeled', got {kind!r}")
        if kind == "labeled" and not data.get("label_column"):
            errors.add("data.label_column", "required for labeled data")
        if family == "logistic" and kind != "labeled":
            errors.add("data.kind", "logistic models need labeled data")
    elif data is not None:
        errors.add("data", "must be a mapping")

    dp = config.get("dp", {})
    alpha = 0.0
    if isinstance(dp, dict):
        alpha = dp.get("alpha", 0.0)
        if not isinstance(alpha, (int, float)) or alpha < 0:
            errors.add("dp.alpha", f"need a nonnegative real, got {alpha!r}")
            alpha = 0.0
        trunc = dp.get("truncation", {"type": "fixed"})
        if not isinstance(trunc, dict) or trunc.get("type", "fixed") not in (
            "fixed",
            "adaptive",
        ):
            errors.add("dp.truncation.type", "must be 'fixed' or 'adaptive'")
        elif trunc.get("type", "fixed") == "fixed":
            t = trunc.get("n_pseudo", 100)
            if not isinstance(t, int) or t < 1:
                errors.add("dp.truncation.n_pseudo", f"need a positive integer, got {t!r}")
        else:
            eps = trunc.get("epsilon", 0.01)
            if not isinstance(eps, (int, float)) or not 0 < eps < 1:
                errors.add("dp.truncation.epsilon", f"need a real in (0, 1), got {eps!r}")
        centering = dp.get("centering")
        if alpha > 0 and centering is None:
            errors.add("dp.centering", "required when alpha > 0")
        if centering is not None:
            ctype = centering.get("type") if isinstance(centering, dict) else None
            if ctype not in ("normal", "uniform", "empirical", "label_covariate_product"):
                errors.add("dp.centering.type", f"unknown centering type {ctype!r}")
            if ctype == "empirical" and not centering.get("path"):
                errors.add("dp.centering.path", "empirical centering needs an atom file")
    else:
        errors.add("dp", "must be a mapping")

    restart = config.get("restart", {"type": "random"})
    if isinstance(restart, dict):
        rtype = restart.get("type", "random")
        if rtype not in ("random", "fixed"):
            errors.add("restart.type", f"must be 'random' or 'fixed', got {rtype!r}")
        if rtype == "random":
            r = restart.get("restarts", 10)
            if not isinstance(r, int) or r < 1:
                errors.add("restart.restarts", f"need a positive integer, got {r!r}")
            stopping = restart.get("stopping")
            if stopping is not None:
                m = stopping.get("patience") if isinstance(stopping, dict) else None
                if not isinstance(m, int) or m < 1:
                    errors.add("restart.stopping.patience", f"need a positive integer, got {m!r}")
            init = restart.get("init")
            if init is not None:
                if not isinstance(init, dict):
                    errors.add("restart.init", "must map block names to distributions")
                else:
                    for block, spec in init.items():
                        if not isinstance(spec, dict) or spec.get("dist") not in _DIST_BUILDERS:
                            errors.add(
                                f"restart.init.{block}",
                                f"unknown distribution spec {spec!r}",
                            )
        if rtype == "fixed" and "theta" not in restart and "theta_path" not in restart:
            errors.add("restart.theta", "fixed initialization needs theta or theta_path")
    else:
        errors.add("restart", "must be a mapping")

    sampler = config.get("sampler", {})
    if isinstance(sampler, dict):
        b = sampler.get("n_samples", 1000)
        if not isinstance(b, int) or b < 1:
            errors.add("sampler.n_samples", f"need a positive integer, got {b!r}")
        seed = sampler.get("master_seed", 0)
        if not isinstance(seed, int):
            errors.add("sampler.master_seed", f"need an integer, got {seed!r}")
        workers = sampler.get("workers", "auto")
        if workers != "auto" and (not isinstance(workers, int) or workers < 1):
            errors.add("sampler.workers", f"need 'auto' or a positive integer, got {workers!r}")
    else:
        errors.add("sampler", "must be a mapping")

    optim = config.get("optimize", {})
    if isinstance(optim, dict):
        for name in ("max_iterations",):
            if name in optim and (not isinstance(optim[name], int) or optim[name] < 1):
                errors.add(f"optimize.{name}", "need a positive integer")
        for name in ("tolerance", "gradient_tolerance", "em_variance_floor"):
            if name in optim and (
                not isinstance(optim[name], (int, float)) or not optim[name] > 0
            ):
                errors.add(f"optimize.{name}", "need a positive real")
    else:
        errors.add("optimize", "must be a mapping")

    if need_sweep:
        sweep = _require(config, "sweep", errors)
        if isinstance(sweep, dict):
            a = sweep.get("a", 1.0)
            if not isinstance(a, (int, float)) or not a > 0:
                errors.add("sweep.a", f"need a positive real, got {a!r}")
            grid = sweep.get("grid", {})
            if isinstance(grid, dict) and "values" in grid:
                values = grid["values"]
                ok = isinstance(values, list) and values and all(
                    isinstance(v, (int, float)) and v > 0 for v in values
                )
                if not ok:
                    errors.add("sweep.grid.values", "need a non-empty list of positive reals")
            elif isinstance(grid, dict):
                count = grid.get("count", 450)
                decay = grid.get("decay", 0.98)
                if not isinstance(count, int) or count < 1:
                    errors.add("sweep.grid.count", f"need a positive integer, got {count!r}")
                if not isinstance(decay, (int, float)) or not 0 < decay < 1:
                    errors.add("sweep.grid.decay", f"need a real in (0, 1), got {decay!r}")
            else:
                errors.add("sweep.grid", "must be a mapping")
            spp = sweep.get("samples_per_point", 4000)
            if not isinstance(spp, int) or spp < 1:
                errors.add("sweep.samples_per_point", f"need a positive integer, got {spp!r}")
        elif sweep is not None:
            errors.add("sweep", "must be a mapping")
        if family is not None and family != "logistic":
            errors.add("model.family", "sweep requires the logistic family")

    errors.raise_if_any()


def _build_distribution(spec: dict):
    return _DIST_BUILDERS[spec["dist"]]({k: v for k, v in spec.items() if k != "dist"})


def _build_centering(spec: dict, atoms: np.ndarray, n_dims: int):
    ctype = spec["type"]
    if ctype == "normal":
        return ParametricMeasure(
            Normal(float(spec.get("mean", 0.0)), float(spec.get("sd", 1.0))),
            n_dims=n_dims,
        )
    if ctype == "uniform":
        return ParametricMeasure(
            Uniform(float(spec["low"]), float(spec["high"])), n_dims=n_dims
        )
    if ctype == "empirical":
        data, _ = ingest_csv(spec["path"], kind="features")
        return EmpiricalMeasure(data)
    # label_covariate_product: independent label times empirical covariates,
    # estimated from the training covariates.
    return ProductMeasure(
        (
            ParametricMeasure(Bernoulli(float(spec.get("positive_rate", 0.5)))),
            EmpiricalMeasure(atoms[:, 1:]),
        )
    )


def _build_run(config: dict, seed_override, workers_override):
    """Turn a validated config into (model, atoms, centering, dp, policy, sampler, optim)."""
    data_spec = config["data"]
    kind = data_spec.get("kind", "features")
    atoms, columns = ingest_csv(
        data_spec["path"],
        kind=kind,
        label_column=data_spec.get("label_column"),
    )
    scaler = None
    if data_spec.get("standardize", False):
        features = atoms[:, 1:] if kind == "labeled" else atoms
        names = columns[1:] if kind == "labeled" else columns
        sd = features.std(axis=0)
        constant = np.nonzero(sd == 0)[0]
        if constant.size:
            raise DataFormatError(
                f"cannot standardize constant column {names[constant[0]]!r}"
            )
        mean = features.mean(axis=0)
        features = (features - mean) / sd
        scaler = {"mean": mean.tolist(), "sd": sd.tolist()}
        if kind == "labeled":
            atoms = np.column_stack([atoms[:, 0], features])
        else:
            atoms = features

    model_spec = config["model"]
    family = model_spec["family"]
    if family == "gmm":
        model = GaussianMixtureModel(
            n_components=model_spec["n_components"],
            n_features=atoms.shape[1],
            variance_floor=float(model_spec.get("variance_floor", 1e-6)),
        )
    elif family == "normal_location":
        if atoms.shape[1] != 1:
            raise DataFormatError(
                f"normal location expects one feature column, got {atoms.shape[1]}"
            )
        model = NormalLocationModel(float(model_spec.get("noise_variance", 1.0)))
    else:
        pen = model_spec.get("penalty", {})
        gamma = pen.get("gamma")
        if gamma is None:
            gamma = 1.0 / atoms.shape[0]
        model = ArdLogisticModel(
            n_features=atoms.shape[1] - 1,
            penalty=ArdPenalty(
                a=float(pen.get("a", 1.0)), b=float(pen.get("b", 1.0)), gamma=float(gamma)
            ),
        )

    dp_spec = config.get("dp", {})
    alpha = float(dp_spec.get("alpha", 0.0))
    trunc_spec = dp_spec.get("truncation", {"type": "fixed"})
    if trunc_spec.get("type", "fixed") == "fixed":
        truncation = FixedTruncation(int(trunc_spec.get("n_pseudo", 100)))
    else:
        truncation = AdaptiveTruncation(float(trunc_spec.get("epsilon", 0.01)))
    dp = DpConfig(alpha=alpha, truncation=truncation)
    centering = None
    if alpha > 0:
        centering = _build_centering(dp_spec["centering"], atoms, atoms.shape[1])

    restart_spec = config.get("restart", {"type": "random"})
    if restart_spec.get("type", "random") == "fixed":
        if "theta" in restart_spec:
            theta = np.asarray(restart_spec["theta"], dtype=float)
        else:
            theta, _ = ingest_csv(restart_spec["theta_path"], kind="features")
            theta = theta[0]
        policy = FixedInit(theta)
    else:
        stopping_spec = restart_spec.get("stopping")
        init_spec = restart_spec.get("init")
        policy = RandomRestart(
            restarts=int(restart_spec.get("restarts", 10)),
            init_blocks=(
                None
                if init_spec is None
                else {b: _build_distribution(s) for b, s in init_spec.items()}
            ),
            stopping=(
                None
                if stopping_spec is None
                else NoImprovement(int(stopping_spec["patience"]))
            ),
        )

    sampler_spec = config.get("sampler", {})
    workers = sampler_spec.get("workers", "auto")
    if workers_override is not None:
        workers = workers_override
    sampler = SamplerConfig(
        n_samples=int(sampler_spec.get("n_samples", 1000)),
        master_seed=int(
            seed_override if seed_override is not None else sampler_spec.get("master_seed", 0)
        ),
        workers=None if workers == "auto" else int(workers),
    )

    optim_spec = config.get("optimize", {})
    optim = None
    if optim_spec:
        defaults = OptimConfig(max_iterations=500 if model.has_em_step else 200)
        optim = OptimConfig(
            max_iterations=int(optim_spec.get("max_iterations", defaults.max_iterations)),
            tolerance=float(optim_spec.get("tolerance", defaults.tolerance)),
            gradient_tolerance=float(
                optim_spec.get("gradient_tolerance", defaults.gradient_tolerance)
            ),
            em_variance_floor=float(
                optim_spec.get("em_variance_floor", defaults.em_variance_floor)
            ),
        )

    resolved = {
        "family": family,
        "model": _model_sidecar(model),
        "data": {
            "path": str(data_spec["path"]),
            "kind": kind,
            "label_column": data_spec.get("label_column"),
            "standardize": bool(data_spec.get("standardize", False)),
            "scaler": scaler,
            "columns": columns,
        },
        "dp": {
            "alpha": alpha,
            "truncation": (
                {"type": "fixed", "n_pseudo": truncation.n_pseudo}
                if isinstance(truncation, FixedTruncation)
                else {"type": "adaptive", "epsilon": truncation.epsilon}
            ),
        },
        "restart": restart_spec,
        "sampler": {
            "n_samples": sampler.n_samples,
            "master_seed": sampler.master_seed,
            "workers": workers,
        },
    }
    return model, atoms, centering, dp, policy, sampler, optim, resolved


def _model_sidecar(model) -> dict:
    if isinstance(model, GaussianMixtureModel):
        return {
            "family": "gmm",
            "n_components": model.n_components,
            "n_features": model.n_features,
            "variance_floor": model.variance_floor,
        }
    if isinstance(model, NormalLocationModel):
        return {"family": "normal_location", "noise_variance": model.noise_variance}
    return {
        "family": "logistic",
        "n_features": model.n_features,
        "penalty": {
            "a": model.penalty.a,
            "b": model.penalty.b,
            "gamma": model.penalty.gamma,
        },
    }


def _model_from_sidecar(spec: dict):
    family = spec["family"]
    if family == "gmm":
        return GaussianMixtureModel(
            n_components=int(spec["n_components"]),
            n_features=int(spec["n_features"]),
            variance_floor=float(spec["variance_floor"]),
        )
    if family == "normal_location":
        return NormalLocationModel(float(spec["noise_variance"]))
    pen = spec["penalty"]
    return ArdLogisticModel(
        n_features=int(spec["n_features"]),
        penalty=ArdPenalty(a=float(pen["a"]), b=float(pen["b"]), gamma=float(pen["gamma"])),
    )


def _cmd_sample(args) -> int:
    config = _load_config(args.config)
    _validate_config(config)
    model, atoms, centering, dp, policy, sampler, optim, resolved = _build_run(
        config, args.seed, args.workers
    )
    result = posterior_bootstrap(model, atoms, centering, dp, policy, sampler, optim=optim)
    out = Path(args.out if args.out else "samples.csv")
    write_archive(out, result, extra_metadata=resolved)
    print(
        f"wrote {result.n_samples} samples x {result.param_dim} parameters to {out} "
        f"({len(result.failures)} failed)"
    )
    return EXIT_OK


def _apply_scaler(test_atoms, data_cfg):
    scaler = data_cfg.get("scaler")
    if not scaler:
        return test_atoms
    mean = np.asarray(scaler["mean"])
    sd = np.asarray(scaler["sd"])
    if data_cfg.get("kind") == "labeled":
        features = (test_atoms[:, 1:] - mean) / sd
        return np.column_stack([test_atoms[:, 0], features])
    return (test_atoms - mean) / sd


def _cmd_evaluate(args) -> int:
    matrix, _, sidecar = read_archive(args.archive)
    config = sidecar.get("config", {})
    model_spec = config.get("model")
    if not model_spec:
        raise ConfigurationError(
            f"archive sidecar {metadata_path(args.archive)} is missing the model block"
        )
    model = _model_from_sidecar(model_spec)
    data_cfg = config.get("data", {})
    kind = data_cfg.get("kind", "features")
    test_atoms, _ = ingest_csv(
        args.test, kind=kind, label_column=data_cfg.get("label_column")
    )
    test_atoms = _apply_scaler(test_atoms, data_cfg)
    if test_atoms.shape[1] != model.atom_width:
        raise DataFormatError(
            f"test atoms have {test_atoms.shape[1]} columns, model expects "
            f"{model.atom_width}"
        )

    report = {"mean_lppd": ev.mean_lppd(model, matrix, test_atoms), "n_test": len(test_atoms)}
    if isinstance(model, ArdLogisticModel):
        mse, accuracy = ev.mse_and_accuracy(model, matrix, test_atoms)
        report["mse"] = mse
        report["accuracy_percent"] = accuracy
        report["sparsity_percent"] = ev.sparsity_fraction(model, matrix, args.epsilon)
        report["sparsity_epsilon"] = args.epsilon
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    _validate_config(config, need_sweep=True)
    model, atoms, centering, dp, policy, sampler, optim, resolved = _build_run(
        config, args.seed, args.workers
    )
    sweep_spec = config["sweep"]
    grid_spec = sweep_spec.get("grid", {})
    if "values" in grid_spec:
        grid = np.asarray(grid_spec["values"], dtype=float)
    else:
        grid = ev.default_b_grid(
            count=int(grid_spec.get("count", 450)),
            decay=float(grid_spec.get("decay", 0.98)),
        )
    sweep = ev.SweepConfig(
        a=float(sweep_spec.get("a", 1.0)),
        b_grid=grid,
        samples_per_point=int(sweep_spec.get("samples_per_point", 4000)),
    )
    result = ev.sparsity_path_sweep(
        model, atoms, dp, policy, sweep, sampler, centering=centering, optim=optim
    )
    out = Path(args.out if args.out else "sweep.csv")
    lines = ["t,b,log_c,coefficient,median,lower80,upper80,status"]
    for t in range(result.b_grid.size):
        status = result.statuses[t]
        for j in range(result.medians.shape[1]):
            lines.append(
                ",".join(
                    [
                        str(t + 1),
                        format(result.b_grid[t], ".17g"),
                        format(result.log_c[t], ".17g"),
                        str(j + 1),
                        format(result.medians[t, j], ".17g"),
                        format(result.lower[t, j], ".17g"),
                        format(result.upper[t, j], ".17g"),
                        status,
                    ]
                )
            )
    out.write_text("\n".join(lines) + "\n")
    metadata_path(out).write_text(
        json.dumps({"config": resolved, "n_failed": result.n_failed}, indent=2, sort_keys=True)
    )
    print(f"wrote sweep over {result.b_grid.size} grid points to {out} ({result.n_failed} failed)")
    return EXIT_PARTIAL_SWEEP if result.n_failed else EXIT_OK


def _cmd_ingest_check(args) -> int:
    atoms, columns = ingest_csv(
        args.data,
        kind=args.kind,
        label_column=args.label_column,
        standardize=args.standardize,
    )
    print(
        json.dumps(
            {"rows": int(atoms.shape[0]), "columns": int(atoms.shape[1]), "names": columns},
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def _workers_default():
    env = os.environ.get("NPL_WORKERS")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigurationError(f"NPL_WORKERS must be an integer, got {env!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npboot",
        description="Posterior bootstrap sampling, evaluation and sparsity sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sample = sub.add_parser("sample", help="run the posterior bootstrap, write an archive")
    sample.add_argument("--config", required=True, help="YAML experiment config")
    sample.add_argument("--seed", type=int, default=None, help="override the master seed")
    sample.add_argument("--workers", type=int, default=None, help="worker process count")
    sample.add_argument("--out", default=None, help="archive path (default samples.csv)")

    evaluate = sub.add_parser("evaluate", help="held-out metrics for an archive")
    evaluate.add_argument("archive", help="sample archive written by 'sample'")
    evaluate.add_argument("test", help="held-out data CSV (same schema as training)")
    evaluate.add_argument("--epsilon", type=float, default=0.1, help="sparsity threshold")
    evaluate.add_argument("--out", default=None, help="also write the report here")

    sweep = sub.add_parser("sweep", help="penalty-scale sweep for the logistic family")
    sweep.add_argument("--config", required=True, help="YAML experiment config with a sweep block")
    sweep.add_argument("--seed", type=int, default=None, help="override the master seed")
    sweep.add_argument("--workers", type=int, default=None, help="worker process count")
    sweep.add_argument("--out", default=None, help="sweep table path (default sweep.csv)")

    check = sub.add_parser("ingest-check", help="validate a data file")
    check.add_argument("data", help="CSV file to validate")
    check.add_argument("--kind", choices=("features", "labeled"), default="features")
    check.add_argument("--label-column", default=None)
    check.add_argument("--standardize", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "workers", None) is None and hasattr(args, "workers"):
            args.workers = _workers_default()
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_ingest_check(args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
