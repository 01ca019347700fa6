"""Posterior bootstrap sampling for nonparametric Bayesian learning.

Exact, independent posterior samples are drawn by minimizing randomly
weighted loss functions: a Dirichlet-process prior over the unknown data
distribution turns each posterior draw into one weighted optimization
problem, embarrassingly parallel across samples. Random-restart and
fixed-initialization variants handle multimodal posteriors.
"""

from .datasets import make_mixture_data, make_sparse_logistic_data
from .distributions import (
    Bernoulli,
    Dirichlet,
    Distribution,
    Gamma,
    InverseGamma,
    LogNormal,
    Normal,
    Uniform,
    VectorBlocks,
)
from .dp import (
    AdaptiveTruncation,
    CenteringMeasure,
    DpConfig,
    EmpiricalMeasure,
    FixedTruncation,
    ParametricMeasure,
    ProductMeasure,
    WeightedDataset,
    alpha_from_mean_variance,
    draw_dirichlet_weights,
    draw_dp_posterior_dataset,
    draw_gem_weights_adaptive,
)
from .errors import (
    ComponentCollapseError,
    ConfigurationError,
    DataFormatError,
    NpbootError,
    NumericalError,
)
from .estimators import NPLGaussianMixture, NPLLocation, NPLLogisticRegression
from .evaluate import (
    PosteriorSummary,
    PredictiveReport,
    SnisResult,
    SweepConfig,
    SweepResult,
    default_b_grid,
    mean_lppd,
    mse_and_accuracy,
    posterior_summary,
    snis_mean_lppd,
    sparsity_fraction,
    sparsity_path_sweep,
)
from .models import (
    ArdLogisticModel,
    ArdPenalty,
    GaussianMixtureModel,
    GmmParams,
    LossModel,
    NormalLocationModel,
    normal_location_minimizer,
)
from .optimize import (
    OptimConfig,
    OptimResult,
    minibatch_gradient,
    run_quasi_newton,
    run_weighted_em,
)
from .sampler import (
    FixedInit,
    NoImprovement,
    PosteriorSamples,
    RandomRestart,
    SamplerConfig,
    derive_sample_stream,
    posterior_bootstrap,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveTruncation",
    "ArdLogisticModel",
    "ArdPenalty",
    "Bernoulli",
    "CenteringMeasure",
    "ComponentCollapseError",
    "ConfigurationError",
    "DataFormatError",
    "Dirichlet",
    "Distribution",
    "DpConfig",
    "EmpiricalMeasure",
    "FixedInit",
    "FixedTruncation",
    "Gamma",
    "GaussianMixtureModel",
    "GmmParams",
    "InverseGamma",
    "LogNormal",
    "LossModel",
    "NPLGaussianMixture",
    "NPLLocation",
    "NPLLogisticRegression",
    "NoImprovement",
    "Normal",
    "NormalLocationModel",
    "NpbootError",
    "NumericalError",
    "OptimConfig",
    "OptimResult",
    "ParametricMeasure",
    "PosteriorSamples",
    "PosteriorSummary",
    "PredictiveReport",
    "ProductMeasure",
    "RandomRestart",
    "SamplerConfig",
    "SnisResult",
    "SweepConfig",
    "SweepResult",
    "Uniform",
    "VectorBlocks",
    "WeightedDataset",
    "alpha_from_mean_variance",
    "default_b_grid",
    "derive_sample_stream",
    "draw_dirichlet_weights",
    "draw_dp_posterior_dataset",
    "draw_gem_weights_adaptive",
    "make_mixture_data",
    "make_sparse_logistic_data",
    "mean_lppd",
    "minibatch_gradient",
    "mse_and_accuracy",
    "normal_location_minimizer",
    "posterior_bootstrap",
    "posterior_summary",
    "run_quasi_newton",
    "run_weighted_em",
    "snis_mean_lppd",
    "sparsity_fraction",
    "sparsity_path_sweep",
]
