"""Small vocabulary of named distributions.

These back three distinct roles: prior centering measures, per-block
initialization samplers for random restarts, and prior/proposal densities
for importance sampling. Everything is a frozen dataclass so instances
can be shared freely across worker processes.

All ``sample`` methods take an explicit ``numpy.random.Generator``; no
global random state is touched anywhere in the package.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import ConfigurationError

__all__ = [
    "Distribution",
    "Normal",
    "Uniform",
    "Bernoulli",
    "Gamma",
    "InverseGamma",
    "LogNormal",
    "Dirichlet",
    "VectorBlocks",
]


class Distribution(abc.ABC):
    """A scalar (or simplex-valued) distribution with i.i.d. sampling.

    ``log_density``, ``mean`` and ``variance`` are optional and raise
    ``NotImplementedError`` where the quantity is undefined or unneeded.
    """

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw ``size`` i.i.d. values (a single value when ``size=None``)."""

    def log_density(self, x):
        raise NotImplementedError(f"{type(self).__name__} has no log-density")

    def mean(self):
        raise NotImplementedError

    def variance(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Normal(Distribution):
    loc: float = 0.0
    scale: float = 1.0  # standard deviation

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigurationError(f"Normal scale must be > 0, got {self.scale}")

    def sample(self, rng, size=None):
        return rng.normal(self.loc, self.scale, size=size)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.loc) / self.scale
        return -0.5 * z * z - math.log(self.scale) - 0.5 * math.log(2.0 * math.pi)

    def mean(self):
        return self.loc

    def variance(self):
        return self.scale**2


@dataclass(frozen=True)
class Uniform(Distribution):
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if not self.low < self.high:
            raise ConfigurationError(
                f"Uniform requires low < high, got [{self.low}, {self.high}]"
            )

    def sample(self, rng, size=None):
        return rng.uniform(self.low, self.high, size=size)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.low) & (x <= self.high)
        return np.where(inside, -math.log(self.high - self.low), -np.inf)

    def mean(self):
        return 0.5 * (self.low + self.high)

    def variance(self):
        return (self.high - self.low) ** 2 / 12.0


@dataclass(frozen=True)
class Bernoulli(Distribution):
    p: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigurationError(f"Bernoulli p must lie in [0, 1], got {self.p}")

    def sample(self, rng, size=None):
        draws = (rng.random(size) < self.p).astype(float)
        return float(draws) if size is None else draws

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        return xlogy(x, self.p) + xlogy(1.0 - x, 1.0 - self.p)

    def mean(self):
        return self.p

    def variance(self):
        return self.p * (1.0 - self.p)


@dataclass(frozen=True)
class Gamma(Distribution):
    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ConfigurationError("Gamma shape and scale must be > 0")

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, self.scale, size=size)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                (self.shape - 1.0) * np.log(x)
                - x / self.scale
                - self.shape * math.log(self.scale)
                - gammaln(self.shape)
            )
        return np.where(x > 0, out, -np.inf)

    def mean(self):
        return self.shape * self.scale

    def variance(self):
        return self.shape * self.scale**2


@dataclass(frozen=True)
class InverseGamma(Distribution):
    """Inverse-gamma with density proportional to x^(-shape-1) exp(-scale/x).

    Sampled as ``scale / Gamma(shape, 1)``.
    """

    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ConfigurationError("InverseGamma shape and scale must be > 0")

    def sample(self, rng, size=None):
        return self.scale / rng.gamma(self.shape, 1.0, size=size)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                self.shape * math.log(self.scale)
                - gammaln(self.shape)
                - (self.shape + 1.0) * np.log(x)
                - self.scale / x
            )
        return np.where(x > 0, out, -np.inf)

    def mean(self):
        if self.shape <= 1:
            raise NotImplementedError("mean undefined for shape <= 1")
        return self.scale / (self.shape - 1.0)


@dataclass(frozen=True)
class LogNormal(Distribution):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"LogNormal sigma must be > 0, got {self.sigma}")

    def sample(self, rng, size=None):
        return rng.lognormal(self.mu, self.sigma, size=size)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(x) - self.mu) / self.sigma
            out = -0.5 * z * z - np.log(x) - math.log(self.sigma) - 0.5 * math.log(2.0 * math.pi)
        return np.where(x > 0, out, -np.inf)

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def variance(self):
        s2 = self.sigma**2
        return (math.exp(s2) - 1.0) * math.exp(2.0 * self.mu + s2)


@dataclass(frozen=True)
class Dirichlet(Distribution):
    """Symmetric or general Dirichlet over a probability simplex."""

    concentration: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        conc = tuple(float(c) for c in self.concentration)
        object.__setattr__(self, "concentration", conc)
        if len(conc) < 1 or any(c <= 0 for c in conc):
            raise ConfigurationError("Dirichlet concentration must be positive")

    @property
    def dim(self) -> int:
        return len(self.concentration)

    def sample(self, rng, size=None):
        draws = rng.dirichlet(self.concentration, size=size)
        return draws

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        conc = np.asarray(self.concentration)
        norm = gammaln(conc.sum()) - gammaln(conc).sum()
        with np.errstate(divide="ignore", invalid="ignore"):
            return norm + np.sum((conc - 1.0) * np.log(x), axis=-1)

    def mean(self):
        conc = np.asarray(self.concentration)
        return conc / conc.sum()


@dataclass(frozen=True)
class VectorBlocks(Distribution):
    """Distribution over a flat vector assembled from named blocks.

    Each block is ``(name, distribution, width)``. A ``Dirichlet`` block
    contributes one simplex draw of length ``width``; any other
    distribution contributes ``width`` i.i.d. scalars. Used both for
    restart initialization and as prior/proposal over parameter vectors.
    """

    blocks: tuple[tuple[str, Distribution, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        blocks = tuple((str(n), d, int(w)) for n, d, w in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        for name, dist, width in blocks:
            if width < 1:
                raise ConfigurationError(f"block {name!r} has width {width}")
            if isinstance(dist, Dirichlet) and dist.dim != width:
                raise ConfigurationError(
                    f"block {name!r}: Dirichlet of dimension {dist.dim} "
                    f"cannot fill width {width}"
                )

    @property
    def dim(self) -> int:
        return sum(w for _, _, w in self.blocks)

    def sample(self, rng, size=None):
        if size is not None:
            return np.stack([self.sample(rng) for _ in range(size)])
        parts = []
        for _, dist, width in self.blocks:
            if isinstance(dist, Dirichlet):
                parts.append(dist.sample(rng))
            else:
                parts.append(np.atleast_1d(dist.sample(rng, size=width)))
        return np.concatenate(parts)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        offset = 0
        for _, dist, width in self.blocks:
            chunk = x[..., offset : offset + width]
            if isinstance(dist, Dirichlet):
                total = total + dist.log_density(chunk)
            else:
                total = total + np.sum(dist.log_density(chunk), axis=-1)
            offset += width
        return total
