"""Univariate probability kernels and seeded random streams.

Every kernel is an immutable value that can evaluate its log density (or log
mass for discrete kernels), its CDF, draw samples from a caller-owned random
stream, and describe its exact support. Kernels are safe to share between
threads; random streams are not, so parallel code derives one stream per work
item with random_source().
"""

import hashlib
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from config import QUAD_BREAK_SDS, QUAD_RANGE_SD, SIMPLEX_TOLERANCE

RandomSource = np.random.Generator


def _stream_key(key: Union[int, str]) -> int:
    """Map a stream key to a non-negative integer entropy word."""
    if isinstance(key, str):
        digest = hashlib.sha256(key.encode('utf-8')).digest()
        return int.from_bytes(digest[:8], 'big')
    key = int(key)
    if key < 0:
        raise ValueError(f"stream keys must be non-negative, got {key}")
    return key


def random_source(root_seed: int, *keys: Union[int, str]) -> RandomSource:
    """Derive an independent counter-based stream.

    The stream depends only on (root_seed, *keys), so the same work item gets
    the same draws whether it runs serially or on a worker thread.

    Args:
        root_seed: Non-negative 64-bit experiment seed.
        *keys: Integers (replicate index, n index, ...) or string labels.

    Returns:
        A numpy Generator backed by the Philox bit generator.
    """
    entropy = [_stream_key(root_seed)] + [_stream_key(k) for k in keys]
    seq = np.random.SeedSequence(entropy)
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class ContinuousInterval:
    """Support on an interval of the extended real line."""
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(
                f"interval needs lo < hi, got [{self.lo}, {self.hi}]"
            )


@dataclass(frozen=True)
class FiniteSet:
    """Support on a finite, sorted set of integer points."""
    points: Tuple[int, ...]

    def __post_init__(self):
        points = tuple(int(p) for p in self.points)
        if not points:
            raise ValueError("finite support must be nonempty")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise ValueError("finite support points must be strictly sorted")
        object.__setattr__(self, 'points', points)


Support = Union[ContinuousInterval, FiniteSet]

REAL_LINE = ContinuousInterval(-math.inf, math.inf)
UNIT_INTERVAL = ContinuousInterval(0.0, 1.0)
BINARY = FiniteSet((0, 1))


def support_contains(outer: Support, inner: Support) -> bool:
    """Check whether support `inner` lies inside support `outer`."""
    if isinstance(outer, FiniteSet) and isinstance(inner, FiniteSet):
        return set(inner.points) <= set(outer.points)
    if (isinstance(outer, ContinuousInterval)
            and isinstance(inner, ContinuousInterval)):
        return outer.lo <= inner.lo and inner.hi <= outer.hi
    return False


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value}")


class DensityKernel(ABC):
    """Interface shared by all univariate kernels."""

    @abstractmethod
    def log_density(self, x):
        """Natural-log density (or mass); -inf where it is exactly zero."""

    @abstractmethod
    def cdf(self, x):
        """Cumulative distribution function."""

    @abstractmethod
    def sample(self, rng: RandomSource, size=None):
        """Draw from the kernel using the caller's stream."""

    @abstractmethod
    def support(self) -> Support:
        """Exact support of the kernel."""

    @property
    def is_discrete(self) -> bool:
        return isinstance(self.support(), FiniteSet)

    def density(self, x):
        """Density (mass for discrete kernels) evaluated at x."""
        return np.exp(self.log_density(x))

    def integration_range(self, range_sd: float = QUAD_RANGE_SD
                          ) -> Tuple[float, float]:
        """Range carrying all but a negligible tail of the mass.

        Infinite limits mean the tails are too heavy to truncate.
        """
        raise TypeError(
            f"{type(self).__name__} has no continuous integration range"
        )

    def core_range(self, range_sd: float = QUAD_RANGE_SD
                   ) -> Tuple[float, float]:
        """Finite range around the bulk of the mass."""
        return self.integration_range(range_sd)

    def breakpoints(self) -> np.ndarray:
        """Points where the density changes on its own length scale.

        The quadrature starts with panel edges at these points.
        """
        return np.empty(0)


class DiscreteKernel(DensityKernel):
    """Kernel on a finite set; exposes masses instead of densities."""

    def mass(self, x):
        """Probability mass at x."""
        return self.density(x)

    def masses(self) -> np.ndarray:
        """Masses at every support point, in support order."""
        return self.mass(np.asarray(self.support().points, dtype=float))


@dataclass(frozen=True)
class Normal(DensityKernel):
    """Normal law with the given mean and standard deviation."""
    mean: float
    sd: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise ValueError(f"mean must be finite, got {self.mean}")
        _positive("sd", self.sd)

    def log_density(self, x):
        return stats.norm.logpdf(x, self.mean, self.sd)

    def cdf(self, x):
        return stats.norm.cdf(x, self.mean, self.sd)

    def sample(self, rng: RandomSource, size=None):
        return rng.normal(self.mean, self.sd, size)

    def support(self) -> Support:
        return REAL_LINE

    def integration_range(self, range_sd: float = QUAD_RANGE_SD
                          ) -> Tuple[float, float]:
        return (self.mean - range_sd * self.sd,
                self.mean + range_sd * self.sd)

    def breakpoints(self) -> np.ndarray:
        return self.mean + self.sd * np.asarray(QUAD_BREAK_SDS)


@dataclass(frozen=True)
class StudentT(DensityKernel):
    """Location-scale Student-t law.

    scipy evaluates the normalising constant through log-gamma functions,
    so large degrees of freedom do not overflow.
    """
    df: float
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        _positive("df", self.df)
        _positive("scale", self.scale)
        if not math.isfinite(self.loc):
            raise ValueError(f"loc must be finite, got {self.loc}")

    def log_density(self, x):
        return stats.t.logpdf(x, self.df, self.loc, self.scale)

    def cdf(self, x):
        return stats.t.cdf(x, self.df, self.loc, self.scale)

    def sample(self, rng: RandomSource, size=None):
        return self.loc + self.scale * rng.standard_t(self.df, size)

    def support(self) -> Support:
        return REAL_LINE

    def integration_range(self, range_sd: float = QUAD_RANGE_SD
                          ) -> Tuple[float, float]:
        if self.df <= 2:
            return (-math.inf, math.inf)
        half = range_sd * self.scale * math.sqrt(self.df / (self.df - 2))
        return (self.loc - half, self.loc + half)

    def core_range(self, range_sd: float = QUAD_RANGE_SD
                   ) -> Tuple[float, float]:
        return (self.loc - range_sd * self.scale,
                self.loc + range_sd * self.scale)

    def breakpoints(self) -> np.ndarray:
        return self.loc + self.scale * np.asarray(QUAD_BREAK_SDS)


@dataclass(frozen=True)
class Beta(DensityKernel):
    """Beta law on [0, 1] with shapes a and b."""
    a: float
    b: float

    def __post_init__(self):
        _positive("a", self.a)
        _positive("b", self.b)

    def log_density(self, x):
        return stats.beta.logpdf(x, self.a, self.b)

    def cdf(self, x):
        return stats.beta.cdf(x, self.a, self.b)

    def sample(self, rng: RandomSource, size=None):
        return rng.beta(self.a, self.b, size)

    def support(self) -> Support:
        return UNIT_INTERVAL

    def integration_range(self, range_sd: float = QUAD_RANGE_SD
                          ) -> Tuple[float, float]:
        return (0.0, 1.0)

    def breakpoints(self) -> np.ndarray:
        mean = self.a / (self.a + self.b)
        sd = math.sqrt(mean * (1.0 - mean) / (self.a + self.b + 1.0))
        return mean + sd * np.asarray(QUAD_BREAK_SDS)


@dataclass(frozen=True)
class Bernoulli(DiscreteKernel):
    """Bernoulli law; p = 0 and p = 1 give degenerate atoms."""
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    def log_density(self, x):
        return stats.bernoulli.logpmf(x, self.p)

    def cdf(self, x):
        return stats.bernoulli.cdf(x, self.p)

    def sample(self, rng: RandomSource, size=None):
        draws = np.asarray(rng.random(size) < self.p, dtype=float)
        return float(draws) if size is None else draws

    def support(self) -> Support:
        return BINARY


@dataclass(frozen=True)
class BetaBinomial(DiscreteKernel):
    """Beta-binomial law over {0, ..., trials}."""
    trials: int
    a: float
    b: float

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(
                f"trials must be a positive integer, got {self.trials}"
            )
        object.__setattr__(self, 'trials', int(self.trials))
        _positive("a", self.a)
        _positive("b", self.b)

    @property
    def success_mass(self) -> float:
        """Mass of a single success when trials == 1."""
        return self.a / (self.a + self.b)

    def log_density(self, x):
        return stats.betabinom.logpmf(x, self.trials, self.a, self.b)

    def cdf(self, x):
        return stats.betabinom.cdf(x, self.trials, self.a, self.b)

    def sample(self, rng: RandomSource, size=None):
        theta = rng.beta(self.a, self.b, size)
        draws = np.asarray(rng.binomial(self.trials, theta), dtype=float)
        return float(draws) if size is None else draws

    def support(self) -> Support:
        return FiniteSet(tuple(range(self.trials + 1)))


@dataclass(frozen=True)
class NormalMixture(DensityKernel):
    """Finite mixture of normal components."""
    weights: Tuple[float, ...]
    components: Tuple[Normal, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        components = tuple(self.components)
        if not components or len(weights) != len(components):
            raise ValueError("mixture needs one weight per component")
        if any(w < 0 for w in weights):
            raise ValueError(f"mixture weights must be nonnegative: {weights}")
        if abs(math.fsum(weights) - 1.0) > SIMPLEX_TOLERANCE:
            raise ValueError(f"mixture weights must sum to 1: {weights}")
        if not all(isinstance(c, Normal) for c in components):
            raise ValueError("mixture components must be Normal kernels")
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'components', components)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore'):
            log_w = np.log(np.asarray(self.weights))
        terms = np.stack([
            lw + c.log_density(x) for lw, c in zip(log_w, self.components)
        ])
        return logsumexp(terms, axis=0)

    def cdf(self, x):
        return sum(w * c.cdf(x) for w, c in zip(self.weights, self.components))

    def sample(self, rng: RandomSource, size=None):
        means = np.array([c.mean for c in self.components])
        sds = np.array([c.sd for c in self.components])
        picks = rng.choice(len(self.components), size=size, p=self.weights)
        return rng.normal(means[picks], sds[picks])

    def support(self) -> Support:
        return REAL_LINE

    def integration_range(self, range_sd: float = QUAD_RANGE_SD
                          ) -> Tuple[float, float]:
        ranges = [c.integration_range(range_sd)
                  for w, c in zip(self.weights, self.components) if w > 0]
        return (min(r[0] for r in ranges), max(r[1] for r in ranges))

    def breakpoints(self) -> np.ndarray:
        return np.concatenate([c.breakpoints() for w, c
                               in zip(self.weights, self.components) if w > 0])


def log_density(k: DensityKernel, x):
    """Log density or log mass of kernel k at x."""
    return k.log_density(x)


def density(k: DensityKernel, x):
    """Density or mass of kernel k at x."""
    return k.density(x)


def sample(k: DensityKernel, rng: RandomSource, size: Optional[int] = None):
    """Draw from kernel k using the caller-owned stream rng."""
    return k.sample(rng, size)


def support(k: DensityKernel) -> Support:
    """Exact support of kernel k."""
    return k.support()
