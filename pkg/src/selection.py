"""Temperature grids, schedules, leave-one-out scoring and tau selection.

Also home to the closed-form risk of the normal location model with known
unit scale, a zero-mean prior and a standard normal truth, which serves as a
noise-free oracle for the simulation harness.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from config import GRID_POINTS, TAU_MAX, TAU_MIN
from models import Dataset, ModelSpec, RegressionData


@dataclass(frozen=True, eq=False)
class TempGrid:
    """Strictly increasing grid of positive temperatures."""
    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(-1)
        if points.size < 2:
            raise ValueError("a temperature grid needs at least 2 points")
        if not (np.all(np.isfinite(points)) and np.all(points > 0)):
            raise ValueError("grid temperatures must be positive and finite")
        if np.any(np.diff(points) <= 0):
            raise ValueError("grid temperatures must be strictly increasing")
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

    @classmethod
    def log_spaced(cls, lo: float = TAU_MIN, hi: float = TAU_MAX,
                   count: int = GRID_POINTS) -> 'TempGrid':
        """count points evenly spaced in log(tau), endpoints exact."""
        if not 0 < lo < hi:
            raise ValueError(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
        if count < 2:
            raise ValueError(f"count must be at least 2, got {count}")
        points = np.logspace(math.log10(lo), math.log10(hi), int(count))
        points[0], points[-1] = lo, hi
        return cls(points)

    def __len__(self) -> int:
        return int(self.points.size)

    def __iter__(self) -> Iterator[float]:
        return iter(self.points.tolist())

    def __getitem__(self, index: int) -> float:
        return float(self.points[index])

    def nearest(self, tau: float) -> int:
        """Index of the grid point closest to tau on the log scale."""
        return int(np.argmin(np.abs(np.log(self.points) - math.log(tau))))

    def within(self, lo: float, hi: float) -> np.ndarray:
        """Boolean mask of grid points inside [lo, hi]."""
        return (self.points >= lo) & (self.points <= hi)


# -- Schedules ------------------------------------------------------------


class TempSchedule(ABC):
    """A temperature that may depend on the sample size."""

    @abstractmethod
    def tau(self, n: int) -> float:
        """Temperature at sample size n."""

    @property
    @abstractmethod
    def label(self) -> str:
        """Short name, in the same syntax the command line accepts."""


@dataclass(frozen=True)
class Fixed(TempSchedule):
    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"fixed temperature must be positive, got {self.value}")

    def tau(self, n: int) -> float:
        return self.value

    @property
    def label(self) -> str:
        return f"fixed:{self.value!r}"


@dataclass(frozen=True)
class PowerDecay(TempSchedule):
    """tau_n = c * n^(-gamma); n * tau_n still grows because gamma < 1."""
    c: float
    gamma: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    def tau(self, n: int) -> float:
        return self.c * n ** -self.gamma

    @property
    def label(self) -> str:
        return f"power:{self.c!r}:{self.gamma!r}"


@dataclass(frozen=True)
class Coarsened(TempSchedule):
    """tau_n = alpha / (alpha + n); the posterior never concentrates."""
    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def tau(self, n: int) -> float:
        return self.alpha / (self.alpha + n)

    @property
    def label(self) -> str:
        return f"coarsened:{self.alpha!r}"


def schedule_tau(s: TempSchedule, n: int) -> float:
    """The schedule's temperature at sample size n."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return s.tau(n)


# -- Leave-one-out scoring ------------------------------------------------


@dataclass(frozen=True)
class TauSelection:
    tau_star: float
    elpd_at_star: float
    at_lower_boundary: bool
    at_upper_boundary: bool


def _mean_score(scores: np.ndarray) -> float:
    """Average log score; a single -inf term makes the whole score -inf."""
    if np.any(np.isneginf(scores)):
        return -math.inf
    return math.fsum(scores) / scores.size


def elpd_curve(spec: ModelSpec, data: Dataset, taus) -> np.ndarray:
    """Leave-one-out elpd at every temperature in taus."""
    scores = spec.loo_log_scores(data, taus)
    return np.array([_mean_score(row) for row in scores])


def elpd_loo(spec: ModelSpec, data: Dataset, tau: float) -> float:
    """Leave-one-out expected log predictive density at temperature tau.

    Returns:
        (1/n) * sum_i log p(y_i | y_-i, tau), or -inf if any fold scores -inf.
    """
    return float(elpd_curve(spec, data, [tau])[0])


def elpd_holdout(spec: ModelSpec, train: Dataset, test: Dataset,
                 tau: Optional[float] = None) -> float:
    """Average log score of test points under a predictive fitted on train.

    With tau=None the plug-in predictive is used.
    """
    scores = []
    for i in range(test.size):
        x = test.X[i] if isinstance(test, RegressionData) else None
        y = test.y[i] if isinstance(test, RegressionData) else test.values[i]
        if tau is None:
            kernel = spec.plug_in_predictive(train, x)
        else:
            kernel = spec.predictive(train, tau, x)
        scores.append(float(kernel.log_density(y)))
    return _mean_score(np.array(scores))


def elpd_loo_plug_in(spec: ModelSpec, data: Dataset) -> float:
    """Leave-one-out score of the plug-in predictive (the tau -> inf end)."""
    spec.check_loo(data)
    scores = []
    for i in range(data.size):
        held_out = data.X[i] if isinstance(data, RegressionData) else None
        y = data.y[i] if isinstance(data, RegressionData) else data.values[i]
        kernel = spec.plug_in_predictive(data.deleted(i), held_out)
        scores.append(float(kernel.log_density(y)))
    return _mean_score(np.array(scores))


def elpd_prior(spec: ModelSpec, data: Dataset) -> float:
    """Average prior-predictive log score of the data (the tau -> 0 end)."""
    spec.check_data(data)
    if isinstance(data, RegressionData):
        scores = [spec.prior_predictive(x).log_density(y)
                  for x, y in zip(data.X, data.y)]
    else:
        scores = spec.prior_predictive().log_density(data.values)
    return _mean_score(np.asarray(scores, dtype=float))


def select_from_curve(curve: np.ndarray, grid: TempGrid) -> TauSelection:
    """Grid argmax of an elpd curve.

    Ties go to the smallest temperature. An all -inf curve selects the first
    grid point with both boundary flags clear.
    """
    curve = np.asarray(curve, dtype=float)
    if curve.shape != grid.points.shape:
        raise ValueError("curve and grid must have the same length")
    if np.all(np.isneginf(curve)):
        return TauSelection(grid[0], -math.inf, False, False)
    best = int(np.argmax(curve))
    return TauSelection(
        tau_star=grid[best],
        elpd_at_star=float(curve[best]),
        at_lower_boundary=best == 0,
        at_upper_boundary=best == len(grid) - 1,
    )


def select_tau_cv(spec: ModelSpec, data: Dataset,
                  grid: TempGrid) -> TauSelection:
    """Temperature on the grid that maximises the leave-one-out elpd."""
    return select_from_curve(elpd_curve(spec, data, grid.points), grid)


# -- Analytic risk (normal location, unit scales, truth N(0, 1)) -----------


def risk_normal_flat(n, tau):
    """KL risk of the tempered predictive under a flat prior.

    Works elementwise on arrays of n and tau.
    """
    n = np.asarray(n, dtype=float)
    n_tau = n * np.asarray(tau, dtype=float)
    value = (0.5 * np.log1p(1.0 / n_tau)
             + (1.0 + 1.0 / n) / (2.0 * (1.0 + 1.0 / n_tau))
             - 0.5)
    return value[()] if np.ndim(value) == 0 else value


def risk_normal(n, tau, prior_var: float):
    """KL risk under a N(0, prior_var) prior; prior_var = inf is the flat case."""
    if math.isinf(prior_var):
        return risk_normal_flat(n, tau)
    if not prior_var > 0:
        raise ValueError(f"prior_var must be positive, got {prior_var}")
    tau = np.asarray(tau, dtype=float)
    post_var = 1.0 / (np.asarray(n, dtype=float) * tau + 1.0 / prior_var)
    value = (0.5 * np.log1p(post_var)
             + (1.0 + tau * post_var) / (2.0 * (1.0 + post_var))
             - 0.5)
    return value[()] if np.ndim(value) == 0 else value


def risk_derivative_normal_flat(n, tau):
    """d/dtau of risk_normal_flat; negative below tau = 1, positive above."""
    n = np.asarray(n, dtype=float)
    tau = np.asarray(tau, dtype=float)
    value = ((1.0 / (2.0 * n)) * ((tau - 1.0) / n)
             / (tau * (tau + 1.0 / n) ** 2))
    return value[()] if np.ndim(value) == 0 else value


def coarsened_risk_limit(alpha: float) -> float:
    """Large-n limit of the flat-prior risk under Coarsened(alpha)."""
    ratio = 1.0 + 1.0 / alpha
    return 0.5 * math.log(ratio) + 1.0 / (2.0 * ratio) - 0.5
