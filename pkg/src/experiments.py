"""Simulation harness for tempered predictives.

Data generators for the four true models, the replication loop that scores
every temperature on the grid for every (n, replicate), and the summaries
built on top: mean and quantile curves, flatness reports and tau-selection
tables.

Every (n, replicate) work item draws from its own stream, derived from
(root_seed, replicate, n index), so results do not depend on how many
threads run the items or in which order they finish.
"""

import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import (
    DEFAULT_MC_SAMPLES, DEFAULT_REPLICATES, DEFAULT_ROOT_SEED, METRICS,
    MC_QUAD_SHARE, QUANTILE_HIGH, QUANTILE_LOW, REGRESSION_BETA,
    REGRESSION_OUTLIER_RATE, REGRESSION_OUTLIER_SD
)
from dists import (
    Bernoulli, DensityKernel, Normal, NormalMixture, RandomSource, StudentT,
    random_source
)
from divergences import divergence_pairs, kl_normal, mixture_normal_divergence
from models import (
    BetaBernoulliSpec, Dataset, LinRegSpec, ModelSpec, NormalLocationSpec,
    RegressionData, UnivariateData
)
from quadrature import DEFAULT_QUADRATURE, QuadratureSpec
from selection import (
    TauSelection, TempGrid, elpd_curve, elpd_loo_plug_in, elpd_prior,
    risk_normal, select_from_curve
)


class IncompatibleConfigError(ValueError):
    """The metric, true model and model spec cannot be combined."""


# -- True models ----------------------------------------------------------


class TrueModel(ABC):
    """A data-generating process with a known predictive density."""

    regression = False

    @abstractmethod
    def generate(self, n: int, rng: RandomSource) -> Dataset:
        """Draw n iid observations."""

    @abstractmethod
    def true_predictive(self, x_new: Optional[np.ndarray] = None
                        ) -> DensityKernel:
        """Exact density of a new observation."""


@dataclass(frozen=True)
class NormalIID(TrueModel):
    theta: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        Normal(self.theta, self.sd)

    def generate(self, n: int, rng: RandomSource) -> UnivariateData:
        return UnivariateData(rng.normal(self.theta, self.sd, n))

    def true_predictive(self, x_new=None) -> Normal:
        return Normal(self.theta, self.sd)


@dataclass(frozen=True)
class StudentTIID(TrueModel):
    df: float = 10.0
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.df > 2:
            raise ValueError(f"df must exceed 2, got {self.df}")
        StudentT(self.df, self.loc, self.scale)

    def generate(self, n: int, rng: RandomSource) -> UnivariateData:
        return UnivariateData(self.true_predictive().sample(rng, n))

    def true_predictive(self, x_new=None) -> StudentT:
        return StudentT(self.df, self.loc, self.scale)


@dataclass(frozen=True)
class BernoulliIID(TrueModel):
    theta: float = 0.5

    def __post_init__(self):
        Bernoulli(self.theta)

    def generate(self, n: int, rng: RandomSource) -> UnivariateData:
        return UnivariateData(self.true_predictive().sample(rng, n))

    def true_predictive(self, x_new=None) -> Bernoulli:
        return Bernoulli(self.theta)


@dataclass(frozen=True)
class MixtureRegression(TrueModel):
    """Linear-Gaussian responses contaminated by centred outliers.

    Covariates are standard normal. Each response is an outlier
    N(0, outlier_sd^2) with probability outlier_rate, otherwise
    N(x' beta, noise_sd^2).
    """
    beta: Tuple[float, ...] = tuple(REGRESSION_BETA)
    noise_sd: float = 1.0
    outlier_rate: float = REGRESSION_OUTLIER_RATE
    outlier_sd: float = REGRESSION_OUTLIER_SD

    regression = True

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        if not beta:
            raise ValueError("beta must have at least one coefficient")
        object.__setattr__(self, 'beta', beta)
        if not self.noise_sd > 0 or not self.outlier_sd > 0:
            raise ValueError("noise_sd and outlier_sd must be positive")
        if not 0.0 <= self.outlier_rate <= 1.0:
            raise ValueError(
                f"outlier_rate must lie in [0, 1], got {self.outlier_rate}"
            )

    @property
    def dim(self) -> int:
        return len(self.beta)

    def covariates(self, count: int, rng: RandomSource) -> np.ndarray:
        return rng.standard_normal((count, self.dim))

    def generate(self, n: int, rng: RandomSource) -> RegressionData:
        X = self.covariates(n, rng)
        outlier = rng.random(n) < self.outlier_rate
        clean = X @ np.asarray(self.beta) + rng.normal(0.0, self.noise_sd, n)
        noise = rng.normal(0.0, self.outlier_sd, n)
        return RegressionData(X, np.where(outlier, noise, clean))

    def mixture_params(self, x_new: np.ndarray):
        """Weights, means and sds of the true predictive at many rows."""
        x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
        count = x_new.shape[0]
        weights = np.tile([1.0 - self.outlier_rate, self.outlier_rate],
                          (count, 1))
        means = np.stack([x_new @ np.asarray(self.beta), np.zeros(count)],
                         axis=1)
        sds = np.tile([self.noise_sd, self.outlier_sd], (count, 1))
        return weights, means, sds

    def true_predictive(self, x_new=None) -> NormalMixture:
        if x_new is None:
            raise ValueError("the regression truth needs a covariate vector")
        x_new = np.asarray(x_new, dtype=float)
        return NormalMixture(
            (1.0 - self.outlier_rate, self.outlier_rate),
            (Normal(float(x_new @ np.asarray(self.beta)), self.noise_sd),
             Normal(0.0, self.outlier_sd)),
        )


def generate(tm: TrueModel, n: int, rng: RandomSource) -> Dataset:
    """n iid draws from the true model, using the caller's stream."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return tm.generate(n, rng)


def true_predictive(tm: TrueModel,
                    x_new: Optional[np.ndarray] = None) -> DensityKernel:
    return tm.true_predictive(x_new)


# -- Configuration --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything a run depends on; results are a pure function of it."""
    true_model: TrueModel
    model_spec: ModelSpec
    n_values: Tuple[int, ...]
    replicates: int = DEFAULT_REPLICATES
    grid: TempGrid = field(default_factory=TempGrid.log_spaced)
    metric: str = "tvd"
    mc_samples: int = DEFAULT_MC_SAMPLES
    root_seed: int = DEFAULT_ROOT_SEED
    scale_by_sqrt_n: bool = False
    limits: bool = False
    quad: QuadratureSpec = DEFAULT_QUADRATURE

    def __post_init__(self):
        n_values = tuple(int(n) for n in self.n_values)
        if not n_values or any(n < 1 for n in n_values):
            raise ValueError("n_values must be a nonempty list of positive integers")
        object.__setattr__(self, 'n_values', n_values)
        if self.replicates < 1:
            raise ValueError(f"replicates must be at least 1, got {self.replicates}")
        if self.mc_samples < 1:
            raise ValueError(f"mc_samples must be at least 1, got {self.mc_samples}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got '{self.metric}'")
        if not 0 <= self.root_seed < 2 ** 64:
            raise ValueError("root_seed must be a 64-bit unsigned integer")

    def validate(self) -> None:
        """Check that truth, model and metric fit together.

        Raises:
            IncompatibleConfigError: If the combination cannot be scored.
        """
        tm, spec = self.true_model, self.model_spec
        if tm.regression != spec.regression:
            raise IncompatibleConfigError(
                f"{type(tm).__name__} data cannot be fitted by "
                f"{type(spec).__name__}"
            )
        if isinstance(tm, BernoulliIID) != isinstance(spec, BetaBernoulliSpec):
            raise IncompatibleConfigError(
                f"{type(spec).__name__} cannot model {type(tm).__name__} data"
            )
        if isinstance(spec, LinRegSpec) and spec.dim != tm.dim:
            raise IncompatibleConfigError(
                f"true model has {tm.dim} coefficients, the regression "
                f"prior has dimension {spec.dim}"
            )
        smallest = min(self.n_values)
        if self.metric == "elpd":
            needed = 2 if not spec.regression else spec.dim + 1
            if smallest < needed:
                raise IncompatibleConfigError(
                    f"elpd needs n >= {needed}, got n = {smallest}"
                )
        if self.limits and spec.regression and smallest < spec.dim:
            raise IncompatibleConfigError(
                f"the plug-in limit needs n >= {spec.dim}, got n = {smallest}"
            )

    @property
    def has_prior_limit(self) -> bool:
        return not (isinstance(self.model_spec, NormalLocationSpec)
                    and self.model_spec.is_flat)


# -- Replication ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReplicateTable:
    """Metric values in row order n -> replicate -> tau."""
    n: np.ndarray
    replicate: np.ndarray
    tau: np.ndarray
    value: np.ndarray
    # (n, replicate, limit, value) rows for the tau -> 0 and tau -> inf ends
    limits: List[Tuple[int, int, str, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.value.size)

    def rows(self) -> Iterable[Tuple[int, int, float, float]]:
        for row in zip(self.n.tolist(), self.replicate.tolist(),
                       self.tau.tolist(), self.value.tolist()):
            yield row


def _mean_finite_or_inf(values: np.ndarray) -> float:
    if np.any(np.isinf(values)):
        return float(values[np.isinf(values)][0])
    return math.fsum(values) / values.size


def _score(cfg: ExperimentConfig, truth: DensityKernel,
           kernels: Sequence[DensityKernel]) -> np.ndarray:
    """Metric between a univariate truth and each kernel."""
    if (cfg.metric == "kl" and isinstance(truth, Normal)
            and all(isinstance(k, Normal) for k in kernels)):
        return np.array([kl_normal(truth, k) for k in kernels])
    return divergence_pairs(cfg.metric, truth, kernels, cfg.quad)


def _predictor_draws(cfg: ExperimentConfig, replicate: int) -> np.ndarray:
    """Covariates for the outer Monte Carlo average.

    The draws depend only on the replicate, so every temperature (and both
    limits) is scored on the same points.
    """
    rng = random_source(cfg.root_seed, "predictor", replicate)
    return cfg.true_model.covariates(cfg.mc_samples, rng)


def _monte_carlo_quad(cfg: ExperimentConfig) -> QuadratureSpec:
    """Per-draw settings, loosened to a small share of the Monte Carlo error."""
    tolerance = MC_QUAD_SHARE / math.sqrt(cfg.mc_samples)
    return replace(cfg.quad,
                   abs_tolerance=max(cfg.quad.abs_tolerance, tolerance))


def _regression_scores(cfg: ExperimentConfig, x_tilde: np.ndarray,
                       q_mean: np.ndarray, q_sd: np.ndarray) -> np.ndarray:
    """Outer Monte Carlo averages, one per row of predictive parameters.

    q_mean and q_sd have shape (rows, mc_samples); every row is scored
    against the truth at the same covariate draws in a single batch.
    """
    rows, draws = q_mean.shape
    weights, means, sds = cfg.true_model.mixture_params(x_tilde)
    values = mixture_normal_divergence(
        cfg.metric, np.tile(weights, (rows, 1)), np.tile(means, (rows, 1)),
        np.tile(sds, (rows, 1)), q_mean.ravel(), q_sd.ravel(),
        _monte_carlo_quad(cfg),
    )
    return np.array([_mean_finite_or_inf(v)
                     for v in values.reshape(rows, draws)])


def _regression_curve(cfg: ExperimentConfig, data: RegressionData,
                      replicate: int) -> np.ndarray:
    x_tilde = _predictor_draws(cfg, replicate)
    params = [cfg.model_spec.predictive_params_many(data, tau, x_tilde)
              for tau in cfg.grid]
    q_mean = np.array([loc for loc, _ in params])
    q_sd = np.array([sd for _, sd in params])
    return _regression_scores(cfg, x_tilde, q_mean, q_sd)


def metric_curve(cfg: ExperimentConfig, data: Dataset,
                 replicate: int = 0) -> np.ndarray:
    """The configured metric at every grid temperature for one dataset."""
    spec = cfg.model_spec
    if cfg.metric == "elpd":
        return elpd_curve(spec, data, cfg.grid.points)
    if spec.regression:
        return _regression_curve(cfg, data, replicate)
    truth = cfg.true_model.true_predictive()
    return _score(cfg, truth, [spec.predictive(data, tau) for tau in cfg.grid])


def _limit_values(cfg: ExperimentConfig, data: Dataset,
                  replicate: int) -> List[Tuple[str, float]]:
    """Metric for the prior (tau -> 0) and plug-in (tau -> inf) predictives."""
    spec = cfg.model_spec
    out = []
    if cfg.metric == "elpd":
        if cfg.has_prior_limit:
            out.append(("prior", elpd_prior(spec, data)))
        out.append(("plugin", elpd_loo_plug_in(spec, data)))
        return out

    if spec.regression:
        x_tilde = _predictor_draws(cfg, replicate)
        ends = (spec.prior_params_many(x_tilde),
                spec.plug_in_params_many(data, x_tilde))
        q_mean = np.stack([loc for loc, _ in ends])
        q_sd = np.stack([sd for _, sd in ends])
        scores = _regression_scores(cfg, x_tilde, q_mean, q_sd)
        return [("prior", float(scores[0])), ("plugin", float(scores[1]))]

    names, kernels = [], []
    if cfg.has_prior_limit:
        names.append("prior")
        kernels.append(spec.prior_predictive())
    names.append("plugin")
    kernels.append(spec.plug_in_predictive(data))
    values = _score(cfg, cfg.true_model.true_predictive(), kernels)
    return [(name, float(v)) for name, v in zip(names, values)]


def _dataset(cfg: ExperimentConfig, n_index: int, replicate: int) -> Dataset:
    rng = random_source(cfg.root_seed, replicate, n_index)
    return generate(cfg.true_model, cfg.n_values[n_index], rng)


def _map(func: Callable, items: Sequence, threads: int) -> list:
    """Apply func to items in order, optionally on a thread pool."""
    if threads <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def run_replicates(cfg: ExperimentConfig, threads: int = 1,
                   verbose: bool = False) -> ReplicateTable:
    """Score every grid temperature for every (n, replicate).

    Args:
        cfg: Experiment configuration; validated before any work starts.
        threads: Worker threads. Any value gives bit-identical results.
        verbose: Print one progress line per sample size.

    Returns:
        ReplicateTable with len(n_values) * replicates * len(grid) rows.

    Raises:
        IncompatibleConfigError: If the configuration cannot be scored.
    """
    cfg.validate()
    taus = cfg.grid.points
    columns: Dict[str, list] = {"n": [], "replicate": [], "tau": [],
                                "value": []}
    limit_rows = []

    for n_index, n in enumerate(cfg.n_values):
        if verbose:
            print(f"n = {n}: scoring {cfg.replicates} replicates "
                  f"on {len(taus)} temperatures ({cfg.metric})")

        def work(replicate, n_index=n_index):
            data = _dataset(cfg, n_index, replicate)
            curve = metric_curve(cfg, data, replicate)
            limits = _limit_values(cfg, data, replicate) if cfg.limits else []
            return curve, limits

        results = _map(work, range(cfg.replicates), threads)
        for replicate, (curve, limits) in enumerate(results):
            columns["n"].append(np.full(taus.size, n))
            columns["replicate"].append(np.full(taus.size, replicate))
            columns["tau"].append(taus)
            columns["value"].append(curve)
            limit_rows.extend((n, replicate, name, value)
                              for name, value in limits)

        if verbose:
            degenerate = sum(int(np.sum(~np.isfinite(c))) for c, _ in results)
            if degenerate:
                print(f"  ⚠ {degenerate} non-finite values at n = {n}")
            print(f"  ✓ n = {n} done")

    return ReplicateTable(
        n=np.concatenate(columns["n"]).astype(int),
        replicate=np.concatenate(columns["replicate"]).astype(int),
        tau=np.concatenate(columns["tau"]),
        value=np.concatenate(columns["value"]),
        limits=limit_rows,
    )


# -- Summaries ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SummaryCurve:
    """Per (n, tau) mean and 5%/95% quantiles over replicates."""
    n: np.ndarray
    tau: np.ndarray
    mean: np.ndarray
    q05: np.ndarray
    q95: np.ndarray
    degenerate_fraction: np.ndarray
    scaled: bool = False

    def __len__(self) -> int:
        return int(self.mean.size)

    @property
    def n_values(self) -> List[int]:
        return list(dict.fromkeys(self.n.tolist()))

    def for_n(self, n: int) -> np.ndarray:
        """Boolean mask of the rows at sample size n."""
        return self.n == n


def _summary_stats(values: np.ndarray) -> Tuple[float, float, float, float]:
    finite = values[np.isfinite(values)]
    degenerate = 1.0 - finite.size / values.size
    if finite.size == 0:
        with np.errstate(invalid='ignore'):
            fallback = float(np.mean(values))
        return fallback, fallback, fallback, degenerate
    q05, q95 = np.quantile(finite, [QUANTILE_LOW, QUANTILE_HIGH])
    return math.fsum(finite) / finite.size, float(q05), float(q95), degenerate


def summarize(t: ReplicateTable, scale_by_sqrt_n: bool = False) -> SummaryCurve:
    """Mean and linearly interpolated 5%/95% quantiles per (n, tau).

    Non-finite values are left out of the statistics and reported as the
    degenerate fraction. With scale_by_sqrt_n every statistic is multiplied
    by sqrt(n).
    """
    if len(t) == 0:
        raise ValueError("cannot summarise an empty table")
    keys = list(dict.fromkeys(zip(t.n.tolist(), t.tau.tolist())))
    stats = np.empty((len(keys), 4))
    for k, (n, tau) in enumerate(keys):
        rows = (t.n == n) & (t.tau == tau)
        stats[k] = _summary_stats(t.value[rows])
    ns = np.array([n for n, _ in keys], dtype=int)
    factor = np.sqrt(ns) if scale_by_sqrt_n else np.ones(len(keys))
    return SummaryCurve(
        n=ns,
        tau=np.array([tau for _, tau in keys]),
        mean=stats[:, 0] * factor,
        q05=stats[:, 1] * factor,
        q95=stats[:, 2] * factor,
        degenerate_fraction=stats[:, 3],
        scaled=scale_by_sqrt_n,
    )


def risk_curve(n_values: Sequence[int], grid: TempGrid,
               prior_var: float = math.inf) -> SummaryCurve:
    """Analytic normal-location risk on the grid, shaped like a summary."""
    ns = np.repeat(np.asarray(n_values, dtype=int), len(grid))
    taus = np.tile(grid.points, len(n_values))
    risk = np.asarray(risk_normal(ns, taus, prior_var), dtype=float)
    return SummaryCurve(n=ns, tau=taus, mean=risk, q05=risk.copy(),
                        q95=risk.copy(),
                        degenerate_fraction=np.zeros(risk.size))


@dataclass(frozen=True)
class FlatnessEntry:
    n: int
    spread: float
    ratio: float
    ratio_to_min: float


@dataclass(frozen=True)
class FlatnessReport:
    """Spread (max - min) of the mean curve over a tau range, per n.

    ratio divides the spread by the mean at the grid point nearest tau = 1;
    ratio_to_min divides it by the smallest mean in the range.
    """
    tau_lo: float
    tau_hi: float
    entries: Tuple[FlatnessEntry, ...]

    def by_n(self, n: int) -> FlatnessEntry:
        for entry in self.entries:
            if entry.n == n:
                return entry
        raise KeyError(n)


def _safe_ratio(spread: float, scale: float) -> float:
    if spread == 0:
        return 0.0
    if scale == 0:
        return math.inf
    return spread / abs(scale)


def flatness(c: SummaryCurve, tau_lo: float, tau_hi: float) -> FlatnessReport:
    """How flat the mean curve is over [tau_lo, tau_hi], for each n.

    Raises:
        ValueError: If fewer than two grid points fall inside the range.
    """
    entries = []
    for n in c.n_values:
        rows = c.for_n(n)
        taus, means = c.tau[rows], c.mean[rows]
        # logspace grids land a few ulps either side of round values
        inside = ((taus >= tau_lo * (1 - 1e-9))
                  & (taus <= tau_hi * (1 + 1e-9)))
        if np.count_nonzero(inside) < 2:
            raise ValueError(
                f"[{tau_lo}, {tau_hi}] holds fewer than 2 grid points"
            )
        window = means[inside]
        spread = float(np.max(window) - np.min(window))
        reference = float(means[np.argmin(np.abs(np.log(taus)))])
        entries.append(FlatnessEntry(
            n=int(n),
            spread=spread,
            ratio=_safe_ratio(spread, reference),
            ratio_to_min=_safe_ratio(spread, float(np.min(window))),
        ))
    return FlatnessReport(tau_lo, tau_hi, tuple(entries))


# -- Tau selection --------------------------------------------------------


@dataclass(frozen=True)
class SelectionRow:
    n: int
    replicate: int
    selection: TauSelection


def tau_selection_histogram(cfg: ExperimentConfig, threads: int = 1,
                            verbose: bool = False) -> List[SelectionRow]:
    """Leave-one-out tau selection for every (n, replicate).

    Uses the same datasets as run_replicates for the same config.

    Raises:
        IncompatibleConfigError: If the metric is not elpd.
    """
    if cfg.metric != "elpd":
        raise IncompatibleConfigError(
            f"tau selection scores elpd, config metric is '{cfg.metric}'"
        )
    cfg.validate()
    rows = []
    for n_index, n in enumerate(cfg.n_values):
        if verbose:
            print(f"n = {n}: selecting tau for {cfg.replicates} replicates")

        def work(replicate, n_index=n_index):
            data = _dataset(cfg, n_index, replicate)
            curve = elpd_curve(cfg.model_spec, data, cfg.grid.points)
            return select_from_curve(curve, cfg.grid)

        selections = _map(work, range(cfg.replicates), threads)
        rows.extend(SelectionRow(n, r, s) for r, s in enumerate(selections))
        if verbose:
            boundary = sum(s.at_lower_boundary or s.at_upper_boundary
                           for s in selections)
            print(f"  ✓ n = {n}: {boundary}/{cfg.replicates} at a grid boundary")
    return rows


BOUNDARY_SIDES = ("either", "lower", "upper")


def boundary_fraction(rows: Sequence[SelectionRow], n: int,
                      side: str = "either") -> float:
    """Share of selections at sample size n that hit a grid end.

    Args:
        rows: Output of tau_selection_histogram.
        n: Sample size to look at.
        side: 'lower' (prior-predictive end), 'upper' (plug-in end) or
            'either'.
    """
    if side not in BOUNDARY_SIDES:
        raise ValueError(f"side must be one of {BOUNDARY_SIDES}, got '{side}'")
    picked = [r.selection for r in rows if r.n == n]
    if not picked:
        raise ValueError(f"no selections at n = {n}")
    lower = side in ("either", "lower")
    upper = side in ("either", "upper")
    hits = sum((lower and s.at_lower_boundary) or (upper and s.at_upper_boundary)
               for s in picked)
    return hits / len(picked)
