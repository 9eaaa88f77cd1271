"""Tempered conjugate inference for three model families.

Each family raises its likelihood to the power tau (the temperature) and keeps
a closed-form posterior: normal location with known scale, beta-Bernoulli,
and Gaussian linear regression with known noise scale. Every spec knows its
posterior, posterior predictive, leave-one-out predictives and the two limit
predictives (prior for tau -> 0, plug-in for tau -> infinity).

Leave-one-out quantities are always computed from the sufficient statistics
of the dataset with the held-out point deleted, using the same arithmetic as a
fresh fit, so a fold reproduces a refit on the deleted data exactly.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg, stats

from config import CONDITION_LIMIT, SYMMETRY_TOLERANCE
from dists import Beta, BetaBinomial, Bernoulli, DensityKernel, Normal


class IllConditionedError(np.linalg.LinAlgError):
    """A regression system is too ill-conditioned to factorise reliably."""


class ImproperPriorError(ValueError):
    """A prior predictive was requested under an improper (flat) prior."""


def _check_tau(tau) -> None:
    taus = np.asarray(tau, dtype=float)
    if not (np.all(taus > 0) and np.all(np.isfinite(taus))):
        raise ValueError(f"temperature must be positive and finite, got {tau}")


# -- Data -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UnivariateData:
    """Observations y_1..y_n."""
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size < 1:
            raise ValueError("a dataset needs at least one observation")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def deleted(self, i: int) -> 'UnivariateData':
        """Dataset with observation i removed."""
        return UnivariateData(np.delete(self.values, i))


@dataclass(frozen=True, eq=False)
class RegressionData:
    """Design matrix X (n x p) and responses y (n)."""
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if X.ndim != 2:
            raise ValueError(f"X must be a matrix, got shape {X.shape}")
        if X.shape[0] != y.size:
            raise ValueError(
                f"X has {X.shape[0]} rows but y has {y.size} entries"
            )
        if y.size < 1:
            raise ValueError("a dataset needs at least one observation")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'y', y)

    @property
    def size(self) -> int:
        return int(self.y.size)

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    def deleted(self, i: int) -> 'RegressionData':
        """Dataset with row i removed."""
        return RegressionData(np.delete(self.X, i, axis=0),
                              np.delete(self.y, i))


Dataset = Union[UnivariateData, RegressionData]


# -- Posterior summaries --------------------------------------------------


@dataclass(frozen=True)
class NormalLocationPosterior:
    """Normal posterior over the location: N(mean, var)."""
    mean: float
    var: float

    def kernel(self) -> Normal:
        return Normal(self.mean, math.sqrt(self.var))


@dataclass(frozen=True)
class BetaBernoulliPosterior:
    """Beta(a, b) posterior over the success probability."""
    a: float
    b: float

    def kernel(self) -> Beta:
        return Beta(self.a, self.b)


@dataclass(frozen=True, eq=False)
class LinRegPosterior:
    """Gaussian posterior N(mean, cov) over the coefficients.

    chol is the lower Cholesky factor of the posterior precision.
    """
    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray


PosteriorSummary = Union[
    NormalLocationPosterior, BetaBernoulliPosterior, LinRegPosterior
]


# -- Specs ----------------------------------------------------------------


class ModelSpec(ABC):
    """A conjugate family plus prior hyperparameters."""

    regression = False

    @abstractmethod
    def posterior(self, data: Dataset, tau: float) -> PosteriorSummary:
        """Tempered posterior after observing data."""

    @abstractmethod
    def predictive(self, data: Dataset, tau: float,
                   x_new: Optional[np.ndarray] = None) -> DensityKernel:
        """Tempered posterior predictive for a new observation."""

    @abstractmethod
    def loo_log_scores(self, data: Dataset, taus) -> np.ndarray:
        """Held-out log predictive scores, shape (len(taus), n)."""

    @abstractmethod
    def plug_in_predictive(self, data: Dataset,
                           x_new: Optional[np.ndarray] = None
                           ) -> DensityKernel:
        """Model density at the maximum-likelihood estimate."""

    @abstractmethod
    def prior_predictive(self, x_new: Optional[np.ndarray] = None
                         ) -> DensityKernel:
        """Model density integrated against the prior."""

    def check_data(self, data: Dataset) -> None:
        if self.regression != isinstance(data, RegressionData):
            kind = "regression" if self.regression else "univariate"
            raise ValueError(f"{type(self).__name__} needs {kind} data")

    def min_loo_size(self, data: Dataset) -> int:
        return 2

    def check_loo(self, data: Dataset) -> None:
        self.check_data(data)
        needed = self.min_loo_size(data)
        if data.size < needed:
            raise ValueError(
                f"leave-one-out needs at least {needed} observations, "
                f"got {data.size}"
            )

    def loo_predictive(self, data: Dataset, tau: float,
                       i: int) -> DensityKernel:
        """Predictive for observation i fitted without it."""
        self.check_loo(data)
        if not 0 <= i < data.size:
            raise IndexError(f"index {i} outside 0..{data.size - 1}")
        held_out = data.X[i] if isinstance(data, RegressionData) else None
        return self.predictive(data.deleted(i), tau, held_out)


@dataclass(frozen=True)
class NormalLocationSpec(ModelSpec):
    """Normal likelihood with known sd and a normal (or flat) prior.

    A flat prior is encoded as prior_var = inf, i.e. prior precision 0.
    """
    likelihood_sd: float
    prior_mean: float = 0.0
    prior_var: float = math.inf

    def __post_init__(self):
        if not (self.likelihood_sd > 0 and math.isfinite(self.likelihood_sd)):
            raise ValueError(
                f"likelihood_sd must be positive, got {self.likelihood_sd}"
            )
        if not self.prior_var > 0:
            raise ValueError(f"prior_var must be positive, got {self.prior_var}")
        if not math.isfinite(self.prior_mean):
            raise ValueError(f"prior_mean must be finite, got {self.prior_mean}")

    @property
    def is_flat(self) -> bool:
        return math.isinf(self.prior_var)

    @property
    def prior_precision(self) -> float:
        return 0.0 if self.is_flat else 1.0 / self.prior_var

    def _params(self, count, total, tau):
        # Works elementwise on scalars and arrays alike.
        sigma_sq = self.likelihood_sd ** 2
        precision = count * tau / sigma_sq + self.prior_precision
        var = 1.0 / precision
        mean = var * (self.prior_precision * self.prior_mean
                      + tau * total / sigma_sq)
        return mean, var

    def posterior(self, data: Dataset, tau: float) -> NormalLocationPosterior:
        self.check_data(data)
        _check_tau(tau)
        mean, var = self._params(data.size, math.fsum(data.values), tau)
        return NormalLocationPosterior(float(mean), float(var))

    def predictive(self, data: Dataset, tau: float,
                   x_new: Optional[np.ndarray] = None) -> Normal:
        post = self.posterior(data, tau)
        return Normal(post.mean,
                      float(np.sqrt(self.likelihood_sd ** 2 + post.var)))

    def loo_log_scores(self, data: Dataset, taus) -> np.ndarray:
        self.check_loo(data)
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        _check_tau(taus)
        values = data.values
        totals = np.array([math.fsum(np.delete(values, i))
                           for i in range(values.size)])
        means, vars_ = self._params(values.size - 1, totals[None, :],
                                    taus[:, None])
        sds = np.sqrt(self.likelihood_sd ** 2 + vars_)
        return stats.norm.logpdf(values[None, :], means, sds)

    def plug_in_predictive(self, data: Dataset,
                           x_new: Optional[np.ndarray] = None) -> Normal:
        self.check_data(data)
        return Normal(math.fsum(data.values) / data.size, self.likelihood_sd)

    def prior_predictive(self, x_new: Optional[np.ndarray] = None) -> Normal:
        if self.is_flat:
            raise ImproperPriorError(
                "the flat prior has no prior predictive distribution"
            )
        return Normal(self.prior_mean,
                      math.sqrt(self.likelihood_sd ** 2 + self.prior_var))


@dataclass(frozen=True)
class BetaBernoulliSpec(ModelSpec):
    """Bernoulli likelihood with a Beta(prior_a, prior_b) prior."""
    prior_a: float = 1.0
    prior_b: float = 1.0

    def __post_init__(self):
        if not (self.prior_a > 0 and self.prior_b > 0):
            raise ValueError(
                f"beta prior needs positive shapes, got "
                f"({self.prior_a}, {self.prior_b})"
            )

    def check_data(self, data: Dataset) -> None:
        super().check_data(data)
        if not np.all((data.values == 0) | (data.values == 1)):
            raise ValueError("beta-Bernoulli data must be binary (0 or 1)")

    @staticmethod
    def _counts(data: UnivariateData) -> Tuple[int, int]:
        successes = int(np.count_nonzero(data.values))
        return successes, data.size - successes

    def posterior(self, data: Dataset, tau: float) -> BetaBernoulliPosterior:
        self.check_data(data)
        _check_tau(tau)
        x, z = self._counts(data)
        return BetaBernoulliPosterior(tau * x + self.prior_a,
                                      tau * z + self.prior_b)

    def predictive(self, data: Dataset, tau: float,
                   x_new: Optional[np.ndarray] = None) -> BetaBinomial:
        post = self.posterior(data, tau)
        return BetaBinomial(1, post.a, post.b)

    def loo_log_scores(self, data: Dataset, taus) -> np.ndarray:
        self.check_loo(data)
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        _check_tau(taus)
        values = data.values
        x, _ = self._counts(data)
        x_minus = x - values.astype(int)
        z_minus = (data.size - 1) - x_minus
        a = taus[:, None] * x_minus[None, :] + self.prior_a
        b = taus[:, None] * z_minus[None, :] + self.prior_b
        return stats.betabinom.logpmf(values[None, :], 1, a, b)

    def plug_in_predictive(self, data: Dataset,
                           x_new: Optional[np.ndarray] = None) -> Bernoulli:
        self.check_data(data)
        x, _ = self._counts(data)
        return Bernoulli(x / data.size)

    def prior_predictive(self, x_new: Optional[np.ndarray] = None
                         ) -> BetaBinomial:
        return BetaBinomial(1, self.prior_a, self.prior_b)


def _factorise(matrices: np.ndarray) -> np.ndarray:
    """Cholesky factors of a stack of SPD matrices, with a conditioning guard."""
    cond = np.linalg.cond(matrices)
    if not np.all(cond < CONDITION_LIMIT):
        raise IllConditionedError(
            f"condition number {float(np.max(cond)):.3g} exceeds "
            f"{CONDITION_LIMIT:.3g}; the design is ill-conditioned"
        )
    try:
        return np.linalg.cholesky(matrices)
    except np.linalg.LinAlgError as e:
        raise IllConditionedError(f"Cholesky factorisation failed: {e}")


def _chol_solve(chol: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (L L^T) v = rhs for stacks of factors and vectors."""
    z = np.linalg.solve(chol, rhs[..., None])
    return np.linalg.solve(np.swapaxes(chol, -1, -2), z)[..., 0]


@dataclass(frozen=True, eq=False)
class LinRegSpec(ModelSpec):
    """Gaussian linear regression with known noise sd and N(0, prior_cov) prior."""
    noise_sd: float
    prior_cov: np.ndarray

    regression = True

    def __post_init__(self):
        if not (self.noise_sd > 0 and math.isfinite(self.noise_sd)):
            raise ValueError(f"noise_sd must be positive, got {self.noise_sd}")
        cov = np.array(self.prior_cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError(f"prior_cov must be square, got shape {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=SYMMETRY_TOLERANCE):
            raise ValueError("prior_cov must be symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("prior_cov must be positive definite")
        cov.setflags(write=False)
        object.__setattr__(self, 'prior_cov', cov)

    @classmethod
    def isotropic(cls, noise_sd: float, prior_var: float,
                  dim: int) -> 'LinRegSpec':
        """Spec with prior covariance prior_var * I."""
        return cls(noise_sd, prior_var * np.eye(dim))

    @property
    def dim(self) -> int:
        return int(self.prior_cov.shape[0])

    @cached_property
    def prior_precision(self) -> np.ndarray:
        chol = np.linalg.cholesky(self.prior_cov)
        return _chol_solve(chol, np.eye(self.dim))

    def check_data(self, data: Dataset) -> None:
        super().check_data(data)
        if data.dim != self.dim:
            raise ValueError(
                f"design has {data.dim} columns, prior has dimension {self.dim}"
            )

    def _check_x(self, x_new) -> np.ndarray:
        if x_new is None:
            raise ValueError("regression predictives need a covariate vector")
        x_new = np.asarray(x_new, dtype=float)
        if x_new.shape != (self.dim,):
            raise ValueError(
                f"covariate vector must have shape ({self.dim},), "
                f"got {x_new.shape}"
            )
        return x_new

    def min_loo_size(self, data: Dataset) -> int:
        return self.dim + 1

    def _solve(self, grams: np.ndarray, xtys: np.ndarray, tau):
        """Posterior means and precision factors for stacked statistics."""
        scale = np.asarray(tau, dtype=float) / self.noise_sd ** 2
        precision = scale[..., None, None] * grams + self.prior_precision
        chol = _factorise(precision)
        mean = _chol_solve(chol, scale[..., None] * xtys)
        return mean, chol

    def _predictive_params(self, mean: np.ndarray, chol: np.ndarray,
                           x_new: np.ndarray):
        loc = np.einsum('...p,...p->...', mean, x_new)
        z = np.linalg.solve(chol, x_new[..., None])[..., 0]
        var = np.einsum('...p,...p->...', z, z) + self.noise_sd ** 2
        return loc, np.sqrt(var)

    def posterior(self, data: Dataset, tau: float) -> LinRegPosterior:
        self.check_data(data)
        _check_tau(tau)
        gram = data.X.T @ data.X
        xty = data.X.T @ data.y
        mean, chol = self._solve(gram[None], xty[None], tau)
        inv_chol = linalg.solve_triangular(chol[0], np.eye(self.dim),
                                          lower=True)
        cov = inv_chol.T @ inv_chol
        return LinRegPosterior(mean[0], cov, chol[0])

    def predictive(self, data: Dataset, tau: float,
                   x_new: Optional[np.ndarray] = None) -> Normal:
        x_new = self._check_x(x_new)
        post = self.posterior(data, tau)
        loc, sd = self._predictive_params(post.mean[None], post.chol[None],
                                          x_new[None])
        return Normal(float(loc[0]), float(sd[0]))

    def predictive_params_many(self, data: Dataset, tau: float,
                               x_new: np.ndarray):
        """Predictive means and sds at many covariate rows at once."""
        post = self.posterior(data, tau)
        x_new = np.asarray(x_new, dtype=float)
        count = x_new.shape[0]
        return self._predictive_params(
            np.broadcast_to(post.mean, (count, self.dim)),
            np.broadcast_to(post.chol, (count, self.dim, self.dim)),
            x_new,
        )

    def loo_log_scores(self, data: Dataset, taus) -> np.ndarray:
        self.check_loo(data)
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        _check_tau(taus)
        n = data.size
        grams = np.empty((n, self.dim, self.dim))
        xtys = np.empty((n, self.dim))
        for i in range(n):
            fold = data.deleted(i)
            grams[i] = fold.X.T @ fold.X
            xtys[i] = fold.X.T @ fold.y
        scores = np.empty((taus.size, n))
        for t, tau in enumerate(taus):
            mean, chol = self._solve(grams, xtys, np.full(n, tau))
            loc, sd = self._predictive_params(mean, chol, data.X)
            scores[t] = stats.norm.logpdf(data.y, loc, sd)
        return scores

    def least_squares(self, data: Dataset) -> np.ndarray:
        """Least-squares coefficients, via a Cholesky solve of X^T X."""
        self.check_data(data)
        gram = data.X.T @ data.X
        chol = _factorise(gram[None])
        return _chol_solve(chol, (data.X.T @ data.y)[None])[0]

    def plug_in_predictive(self, data: Dataset,
                           x_new: Optional[np.ndarray] = None) -> Normal:
        x_new = self._check_x(x_new)
        beta_hat = self.least_squares(data)
        return Normal(float(beta_hat @ x_new), self.noise_sd)

    def prior_predictive(self, x_new: Optional[np.ndarray] = None) -> Normal:
        x_new = self._check_x(x_new)
        return Normal(0.0, math.sqrt(float(x_new @ self.prior_cov @ x_new)
                                     + self.noise_sd ** 2))

    def plug_in_params_many(self, data: Dataset, x_new: np.ndarray):
        """Plug-in predictive means and sds at many covariate rows."""
        x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
        beta_hat = self.least_squares(data)
        return x_new @ beta_hat, np.full(x_new.shape[0], self.noise_sd)

    def prior_params_many(self, x_new: np.ndarray):
        """Prior predictive means and sds at many covariate rows."""
        x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
        spread = np.einsum('ij,jk,ik->i', x_new, self.prior_cov, x_new)
        return np.zeros(x_new.shape[0]), np.sqrt(spread + self.noise_sd ** 2)


# -- Operations -----------------------------------------------------------


def posterior_normal_location(spec: NormalLocationSpec, data: Dataset,
                              tau: float) -> NormalLocationPosterior:
    """Tempered posterior N(mu_n, sigma_n^2) of the normal location model."""
    return spec.posterior(data, tau)


def predictive_normal_location(spec: NormalLocationSpec, data: Dataset,
                               tau: float) -> Normal:
    """Posterior predictive N(mu_n, sqrt(sigma^2 + sigma_n^2))."""
    return spec.predictive(data, tau)


def loo_predictive_normal_location(spec: NormalLocationSpec, data: Dataset,
                                   tau: float, i: int) -> Normal:
    return spec.loo_predictive(data, tau, i)


def posterior_beta_bernoulli(spec: BetaBernoulliSpec, data: Dataset,
                             tau: float) -> BetaBernoulliPosterior:
    """Tempered posterior Beta(tau x + a, tau z + b)."""
    return spec.posterior(data, tau)


def predictive_beta_bernoulli(spec: BetaBernoulliSpec, data: Dataset,
                              tau: float) -> BetaBinomial:
    return spec.predictive(data, tau)


def posterior_linreg(spec: LinRegSpec, data: Dataset,
                     tau: float) -> LinRegPosterior:
    """Tempered Gaussian posterior over regression coefficients."""
    return spec.posterior(data, tau)


def predictive_linreg(spec: LinRegSpec, data: Dataset, tau: float,
                      x_new: np.ndarray) -> Normal:
    """Posterior predictive N(beta_n' x, sqrt(x' Sigma_n x + sigma^2))."""
    return spec.predictive(data, tau, x_new)


def loo_predictive_linreg(spec: LinRegSpec, data: Dataset, tau: float,
                          i: int) -> Normal:
    return spec.loo_predictive(data, tau, i)


def posterior(spec: ModelSpec, data: Dataset, tau: float) -> PosteriorSummary:
    return spec.posterior(data, tau)


def predictive(spec: ModelSpec, data: Dataset, tau: float,
               x_new: Optional[np.ndarray] = None) -> DensityKernel:
    return spec.predictive(data, tau, x_new)


def loo_predictive(spec: ModelSpec, data: Dataset, tau: float,
                   i: int) -> DensityKernel:
    return spec.loo_predictive(data, tau, i)


def plug_in_predictive(spec: ModelSpec, data: Dataset,
                       x_new: Optional[np.ndarray] = None) -> DensityKernel:
    """The tau -> infinity limit: model density at the MLE."""
    return spec.plug_in_predictive(data, x_new)


def prior_predictive(spec: ModelSpec,
                     x_new: Optional[np.ndarray] = None) -> DensityKernel:
    """The tau -> 0 limit: model density integrated against the prior.

    Raises:
        ImproperPriorError: If the prior is flat.
    """
    return spec.prior_predictive(x_new)


def posterior_mass_outside(spec: ModelSpec, data: Dataset, tau: float,
                           center: float, radius: float) -> float:
    """Posterior probability that |theta - center| > radius.

    Only defined for the scalar-parameter families.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if isinstance(spec, LinRegSpec):
        raise TypeError("posterior_mass_outside needs a scalar-parameter model")
    law = spec.posterior(data, tau).kernel()
    inside = law.cdf(center + radius) - law.cdf(center - radius)
    return float(min(1.0, max(0.0, 1.0 - inside)))
