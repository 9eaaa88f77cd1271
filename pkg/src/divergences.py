"""Distances between predictive laws.

Total variation, squared Hellinger and Kullback-Leibler divergence. Discrete
kernels are summed exactly over the union of their supports; continuous
kernels go through the adaptive quadrature engine, many pairs at a time.
Integrands are formed from log densities so that tails underflow cleanly to
zero instead of producing nan.
"""

import math
from typing import Callable, Dict, Sequence, Union

import numpy as np
from scipy import stats
from scipy.special import logsumexp, rel_entr

from config import QUAD_BATCH_SIZE, QUAD_BREAK_SDS
from dists import DensityKernel, Normal, NormalMixture, support_contains
from quadrature import DEFAULT_QUADRATURE, QuadratureSpec, integrate_many

# log_density(item, x) -> log densities of integrand item[j] at x[j, :]
BatchLogDensity = Callable[[np.ndarray, np.ndarray], np.ndarray]

DIVERGENCES = ("tvd", "hellinger", "kl")


def _tvd_integrand(lp: np.ndarray, lq: np.ndarray) -> np.ndarray:
    return 0.5 * np.abs(np.exp(lp) - np.exp(lq))


def _hellinger_integrand(lp: np.ndarray, lq: np.ndarray) -> np.ndarray:
    return 0.5 * (np.exp(0.5 * lp) - np.exp(0.5 * lq)) ** 2


def _kl_integrand(lp: np.ndarray, lq: np.ndarray) -> np.ndarray:
    out = np.zeros_like(lp)
    alive = np.isfinite(lp)
    with np.errstate(invalid='ignore'):
        out[alive] = np.exp(lp[alive]) * (lp[alive] - lq[alive])
    return out


_INTEGRANDS: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "tvd": _tvd_integrand,
    "hellinger": _hellinger_integrand,
    "kl": _kl_integrand,
}


def _finish(name: str, value: float) -> float:
    if name == "kl":
        return max(0.0, value)
    return min(1.0, max(0.0, value))


def _check_name(name: str) -> None:
    if name not in _INTEGRANDS:
        raise ValueError(
            f"unknown divergence '{name}'; expected one of {DIVERGENCES}"
        )


def _check_pair(p: DensityKernel, q: DensityKernel) -> None:
    if p.is_discrete != q.is_discrete:
        raise ValueError(
            f"cannot compare {type(p).__name__} with {type(q).__name__}: "
            f"one is discrete, the other continuous"
        )


def _discrete(name: str, p: DensityKernel, q: DensityKernel) -> float:
    points = sorted(set(p.support().points) | set(q.support().points))
    x = np.asarray(points, dtype=float)
    mp = np.exp(p.log_density(x))
    mq = np.exp(q.log_density(x))
    if name == "tvd":
        value = 0.5 * math.fsum(np.abs(mp - mq))
    elif name == "hellinger":
        value = 0.5 * math.fsum((np.sqrt(mp) - np.sqrt(mq)) ** 2)
    else:
        value = math.fsum(rel_entr(mp, mq))
    return _finish(name, value)


def integration_range(p: DensityKernel, q: DensityKernel,
                      quad: QuadratureSpec = DEFAULT_QUADRATURE):
    """Union of both kernels' ranges, clipped to the union of their supports."""
    p_lo, p_hi = p.integration_range(quad.range_sd)
    q_lo, q_hi = q.integration_range(quad.range_sd)
    sp, sq = p.support(), q.support()
    lo = max(min(p_lo, q_lo), min(sp.lo, sq.lo))
    hi = min(max(p_hi, q_hi), max(sp.hi, sq.hi))
    return lo, hi


def divergence_many(name: str, log_p: BatchLogDensity, log_q: BatchLogDensity,
                    lo, hi,
                    quad: QuadratureSpec = DEFAULT_QUADRATURE,
                    breaks=None) -> np.ndarray:
    """Integrate one divergence for a batch of continuous pairs.

    Args:
        name: 'tvd', 'hellinger' or 'kl'.
        log_p: Batched log density of the first law of each pair.
        log_q: Batched log density of the second law of each pair.
        lo: Lower integration limits, one per pair.
        hi: Upper integration limits, one per pair.
        quad: Quadrature settings.
        breaks: Optional nan-padded initial panel edges, one row per pair.

    Returns:
        One value per pair, clamped to the divergence's range.
    """
    _check_name(name)
    integrand = _INTEGRANDS[name]

    def func(item, x):
        return integrand(log_p(item, x), log_q(item, x))

    values = integrate_many(func, lo, hi, quad, breaks)
    if name == "kl":
        return np.maximum(values, 0.0)
    return np.clip(values, 0.0, 1.0)


def divergence_line(name: str, log_p: BatchLogDensity, log_q: BatchLogDensity,
                    center, scale,
                    quad: QuadratureSpec = DEFAULT_QUADRATURE,
                    breaks=None) -> np.ndarray:
    """Integrate one divergence over the whole real line for a batch of pairs.

    Each pair is integrated in t over (-1, 1) with
    x = center + scale * t / (1 - t^2), which folds heavy tails into a
    finite range. Breakpoints are given in x and mapped to t.
    """
    _check_name(name)
    integrand = _INTEGRANDS[name]
    center = np.asarray(center, dtype=float)
    scale = np.asarray(scale, dtype=float)

    def func(item, t):
        gap = 1.0 - t * t
        x = center[item, None] + scale[item, None] * t / gap
        jacobian = scale[item, None] * (1.0 + t * t) / gap ** 2
        return integrand(log_p(item, x), log_q(item, x)) * jacobian

    if breaks is not None:
        u = (np.asarray(breaks, dtype=float) - center[:, None]) / scale[:, None]
        breaks = 2.0 * u / (1.0 + np.sqrt(1.0 + 4.0 * u * u))
    values = integrate_many(func, -np.ones(center.size), np.ones(center.size),
                            quad, breaks)
    if name == "kl":
        return np.maximum(values, 0.0)
    return np.clip(values, 0.0, 1.0)


def _anchor(p: DensityKernel, q: DensityKernel, quad: QuadratureSpec):
    """Centre and scale of the substitution for an unbounded pair."""
    p_lo, p_hi = p.core_range(quad.range_sd)
    q_lo, q_hi = q.core_range(quad.range_sd)
    lo, hi = min(p_lo, q_lo), max(p_hi, q_hi)
    return 0.5 * (lo + hi), (hi - lo) / (2.0 * quad.range_sd)


def pair_breakpoints(pairs: Sequence) -> np.ndarray:
    """Union of both kernels' breakpoints for each pair, nan padded."""
    points = [np.concatenate([p.breakpoints(), q.breakpoints()])
              for p, q in pairs]
    width = max((pt.size for pt in points), default=0)
    out = np.full((len(points), width), np.nan)
    for row, pt in zip(out, points):
        row[:pt.size] = pt
    return out


def stacked_log_density(kernels: Sequence[DensityKernel]) -> BatchLogDensity:
    """Batched log density over a list of kernels, one per integrand."""
    kernels = list(kernels)
    if all(isinstance(k, Normal) for k in kernels):
        means = np.array([k.mean for k in kernels])
        sds = np.array([k.sd for k in kernels])

        def normal_log_density(item, x):
            return stats.norm.logpdf(x, means[item, None], sds[item, None])

        return normal_log_density

    if (all(isinstance(k, NormalMixture) for k in kernels)
            and len({len(k.weights) for k in kernels}) == 1):
        with np.errstate(divide='ignore'):
            log_w = np.log(np.array([k.weights for k in kernels]))
        means = np.array([[c.mean for c in k.components] for k in kernels])
        sds = np.array([[c.sd for c in k.components] for k in kernels])

        def mixture_log_density(item, x):
            terms = (log_w[item, None, :]
                     + stats.norm.logpdf(x[..., None], means[item, None, :],
                                         sds[item, None, :]))
            return logsumexp(terms, axis=-1)

        return mixture_log_density

    def log_density(item, x):
        out = np.empty_like(x)
        for j in np.unique(item):
            rows = item == j
            out[rows] = kernels[j].log_density(x[rows])
        return out

    return log_density


def divergence_pairs(name: str, p: Union[DensityKernel, Sequence[DensityKernel]],
                     qs: Sequence[DensityKernel],
                     quad: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """Divergence between p (or each of ps) and each kernel in qs.

    A single p is compared against every q; a sequence is paired elementwise.
    Discrete pairs and pairs with infinite KL are resolved without quadrature.
    """
    _check_name(name)
    qs = list(qs)
    ps = [p] * len(qs) if isinstance(p, DensityKernel) else list(p)
    if len(ps) != len(qs):
        raise ValueError(f"got {len(ps)} first laws for {len(qs)} second laws")

    values = np.empty(len(qs))
    pending = []
    for j, (pj, qj) in enumerate(zip(ps, qs)):
        _check_pair(pj, qj)
        if pj.is_discrete:
            values[j] = _discrete(name, pj, qj)
        elif name == "kl" and not support_contains(qj.support(), pj.support()):
            values[j] = math.inf
        else:
            pending.append(j)

    ranges = {j: integration_range(ps[j], qs[j], quad) for j in pending}
    bounded = [j for j in pending if np.all(np.isfinite(ranges[j]))]
    unbounded = [j for j in pending if not np.all(np.isfinite(ranges[j]))]

    for group, whole_line in ((bounded, False), (unbounded, True)):
        for start in range(0, len(group), QUAD_BATCH_SIZE):
            chunk = group[start:start + QUAD_BATCH_SIZE]
            if isinstance(p, DensityKernel):
                def log_p(item, x):
                    return p.log_density(x)
            else:
                log_p = stacked_log_density([ps[j] for j in chunk])
            log_q = stacked_log_density([qs[j] for j in chunk])
            breaks = pair_breakpoints([(ps[j], qs[j]) for j in chunk])
            if whole_line:
                anchors = np.array([_anchor(ps[j], qs[j], quad)
                                    for j in chunk])
                values[chunk] = divergence_line(name, log_p, log_q,
                                                anchors[:, 0], anchors[:, 1],
                                                quad, breaks)
            else:
                lo = np.array([ranges[j][0] for j in chunk])
                hi = np.array([ranges[j][1] for j in chunk])
                values[chunk] = divergence_many(name, log_p, log_q, lo, hi,
                                                quad, breaks)
    return values


def mixture_normal_divergence(name: str, weights, means, sds, q_mean, q_sd,
                              quad: QuadratureSpec = DEFAULT_QUADRATURE
                              ) -> np.ndarray:
    """Divergence between normal mixtures and normals given as arrays.

    Row j compares the mixture with weights[j], means[j] and sds[j] against
    N(q_mean[j], q_sd[j]^2). Nothing is built per pair, so hundreds of
    thousands of pairs go through in a few adaptive sweeps.

    Args:
        name: 'tvd', 'hellinger' or 'kl'.
        weights: (count, k) mixture weights.
        means: (count, k) component means.
        sds: (count, k) component sds.
        q_mean: (count,) means of the second laws.
        q_sd: (count,) sds of the second laws.
        quad: Quadrature settings.

    Returns:
        One value per row.
    """
    _check_name(name)
    weights, means, sds = (np.atleast_2d(np.asarray(a, dtype=float))
                           for a in (weights, means, sds))
    q_mean = np.atleast_1d(np.asarray(q_mean, dtype=float))
    q_sd = np.atleast_1d(np.asarray(q_sd, dtype=float))
    count = q_mean.size
    if (weights.shape != means.shape or weights.shape != sds.shape
            or weights.shape[0] != count or q_sd.shape != q_mean.shape):
        raise ValueError("mixture and normal arrays do not line up")

    alive = weights > 0
    with np.errstate(divide='ignore'):
        log_w = np.log(weights)
    half = quad.range_sd
    lo = np.minimum(np.min(np.where(alive, means - half * sds, np.inf), axis=1),
                    q_mean - half * q_sd)
    hi = np.maximum(np.max(np.where(alive, means + half * sds, -np.inf), axis=1),
                    q_mean + half * q_sd)
    centres = np.concatenate([means, q_mean[:, None]], axis=1)
    scales = np.concatenate([np.where(alive, sds, np.nan), q_sd[:, None]],
                            axis=1)
    breaks = (centres[:, :, None]
              + scales[:, :, None] * np.asarray(QUAD_BREAK_SDS)).reshape(count, -1)

    values = np.empty(count)
    for start in range(0, count, QUAD_BATCH_SIZE):
        rows = slice(start, start + QUAD_BATCH_SIZE)
        c_log_w, c_means, c_sds = log_w[rows], means[rows], sds[rows]
        c_q_mean, c_q_sd = q_mean[rows], q_sd[rows]

        def log_p(item, x, c_log_w=c_log_w, c_means=c_means, c_sds=c_sds):
            terms = (c_log_w[item, None, :]
                     + stats.norm.logpdf(x[..., None], c_means[item, None, :],
                                         c_sds[item, None, :]))
            return logsumexp(terms, axis=-1)

        def log_q(item, x, c_q_mean=c_q_mean, c_q_sd=c_q_sd):
            return stats.norm.logpdf(x, c_q_mean[item, None], c_q_sd[item, None])

        values[rows] = divergence_many(name, log_p, log_q, lo[rows], hi[rows],
                                       quad, breaks[rows])
    return values


def tvd(p: DensityKernel, q: DensityKernel,
        quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Total variation distance 1/2 * integral of |p - q|.

    Raises:
        ValueError: If one kernel is discrete and the other continuous.
    """
    return float(divergence_pairs("tvd", p, [q], quad)[0])


def hellinger_sq(p: DensityKernel, q: DensityKernel,
                 quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Squared Hellinger distance 1/2 * integral of (sqrt p - sqrt q)^2."""
    return float(divergence_pairs("hellinger", p, [q], quad)[0])


def kl(p: DensityKernel, q: DensityKernel,
       quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Kullback-Leibler divergence of q from p.

    Returns +inf, not an error, when p puts mass where q has none.
    """
    return float(divergence_pairs("kl", p, [q], quad)[0])


def kl_normal(p: Normal, q: Normal) -> float:
    """Closed-form KL(p || q) for two normal laws."""
    return (math.log(q.sd / p.sd)
            + (p.sd ** 2 + (p.mean - q.mean) ** 2) / (2.0 * q.sd ** 2)
            - 0.5)


def divergence(name: str, p: DensityKernel, q: DensityKernel,
               quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Dispatch on a metric name: 'tvd', 'hellinger' or 'kl'."""
    return float(divergence_pairs(name, p, [q], quad)[0])
