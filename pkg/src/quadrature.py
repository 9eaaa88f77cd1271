"""Adaptive Gauss-Legendre quadrature.

Panels are refined breadth-first: every pending panel is integrated whole and
as two halves, and the halves are accepted once they agree with the whole to
within the panel's share of the absolute tolerance, or to a relative floor
near machine precision. Each integrand may bring breakpoints, which become
initial panel edges next to the equal split. All pending panels of all
integrands are evaluated in one vectorised call per level, which is what lets
the divergence code integrate thousands of densities at once.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import roots_legendre

from config import (
    QUAD_ABS_TOLERANCE, QUAD_INITIAL_PANELS, QUAD_MAX_DEPTH, QUAD_ORDER,
    QUAD_RANGE_SD, QUAD_REL_FLOOR
)

# func(item, x) -> values; item has shape (P,), x has shape (P, order)
BatchIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


class QuadratureWarning(UserWarning):
    """Raised when panels hit the depth limit before meeting the tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the adaptive engine and the integration-range policy.

    Attributes:
        abs_tolerance: Absolute error budget for each integral.
        order: Gauss-Legendre nodes per panel.
        initial_panels: Panels the range is split into before refinement.
        max_depth: Maximum number of bisections of any panel.
        range_sd: Half-width of each kernel's range in effective sds.
    """
    abs_tolerance: float = QUAD_ABS_TOLERANCE
    order: int = QUAD_ORDER
    initial_panels: int = QUAD_INITIAL_PANELS
    max_depth: int = QUAD_MAX_DEPTH
    range_sd: float = QUAD_RANGE_SD

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise ValueError(
                f"abs_tolerance must be positive, got {self.abs_tolerance}"
            )
        if self.order < 2:
            raise ValueError(f"order must be at least 2, got {self.order}")
        if self.initial_panels < 1 or self.max_depth < 1:
            raise ValueError("initial_panels and max_depth must be positive")
        if not self.range_sd > 0:
            raise ValueError(f"range_sd must be positive, got {self.range_sd}")

    @property
    def rule(self) -> str:
        return "adaptive-gauss-legendre"


DEFAULT_QUADRATURE = QuadratureSpec()


@lru_cache(maxsize=8)
def _nodes_and_weights(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    return nodes, weights


def _panel_estimate(func: BatchIntegrand, item: np.ndarray, a: np.ndarray,
                    b: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = _nodes_and_weights(order)
    half = 0.5 * (b - a)
    x = half[:, None] * nodes[None, :] + (0.5 * (a + b))[:, None]
    values = func(item, x)
    return half * (values @ weights)


def _initial_panels(lo: np.ndarray, hi: np.ndarray, panels: int, breaks):
    """Equal panels over each range, split further at interior breakpoints.

    Returns (item, a, b) with the panels of each integrand in ascending order.
    """
    count = lo.size
    steps = np.arange(panels + 1) / panels
    edges = lo[:, None] + (hi - lo)[:, None] * steps[None, :]
    edges[:, -1] = hi
    if breaks is not None:
        breaks = np.asarray(breaks, dtype=float).reshape(count, -1)
        with np.errstate(invalid='ignore'):
            inside = (breaks > lo[:, None]) & (breaks < hi[:, None])
        # nan sorts last and never forms a panel
        edges = np.sort(np.concatenate(
            [edges, np.where(inside, breaks, np.nan)], axis=1), axis=1)
    a, b = edges[:, :-1], edges[:, 1:]
    with np.errstate(invalid='ignore'):
        use = b > a
    item = np.broadcast_to(np.arange(count)[:, None], a.shape)[use]
    return item, a[use], b[use]


def integrate_many(func: BatchIntegrand, lo, hi,
                   quad: QuadratureSpec = DEFAULT_QUADRATURE,
                   breaks=None) -> np.ndarray:
    """Integrate a batch of integrands over finite ranges.

    Args:
        func: Vectorised integrand; func(item, x)[j, k] is integrand item[j]
            evaluated at x[j, k].
        lo: Lower limits, one per integrand.
        hi: Upper limits, one per integrand.
        quad: Engine settings.
        breaks: Optional (count, m) array of extra initial panel edges, nan
            padded. Points where the integrand changes scale belong here;
            points outside a range are ignored.

    Returns:
        Array of integrals, one per integrand.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise ValueError("lo and hi must have the same shape")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("integrate_many needs finite limits")
    if np.any(hi <= lo):
        raise ValueError("every range needs lo < hi")

    count = lo.size
    span = hi - lo
    item, a, b = _initial_panels(lo, hi, quad.initial_panels, breaks)

    totals = np.zeros(count)
    coarse = _panel_estimate(func, item, a, b, quad.order)
    depth = 0
    exhausted = False
    while item.size:
        mid = 0.5 * (a + b)
        left = _panel_estimate(func, item, a, mid, quad.order)
        right = _panel_estimate(func, item, mid, b, quad.order)
        fine = left + right
        budget = np.maximum(quad.abs_tolerance * (b - a) / span[item],
                            QUAD_REL_FLOOR * np.abs(fine))
        done = np.abs(fine - coarse) <= budget
        if depth + 1 >= quad.max_depth:
            exhausted = exhausted or not np.all(done)
            done[:] = True
        np.add.at(totals, item[done], fine[done])

        keep = ~done
        item = np.concatenate([item[keep], item[keep]])
        a, b = (np.concatenate([a[keep], mid[keep]]),
                np.concatenate([mid[keep], b[keep]]))
        coarse = np.concatenate([left[keep], right[keep]])
        depth += 1

    if exhausted:
        warnings.warn(
            f"quadrature reached depth {quad.max_depth} before meeting "
            f"tolerance {quad.abs_tolerance}", QuadratureWarning
        )
    return totals


def _substitution(lo: float, hi: float):
    """Map an infinite range onto a finite one.

    Returns (t_lo, t_hi, x_of_t, dx_dt).
    """
    if math.isinf(lo) and math.isinf(hi):
        return (-1.0, 1.0,
                lambda t: t / (1.0 - t * t),
                lambda t: (1.0 + t * t) / (1.0 - t * t) ** 2)
    if math.isinf(hi):
        return (0.0, 1.0,
                lambda t: lo + t / (1.0 - t),
                lambda t: 1.0 / (1.0 - t) ** 2)
    return (0.0, 1.0,
            lambda t: hi - t / (1.0 - t),
            lambda t: 1.0 / (1.0 - t) ** 2)


def integrate(func: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
              quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integrate a vectorised scalar function over [lo, hi].

    Infinite limits are handled by substitution; Gauss-Legendre nodes never
    touch the mapped endpoints.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if math.isinf(lo) or math.isinf(hi):
        t_lo, t_hi, x_of_t, jacobian = _substitution(lo, hi)

        def mapped(item, t):
            return func(x_of_t(t)) * jacobian(t)

        return float(integrate_many(mapped, t_lo, t_hi, quad)[0])

    return float(integrate_many(lambda item, x: func(x), lo, hi, quad)[0])
