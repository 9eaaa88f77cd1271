"""Tests for the adaptive quadrature engine."""

import math
import unittest
import warnings

import numpy as np
from scipy import stats

from quadrature import (
    DEFAULT_QUADRATURE, QuadratureSpec, QuadratureWarning, integrate,
    integrate_many
)


class TestQuadratureSpec(unittest.TestCase):
    """Test engine settings validation."""

    def test_defaults(self):
        """Test the default settings."""
        self.assertEqual(DEFAULT_QUADRATURE.abs_tolerance, 1e-10)
        self.assertEqual(DEFAULT_QUADRATURE.range_sd, 12.0)
        self.assertEqual(DEFAULT_QUADRATURE.rule, "adaptive-gauss-legendre")

    def test_invalid_settings(self):
        """Test that nonsensical settings are rejected."""
        with self.assertRaises(ValueError):
            QuadratureSpec(abs_tolerance=0.0)
        with self.assertRaises(ValueError):
            QuadratureSpec(order=1)
        with self.assertRaises(ValueError):
            QuadratureSpec(max_depth=0)


class TestIntegrate(unittest.TestCase):
    """Test scalar integration."""

    def test_polynomial(self):
        """Test an exactly integrable polynomial."""
        value = integrate(lambda x: 3 * x ** 2, 0.0, 2.0)
        self.assertAlmostEqual(value, 8.0, places=12)

    def test_infinite_range(self):
        """Test the normal density over the whole real line."""
        value = integrate(stats.norm.pdf, -math.inf, math.inf)
        self.assertAlmostEqual(value, 1.0, delta=1e-9)

    def test_half_infinite_ranges(self):
        """Test exponential tails on half-lines."""
        upper = integrate(lambda x: np.exp(-x), 0.0, math.inf)
        lower = integrate(lambda x: np.exp(x), -math.inf, 0.0)
        self.assertAlmostEqual(upper, 1.0, delta=1e-9)
        self.assertAlmostEqual(lower, 1.0, delta=1e-9)

    def test_kink(self):
        """Test refinement around a non-smooth point."""
        value = integrate(np.abs, -1.0, 3.0)
        self.assertAlmostEqual(value, 5.0, delta=1e-9)

    def test_empty_range_rejected(self):
        """Test that lo >= hi is rejected."""
        with self.assertRaises(ValueError):
            integrate(np.exp, 1.0, 1.0)


class TestIntegrateMany(unittest.TestCase):
    """Test batched integration."""

    def test_batch_matches_closed_form(self):
        """Test a batch of normal CDF increments."""
        means = np.array([-1.0, 0.0, 2.5])

        def func(item, x):
            return stats.norm.pdf(x, means[item][:, None], 1.0)

        lo = np.array([-2.0, 0.0, 2.0])
        hi = np.array([0.0, 1.5, 6.0])
        values = integrate_many(func, lo, hi)
        expected = (stats.norm.cdf(hi, means, 1.0)
                    - stats.norm.cdf(lo, means, 1.0))
        np.testing.assert_allclose(values, expected, atol=1e-10)

    def test_limits_validation(self):
        """Test that infinite or reversed limits are rejected."""
        def func(item, x):
            return np.ones_like(x)

        with self.assertRaises(ValueError):
            integrate_many(func, [0.0], [math.inf])
        with self.assertRaises(ValueError):
            integrate_many(func, [1.0], [0.0])
        with self.assertRaises(ValueError):
            integrate_many(func, [0.0, 1.0], [1.0])

    def test_breakpoints_find_narrow_peak(self):
        """Test that breakpoints at a narrow peak recover its mass."""
        sd = 1e-5

        def func(item, x):
            return stats.norm.pdf(x, 0.3, sd)

        breaks = [[0.3 + sd * k for k in (-8, -4, -2, -1, 0, 1, 2, 4, 8)]]
        value = integrate_many(func, [-10.0], [10.0], breaks=breaks)[0]
        self.assertAlmostEqual(value, 1.0, delta=1e-10)

    def test_breakpoints_padding_and_outside_points(self):
        """Test that nan padding and points outside a range are ignored."""
        def func(item, x):
            return np.ones_like(x)

        breaks = [[0.5, np.nan, np.nan], [-3.0, 0.25, 7.0]]
        values = integrate_many(func, [0.0, 0.0], [1.0, 2.0], breaks=breaks)
        np.testing.assert_allclose(values, [1.0, 2.0], rtol=1e-14)

    def test_depth_limit_warns(self):
        """Test that hitting the depth limit warns instead of failing."""
        shallow = QuadratureSpec(abs_tolerance=1e-300, max_depth=2)

        def func(item, x):
            return np.sqrt(np.abs(x))

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            value = integrate_many(func, [-1.0], [1.0], shallow)[0]
        self.assertTrue(any(issubclass(w.category, QuadratureWarning)
                            for w in caught))
        self.assertAlmostEqual(value, 4.0 / 3.0, delta=1e-3)


if __name__ == '__main__':
    unittest.main()
