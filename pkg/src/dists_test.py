"""Tests for the dists module."""

import math
import unittest

import numpy as np
from scipy import stats

from dists import (
    BINARY, REAL_LINE, UNIT_INTERVAL, Bernoulli, Beta, BetaBinomial,
    ContinuousInterval, FiniteSet, Normal, NormalMixture, StudentT,
    density, log_density, random_source, sample, support, support_contains
)
from quadrature import integrate


class TestRandomSource(unittest.TestCase):
    """Test seeded stream derivation."""

    def test_same_keys_same_draws(self):
        """Test that identical keys reproduce identical draws."""
        a = random_source(42, 3, 1).normal(size=5)
        b = random_source(42, 3, 1).normal(size=5)
        np.testing.assert_array_equal(a, b)

    def test_different_keys_differ(self):
        """Test that changing any key changes the stream."""
        base = random_source(42, 3, 1).normal(size=5)
        self.assertFalse(np.array_equal(base, random_source(42, 3, 2).normal(size=5)))
        self.assertFalse(np.array_equal(base, random_source(43, 3, 1).normal(size=5)))

    def test_string_keys(self):
        """Test that string labels derive distinct, stable streams."""
        a = random_source(0, "predictor", 4).random(3)
        b = random_source(0, "predictor", 4).random(3)
        c = random_source(0, "other", 4).random(3)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c))

    def test_negative_key_rejected(self):
        """Test that negative keys are rejected."""
        with self.assertRaises(ValueError):
            random_source(0, -1)


class TestSupports(unittest.TestCase):
    """Test support types."""

    def test_interval_validation(self):
        """Test that empty intervals are rejected."""
        with self.assertRaises(ValueError):
            ContinuousInterval(1.0, 1.0)

    def test_finite_set_validation(self):
        """Test that finite supports must be sorted and nonempty."""
        with self.assertRaises(ValueError):
            FiniteSet(())
        with self.assertRaises(ValueError):
            FiniteSet((1, 0))

    def test_support_contains(self):
        """Test containment across support kinds."""
        self.assertTrue(support_contains(REAL_LINE, UNIT_INTERVAL))
        self.assertFalse(support_contains(UNIT_INTERVAL, REAL_LINE))
        self.assertTrue(support_contains(FiniteSet((0, 1, 2)), BINARY))
        self.assertFalse(support_contains(BINARY, FiniteSet((0, 1, 2))))
        self.assertFalse(support_contains(REAL_LINE, BINARY))


class TestNormal(unittest.TestCase):
    """Test the Normal kernel."""

    def test_log_density_matches_scipy(self):
        """Test log density against scipy.stats.norm."""
        k = Normal(0.5, 2.0)
        x = np.linspace(-5, 5, 11)
        np.testing.assert_allclose(k.log_density(x),
                                   stats.norm.logpdf(x, 0.5, 2.0))
        self.assertAlmostEqual(k.cdf(0.5), 0.5)

    def test_density_is_exp_log_density(self):
        """Test that density and log density agree."""
        k = Normal(0.0, 1.0)
        self.assertAlmostEqual(density(k, 0.0), 1.0 / math.sqrt(2 * math.pi))
        self.assertAlmostEqual(math.exp(log_density(k, 1.3)), density(k, 1.3))

    def test_invalid_parameters(self):
        """Test that nonpositive sd and infinite mean are rejected."""
        with self.assertRaises(ValueError):
            Normal(0.0, 0.0)
        with self.assertRaises(ValueError):
            Normal(math.inf, 1.0)

    def test_sampling_is_reproducible(self):
        """Test sampling through a seeded stream."""
        k = Normal(1.0, 3.0)
        a = sample(k, random_source(7), 1000)
        b = sample(k, random_source(7), 1000)
        np.testing.assert_array_equal(a, b)
        self.assertAlmostEqual(float(np.mean(a)), 1.0, delta=0.4)

    def test_integration_range(self):
        """Test the +/- 12 sd integration range."""
        self.assertEqual(Normal(1.0, 2.0).integration_range(), (-23.0, 25.0))
        self.assertEqual(support(Normal(0.0, 1.0)), REAL_LINE)


class TestNormalisation(unittest.TestCase):
    """Test that continuous kernels integrate to one over their support."""

    def test_real_line_kernels(self):
        """Test Normal, StudentT and mixture normalisation on the real line."""
        kernels = [
            Normal(0.3, 2.0),
            StudentT(10.0),
            StudentT(3.0, 1.0, 2.0),
            NormalMixture((0.5, 0.5), (Normal(0.0, 1.0), Normal(0.0, 0.1))),
        ]
        for k in kernels:
            with self.subTest(kernel=k):
                total = integrate(k.density, -math.inf, math.inf)
                self.assertAlmostEqual(total, 1.0, delta=1e-8)

    def test_beta(self):
        """Test Beta normalisation on the unit interval."""
        total = integrate(Beta(2.0, 3.0).density, 0.0, 1.0)
        self.assertAlmostEqual(total, 1.0, delta=1e-9)


class TestBreakpoints(unittest.TestCase):
    """Test the length-scale points handed to the quadrature."""

    def test_normal_and_student_t(self):
        """Test that breakpoints scale with sd and scale."""
        points = Normal(2.0, 1e-4).breakpoints()
        self.assertIn(2.0, points)
        self.assertAlmostEqual(points.max() - 2.0, 8e-4, places=15)
        np.testing.assert_allclose(StudentT(3.0, 1.0, 2.0).breakpoints(),
                                   1.0 + 2.0 * Normal(0.0, 1.0).breakpoints())

    def test_mixture_skips_empty_components(self):
        """Test that zero-weight components add no breakpoints."""
        mix = NormalMixture((1.0, 0.0), (Normal(0.0, 1.0), Normal(50.0, 1.0)))
        np.testing.assert_array_equal(mix.breakpoints(),
                                      Normal(0.0, 1.0).breakpoints())

    def test_discrete_has_none(self):
        """Test that discrete kernels report no breakpoints."""
        self.assertEqual(Bernoulli(0.3).breakpoints().size, 0)


class TestSamplingConsistency(unittest.TestCase):
    """Test draws against the analytic CDF."""

    def test_kolmogorov_smirnov(self):
        """Test that 10^5 draws pass KS at the 0.001 level."""
        draws = 100000
        critical = 1.9495 / math.sqrt(draws)
        kernels = [
            Normal(0.3, 2.0),
            StudentT(4.0, 1.0, 0.5),
            Beta(2.0, 5.0),
            NormalMixture((0.5, 0.5), (Normal(0.0, 1.0), Normal(0.0, 0.1))),
        ]
        for seed, k in enumerate(kernels):
            with self.subTest(kernel=k):
                x = sample(k, random_source(500, seed), draws)
                self.assertLess(stats.kstest(x, k.cdf).statistic, critical)

    def test_discrete_frequencies(self):
        """Test success frequencies of the binary kernels."""
        for seed, (k, p) in enumerate([(Bernoulli(0.3), 0.3),
                                       (BetaBinomial(1, 2.0, 6.0), 0.25)]):
            with self.subTest(kernel=k):
                x = sample(k, random_source(600, seed), 100000)
                se = math.sqrt(p * (1 - p) / x.size)
                self.assertLess(abs(x.mean() - p), 4 * se)


class TestStudentT(unittest.TestCase):
    """Test the StudentT kernel."""

    def test_large_df_approaches_normal(self):
        """Test that huge df stays finite and close to the normal."""
        k = StudentT(1e8)
        self.assertTrue(np.isfinite(k.log_density(0.0)))
        self.assertAlmostEqual(float(k.log_density(0.7)),
                               float(stats.norm.logpdf(0.7)), places=6)

    def test_integration_range(self):
        """Test the variance-based range and the heavy-tail fallback."""
        lo, hi = StudentT(10.0).integration_range()
        half = 12.0 * math.sqrt(10.0 / 8.0)
        self.assertAlmostEqual(lo, -half)
        self.assertAlmostEqual(hi, half)
        self.assertEqual(StudentT(1.5).integration_range(),
                         (-math.inf, math.inf))
        self.assertEqual(StudentT(1.5, 1.0, 2.0).core_range(), (-23.0, 25.0))

    def test_invalid_df(self):
        """Test that nonpositive df is rejected."""
        with self.assertRaises(ValueError):
            StudentT(0.0)


class TestDiscreteKernels(unittest.TestCase):
    """Test Bernoulli and BetaBinomial kernels."""

    def test_bernoulli_masses(self):
        """Test masses, degenerate atoms and support."""
        self.assertAlmostEqual(float(Bernoulli(0.25).mass(1)), 0.25)
        self.assertEqual(float(Bernoulli(0.0).log_density(1)), -math.inf)
        self.assertEqual(float(Bernoulli(0.0).log_density(0)), 0.0)
        self.assertEqual(Bernoulli(0.3).support(), BINARY)
        self.assertTrue(Bernoulli(0.3).is_discrete)

    def test_bernoulli_sampling(self):
        """Test degenerate sampling and scalar draws."""
        draws = Bernoulli(1.0).sample(random_source(1), 20)
        np.testing.assert_array_equal(draws, np.ones(20))
        self.assertIsInstance(Bernoulli(0.5).sample(random_source(1)), float)

    def test_bernoulli_validation(self):
        """Test that p outside [0, 1] is rejected."""
        with self.assertRaises(ValueError):
            Bernoulli(1.5)

    def test_beta_binomial(self):
        """Test success mass and normalisation of BetaBinomial."""
        k = BetaBinomial(1, 6.0, 6.0)
        self.assertAlmostEqual(k.success_mass, 0.5)
        self.assertAlmostEqual(float(k.mass(1)), 0.5)
        self.assertAlmostEqual(float(np.sum(BetaBinomial(4, 2.0, 3.0).masses())), 1.0)
        self.assertEqual(k.support(), BINARY)

    def test_beta_binomial_validation(self):
        """Test that non-integer trials are rejected."""
        with self.assertRaises(ValueError):
            BetaBinomial(1.5, 1.0, 1.0)

    def test_beta_binomial_scalar_sample(self):
        """Test that a scalar draw lies on the support."""
        draw = BetaBinomial(1, 2.0, 2.0).sample(random_source(3))
        self.assertIn(draw, (0.0, 1.0))


class TestNormalMixture(unittest.TestCase):
    """Test the NormalMixture kernel."""

    def test_log_density(self):
        """Test log density against the weighted sum of components."""
        k = NormalMixture((0.3, 0.7), (Normal(0.0, 1.0), Normal(2.0, 0.5)))
        x = np.array([-1.0, 0.5, 2.0])
        expected = (0.3 * stats.norm.pdf(x, 0.0, 1.0)
                    + 0.7 * stats.norm.pdf(x, 2.0, 0.5))
        np.testing.assert_allclose(k.density(x), expected, rtol=1e-12)

    def test_zero_weight_component(self):
        """Test that a zero-weight component is ignored."""
        k = NormalMixture((1.0, 0.0), (Normal(0.0, 1.0), Normal(5.0, 0.1)))
        self.assertAlmostEqual(float(k.log_density(0.0)),
                               float(stats.norm.logpdf(0.0)))
        self.assertEqual(k.integration_range(), (-12.0, 12.0))

    def test_validation(self):
        """Test weight validation."""
        with self.assertRaises(ValueError):
            NormalMixture((0.5, 0.6), (Normal(0, 1), Normal(1, 1)))
        with self.assertRaises(ValueError):
            NormalMixture((1.0,), (Normal(0, 1), Normal(1, 1)))
        with self.assertRaises(ValueError):
            NormalMixture((-0.5, 1.5), (Normal(0, 1), Normal(1, 1)))

    def test_sampling_mean(self):
        """Test the sample mean of a two-component mixture."""
        k = NormalMixture((0.5, 0.5), (Normal(-1.0, 0.1), Normal(1.0, 0.1)))
        draws = k.sample(random_source(9), 20000)
        self.assertAlmostEqual(float(np.mean(draws)), 0.0, delta=0.05)


if __name__ == '__main__':
    unittest.main()
