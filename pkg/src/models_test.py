"""Tests for the tempered conjugate models."""

import math
import unittest

import numpy as np
from scipy import stats

from dists import BetaBinomial, Bernoulli, Normal, random_source
from models import (
    BetaBernoulliSpec, IllConditionedError, ImproperPriorError, LinRegSpec,
    NormalLocationSpec, RegressionData, UnivariateData, loo_predictive,
    loo_predictive_linreg, loo_predictive_normal_location, plug_in_predictive,
    posterior_beta_bernoulli, posterior_linreg, posterior_mass_outside,
    posterior_normal_location, predictive, predictive_beta_bernoulli,
    predictive_linreg, predictive_normal_location, prior_predictive
)


def _regression_data(n=12, dim=3, seed=4):
    rng = random_source(seed)
    X = rng.normal(size=(n, dim))
    y = X @ np.linspace(0.5, -0.5, dim) + rng.normal(size=n)
    return RegressionData(X, y)


class TestData(unittest.TestCase):
    """Test dataset containers."""

    def test_univariate_is_read_only(self):
        """Test that stored observations cannot be mutated."""
        data = UnivariateData([1.0, 2.0])
        with self.assertRaises(ValueError):
            data.values[0] = 5.0

    def test_empty_rejected(self):
        """Test that an empty dataset is rejected."""
        with self.assertRaises(ValueError):
            UnivariateData([])

    def test_regression_shapes(self):
        """Test shape validation of regression data."""
        with self.assertRaises(ValueError):
            RegressionData(np.ones((3, 2)), np.ones(4))
        with self.assertRaises(ValueError):
            RegressionData(np.ones(3), np.ones(3))
        data = RegressionData(np.ones((3, 2)), np.ones(3))
        self.assertEqual(data.size, 3)
        self.assertEqual(data.dim, 2)

    def test_deleted(self):
        """Test that deletion drops exactly one row."""
        data = RegressionData(np.arange(6.0).reshape(3, 2), [1.0, 2.0, 3.0])
        fold = data.deleted(1)
        np.testing.assert_array_equal(fold.y, [1.0, 3.0])
        np.testing.assert_array_equal(fold.X, [[0.0, 1.0], [4.0, 5.0]])
        np.testing.assert_array_equal(UnivariateData([4.0, 5.0]).deleted(0).values,
                                      [5.0])


class TestNormalLocation(unittest.TestCase):
    """Test the normal location model."""

    def setUp(self):
        """Set up a small dataset."""
        self.data = UnivariateData([1.0, 2.0, 3.0])

    def test_flat_prior_posterior(self):
        """Test the flat-prior posterior at two temperatures."""
        spec = NormalLocationSpec(1.0)
        post = posterior_normal_location(spec, self.data, 1.0)
        self.assertAlmostEqual(post.mean, 2.0)
        self.assertAlmostEqual(post.var, 1.0 / 3.0)
        post = posterior_normal_location(spec, self.data, 2.0)
        self.assertAlmostEqual(post.mean, 2.0)
        self.assertAlmostEqual(post.var, 1.0 / 6.0)

    def test_proper_prior_posterior(self):
        """Test shrinkage toward a N(0, 1) prior."""
        spec = NormalLocationSpec(1.0, prior_mean=0.0, prior_var=1.0)
        post = posterior_normal_location(spec, self.data, 1.0)
        self.assertAlmostEqual(post.mean, 1.5)
        self.assertAlmostEqual(post.var, 0.25)

    def test_predictive(self):
        """Test that the predictive adds the likelihood variance."""
        spec = NormalLocationSpec(2.0)
        pred = predictive_normal_location(spec, self.data, 1.0)
        self.assertIsInstance(pred, Normal)
        self.assertAlmostEqual(pred.mean, 2.0)
        self.assertAlmostEqual(pred.sd, math.sqrt(4.0 + 4.0 / 3.0))

    def test_concentration_in_tau(self):
        """Test that posterior variance shrinks as tau grows."""
        spec = NormalLocationSpec(1.0, prior_var=4.0)
        variances = [posterior_normal_location(spec, self.data, tau).var
                     for tau in (0.01, 0.1, 1.0, 10.0, 100.0)]
        self.assertTrue(all(b < a for a, b in zip(variances, variances[1:])))

    def test_limits(self):
        """Test the small and large tau limits of the predictive."""
        spec = NormalLocationSpec(1.0, prior_mean=0.5, prior_var=3.0)
        cold = predictive(spec, self.data, 1e-9)
        prior = prior_predictive(spec)
        self.assertAlmostEqual(cold.mean, prior.mean, places=6)
        self.assertAlmostEqual(cold.sd, prior.sd, places=6)
        hot = predictive(spec, self.data, 1e9)
        plug = plug_in_predictive(spec, self.data)
        self.assertAlmostEqual(hot.mean, plug.mean, places=6)
        self.assertAlmostEqual(hot.sd, plug.sd, places=6)

    def test_flat_prior_predictive_is_improper(self):
        """Test that the flat prior has no prior predictive."""
        with self.assertRaises(ImproperPriorError):
            prior_predictive(NormalLocationSpec(1.0))

    def test_loo_matches_refit(self):
        """Test that each leave-one-out score equals a refit on n-1 points."""
        data = UnivariateData(random_source(8).normal(0.3, 1.0, size=9))
        taus = [0.05, 1.0, 20.0]
        for spec in (NormalLocationSpec(1.0),
                     NormalLocationSpec(1.5, prior_mean=1.0, prior_var=2.0)):
            scores = spec.loo_log_scores(data, taus)
            self.assertEqual(scores.shape, (3, 9))
            for t, tau in enumerate(taus):
                for i in range(data.size):
                    refit = spec.predictive(data.deleted(i), tau)
                    expected = float(refit.log_density(data.values[i]))
                    self.assertAlmostEqual(scores[t, i], expected,
                                           delta=1e-12 * abs(expected))

    def test_loo_predictive_helper(self):
        """Test the leave-one-out predictive for one index."""
        spec = NormalLocationSpec(1.0)
        pred = loo_predictive_normal_location(spec, self.data, 1.0, 0)
        self.assertAlmostEqual(pred.mean, 2.5)
        self.assertAlmostEqual(pred.sd, math.sqrt(1.5))
        with self.assertRaises(IndexError):
            loo_predictive(spec, self.data, 1.0, 3)

    def test_loo_needs_two_points(self):
        """Test that leave-one-out on a single point is rejected."""
        with self.assertRaises(ValueError):
            NormalLocationSpec(1.0).loo_log_scores(UnivariateData([1.0]), [1.0])

    def test_invalid_tau(self):
        """Test that zero, negative and infinite tau are rejected."""
        spec = NormalLocationSpec(1.0)
        for tau in (0.0, -1.0, math.inf):
            with self.subTest(tau=tau):
                with self.assertRaises(ValueError):
                    spec.posterior(self.data, tau)

    def test_invalid_spec(self):
        """Test spec validation."""
        with self.assertRaises(ValueError):
            NormalLocationSpec(0.0)
        with self.assertRaises(ValueError):
            NormalLocationSpec(1.0, prior_var=0.0)

    def test_rejects_regression_data(self):
        """Test that regression data is rejected."""
        with self.assertRaises(ValueError):
            NormalLocationSpec(1.0).posterior(_regression_data(), 1.0)


class TestBetaBernoulli(unittest.TestCase):
    """Test the beta-Bernoulli model."""

    def test_posterior(self):
        """Test tempered pseudo-counts."""
        spec = BetaBernoulliSpec(2.0, 3.0)
        data = UnivariateData([1, 1, 0, 1])
        post = posterior_beta_bernoulli(spec, data, 0.5)
        self.assertAlmostEqual(post.a, 0.5 * 3 + 2.0)
        self.assertAlmostEqual(post.b, 0.5 * 1 + 3.0)

    def test_predictive(self):
        """Test the predictive success mass."""
        spec = BetaBernoulliSpec()
        pred = predictive_beta_bernoulli(spec, UnivariateData([1, 1, 0]), 1.0)
        self.assertIsInstance(pred, BetaBinomial)
        self.assertAlmostEqual(float(pred.mass(1)), 3.0 / 5.0)

    def test_loo_example(self):
        """Test the two-point leave-one-out example under a uniform prior."""
        spec = BetaBernoulliSpec(1.0, 1.0)
        scores = spec.loo_log_scores(UnivariateData([1, 0]), [1.0])
        np.testing.assert_allclose(scores[0], [math.log(1 / 3), math.log(1 / 3)],
                                   rtol=1e-12)

    def test_loo_matches_refit(self):
        """Test leave-one-out scores against refits."""
        spec = BetaBernoulliSpec(0.5, 2.0)
        data = UnivariateData([1, 0, 0, 1, 1, 1, 0])
        taus = [0.1, 1.0, 7.0]
        scores = spec.loo_log_scores(data, taus)
        for t, tau in enumerate(taus):
            for i in range(data.size):
                refit = spec.predictive(data.deleted(i), tau)
                self.assertAlmostEqual(scores[t, i],
                                       float(refit.log_density(data.values[i])),
                                       places=13)

    def test_limits(self):
        """Test the prior and plug-in predictives."""
        spec = BetaBernoulliSpec(2.0, 6.0)
        data = UnivariateData([1, 0, 0, 0])
        self.assertAlmostEqual(prior_predictive(spec).success_mass, 0.25)
        plug = plug_in_predictive(spec, data)
        self.assertIsInstance(plug, Bernoulli)
        self.assertAlmostEqual(plug.p, 0.25)

    def test_non_binary_rejected(self):
        """Test that non-binary observations are rejected."""
        with self.assertRaises(ValueError):
            BetaBernoulliSpec().posterior(UnivariateData([0.0, 0.5]), 1.0)

    def test_invalid_prior(self):
        """Test that nonpositive prior shapes are rejected."""
        with self.assertRaises(ValueError):
            BetaBernoulliSpec(0.0, 1.0)


class TestLinReg(unittest.TestCase):
    """Test Gaussian linear regression."""

    def setUp(self):
        """Set up data and an isotropic spec."""
        self.data = _regression_data()
        self.spec = LinRegSpec.isotropic(1.0, 2.0, 3)

    def test_posterior_matches_direct_formula(self):
        """Test the posterior against a dense solve."""
        tau = 0.7
        post = posterior_linreg(self.spec, self.data, tau)
        X, y = self.data.X, self.data.y
        precision = tau * X.T @ X + np.eye(3) / 2.0
        np.testing.assert_allclose(post.cov, np.linalg.inv(precision),
                                   rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(post.mean,
                                   np.linalg.solve(precision, tau * X.T @ y),
                                   rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(post.chol @ post.chol.T, precision,
                                   rtol=1e-12, atol=1e-12)

    def test_predictive(self):
        """Test predictive location and scale at a covariate vector."""
        x_new = np.array([0.2, -1.0, 0.5])
        post = posterior_linreg(self.spec, self.data, 1.0)
        pred = predictive_linreg(self.spec, self.data, 1.0, x_new)
        self.assertAlmostEqual(pred.mean, float(post.mean @ x_new), places=12)
        self.assertAlmostEqual(pred.sd,
                               math.sqrt(float(x_new @ post.cov @ x_new) + 1.0),
                               places=12)

    def test_predictive_params_many(self):
        """Test the batched predictive against single evaluations."""
        rows = random_source(2).normal(size=(4, 3))
        locs, sds = self.spec.predictive_params_many(self.data, 3.0, rows)
        for j in range(4):
            pred = self.spec.predictive(self.data, 3.0, rows[j])
            self.assertAlmostEqual(locs[j], pred.mean, places=12)
            self.assertAlmostEqual(sds[j], pred.sd, places=12)

    def test_limit_params_many(self):
        """Test batched prior and plug-in parameters against single kernels."""
        rows = random_source(3).normal(size=(5, 3))
        prior_locs, prior_sds = self.spec.prior_params_many(rows)
        plug_locs, plug_sds = self.spec.plug_in_params_many(self.data, rows)
        for j in range(5):
            prior = self.spec.prior_predictive(rows[j])
            plug = self.spec.plug_in_predictive(self.data, rows[j])
            self.assertAlmostEqual(prior_locs[j], prior.mean, places=12)
            self.assertAlmostEqual(prior_sds[j], prior.sd, places=12)
            self.assertAlmostEqual(plug_locs[j], plug.mean, places=12)
            self.assertAlmostEqual(plug_sds[j], plug.sd, places=12)

    def test_loo_matches_refit(self):
        """Test leave-one-out scores against brute-force refits."""
        taus = [0.1, 1.0, 10.0]
        scores = self.spec.loo_log_scores(self.data, taus)
        for t, tau in enumerate(taus):
            for i in range(self.data.size):
                refit = loo_predictive_linreg(self.spec, self.data, tau, i)
                expected = float(refit.log_density(self.data.y[i]))
                self.assertAlmostEqual(scores[t, i], expected,
                                       delta=1e-12 * max(1.0, abs(expected)))

    def test_loo_minimum_size(self):
        """Test that leave-one-out needs p + 1 observations."""
        small = _regression_data(n=3, dim=3)
        with self.assertRaises(ValueError):
            self.spec.loo_log_scores(small, [1.0])

    def test_plug_in_is_least_squares(self):
        """Test the plug-in predictive against numpy least squares."""
        x_new = np.array([1.0, 0.0, -2.0])
        beta_hat, *_ = np.linalg.lstsq(self.data.X, self.data.y, rcond=None)
        plug = plug_in_predictive(self.spec, self.data, x_new)
        self.assertAlmostEqual(plug.mean, float(beta_hat @ x_new), places=10)
        self.assertEqual(plug.sd, 1.0)

    def test_prior_predictive(self):
        """Test the prior predictive scale."""
        x_new = np.array([1.0, 1.0, 0.0])
        prior = prior_predictive(self.spec, x_new)
        self.assertEqual(prior.mean, 0.0)
        self.assertAlmostEqual(prior.sd, math.sqrt(2.0 * 2 + 1.0))

    def test_ill_conditioned(self):
        """Test that a collinear design with a vague prior is refused."""
        X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        data = RegressionData(X, [1.0, 2.0, 3.0])
        spec = LinRegSpec.isotropic(1.0, 1e20, 2)
        with self.assertRaises(IllConditionedError):
            spec.posterior(data, 1.0)
        with self.assertRaises(IllConditionedError):
            spec.least_squares(data)

    def test_covariate_shape(self):
        """Test that missing or misshapen covariates are rejected."""
        with self.assertRaises(ValueError):
            self.spec.predictive(self.data, 1.0)
        with self.assertRaises(ValueError):
            self.spec.predictive(self.data, 1.0, np.ones(2))

    def test_prior_cov_validation(self):
        """Test that asymmetric or indefinite prior covariances are rejected."""
        with self.assertRaises(ValueError):
            LinRegSpec(1.0, [[1.0, 0.5], [0.0, 1.0]])
        with self.assertRaises(ValueError):
            LinRegSpec(1.0, [[1.0, 2.0], [2.0, 1.0]])
        with self.assertRaises(ValueError):
            LinRegSpec(1.0, [1.0, 1.0])

    def test_dimension_mismatch(self):
        """Test that designs of the wrong width are rejected."""
        with self.assertRaises(ValueError):
            LinRegSpec.isotropic(1.0, 1.0, 2).posterior(self.data, 1.0)


class TestPosteriorMassOutside(unittest.TestCase):
    """Test posterior tail mass around a point."""

    def test_normal_location(self):
        """Test against the normal CDF."""
        spec = NormalLocationSpec(1.0)
        data = UnivariateData([0.1, -0.3, 0.5, 0.2])
        post = spec.posterior(data, 2.0)
        expected = 2 * stats.norm.sf(0.5, 0.0, math.sqrt(post.var))
        got = posterior_mass_outside(spec, data, 2.0, post.mean, 0.5)
        self.assertAlmostEqual(got, expected, places=12)

    def test_mass_shrinks_with_tau(self):
        """Test that the mass outside a ball shrinks as tau grows."""
        spec = BetaBernoulliSpec()
        data = UnivariateData([1, 0, 1, 1, 0, 1, 0, 1])
        masses = [posterior_mass_outside(spec, data, tau, 0.625, 0.1)
                  for tau in (0.1, 1.0, 10.0, 100.0)]
        self.assertTrue(all(b < a for a, b in zip(masses, masses[1:])))

    def test_invalid_arguments(self):
        """Test radius validation and the regression refusal."""
        data = UnivariateData([0.0, 1.0])
        with self.assertRaises(ValueError):
            posterior_mass_outside(NormalLocationSpec(1.0), data, 1.0, 0.0, 0.0)
        with self.assertRaises(TypeError):
            posterior_mass_outside(LinRegSpec.isotropic(1.0, 1.0, 3),
                                   _regression_data(), 1.0, 0.0, 1.0)


class TestLooOracle(unittest.TestCase):
    """Leave-one-out scores against independent refits on random instances."""

    def setUp(self):
        """Set up a seeded source of instances."""
        self.rng = random_source(606)

    def _tau(self):
        return float(np.exp(self.rng.uniform(math.log(0.01), math.log(100.0))))

    def _refit_close(self, got, expected):
        self.assertAlmostEqual(got, expected, delta=1e-12 * max(1.0, abs(expected)))

    def _formula_close(self, got, expected):
        # hand-written solves round differently from the model's factors
        self.assertAlmostEqual(got, expected, delta=1e-10 * max(1.0, abs(expected)))

    def test_normal_location(self):
        """Test 100 random normal-location instances."""
        for _ in range(100):
            n = int(self.rng.integers(2, 21))
            sd = self.rng.uniform(0.5, 2.0)
            y = self.rng.normal(self.rng.uniform(-2, 2), 1.5, size=n)
            flat = self.rng.random() < 0.5
            m0, v0 = self.rng.uniform(-1, 1), self.rng.uniform(0.5, 4.0)
            spec = (NormalLocationSpec(sd) if flat
                    else NormalLocationSpec(sd, prior_mean=m0, prior_var=v0))
            tau = self._tau()
            data = UnivariateData(y)
            scores = spec.loo_log_scores(data, [tau])[0]
            for i in range(n):
                refit = spec.predictive(data.deleted(i), tau)
                self._refit_close(scores[i], float(refit.log_density(y[i])))
                rest = np.delete(y, i)
                precision = tau * (n - 1) / sd ** 2 + (0.0 if flat else 1 / v0)
                shift = tau * rest.sum() / sd ** 2 + (0.0 if flat else m0 / v0)
                scale = math.sqrt(sd ** 2 + 1 / precision)
                self._formula_close(
                    scores[i], stats.norm.logpdf(y[i], shift / precision, scale))

    def test_beta_bernoulli(self):
        """Test 100 random beta-Bernoulli instances."""
        for _ in range(100):
            n = int(self.rng.integers(2, 21))
            y = (self.rng.random(n) < self.rng.random()).astype(float)
            a0, b0 = self.rng.uniform(0.2, 5.0, size=2)
            tau = self._tau()
            spec, data = BetaBernoulliSpec(a0, b0), UnivariateData(y)
            scores = spec.loo_log_scores(data, [tau])[0]
            for i in range(n):
                refit = spec.predictive(data.deleted(i), tau)
                self.assertEqual(scores[i], float(refit.log_density(y[i])))
                successes = y.sum() - y[i]
                a = tau * successes + a0
                b = tau * (n - 1 - successes) + b0
                p = a / (a + b) if y[i] == 1 else b / (a + b)
                self._formula_close(scores[i], math.log(p))

    def test_linear_regression(self):
        """Test 100 random regression instances."""
        for _ in range(100):
            dim = int(self.rng.integers(1, 5))
            n = int(self.rng.integers(dim + 1, 21))
            X = self.rng.normal(size=(n, dim))
            y = X @ self.rng.normal(size=dim) + self.rng.normal(size=n)
            noise_sd, prior_var = self.rng.uniform(0.5, 2.0, size=2)
            spec = LinRegSpec.isotropic(noise_sd, prior_var, dim)
            tau = self._tau()
            data = RegressionData(X, y)
            scores = spec.loo_log_scores(data, [tau])[0]
            for i in range(n):
                refit = spec.predictive(data.deleted(i), tau, X[i])
                self._refit_close(scores[i], float(refit.log_density(y[i])))
                Xr, yr = np.delete(X, i, axis=0), np.delete(y, i)
                precision = (tau * Xr.T @ Xr / noise_sd ** 2
                             + np.eye(dim) / prior_var)
                mean = np.linalg.solve(precision, tau * Xr.T @ yr / noise_sd ** 2)
                var = X[i] @ np.linalg.solve(precision, X[i]) + noise_sd ** 2
                self._formula_close(
                    scores[i], stats.norm.logpdf(y[i], X[i] @ mean, math.sqrt(var)))


class TestPredictiveMonteCarlo(unittest.TestCase):
    """Predictive densities against averages over posterior draws."""

    draws = 100000

    def _check(self, predictive_density, likelihoods):
        mean = likelihoods.mean(axis=1)
        se = likelihoods.std(axis=1, ddof=1) / math.sqrt(likelihoods.shape[1])
        self.assertTrue(np.all(np.abs(mean - predictive_density) <= 3 * se + 1e-15))

    def test_normal_location(self):
        """Test the normal-location predictive at 20 points."""
        rng = random_source(71)
        spec = NormalLocationSpec(1.3, prior_mean=0.5, prior_var=2.0)
        data = UnivariateData(rng.normal(0.2, 1.0, size=8))
        post = spec.posterior(data, 0.4)
        theta = rng.normal(post.mean, math.sqrt(post.var), size=self.draws)
        points = np.linspace(-4.0, 4.0, 20)
        pred = spec.predictive(data, 0.4)
        self._check(np.exp(pred.log_density(points)),
                    stats.norm.pdf(points[:, None], theta[None, :], 1.3))

    def test_beta_bernoulli(self):
        """Test the beta-Bernoulli predictive at both outcomes."""
        rng = random_source(72)
        spec = BetaBernoulliSpec(2.0, 3.0)
        data = UnivariateData([1, 1, 0, 1, 0, 1])
        post = spec.posterior(data, 2.5)
        theta = rng.beta(post.a, post.b, size=self.draws)
        pred = spec.predictive(data, 2.5)
        self._check(np.exp(pred.log_density(np.array([0.0, 1.0]))),
                    np.vstack([1.0 - theta, theta]))

    def test_linear_regression(self):
        """Test the regression predictive at 20 points and one covariate."""
        rng = random_source(73)
        data = _regression_data(n=15, dim=3, seed=74)
        spec = LinRegSpec.isotropic(0.8, 1.5, 3)
        post = spec.posterior(data, 3.0)
        beta = rng.multivariate_normal(post.mean, post.cov, size=self.draws)
        x_new = np.array([0.3, -0.7, 1.1])
        points = np.linspace(-3.0, 3.0, 20)
        pred = spec.predictive(data, 3.0, x_new)
        self._check(np.exp(pred.log_density(points)),
                    stats.norm.pdf(points[:, None], (beta @ x_new)[None, :], 0.8))


class TestModelIdentities(unittest.TestCase):
    """Identities shared by all three families."""

    def test_tempering_is_replication(self):
        """Test that tau = k matches the k-fold replicated data at tau = 1.

        Beta-Bernoulli counts are exact. The Gaussian families sum k copies
        of the data in a different order than tau * sum, so their posteriors
        agree to rounding, not bit for bit.
        """
        rng = random_source(81)
        y = rng.normal(size=6)
        normal = NormalLocationSpec(1.2, prior_mean=0.3, prior_var=2.0)
        bern = BetaBernoulliSpec(1.5, 0.5)
        bits = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
        reg_data = _regression_data(n=8, dim=2, seed=82)
        reg = LinRegSpec.isotropic(0.9, 3.0, 2)
        for k in (2, 3, 5):
            with self.subTest(k=k):
                hot = normal.posterior(UnivariateData(y), float(k))
                rep = normal.posterior(UnivariateData(np.tile(y, k)), 1.0)
                self.assertAlmostEqual(hot.mean, rep.mean, delta=1e-13)
                self.assertAlmostEqual(hot.var, rep.var, delta=1e-15)

                self.assertEqual(bern.posterior(UnivariateData(bits), float(k)),
                                 bern.posterior(UnivariateData(np.tile(bits, k)), 1.0))

                hot = reg.posterior(reg_data, float(k))
                rep = reg.posterior(RegressionData(np.tile(reg_data.X, (k, 1)),
                                                   np.tile(reg_data.y, k)), 1.0)
                np.testing.assert_allclose(hot.mean, rep.mean, rtol=1e-12, atol=1e-14)
                np.testing.assert_allclose(hot.cov, rep.cov, rtol=1e-12, atol=1e-14)

    def test_limit_coherence(self):
        """Test that the predictive mean moves monotonically from prior mean to ybar."""
        data = UnivariateData([1.2, 0.8, 1.9, 1.4])
        taus = np.logspace(-8, 8, 33)
        proper = NormalLocationSpec(1.0, prior_mean=-1.0, prior_var=0.5)
        means = np.array([proper.predictive(data, tau).mean for tau in taus])
        self.assertTrue(np.all(np.diff(means) > 0))
        self.assertAlmostEqual(means[0], -1.0, places=6)
        self.assertAlmostEqual(means[-1], 1.325, places=6)
        flat = NormalLocationSpec(1.0)
        for tau in taus:
            self.assertAlmostEqual(flat.predictive(data, tau).mean, 1.325,
                                   places=12)

    def test_regression_reduces_to_location(self):
        """Test that an intercept-only regression reproduces the location model."""
        y = random_source(83).normal(0.5, 1.0, size=10)
        reg = LinRegSpec(1.0, np.array([[1e12]]))
        loc = NormalLocationSpec(1.0)
        reg_data = RegressionData(np.ones((10, 1)), y)
        loc_data = UnivariateData(y)
        for tau in (0.1, 1.0, 10.0):
            with self.subTest(tau=tau):
                a = reg.predictive(reg_data, tau, np.ones(1))
                b = loc.predictive(loc_data, tau)
                self.assertAlmostEqual(a.mean, b.mean, delta=1e-8)
                self.assertAlmostEqual(a.sd, b.sd, delta=1e-8)
        np.testing.assert_allclose(reg.loo_log_scores(reg_data, [0.5, 2.0]),
                                   loc.loo_log_scores(loc_data, [0.5, 2.0]),
                                   rtol=0, atol=1e-8)

    def test_posteriors_are_proper(self):
        """Test positive variances, shapes and an SPD covariance."""
        rng = random_source(84)
        for _ in range(50):
            tau = float(np.exp(rng.uniform(-8.0, 8.0)))
            y = rng.normal(size=5)
            post = NormalLocationSpec(1.0).posterior(UnivariateData(y), tau)
            self.assertGreater(post.var, 0.0)
            bits = (rng.random(5) < 0.5).astype(float)
            beta = BetaBernoulliSpec(0.5, 0.5).posterior(UnivariateData(bits), tau)
            self.assertGreater(beta.a, 0.0)
            self.assertGreater(beta.b, 0.0)
            reg = LinRegSpec.isotropic(1.0, 1.0, 3).posterior(
                _regression_data(n=6, dim=3, seed=int(rng.integers(1000))), tau)
            np.linalg.cholesky(reg.cov)


if __name__ == '__main__':
    unittest.main()
