import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efwe import distributions as dist
from efwe.datasets import DataError, aarset
from efwe.distributions import EfweParams, Family, RefModel
from efwe.inference import (
    DegenerateDataError,
    InformationMatrixError,
    SaturationWarning,
    fit_mle,
    hessian,
    info_criteria,
    kaplan_meier,
    ks_statistic,
    loglik,
    observed_info,
    profile_lambda,
    score,
    wald_ci,
)

ONE = EfweParams(1, 1, 1)


@pytest.fixture(scope="module")
def data():
    return aarset()


@pytest.fixture(scope="module")
def efwe_fit(data):
    return fit_mle(data, Family.EFWE)


def random_case(rng):
    p = EfweParams(*rng.uniform(0.2, 2, 2), rng.uniform(0.05, 0.5))
    x = dist.sample(p, 40, seed=int(rng.integers(1 << 30)))
    return p, x


def fd_score(x, p, rel=1e-6):
    theta = p.as_array()
    g = np.empty(3)
    for i in range(3):
        h = rel * theta[i]
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (loglik(x, EfweParams(*up)) - loglik(x, EfweParams(*dn))) / (2 * h)
    return g


def fd_hessian(x, p, rel=1e-6):
    theta = p.as_array()
    H = np.empty((3, 3))
    for j in range(3):
        h = rel * theta[j]
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        H[:, j] = (score(x, EfweParams(*up)) - score(x, EfweParams(*dn))) / (2 * h)
    return H


class TestLikelihood:
    def test_single_point(self):
        assert loglik([1.0], ONE) == pytest.approx(math.log(2 * math.e * math.exp(-math.e)), rel=1e-14)

    def test_is_sum_of_log_pdf(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            p, x = random_case(rng)
            assert loglik(x, p) == pytest.approx(math.fsum(dist.log_pdf(p, x)), abs=1e-10)

    def test_conditional_offset(self):
        x = aarset()
        p = EfweParams(0.015, 0.381, 0.076)
        assert loglik(x, p, "conditional") - loglik(x, p) == pytest.approx(50 * 0.076, rel=1e-12)

    def test_bad_likelihood_name(self):
        with pytest.raises(ValueError):
            loglik([1.0], ONE, "other")

    def test_score_vs_fd(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            p, x = random_case(rng)
            np.testing.assert_allclose(score(x, p), fd_score(x, p), rtol=1e-5, atol=1e-6)

    def test_hessian_vs_fd(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            p, x = random_case(rng)
            H, ref = hessian(x, p), fd_hessian(x, p)
            np.testing.assert_allclose(H, ref, rtol=1e-4, atol=1e-4 * np.max(np.abs(ref)))
            np.testing.assert_allclose(H, H.T)

    def test_hessian_vs_fd_of_loglik(self):
        # second differences of the likelihood itself, independent of the score
        rng = np.random.default_rng(6)
        p, x = random_case(rng)
        theta = p.as_array()
        h = 1e-4 * theta
        ref = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                ei, ej = np.eye(3)[i] * h[i], np.eye(3)[j] * h[j]
                f = lambda v: loglik(x, EfweParams(*v))  # noqa: E731
                ref[i, j] = (f(theta + ei + ej) - f(theta + ei - ej) - f(theta - ei + ej) + f(theta - ei - ej)) / (
                    4 * h[i] * h[j]
                )
        np.testing.assert_allclose(hessian(x, p), ref, rtol=1e-4, atol=1e-6 * np.max(np.abs(ref)))

    def test_profile_lambda_single(self):
        assert profile_lambda([1.0], 1.0, 1.0) == pytest.approx(math.exp(-1), rel=1e-14)

    def test_profile_lambda_zeroes_score(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p, x = random_case(rng)
            lam = profile_lambda(x, p.alpha, p.beta)
            g = score(x, EfweParams(p.alpha, p.beta, lam))
            assert abs(g[2]) < 1e-10 * x.size / lam
            lam_c = profile_lambda(x, p.alpha, p.beta, "conditional")
            g = score(x, EfweParams(p.alpha, p.beta, lam_c), "conditional")
            assert abs(g[2]) < 1e-10 * x.size / lam_c

    def test_profile_lambda_saturation(self):
        with pytest.warns(SaturationWarning):
            lam = profile_lambda([50.0, 60.0], 1.0, 1.0)
        assert lam > 0


class TestFit:
    def test_aarset_converged(self, efwe_fit):
        assert efwe_fit.converged
        assert efwe_fit.score_norm < 1e-8
        np.testing.assert_allclose(efwe_fit.vcov, efwe_fit.vcov.T)
        np.linalg.cholesky(efwe_fit.vcov)

    def test_aarset_is_maximum(self, efwe_fit, data):
        # no nearby point improves on the fit
        rng = np.random.default_rng(0)
        theta = efwe_fit.estimates
        for _ in range(50):
            q = theta * np.exp(rng.normal(0, 1e-3, 3))
            assert loglik(data, EfweParams(*q)) <= efwe_fit.loglik + 1e-12

    def test_aarset_near_reference(self, efwe_fit):
        a, b, lam = efwe_fit.estimates
        assert a == pytest.approx(0.015, abs=0.001)
        assert b == pytest.approx(0.381, abs=0.02)
        assert lam == pytest.approx(0.076, abs=0.005)
        assert profile_lambda(aarset(), a, b) == pytest.approx(0.076, abs=0.002)

    def test_fwe(self, data):
        fit = fit_mle(data, "fwe")
        assert fit.converged
        assert fit.estimates[0] == pytest.approx(0.0122, abs=5e-4)
        assert fit.estimates[1] == pytest.approx(0.7002, abs=0.02)
        assert fit.loglik == pytest.approx(-250.81, abs=0.05)

    def test_ref_families_against_scipy(self, data):
        from scipy import optimize

        x = np.asarray(data)
        for fam in (Family.WEIBULL, Family.LFR, Family.FWE):
            fit = fit_mle(data, fam)

            def nll(v, fam=fam):
                try:
                    m = RefModel(fam, tuple(np.exp(v)))
                except dist.DomainError:
                    return np.inf
                return -float(np.sum(dist.ref_logpdf(m, x)))

            ref = optimize.minimize(nll, np.log(fit.estimates) + 0.3, method="Nelder-Mead",
                                    options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
            assert fit.loglik == pytest.approx(-ref.fun, abs=1e-6)

    def test_weibull_vs_scipy_fit(self, data):
        from scipy import stats

        shape, _, scale = stats.weibull_min.fit(np.asarray(data), floc=0)
        fit = fit_mle(data, "weibull")
        assert fit.estimates[0] == pytest.approx(scale, rel=1e-4)
        assert fit.estimates[1] == pytest.approx(shape, rel=1e-4)

    def test_simulation_recovery(self):
        truth = np.array([1.0, 1.0, 0.2])
        x = dist.sample(EfweParams(*truth), 5000, seed=123)
        fit = fit_mle(x, likelihood="conditional")
        assert fit.converged
        assert np.all(np.abs(fit.estimates - truth) < 3 * fit.std_errors)

    def test_conditional_only_for_efwe(self, data):
        with pytest.raises(ValueError):
            fit_mle(data, "weibull", likelihood="conditional")

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError):
            fit_mle([2.0] * 10)
        with pytest.raises(DataError):
            fit_mle([1.0, 2.0, 3.0, 4.0])

    def test_to_dict(self, efwe_fit):
        d = efwe_fit.to_dict()
        assert set(d["params"]) == {"alpha", "beta", "lambda"}
        assert d["defect"] == pytest.approx(1 - math.exp(-efwe_fit.estimates[2]))
        import json

        json.dumps(d)


class TestWald:
    def test_level_zero(self, efwe_fit):
        ci = wald_ci(efwe_fit, 0.0)
        for (lo, hi), est in zip(ci.values(), efwe_fit.estimates):
            assert lo == hi == pytest.approx(est)

    def test_monotone(self, efwe_fit):
        widths = [[hi - lo for lo, hi in wald_ci(efwe_fit, lv).values()] for lv in (0.5, 0.9, 0.99)]
        assert np.all(np.diff(np.array(widths), axis=0) > 0)

    def test_bad_level(self, efwe_fit):
        with pytest.raises(ValueError):
            wald_ci(efwe_fit, 1.0)

    def test_singular_information(self):
        with pytest.raises(InformationMatrixError):
            # one distinct value repeated makes alpha and beta unidentifiable
            observed_info([1.0, 1.0, 1.0], EfweParams(1e-8, 1e-8, 1.0))


class TestKs:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 200))
    def test_exact_quantiles(self, n):
        p = EfweParams(1, 1, 0.1)
        u = (np.arange(1, n + 1) - 0.5) / n
        x = dist.quantile(p, dist.defect(p) + u * math.exp(-0.1))
        d = ks_statistic(x, lambda t: (dist.cdf(p, t) - dist.defect(p)) / math.exp(-0.1))
        assert d == pytest.approx(0.5 / n, rel=1e-6)

    def test_against_scipy_without_ties(self):
        from scipy import stats

        x = dist.sample(ONE, 200, seed=9)
        cdf = lambda t: (dist.cdf(ONE, t) - dist.defect(ONE)) / math.exp(-1)  # noqa: E731
        assert ks_statistic(x, cdf) == pytest.approx(stats.kstest(x, cdf).statistic, abs=1e-14)

    def test_ties_block(self):
        # ecdf at {1,1,2}: jumps 0 -> 2/3 at 1, 2/3 -> 1 at 2
        cdf = lambda t: np.asarray(t) / 3.0  # noqa: E731
        assert ks_statistic([1.0, 1.0, 2.0], cdf) == pytest.approx(1 / 3)


class TestInfoCriteria:
    def test_reference_rows(self):
        c = info_criteria(-224.832, 3, 50)
        assert (c.aic, c.aicc, c.bic) == pytest.approx((455.664, 456.186, 461.400), abs=0.01)
        c = info_criteria(-241.002, 2, 50)
        assert (c.aic, c.bic) == pytest.approx((486.004, 489.828), abs=0.01)

    def test_zero(self):
        c = info_criteria(0.0, 0, 10)
        assert c.aic == 0 and c.bic == 0

    def test_aicc_limit(self):
        for n, tol in ((10**2, 0.3), (10**4, 3e-3), (10**6, 3e-5)):
            c = info_criteria(-10.0, 3, n)
            assert 0 < c.aicc - c.aic < tol


class TestKaplanMeier:
    def test_simple(self):
        km = kaplan_meier([1.0, 2.0, 3.0])
        np.testing.assert_allclose(km([1, 2, 3]), [2 / 3, 1 / 3, 0])
        assert km(0.5) == 1.0

    def test_ties(self):
        km = kaplan_meier([1.0, 1.0, 2.0])
        assert km(1.0) == pytest.approx(1 / 3)
        assert km(2.0) == 0.0

    def test_aarset(self, data):
        assert kaplan_meier(data)(18.0) == pytest.approx(0.64)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(1, 20), min_size=1, max_size=60))
    def test_equals_one_minus_ecdf(self, vals):
        x = np.array(vals, dtype=float)
        km = kaplan_meier(x)
        for t in np.unique(x):
            assert km(t) == pytest.approx(1 - np.mean(x <= t), abs=1e-12)


def test_no_warnings_on_aarset_fit(data):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit_mle(data)
