import math

import numpy as np
import pytest

from cndtest.cnd import (
    CndDist,
    GaussianCnd,
    RescaledDist,
    TulapDist,
    add_noise,
    cnd_identity_check,
    noise_from_config,
)
from cndtest.errors import InvalidParameterError
from cndtest.tradeoff import eps_delta_tradeoff, gdp_tradeoff, twofold

F10 = eps_delta_tradeoff(1.0, 0.0)
EPS_DELTA_CASES = [(0.1, 0.0), (1.0, 0.0), (1.0, 0.01), (3.0, 0.05)]

IDENTITY_FNS = [
    eps_delta_tradeoff(1.0, 0.0),
    eps_delta_tradeoff(0.1, 0.0),
    eps_delta_tradeoff(1.0, 0.01),
    gdp_tradeoff(0.5),
    gdp_tradeoff(1.0),
    twofold(eps_delta_tradeoff(1.0, 0.0)),
]


class TestCndCdf:
    def test_symmetry_at_zero(self):
        assert CndDist(F10).cdf(0.0) == pytest.approx(0.5, abs=0)

    def test_linear_segment_endpoint(self):
        # F(1/2) = 1 - c with c = 1/(1 + e)
        d = CndDist(F10)
        assert d.cdf(0.5) == pytest.approx(math.e / (1.0 + math.e), abs=1e-14)

    def test_one_recurrence_step(self):
        # F(3/2) = 1 - f(F(1/2)), f evaluated by the max-of-lines formula
        d = CndDist(F10)
        inner = d.cdf(0.5)
        expect = 1.0 - max(0.0, 1.0 - math.e * inner, math.exp(-1.0) * (1.0 - inner))
        assert d.cdf(1.5) == pytest.approx(expect, abs=1e-14)
        assert d.cdf(1.5) == pytest.approx(0.90106, abs=1e-5)

    @pytest.mark.parametrize("f", IDENTITY_FNS)
    def test_symmetry_on_grid(self, f):
        d = CndDist(f)
        xs = np.linspace(-10.0, 10.0, 201)
        dev = np.max(np.abs(d.cdf(xs) + d.cdf(-xs) - 1.0))
        assert dev <= 1e-12

    @pytest.mark.parametrize("f", IDENTITY_FNS)
    def test_recurrence_on_grid(self, f):
        d = CndDist(f)
        for x in np.linspace(-4.0, 4.0, 57):
            prev = d.cdf(x - 1.0)
            if prev > 0.0:
                assert abs(d.cdf(x) - (1.0 - f.eval(prev))) <= 1e-10

    def test_monotone(self):
        d = CndDist(F10)
        xs = np.linspace(-8.0, 8.0, 501)
        assert np.all(np.diff(d.cdf(xs)) >= -1e-14)


class TestCndQuantile:
    def test_median(self):
        assert CndDist(F10).quantile(0.5) == pytest.approx(0.0, abs=0)

    def test_linear_branch_endpoint(self):
        d = CndDist(F10)
        assert d.quantile(1.0 - d.c) == pytest.approx(0.5, abs=1e-12)

    def test_roundtrip(self):
        d = CndDist(F10)
        assert d.cdf(d.quantile(0.9017)) == pytest.approx(0.9017, abs=1e-12)

    @pytest.mark.parametrize("f", IDENTITY_FNS)
    def test_roundtrip_grid(self, f):
        d = CndDist(f)
        us = np.linspace(0.001, 0.999, 99)
        dev = np.max(np.abs(d.cdf(d.quantile(us)) - us))
        assert dev <= 1e-9

    def test_quantile_monotone(self):
        d = CndDist(F10)
        qs = d.quantile(np.linspace(0.001, 0.999, 201))
        assert np.all(np.diff(qs) >= -1e-12)

    def test_rejects_endpoint_u(self):
        d = CndDist(F10)
        with pytest.raises(InvalidParameterError):
            d.quantile(0.0)


class TestCustomScreening:
    def test_asymmetric_custom_rejected(self):
        from cndtest.tradeoff import custom_tradeoff

        with pytest.raises(InvalidParameterError):
            CndDist(custom_tradeoff(lambda a: (1.0 - a) ** 2))

    def test_valid_custom_accepted(self):
        from cndtest.tradeoff import custom_tradeoff

        f = custom_tradeoff(lambda a: max(0.0, 1.0 - math.e * a, (1.0 - a) / math.e))
        d = CndDist(f)
        ref = CndDist(F10)
        xs = np.linspace(-5, 5, 101)
        np.testing.assert_allclose(d.cdf(xs), ref.cdf(xs), atol=1e-12)


class TestCndSample:
    def test_empty(self):
        rng = np.random.default_rng(0)
        assert CndDist(F10).sample(rng, 0).size == 0

    def test_mean_near_zero(self):
        rng = np.random.default_rng(7)
        draws = CndDist(F10).sample(rng, 100_000)
        assert abs(draws.mean()) <= 4.0 * draws.std() / math.sqrt(draws.size)

    def test_empirical_cdf_matches(self):
        d = CndDist(F10)
        rng = np.random.default_rng(11)
        draws = d.sample(rng, 100_000)
        target = d.cdf(0.5)
        emp = np.mean(draws <= 0.5)
        se = math.sqrt(target * (1 - target) / draws.size)
        assert abs(emp - target) <= 4.0 * se

    def test_seed_determinism(self):
        a = CndDist(F10).sample(np.random.default_rng(3), 32)
        b = CndDist(F10).sample(np.random.default_rng(3), 32)
        np.testing.assert_array_equal(a, b)


class TestTulap:
    def test_center(self):
        t = TulapDist.from_eps_delta(1.0)
        assert t.cdf(0.0) == pytest.approx(0.5, abs=0)

    def test_linear_segment_value(self):
        # F(1/4) = 1/2 + (1/4)(1 - 2c), c = 1/(1 + e)
        t = TulapDist.from_eps_delta(1.0)
        c = 1.0 / (1.0 + math.e)
        assert t.cdf(0.25) == pytest.approx(0.5 + 0.25 * (1.0 - 2.0 * c), abs=1e-14)
        assert t.cdf(0.25) == pytest.approx(0.61553, abs=1e-5)

    @pytest.mark.parametrize("eps,delta", EPS_DELTA_CASES)
    def test_matches_construction_everywhere(self, eps, delta):
        t = TulapDist.from_eps_delta(eps, delta)
        d = CndDist(eps_delta_tradeoff(eps, delta))
        xs = np.arange(-10.0, 10.0 + 1e-9, 0.01)
        assert np.max(np.abs(t.cdf(xs) - d.cdf(xs))) <= 1e-9

    @pytest.mark.parametrize("eps,delta", EPS_DELTA_CASES)
    def test_quantiles_match_construction(self, eps, delta):
        t = TulapDist.from_eps_delta(eps, delta)
        d = CndDist(eps_delta_tradeoff(eps, delta))
        us = np.linspace(0.01, 0.99, 49)
        assert np.max(np.abs(t.quantile(us) - d.quantile(us))) <= 1e-9

    def test_quantile_roundtrip(self):
        t = TulapDist.from_eps_delta(1.0)
        assert t.cdf(t.quantile(0.73)) == pytest.approx(0.73, abs=1e-12)
        assert t.quantile(0.5) == pytest.approx(0.0, abs=1e-15)

    def test_q_parameter_value(self):
        t = TulapDist.from_eps_delta(1.0, 0.01)
        b = math.exp(-1.0)
        assert t.b == b
        assert t.q == pytest.approx(2 * 0.01 * b / (1 - b + 2 * 0.01 * b), abs=0)

    def test_qclamp_flat_region_returns_infimum(self):
        # with delta > 0 the quantile at tiny u must sit at the left edge of
        # the support, below which the cdf is exactly 0
        t = TulapDist.from_eps_delta(1.0, 0.05)
        x = t.quantile(1e-12)
        assert t.cdf(x - 1e-6) == 0.0
        assert t.cdf(x + 1e-6) > 0.0

    def test_symmetry(self):
        t = TulapDist.from_eps_delta(0.3, 0.02)
        xs = np.linspace(-12, 12, 301)
        assert np.max(np.abs(t.cdf(xs) + t.cdf(-xs) - 1.0)) <= 1e-12


class TestGaussianCnd:
    def test_cdf_and_quantile(self):
        g = GaussianCnd(2.0)
        assert g.cdf(0.0) == pytest.approx(0.5)
        assert g.cdf(g.quantile(0.81)) == pytest.approx(0.81, abs=1e-12)

    def test_sample_sd(self):
        g = GaussianCnd(2.0)
        draws = g.sample(np.random.default_rng(5), 200_000)
        assert draws.std() == pytest.approx(0.5, abs=0.01)


class TestIdentity:
    @pytest.mark.parametrize("f", IDENTITY_FNS)
    def test_construction_is_canonical(self, f):
        report = cnd_identity_check(CndDist(f), f)
        assert report.max_tradeoff_dev <= 1e-9
        assert report.max_symmetry_dev <= 1e-12

    def test_gaussian_is_canonical_for_matching_mu(self):
        report = cnd_identity_check(GaussianCnd(1.0), gdp_tradeoff(1.0))
        assert report.max_tradeoff_dev <= 1e-9

    def test_gaussian_fails_for_mismatched_mu(self):
        report = cnd_identity_check(GaussianCnd(1.0), gdp_tradeoff(2.0))
        assert report.max_tradeoff_dev > 0.05

    def test_tulap_is_canonical(self):
        report = cnd_identity_check(TulapDist.from_eps_delta(1.0), F10)
        assert report.max_tradeoff_dev <= 1e-9

    @pytest.mark.parametrize("f", [eps_delta_tradeoff(1.0, 0.0), gdp_tradeoff(1.0)])
    def test_halved_noise_is_canonical_for_twofold(self, f):
        # F(2x) against g = f(1 - f(.))
        report = cnd_identity_check(RescaledDist(CndDist(f), 2.0), twofold(f))
        assert report.max_tradeoff_dev <= 1e-9
        assert report.max_symmetry_dev <= 1e-12


class TestAddNoise:
    def test_reproducible(self):
        t = TulapDist.from_eps_delta(1.0)
        a = add_noise(0.0, 1.0, t, np.random.default_rng(9))
        b = add_noise(0.0, 1.0, t, np.random.default_rng(9))
        assert a == b

    def test_linearity_in_sensitivity(self):
        t = TulapDist.from_eps_delta(1.0)
        a = add_noise(0.0, 1.0, t, np.random.default_rng(4))
        b = add_noise(0.0, 2.0, t, np.random.default_rng(4))
        assert b == pytest.approx(2.0 * a, abs=0)

    def test_rejects_nonpositive_sensitivity(self):
        with pytest.raises(InvalidParameterError):
            add_noise(0.0, 0.0, TulapDist.from_eps_delta(1.0), np.random.default_rng(0))

    def test_empirical_tradeoff_dominates_f(self):
        # threshold tests on adjacent outputs 0 + N vs 1 + N estimate the
        # tradeoff curve; it must dominate f up to Monte Carlo error
        eps = 1.0
        f = eps_delta_tradeoff(eps, 0.0)
        t = TulapDist.from_eps_delta(eps)
        rng = np.random.default_rng(21)
        reps = 100_000
        null = t.sample(rng, reps)  # statistic 0
        alt = 1.0 + t.sample(rng, reps)  # adjacent statistic 1
        se = 1.0 / math.sqrt(reps)
        for thresh in np.linspace(-2.0, 3.0, 21):
            alpha = np.mean(null >= thresh)
            beta = np.mean(alt < thresh)
            assert beta >= f.eval(alpha) - 4.0 * se


class TestConfig:
    def test_tulap_roundtrip(self):
        d = noise_from_config({"kind": "tulap", "eps": 1.0, "delta": 0.01})
        assert isinstance(d, TulapDist)

    def test_gaussian(self):
        assert isinstance(noise_from_config({"kind": "gaussian", "mu": 0.5}), GaussianCnd)

    def test_cnd_both_families(self):
        assert isinstance(noise_from_config({"kind": "cnd", "eps": 1.0}), CndDist)
        assert isinstance(noise_from_config({"kind": "cnd", "mu": 1.0}), CndDist)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError):
            noise_from_config({"kind": "laplace"})
