import math

import numpy as np
import pytest

from stein_bounds.bounds import (
    Monotonicity,
    bounds_theorem,
    check_conditions,
    compute_bounds,
    detect_monotone,
    exact_distance_monotone,
    tilt_distance_and_kl,
    tilt_distribution,
    variance_bound,
)
from stein_bounds.distributions import Beta, Exponential, Gamma, Normal, SkewNormal, from_spec
from stein_bounds.errors import MeanUnattainable, MgfDivergent, NotMonotone, SupportNotNested
from stein_bounds.oracle import oracle
from stein_bounds.stein import likelihood_ratio, stein_kernel

SQRT_2_PI = math.sqrt(2 / math.pi)


def half_normal_custom():
    return from_spec({"family": "custom", "logpdf": "-x^2/2", "support": [0, "inf"]})


class TestTheoremBounds:
    @pytest.mark.parametrize("s1,s2", [(2.0, 1.0), (1.5, 1.0), (3.0, 2.0)])
    def test_centered_gaussians_upper(self, s1, s2):
        res = bounds_theorem(Normal(0, s1), Normal(0, s2))
        np.testing.assert_allclose(res.upper, SQRT_2_PI * (s1**2 - s2**2) / s2, rtol=1e-8)
        assert res.lower == pytest.approx(0.0, abs=1e-10)
        assert res.conditions.ok

    def test_sandwich_non_monotone(self):
        p1, p2 = Normal(0, 1), SkewNormal(0.5, 0.8, 3.0)
        res = bounds_theorem(p1, p2)
        assert res.contains(oracle(p1, p2).value)
        assert not res.exact

    def test_heavy_tailed_base(self):
        # finite-variance power tail against an exponential; ratio rises then falls
        p1 = from_spec({"family": "custom", "pdf": "(1+x)^(-3.5)", "support": [0, "inf"]})
        p2 = Exponential(1.0)
        res = compute_bounds(p1, p2)
        assert res.method == "SteinKernel" and res.conditions.ok
        np.testing.assert_allclose(res.lower, 1 / 3, rtol=1e-8)
        assert res.contains(oracle(p1, p2).value)

    def test_signed_integral_equals_mean_difference(self):
        res = bounds_theorem(Gamma(2.0, 1.0), Gamma(3.0, 0.8))
        np.testing.assert_allclose(res.diagnostics["signed_integral"], 0.4, atol=1e-8)


class TestMonotone:
    @pytest.mark.parametrize("lam", [0.5, 2.0, -3.0])
    def test_skew_normal_exact(self, lam):
        res = compute_bounds(Normal(0, 1), SkewNormal(0, 1, lam))
        assert res.exact and res.method == "MonotoneLR"
        np.testing.assert_allclose(res.value, SQRT_2_PI * abs(lam) / math.sqrt(1 + lam * lam), atol=1e-10)

    def test_direction(self):
        assert detect_monotone(likelihood_ratio(Normal(0, 1), Normal(1, 1))) is Monotonicity.INCREASING
        assert detect_monotone(likelihood_ratio(Exponential(1.0), Exponential(2.0))) is Monotonicity.DECREASING
        assert detect_monotone(likelihood_ratio(Normal(0, 2), Normal(0, 1))) is Monotonicity.NON_MONOTONE

    def test_exponentials(self):
        np.testing.assert_allclose(exact_distance_monotone(Exponential(1.0), Exponential(2.0)).value, 0.5, rtol=1e-12)

    def test_rejects_non_monotone(self):
        with pytest.raises(NotMonotone):
            exact_distance_monotone(Normal(0, 2), Normal(0, 1))

    def test_auto_falls_back(self):
        assert compute_bounds(Normal(0, 2), Normal(0, 1)).method == "SteinKernel"


class TestVarianceBound:
    def test_bounded_derivative(self):
        # pi0 for Beta(2,2) against uniform is 6x(1-x): sup |pi0'| = 6, Var U = 1/12
        res = variance_bound(Beta(1.0, 1.0), Beta(2.0, 2.0))
        np.testing.assert_allclose(res.upper, 0.5, rtol=1e-6)
        assert res.lower == pytest.approx(0.0, abs=1e-12)

    def test_unbounded_derivative_flagged(self):
        res = variance_bound(Normal(0, 1), Normal(1, 1))
        assert res.upper_is_infinite and res.diagnostics["unbounded_derivative"]

    def test_dominates_theorem_upper(self):
        p1, p2 = Beta(2.0, 2.0), Beta(3.0, 4.0)
        assert variance_bound(p1, p2).upper >= bounds_theorem(p1, p2).upper - 1e-10


class TestConditions:
    def test_vanishing_endpoints(self):
        p1, p2 = Normal(0, 1), SkewNormal(0, 1, 2.0)
        rep = check_conditions(p1, p2, stein_kernel(p1), likelihood_ratio(p1, p2))
        assert rep.ok and rep.warnings == []

    def test_truncation_violates_boundary_condition(self):
        p1, p2 = Normal(0, 1), half_normal_custom()
        rep = check_conditions(p1, p2, stein_kernel(p1), likelihood_ratio(p1, p2))
        assert not rep.endpoint_limit_ok["lower"] and rep.endpoint_limit_ok["upper"]
        np.testing.assert_allclose(rep.endpoint_values["lower"], SQRT_2_PI, rtol=1e-6)
        assert not rep.ok and rep.warnings

    def test_supports_must_nest(self):
        with pytest.raises(SupportNotNested):
            compute_bounds(Gamma(2.0), Normal(0, 1))


class TestTilting:
    def test_gamma_tilt(self):
        spec, tilted = tilt_distribution(Gamma(2.0, 1.0), 3.0)
        np.testing.assert_allclose(spec.lambda1, 1 / 3, rtol=1e-9)
        np.testing.assert_allclose(tilted.mean, 3.0, rtol=1e-9)
        d_w, kl = tilt_distance_and_kl(spec)
        np.testing.assert_allclose(d_w, 1.0, atol=1e-8)
        np.testing.assert_allclose(kl, 1 - 2 * math.log(1.5), atol=1e-9)

    def test_normal_tilt_is_shift(self):
        spec, tilted = tilt_distribution(Normal(0, 2), -1.0)
        np.testing.assert_allclose(spec.lambda1, -0.25, rtol=1e-9)
        x = np.linspace(-4, 2, 7)
        np.testing.assert_allclose(tilted.pdf(x), Normal(-1, 2).pdf(x), rtol=1e-8)

    def test_unattainable_mean(self):
        with pytest.raises(MeanUnattainable):
            tilt_distribution(Beta(2.0, 2.0), 1.5)

    def test_divergent_mgf(self):
        heavy = from_spec({"family": "custom", "pdf": "(1+x)^(-3.5)", "support": [0, "inf"]})
        with pytest.raises((MgfDivergent, MeanUnattainable)):
            tilt_distribution(heavy, 2.0)
