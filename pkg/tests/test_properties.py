"""Randomized invariants over catalog parameters."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from stein_bounds.bounds import compute_bounds
from stein_bounds.distributions import Beta, Gamma, Normal, SkewNormal
from stein_bounds.oracle import oracle
from stein_bounds.stein import SteinKernel

FAST = settings(max_examples=20, deadline=None, derandomize=True)

locs = st.floats(-5, 5)
scales = st.floats(0.2, 5)
shapes = st.floats(0.6, 12)
skews = st.floats(-8, 8)


class TestDistributionProperties:
    @FAST
    @given(a=shapes, b=shapes, u=st.floats(1e-6, 1 - 1e-6))
    def test_beta_quantile_roundtrip(self, a, b, u):
        d = Beta(a, b)
        x = d.quantile(u)
        slack = float(d.pdf(x)) * 8 * np.spacing(abs(x)) + 1e-15
        assert abs(float(d.cdf(x)) - u) <= 1e-7 * u + slack

    @FAST
    @given(loc=locs, scale=scales, lam=skews)
    def test_skewnormal_normalized_with_exact_mean(self, loc, scale, lam):
        d = SkewNormal(loc, scale, lam)
        np.testing.assert_allclose(d.expect(lambda x: np.ones_like(x)), 1.0, atol=1e-8)
        np.testing.assert_allclose(d.expect(lambda x: x), d.mean, atol=1e-7 * scale)

    @FAST
    @given(k=shapes, s=scales)
    def test_kernel_mean_is_variance(self, k, s):
        d = Gamma(k, s)
        np.testing.assert_allclose(d.expect(SteinKernel(d, force_numeric=True)), d.var, rtol=1e-7)


class TestDistanceProperties:
    @FAST
    @given(m1=locs, m2=locs, s1=scales, s2=scales)
    def test_normal_pair_sandwich(self, m1, m2, s1, s2):
        p1, p2 = Normal(m1, s1), Normal(m2, s2)
        res = compute_bounds(p1, p2)
        d = oracle(p1, p2).value
        assert res.lower - 1e-5 <= d <= res.upper + 1e-5

    @FAST
    @given(k1=shapes, k2=shapes, s=scales)
    def test_gamma_pair_sandwich(self, k1, k2, s):
        p1, p2 = Gamma(k1, s), Gamma(k2, s)
        res = compute_bounds(p1, p2)
        d = oracle(p1, p2).value
        assert res.lower - 1e-5 <= d <= res.upper + 1e-5
        # same scale: likelihood ratio is monotone, distance is the mean gap
        assert res.exact
        np.testing.assert_allclose(d, abs(k1 - k2) * s, rtol=1e-6, atol=1e-8)

    @FAST
    @given(lam=skews, c=locs, s=scales)
    def test_skewnormal_distance_shift_scale(self, lam, c, s):
        res = compute_bounds(Normal(c, s), SkewNormal(c, s, lam))
        want = s * np.sqrt(2 / np.pi) * abs(lam) / np.sqrt(1 + lam * lam)
        np.testing.assert_allclose(res.lower, want, atol=1e-8 * s + 1e-12)
        assert res.exact or abs(lam) < 1e-12
