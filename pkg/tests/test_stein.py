import numpy as np
import pytest

from stein_bounds.distributions import Beta, Exponential, Gamma, Normal, SkewNormal, from_spec
from stein_bounds.errors import SupportNotNested
from stein_bounds.stein import (
    SteinKernel,
    g_h_eval,
    inverse_stein_operator,
    likelihood_ratio,
    standardized_operator_apply,
    stein_class_report,
    stein_kernel,
    stein_operator_apply,
    verify_kernel_identity,
)

ANALYTIC = [Normal(1.0, 2.0), Beta(2.0, 3.0), Beta(0.6, 0.8), Gamma(3.0, 0.5), Exponential(1.5)]
TEST_FNS = [
    ("x", lambda x: x, lambda x: np.ones_like(x)),
    ("x2", lambda x: x**2, lambda x: 2 * x),
    ("sin", np.sin, np.cos),
    ("atan", np.arctan, lambda x: 1 / (1 + x**2)),
]


@pytest.mark.parametrize("d", ANALYTIC, ids=lambda d: repr(d))
class TestKernel:
    def test_numeric_matches_closed_form(self, d):
        x = d.grid(41, eps=1e-4)
        exact = SteinKernel(d)(x)
        numeric = SteinKernel(d, force_numeric=True)(x)
        np.testing.assert_allclose(numeric, exact, rtol=1e-7)

    def test_nonnegative_and_mean_is_variance(self, d):
        k = SteinKernel(d, force_numeric=True)
        assert np.all(k(d.grid(101)) >= 0)
        np.testing.assert_allclose(d.expect(k), d.var, rtol=1e-7)

    def test_identity(self, d):
        rep = verify_kernel_identity(d, stein_kernel(d), TEST_FNS)
        assert rep.passed, rep.max_diff


class TestKernelValues:
    def test_normal_is_constant_variance(self):
        np.testing.assert_allclose(stein_kernel(Normal(0, 3))(np.array([-5.0, 0.0, 7.0])), 9.0)

    def test_skewnormal_numeric_identity(self):
        d = SkewNormal(0.0, 1.0, 4.0)
        k = stein_kernel(d)
        assert k.origin == "numeric"
        np.testing.assert_allclose(d.expect(k), d.var, rtol=1e-7)
        assert verify_kernel_identity(d, k, TEST_FNS).passed

    def test_custom_density_kernel(self):
        d = from_spec({"family": "custom", "logpdf": "-x^4/4", "support": ["-inf", "inf"]})
        k = stein_kernel(d)
        np.testing.assert_allclose(d.expect(k), d.var, rtol=1e-7)
        # symmetric density gives a symmetric kernel
        x = np.array([0.5, 1.5, 2.5])
        np.testing.assert_allclose(k(x), k(-x), rtol=1e-8)


class TestOperators:
    @pytest.mark.parametrize("d", [Normal(0.5, 1.3), Gamma(4.0, 1.0), Beta(3.0, 2.0)], ids=repr)
    def test_stein_operator_has_mean_zero(self, d):
        f = lambda x: np.sin(x) * x
        fp = lambda x: np.cos(x) * x + np.sin(x)
        val = d.expect(lambda x: stein_operator_apply(d, f, fp, x))
        np.testing.assert_allclose(val, 0.0, atol=1e-8)

    def test_standardized_operator_has_mean_zero(self):
        d = Gamma(2.5, 1.2)
        k = stein_kernel(d)
        val = d.expect(lambda x: standardized_operator_apply(d, k, np.cos, lambda x: -np.sin(x), x))
        np.testing.assert_allclose(val, 0.0, atol=1e-9)

    def test_inverse_solves_operator_equation(self):
        d = Normal(0.0, 1.0)
        h = lambda x: np.abs(x)
        x = np.linspace(-3, 3, 12)  # off the median, where the integration side switches
        f = lambda t: inverse_stein_operator(d, h, t)
        step = 1e-5
        fp = (f(x + step) - f(x - step)) / (2 * step)
        lhs = fp + f(x) * d.score(x)
        np.testing.assert_allclose(lhs, np.abs(x) - np.sqrt(2 / np.pi), atol=1e-6)

    def test_inverse_of_identity_is_minus_kernel(self):
        # T^{-1}(x - mu) = -tau by definition of the kernel
        d = Beta(2.0, 5.0)
        x = d.grid(15)
        np.testing.assert_allclose(inverse_stein_operator(d, lambda t: t, x), -stein_kernel(d)(x), rtol=1e-9)

    @pytest.mark.parametrize("d", [Normal(0, 1), Beta(2, 3), Gamma(2, 1)], ids=repr)
    def test_g_h_bounded_for_lipschitz(self, d):
        x = d.grid(21, eps=1e-3)
        for h in (np.abs, np.sin, lambda t: np.abs(t - d.mean)):
            g = g_h_eval(d, stein_kernel(d), h, x)
            assert np.max(np.abs(g)) <= 1 + 1e-6


class TestLikelihoodRatio:
    def test_analytic_derivative(self):
        lr = likelihood_ratio(Normal(0, 1), Normal(1, 1))
        x = np.linspace(-2, 2, 5)
        np.testing.assert_allclose(lr.ratio(x), np.exp(x - 0.5), rtol=1e-14)
        np.testing.assert_allclose(lr.derivative(x), np.exp(x - 0.5), rtol=1e-14)

    def test_finite_difference_derivative(self):
        p2 = from_spec({"family": "custom", "logpdf": "-(x-1)^2/2", "support": ["-inf", "inf"]})
        lr = likelihood_ratio(Normal(0, 1), p2)
        assert lr.derivative_origin != "analytic"
        x = np.linspace(-2, 2, 5)
        np.testing.assert_allclose(lr.log_derivative(x), 1.0, rtol=1e-6)

    def test_support_must_be_nested(self):
        with pytest.raises(SupportNotNested):
            likelihood_ratio(Gamma(2.0), Normal(0, 1))


class TestSteinClass:
    @pytest.mark.parametrize("d", [Normal(0, 1), Beta(2.0, 3.0), SkewNormal(0, 1, 3.0)], ids=repr)
    def test_smooth_vanishing_densities(self, d):
        rep = stein_class_report(d)
        assert rep.derivative_integrable and rep.constants_in_class

    def test_positive_density_at_endpoint(self):
        rep = stein_class_report(Exponential(1.0))
        assert rep.derivative_integrable and not rep.constants_in_class
        np.testing.assert_allclose(rep.derivative_integral, -1.0, rtol=1e-9)

    def test_unbounded_density(self):
        assert not stein_class_report(Beta(0.5, 0.7)).derivative_integrable
