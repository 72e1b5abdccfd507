import math

import numpy as np
import pytest
from scipy import stats

from stein_bounds.distributions import (
    Beta,
    Custom,
    Exponential,
    Gamma,
    Normal,
    SkewNormal,
    SupportInterval,
    from_spec,
    make_catalog,
    make_custom,
)
from stein_bounds.errors import InvalidInput, InvalidParams, NonIntegrable, OutOfRange
from stein_bounds.quadrature import quad

CATALOG = [
    (Normal(0.3, 1.7), stats.norm(0.3, 1.7)),
    (Beta(2.0, 3.0), stats.beta(2.0, 3.0)),
    (Beta(0.5, 0.7), stats.beta(0.5, 0.7)),
    (Gamma(2.0, 1.5), stats.gamma(2.0, scale=1.5)),
    (Gamma(0.6, 1.0), stats.gamma(0.6)),
    (Exponential(2.0), stats.expon(scale=0.5)),
    (SkewNormal(1.0, 2.0, 3.0), stats.skewnorm(3.0, 1.0, 2.0)),
    (SkewNormal(0.0, 1.0, -1e4), stats.skewnorm(-1e4)),
]
def _ulp_slack(d, x):
    """Probability mass of a few float steps around x; bounds any achievable inversion residual."""
    return float(np.max(d.pdf(x) * 8 * np.spacing(np.abs(x)))) + 1e-15


IDS = ["normal", "beta23", "beta_sing", "gamma", "gamma_sing", "expon", "skewnormal", "halfnormal"]


@pytest.mark.parametrize("d,ref", CATALOG, ids=IDS)
class TestCatalogInvariants:
    def test_pdf_integrates_to_one(self, d, ref):
        np.testing.assert_allclose(d.expect(lambda x: np.ones_like(x)), 1.0, atol=1e-8)

    def test_moments_match_scipy(self, d, ref):
        np.testing.assert_allclose(d.mean, ref.mean(), rtol=1e-6, atol=1e-12)
        np.testing.assert_allclose(d.var, ref.var(), rtol=1e-6)
        np.testing.assert_allclose(d.expect(lambda x: x), d.mean, rtol=1e-6, atol=1e-10)

    def test_pdf_cdf_match_scipy(self, d, ref):
        x = ref.ppf(np.linspace(0.01, 0.99, 21))
        np.testing.assert_allclose(d.pdf(x), ref.pdf(x), rtol=1e-9)
        np.testing.assert_allclose(d.cdf(x), ref.cdf(x), rtol=1e-9, atol=1e-15)

    def test_quantile_inverts_cdf(self, d, ref):
        u = np.concatenate([np.logspace(-9, -1, 9), np.linspace(0.1, 0.9, 9), 1 - np.logspace(-1, -7, 7)])
        x = d.quantile(u)
        np.testing.assert_allclose(d.cdf(x), u, rtol=1e-7, atol=_ulp_slack(d, x))

    def test_isf_inverts_sf(self, d, ref):
        u = np.logspace(-10, -1, 10)
        x = d.isf(u)
        np.testing.assert_allclose(d.sf(x), u, rtol=1e-7, atol=_ulp_slack(d, x))

    def test_score_matches_log_density_derivative(self, d, ref):
        x = ref.ppf(np.linspace(0.05, 0.95, 11))
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        fd = (ref.logpdf(x + h) - ref.logpdf(x - h)) / (2 * h)
        np.testing.assert_allclose(d.score(x), fd, rtol=1e-5, atol=1e-5)

    def test_spec_roundtrip(self, d, ref):
        e = from_spec(d.to_spec())
        x = ref.ppf([0.2, 0.5, 0.8])
        np.testing.assert_allclose(e.pdf(x), d.pdf(x), rtol=1e-15)


class TestSupport:
    def test_contains_and_within(self):
        unit = SupportInterval(0.0, 1.0)
        assert unit.within(SupportInterval.real_line())
        assert not SupportInterval.real_line().within(unit)
        np.testing.assert_array_equal(unit.contains(np.array([-0.1, 0.5, 1.1])), [False, True, False])

    def test_pdf_zero_outside(self):
        np.testing.assert_array_equal(Beta(2, 2).pdf(np.array([-1.0, 2.0])), [0.0, 0.0])
        np.testing.assert_array_equal(Gamma(2.0).pdf(np.array([-1.0])), [0.0])


class TestValidation:
    @pytest.mark.parametrize("family,params", [
        ("normal", {"mu": 0, "sigma": 0}),
        ("beta", {"alpha": -1, "beta": 2}),
        ("gamma", {"shape": 2, "scale": float("nan")}),
        ("exponential", {"rate": 0}),
        ("skewnormal", {"loc": 0, "scale": -1, "shape": 1}),
    ])
    def test_bad_params(self, family, params):
        with pytest.raises(InvalidParams):
            make_catalog(family, params)

    def test_unknown_family(self):
        with pytest.raises(InvalidInput):
            make_catalog("cauchy", {})

    def test_quantile_out_of_range(self):
        with pytest.raises(OutOfRange):
            Normal().quantile(np.array([1.5]))

    def test_non_integrable_custom(self):
        with pytest.raises(NonIntegrable):
            make_custom(lambda x: 1 / (1 + x), SupportInterval(0.0, np.inf))


class TestCustom:
    def test_recovers_normal(self):
        d = from_spec({"family": "custom", "pdf": "exp(-(x-1)^2/8)", "support": ["-inf", "inf"]})
        ref = Normal(1.0, 2.0)
        x = np.linspace(-5, 7, 25)
        np.testing.assert_allclose(d.pdf(x), ref.pdf(x), rtol=1e-9)
        np.testing.assert_allclose(d.cdf(x), ref.cdf(x), rtol=1e-8, atol=1e-15)
        np.testing.assert_allclose([d.mean, d.var], [1.0, 4.0], rtol=1e-8)

    def test_recovers_beta_on_unit_interval(self):
        d = from_spec({"family": "custom", "logpdf": "2*log(x) + log(1-x)", "support": [0, 1]})
        ref = Beta(3.0, 2.0)
        u = np.linspace(0.01, 0.99, 15)
        np.testing.assert_allclose(d.quantile(u), ref.quantile(u), rtol=1e-7)
        np.testing.assert_allclose(d.var, ref.var, rtol=1e-7)

    def test_offcenter_bulk_located(self):
        d = Custom(lambda x: -0.5 * ((x - 1e3) / 1e-2) ** 2, SupportInterval.real_line())
        np.testing.assert_allclose([d.mean, d.sd], [1e3, 1e-2], rtol=1e-8)

    def test_singular_at_both_ends(self):
        d = from_spec({"family": "custom", "logpdf": "-0.5*log(x) - 0.5*log(1-x)", "support": [0, 1]})
        np.testing.assert_allclose(d.mean, 0.5, atol=1e-6)
        np.testing.assert_allclose(d.var, 1 / 8, rtol=1e-5)

    def test_gamma_tail(self):
        d = make_custom(lambda x: x * np.exp(-x), SupportInterval(0.0, np.inf))
        np.testing.assert_allclose(d.sf(np.array([20.0, 40.0])), Gamma(2.0).sf(np.array([20.0, 40.0])), rtol=1e-7)


def test_expect_against_closed_form():
    d = Normal(0.0, 2.0)
    np.testing.assert_allclose(d.expect(lambda x: np.abs(x)), 2 * math.sqrt(2 / math.pi), rtol=1e-10)
    np.testing.assert_allclose(quad(lambda x: d.pdf(x) * x**4, -np.inf, np.inf), 3 * 16, rtol=1e-10)


def test_grid_is_sorted_inside_support():
    g = Beta(2, 5).grid(101)
    assert g.shape == (101,) and np.all(np.diff(g) > 0) and g[0] > 0 and g[-1] < 1
