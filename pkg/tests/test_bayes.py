import math

import numpy as np
import pytest

from stein_bounds.bayes import (
    Prior,
    SamplingModel,
    binomial_beta_closed_form,
    binomial_general_bound,
    binomial_jeffreys_closed_form,
    build_posteriors,
    closed_form,
    model_from_dict,
    normal_normal_closed_form,
    poisson_exponential_exact,
    poisson_general_bound,
    prior_from_dict,
    prior_impact_bounds,
    relaxed_bounds,
)
from stein_bounds.distributions import SupportInterval
from stein_bounds.errors import ImproperPosterior, InvalidData, InvalidInput, InvalidParams, UnboundedDerivative
from stein_bounds.oracle import oracle


def as_custom(prior):
    """The same prior without its conjugate shortcut."""
    return Prior.custom(prior.log_density, prior.support, prior.score_fn)


class TestConjugacy:
    CASES = [
        (SamplingModel.normal(1.5, 5, 0.3), Prior.normal(1.0, 0.7)),
        (SamplingModel.binomial(12, 4), Prior.beta(2.0, 3.5)),
        (SamplingModel.binomial(10, 5), Prior.jeffreys()),
        (SamplingModel.poisson(8, 1.25), Prior.exponential(2.0)),
    ]

    @pytest.mark.parametrize("model,prior", CASES, ids=["normal", "beta", "jeffreys", "poisson"])
    def test_closed_posterior_matches_numeric(self, model, prior):
        conj = build_posteriors(model, prior)
        num = build_posteriors(model, as_custom(prior))
        assert conj.conjugate and not num.conjugate
        x = conj.p2.grid(201, eps=1e-6)
        assert np.max(np.abs(conj.p2.cdf(x) - num.p2.cdf(x))) <= 1e-6

    def test_flat_posteriors(self):
        np.testing.assert_allclose(SamplingModel.normal(2.0, 4, 1.0).flat_posterior().sd, 1.0)
        p = SamplingModel.binomial(10, 3).flat_posterior()
        np.testing.assert_allclose([p.alpha, p.beta], [4, 8])
        g = SamplingModel.poisson(5, 2.0).flat_posterior()
        np.testing.assert_allclose([g.shape, g.scale], [11, 0.2])


class TestClosedForms:
    def test_normal_normal(self):
        res = normal_normal_closed_form(1.0, 4, 0.5, 0.0, 1.0)
        np.testing.assert_allclose(res.lower, 0.1, rtol=1e-14)
        np.testing.assert_allclose(res.upper, 0.1 + math.sqrt(2 / math.pi) / (4 * math.sqrt(5)), rtol=1e-14)

    def test_beta_symmetric(self):
        res = binomial_beta_closed_form(10, 5, 2.0, 2.0)
        assert res.lower == 0.0
        np.testing.assert_allclose(res.upper, 1 / 12, rtol=1e-14)

    def test_poisson_exact(self):
        res = poisson_exponential_exact(10, 2.0, 1.0, config=None)
        np.testing.assert_allclose(res.value, 21 / 110, rtol=1e-14)

    def test_poisson_engine_cross_check(self, cfg):
        res = poisson_exponential_exact(10, 2.0, 1.0, cfg)
        assert res.diagnostics["engine_disagreement"] < 1e-9

    @pytest.mark.parametrize("model,prior", [
        (SamplingModel.normal(1.0, 4, 0.5), Prior.normal(0.0, 1.0)),
        (SamplingModel.binomial(10, 5), Prior.beta(2.0, 2.0)),
        (SamplingModel.binomial(10, 5), Prior.jeffreys()),
        (SamplingModel.binomial(30, 7), Prior.beta(0.5, 4.0)),
    ], ids=["normal", "beta", "jeffreys", "beta_skewed"])
    def test_relaxed_quadrature_reproduces_closed_form(self, model, prior):
        cf = closed_form(model, prior)
        rq = relaxed_bounds(build_posteriors(model, prior))
        np.testing.assert_allclose([rq.lower, rq.upper], [cf.lower, cf.upper], atol=1e-9)

    def test_closed_forms_contain_oracle(self):
        model, prior = SamplingModel.normal(1.0, 4, 0.5), Prior.normal(0.0, 1.0)
        pair = build_posteriors(model, prior)
        cf, sharp = closed_form(model, prior), prior_impact_bounds(pair)
        d = oracle(pair.p1, pair.p2).value
        assert cf.lower - 1e-9 <= d <= sharp.upper + 1e-9 <= cf.upper + 1e-9

    def test_normal_bounds_decay_like_one_over_n(self):
        ratio = normal_normal_closed_form(1.0, 40_000, 0.5, 0.0, 1.0).upper / \
            normal_normal_closed_form(1.0, 10_000, 0.5, 0.0, 1.0).upper
        np.testing.assert_allclose(ratio, 0.25, rtol=0.02)

    def test_jeffreys_three_halves_at_balanced_data(self):
        r = binomial_jeffreys_closed_form(1000, 500).upper / binomial_jeffreys_closed_form(10, 5).upper
        np.testing.assert_allclose(r, (12 / 1002) ** 1.5, rtol=1e-12)


class TestPriorImpact:
    def test_monotone_prior_is_exact(self):
        pair = build_posteriors(SamplingModel.poisson(10, 2.0), Prior.exponential(1.0))
        res = prior_impact_bounds(pair)
        assert res.exact
        np.testing.assert_allclose(res.value, 21 / 110, rtol=1e-9)

    def test_flat_prior_gives_zero(self):
        res = prior_impact_bounds(build_posteriors(SamplingModel.binomial(5, 2), Prior.flat()))
        assert res.exact and res.value == 0.0

    def test_custom_prior_sandwich(self):
        # bimodal prior on the normal mean
        prior = Prior.custom(lambda t: np.logaddexp(-0.5 * (t + 1) ** 2, -0.5 * (t - 2) ** 2),
                             SupportInterval.real_line())
        pair = build_posteriors(SamplingModel.normal(1.0, 6, 0.4), prior)
        res = prior_impact_bounds(pair)
        assert res.contains(oracle(pair.p1, pair.p2).value)

    def test_p1_weighted_integrals_match(self):
        # the same bounds written as P1 expectations normalized by E[pi0(T1)]
        pair = build_posteriors(SamplingModel.binomial(20, 6), Prior.beta(3.0, 1.5))
        res = prior_impact_bounds(pair)
        d = res.diagnostics
        np.testing.assert_allclose(d["p1_weighted_lower"], d["lower_direct"], rtol=1e-7)
        np.testing.assert_allclose(d["p1_weighted_upper"], res.upper, rtol=1e-7)

    def test_truncated_prior_support_warns(self):
        prior = Prior.custom(lambda t: -np.abs(t), SupportInterval(-5.0, 5.0))
        pair = build_posteriors(SamplingModel.normal(1.0, 3, 0.0), prior)
        assert not pair.conjugate
        assert pair.p2.support.lower == -5.0


class TestGeneralBounds:
    def test_poisson_general_dominates_exact(self):
        res = poisson_general_bound(10, 2.0, Prior.exponential(1.0))
        np.testing.assert_allclose(res.upper, 0.21, rtol=1e-9)
        assert res.upper >= 21 / 110

    def test_binomial_general(self):
        # pi0 = 6 t (1 - t): sup |pi0'| = 6 at the ends
        res = binomial_general_bound(10, 5, Prior.beta(2.0, 2.0))
        np.testing.assert_allclose(res.upper, 6 * 6 * 6 / (144 * 13), rtol=1e-6)

    def test_unbounded_prior_derivative_raises(self):
        with pytest.raises(UnboundedDerivative):
            binomial_general_bound(10, 5, Prior.jeffreys())


class TestValidation:
    def test_bad_data(self):
        with pytest.raises(InvalidData):
            SamplingModel.binomial(5, 7)
        with pytest.raises(InvalidData):
            SamplingModel.poisson(0, 1.0)

    def test_bad_prior(self):
        with pytest.raises(InvalidParams):
            Prior.normal(0.0, -1.0)

    def test_disjoint_support(self):
        prior = Prior.custom(lambda t: np.zeros_like(t), SupportInterval(2.0, 3.0))
        with pytest.raises(InvalidData):
            build_posteriors(SamplingModel.binomial(4, 2), prior)

    def test_improper_posterior(self):
        # Haldane-like prior with y = 0 does not normalize
        prior = Prior.custom(lambda t: -np.log(t) - np.log1p(-t), SupportInterval(0.0, 1.0), proper=False)
        with pytest.raises(ImproperPosterior):
            build_posteriors(SamplingModel.binomial(5, 0), prior)

    def test_dict_parsing(self):
        m = model_from_dict({"kind": "binomial", "n": 10, "y": 5})
        p = prior_from_dict({"kind": "exponential", "rate": 2})
        assert m.data.n == 10 and p.params["lambda"] == 2.0
        with pytest.raises(InvalidInput):
            prior_from_dict({"kind": "cauchy"})
