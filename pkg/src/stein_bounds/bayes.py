"""Impact of the prior on one-parameter posteriors.

P1 is the posterior under a flat prior (the normalized likelihood) and P2 the
posterior under the prior pi0, so p2 is proportional to pi0 * p1 and the
likelihood ratio's score is the prior score rho0 = pi0'/pi0. The bounds are

    |E[tau1(T2) rho0(T2)]| <= d_W(P1, P2) <= E[tau1(T2) |rho0(T2)|],   T2 ~ P2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special as sc

from .bounds import (
    MONOTONE_AGREEMENT,
    MONOTONE_LR,
    STEIN_KERNEL,
    VARIANCE_BOUND,
    ZERO_BAND,
    BoundsResult,
    _sign_changes,
    check_conditions,
    sup_abs,
)
from .config import DEFAULT_CONFIG, QuadratureConfig
from .distributions import Beta, Custom, Distribution, Gamma, Normal, SupportInterval, fd_derivative
from .errors import (
    ImproperPosterior,
    InvalidData,
    InvalidInput,
    InvalidParams,
    NonIntegrable,
    NumericalError,
    UnboundedDerivative,
)
from .quadrature import integrate
from .stein import LikelihoodRatio, stein_kernel

NORMAL = "normal"
BINOMIAL = "binomial"
POISSON = "poisson"
MODEL_KINDS = (NORMAL, BINOMIAL, POISSON)
PRIOR_KINDS = ("flat", "normal", "beta", "jeffreys", "exponential", "custom")


@dataclass(frozen=True)
class DataSummary:
    """Sufficient statistics: sample size with the sample mean or success count."""

    n: int
    xbar: float | None = None
    y: int | None = None


@dataclass(frozen=True)
class SamplingModel:
    kind: str
    data: DataSummary
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidData(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        n = self.data.n
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise InvalidData(f"n must be a positive integer, got {n!r}")
        if self.kind == NORMAL:
            if self.sigma is None or not (self.sigma > 0 and math.isfinite(self.sigma)):
                raise InvalidData(f"normal model needs sigma > 0, got {self.sigma!r}")
            if self.data.xbar is None or not math.isfinite(self.data.xbar):
                raise InvalidData("normal model needs a finite xbar")
        elif self.kind == BINOMIAL:
            y = self.data.y
            if y is None or int(y) != y or not 0 <= y <= n:
                raise InvalidData(f"binomial model needs an integer y in [0, n], got {y!r}")
        else:
            xbar = self.data.xbar
            if xbar is None or not xbar >= 0:
                raise InvalidData(f"poisson model needs xbar >= 0, got {xbar!r}")
            total = n * xbar
            if abs(total - round(total)) > 1e-9 * max(1.0, total):
                raise InvalidData(f"n * xbar must be an integer, got {total}")
            if round(total) < 1:
                raise InvalidData("poisson model needs at least one event (n * xbar >= 1)")

    @classmethod
    def normal(cls, sigma: float, n: int, xbar: float) -> "SamplingModel":
        return cls(NORMAL, DataSummary(int(n), xbar=float(xbar)), sigma=float(sigma))

    @classmethod
    def binomial(cls, n: int, y: int) -> "SamplingModel":
        return cls(BINOMIAL, DataSummary(int(n), y=int(y)))

    @classmethod
    def poisson(cls, n: int, xbar: float) -> "SamplingModel":
        return cls(POISSON, DataSummary(int(n), xbar=float(xbar)))

    @property
    def total(self) -> int:
        """Sum of Poisson observations."""
        return int(round(self.data.n * self.data.xbar))

    def flat_posterior(self, config: QuadratureConfig = DEFAULT_CONFIG) -> Distribution:
        n = self.data.n
        if self.kind == NORMAL:
            return Normal(self.data.xbar, self.sigma / math.sqrt(n), config)
        if self.kind == BINOMIAL:
            return Beta(self.data.y + 1, n - self.data.y + 1, config)
        return Gamma(self.total + 1, 1.0 / n, config)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n": self.data.n}
        if self.kind == NORMAL:
            out.update(sigma=self.sigma, xbar=self.data.xbar)
        elif self.kind == BINOMIAL:
            out["y"] = self.data.y
        else:
            out["xbar"] = self.data.xbar
        return out


@dataclass(frozen=True)
class Prior:
    """A prior through its (possibly unnormalized) log density and score.

    Improper priors are never normalized on their own; only the posterior is.
    """

    kind: str
    params: dict = field(default_factory=dict)
    support: SupportInterval = field(default_factory=SupportInterval.real_line)
    proper: bool = True
    log_density: Callable | None = None
    score_fn: Callable | None = None

    def score(self, theta) -> np.ndarray:
        """rho0 = pi0'/pi0."""
        theta = np.asarray(theta, dtype=float)
        if self.score_fn is not None:
            with np.errstate(all="ignore"):
                return np.asarray(self.score_fn(theta), dtype=float) * np.ones_like(theta)
        h = np.maximum(1e-6, 1e-6 * np.abs(theta))
        return fd_derivative(self.log_density, theta, h, self.support)

    def density(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        inside = self.support.contains(theta)
        with np.errstate(all="ignore"):
            val = np.exp(self.log_density(np.where(inside, theta, np.nan)))
        return np.where(inside, val, 0.0)

    def derivative(self, theta) -> np.ndarray:
        """pi0' of the density exactly as parameterized (not renormalized)."""
        d = self.density(theta)
        with np.errstate(invalid="ignore"):
            return np.where(d > 0, d * self.score(theta), 0.0)

    # -- catalog -----------------------------------------------------------
    @classmethod
    def flat(cls) -> "Prior":
        return cls("flat", {}, SupportInterval.real_line(), False,
                   lambda t: np.zeros_like(t), lambda t: np.zeros_like(t))

    @classmethod
    def normal(cls, mu: float, delta: float) -> "Prior":
        if not (delta > 0 and math.isfinite(delta) and math.isfinite(mu)):
            raise InvalidParams(f"normal prior needs finite mu and delta > 0, got {mu}, {delta}")
        mu, delta = float(mu), float(delta)
        return cls(
            "normal", {"mu": mu, "delta": delta}, SupportInterval.real_line(), True,
            lambda t: -0.5 * ((t - mu) / delta) ** 2 - math.log(delta * math.sqrt(2 * math.pi)),
            lambda t: -(t - mu) / delta ** 2,
        )

    @classmethod
    def beta(cls, alpha: float, beta: float) -> "Prior":
        if not (alpha > 0 and beta > 0):
            raise InvalidParams(f"beta prior needs alpha, beta > 0, got {alpha}, {beta}")
        a, b = float(alpha), float(beta)
        lnorm = sc.betaln(a, b)
        return cls(
            "beta", {"alpha": a, "beta": b}, SupportInterval(0.0, 1.0), True,
            lambda t: sc.xlogy(a - 1, t) + sc.xlog1py(b - 1, -t) - lnorm,
            lambda t: (a - 1) / t - (b - 1) / (1 - t),
        )

    @classmethod
    def jeffreys(cls) -> "Prior":
        """pi0 = 1/sqrt(theta (1 - theta)) as written, without normalization."""
        return cls(
            "jeffreys", {}, SupportInterval(0.0, 1.0), False,
            lambda t: -0.5 * (np.log(t) + np.log1p(-t)),
            lambda t: (2 * t - 1) / (2 * t * (1 - t)),
        )

    @classmethod
    def exponential(cls, lam: float) -> "Prior":
        if not (lam > 0 and math.isfinite(lam)):
            raise InvalidParams(f"exponential prior needs lambda > 0, got {lam}")
        lam = float(lam)
        return cls(
            "exponential", {"lambda": lam}, SupportInterval(0.0, math.inf), True,
            lambda t: math.log(lam) - lam * t,
            lambda t: np.full_like(np.asarray(t, dtype=float), -lam),
        )

    @classmethod
    def custom(cls, log_density: Callable, support: SupportInterval, score: Callable | None = None,
               params: dict | None = None, proper: bool = True) -> "Prior":
        return cls("custom", dict(params or {}), support, proper, log_density, score)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        out.update(self.params)
        if self.kind == "custom":
            out["support"] = self.support.to_list()
        return out


@dataclass
class PosteriorPair:
    p1: Distribution
    p2: Distribution
    model: SamplingModel
    prior: Prior
    conjugate: bool = True
    warnings: list = field(default_factory=list)


def build_posteriors(model: SamplingModel, prior: Prior, config: QuadratureConfig = DEFAULT_CONFIG) -> PosteriorPair:
    """Flat-prior posterior and prior posterior; conjugate forms where they exist.

    Raises:
        ImproperPosterior: prior times likelihood does not normalize.
        InvalidData: prior support misses the parameter space.
    """
    p1 = model.flat_posterior(config)
    n = model.data.n
    warnings = []
    k, par = prior.kind, prior.params
    if k == "flat":
        return PosteriorPair(p1, p1, model, prior, True, warnings)
    if model.kind == NORMAL and k == "normal":
        a = n / model.sigma ** 2 + 1 / par["delta"] ** 2
        b = model.data.xbar / (model.sigma ** 2 / n) + par["mu"] / par["delta"] ** 2
        return PosteriorPair(p1, Normal(b / a, math.sqrt(1 / a), config), model, prior, True, warnings)
    if model.kind == BINOMIAL and k in ("beta", "jeffreys"):
        y = model.data.y
        if y in (0, n):
            warnings.append("data at the boundary of the parameter space (y = 0 or y = n)")
        a, b = (par["alpha"], par["beta"]) if k == "beta" else (0.5, 0.5)
        return PosteriorPair(p1, Beta(a + y, b + n - y, config), model, prior, True, warnings)
    if model.kind == POISSON and k == "exponential":
        p2 = Gamma(model.total + 1, 1.0 / (n + par["lambda"]), config)
        return PosteriorPair(p1, p2, model, prior, True, warnings)
    lo = max(p1.support.lower, prior.support.lower)
    hi = min(p1.support.upper, prior.support.upper)
    if not lo < hi:
        raise InvalidData("prior support does not meet the parameter space")
    support = SupportInterval(lo, hi)
    if not prior.support.within(p1.support):
        warnings.append("prior support extends beyond the parameter space; it was intersected")

    def logpdf(t):
        return p1.logpdf(t) + prior.log_density(t)

    def score(t):
        return p1.score(t) + prior.score(t)

    try:
        p2 = Custom(logpdf, support, config, score=score,
                    spec={"posterior_of": prior.to_dict(), "model": model.to_dict()})
    except NonIntegrable as exc:
        raise ImproperPosterior(f"posterior does not normalize: {exc}") from None
    return PosteriorPair(p1, p2, model, prior, False, warnings)


def _prior_integrals(pair: PosteriorPair, kernel, config):
    p1, p2, prior = pair.p1, pair.p2, pair.prior
    lo, hi = p2.quad_range(config.tail_epsilon)
    grid = p2.grid(config.grid_points, eps=1e-6)
    pts = set(p2.bulk_points) | set(p1.bulk_points) | set(_sign_changes(prior.score, grid))
    pts = sorted(p for p in pts if lo < p < hi)
    hints = {"center": p2.mean, "scale": p2.sd}

    def signed(t):
        w = p2.pdf(t)
        with np.errstate(all="ignore"):
            val = w * kernel(t) * prior.score(t)
        return np.where(w > 0, val, 0.0)

    s = integrate(signed, lo, hi, config, breakpoints=pts, **hints)
    a = integrate(lambda t: np.abs(signed(t)), lo, hi, config, breakpoints=pts, **hints)
    return s, a


def _p1_weighted(pair: PosteriorPair, kernel, config) -> dict:
    """Same bounds as expectations against P1, divided by E[pi0(T1)]."""
    p1, prior = pair.p1, pair.prior
    try:
        z = p1.expect(prior.density, config)
        num = p1.expect(lambda t: kernel(t) * prior.derivative(t), config)
        num_abs = p1.expect(lambda t: kernel(t) * np.abs(prior.derivative(t)), config)
    except NumericalError as exc:
        return {"p1_weighted_error": str(exc)}
    if not z > 0:
        return {"p1_weighted_error": "E[pi0(T1)] is not positive"}
    return {"p1_weighted_lower": abs(num) / z, "p1_weighted_upper": num_abs / z}


def prior_impact_bounds(pair: PosteriorPair, config: QuadratureConfig = DEFAULT_CONFIG) -> BoundsResult:
    """Wasserstein bounds between the flat-prior and the prior posterior.

    A prior score of constant sign makes the ratio monotone; the distance is
    then the posterior mean shift, cross-checked against the upper integral.
    """
    p1, p2, prior = pair.p1, pair.p2, pair.prior
    kernel = stein_kernel(p1, config)
    mean_shift = abs(p2.mean - p1.mean)
    if prior.kind == "flat":
        diag = {"mean_difference": 0.0, "monotonicity": "Constant"}
        return BoundsResult(0.0, 0.0, True, MONOTONE_LR, None, diag)
    s, a = _prior_integrals(pair, kernel, config)
    lr = LikelihoodRatio(p1, p2, config)
    conditions = check_conditions(p1, p2, kernel, lr, config, integrability_ok=a.converged)
    conditions.warnings.extend(pair.warnings)
    direct = abs(s.value) if s.converged else 0.0
    upper = a.value if a.converged else math.inf
    diag = {
        "lower_direct": direct,
        "mean_difference": mean_shift,
        "signed_integral": s.value,
        "upper_error_estimate": a.error,
        "conjugate": pair.conjugate,
        "mean_p1": p1.mean,
        "mean_p2": p2.mean,
    }
    diag.update(_p1_weighted(pair, kernel, config))
    grid = p2.grid(config.grid_points, eps=1e-6)
    with np.errstate(all="ignore"):
        rho = prior.score(grid)
    rho = rho[np.isfinite(rho)]
    monotone = bool(np.all(rho >= -ZERO_BAND) or np.all(rho <= ZERO_BAND))
    diag["monotonicity"] = "Monotone" if monotone else "NonMonotone"
    if monotone and math.isfinite(upper):
        diag["disagreement"] = abs(upper - mean_shift)
        if abs(upper - mean_shift) <= MONOTONE_AGREEMENT:
            return BoundsResult(mean_shift, mean_shift, True, MONOTONE_LR, conditions, diag)
        conditions.warnings.append("monotone prior but the kernel integral disagrees; exactness dropped")
    lower = max(direct, mean_shift)
    if not s.converged:
        conditions.warnings.append("signed integral did not converge; lower bound is the mean shift")
    if not a.converged:
        conditions.warnings.append("upper-bound integral diverges or failed to converge")
    return BoundsResult(lower, upper, False, STEIN_KERNEL, conditions, diag)


def relaxed_bounds(pair: PosteriorPair, config: QuadratureConfig = DEFAULT_CONFIG) -> BoundsResult:
    """The closed-form bounds rebuilt from posterior moments computed by quadrature.

    The closed forms relax E[tau1 |rho0|] with the triangle inequality (normal
    and beta priors) or Cauchy-Schwarz (Jeffreys); this applies the same
    relaxation but takes every moment of P2 from numerical integration, so it
    reproduces the closed form independently of the algebra.

    Raises:
        InvalidInput: the pair is not normal-normal, binomial-beta or binomial-Jeffreys.
    """
    p1, p2, prior, model = pair.p1, pair.p2, pair.prior, pair.model
    n = model.data.n
    m2 = p2.expect(lambda t: t, config)
    m1 = p1.expect(lambda t: t, config)
    lower = abs(m2 - m1)
    if model.kind == NORMAL and prior.kind == "normal":
        mu, delta = prior.params["mu"], prior.params["delta"]
        spread = p2.expect(lambda t: np.abs(t - m2), config)
        upper = model.sigma ** 2 / (n * delta ** 2) * (spread + abs(m2 - mu))
    elif model.kind == BINOMIAL and prior.kind == "beta":
        a, b = prior.params["alpha"], prior.params["beta"]
        upper = (abs(a - 1) * (1 - m2) + abs(b - 1) * m2) / (n + 2)
    elif model.kind == BINOMIAL and prior.kind == "jeffreys":
        var = p2.expect(lambda t: (t - m2) ** 2, config)
        upper = (math.sqrt(var) + abs(m2 - 0.5)) / (n + 2)
    else:
        raise InvalidInput(f"no closed-form relaxation for {model.kind} model with {prior.kind} prior")
    return BoundsResult(lower, upper, False, STEIN_KERNEL, None, {"source": "relaxed_quadrature"})


def normal_normal_closed_form(sigma: float, n: int, xbar: float, mu: float, delta: float) -> BoundsResult:
    """Closed-form bounds for a normal mean with a N(mu, delta^2) prior."""
    lower = sigma ** 2 / (n * delta ** 2 + sigma ** 2) * abs(xbar - mu)
    extra = math.sqrt(2 / math.pi) * sigma ** 3 / (n * delta * math.sqrt(delta ** 2 * n + sigma ** 2))
    return BoundsResult(lower, lower + extra, False, STEIN_KERNEL, None, {"source": "closed_form"})


def binomial_beta_closed_form(n: int, y: int, alpha: float, beta: float) -> BoundsResult:
    """Closed-form bounds for a binomial proportion with a Beta(alpha, beta) prior."""
    s = n + alpha + beta
    lower = abs((y + 1) / (n + 2) * (alpha + beta - 2) / s - (alpha - 1) / s)
    upper = (abs(alpha - 1) + (y + alpha) / s * (abs(beta - 1) - abs(alpha - 1))) / (n + 2)
    return BoundsResult(lower, upper, lower == upper, STEIN_KERNEL, None, {"source": "closed_form"})


def binomial_jeffreys_closed_form(n: int, y: int) -> BoundsResult:
    """Closed-form bounds for a binomial proportion with the Jeffreys prior."""
    lower = abs((y + 1) / (n + 2) - 0.5) / (n + 1)
    root = math.sqrt((y + 0.5) * (n - y + 0.5) / ((n + 2) * (n + 1) ** 2))
    upper = (root + abs((y + 0.5) / (n + 1) - 0.5)) / (n + 2)
    return BoundsResult(lower, upper, False, STEIN_KERNEL, None, {"source": "closed_form"})


def poisson_exponential_exact(n: int, xbar: float, lam: float,
                              config: QuadratureConfig | None = None) -> BoundsResult:
    """Exact distance for Poisson data with an Exp(lam) prior.

    With ``config`` the value is also checked against the monotone engine on
    the Gamma posterior pair and the difference stored in diagnostics.
    """
    model = SamplingModel.poisson(n, xbar)
    if not lam > 0:
        raise InvalidParams(f"lambda must be positive, got {lam}")
    value = lam * xbar / (n + lam) + lam / (n * (n + lam))
    diag = {"source": "closed_form"}
    if config is not None:
        from .bounds import exact_distance_monotone

        pair = build_posteriors(model, Prior.exponential(lam), config)
        engine = exact_distance_monotone(pair.p1, pair.p2, config)
        diag["engine_value"] = engine.lower
        diag["engine_disagreement"] = abs(engine.lower - value)
    return BoundsResult(value, value, True, MONOTONE_LR, None, diag)


def _general_bound(model: SamplingModel, prior: Prior, scale: float, config) -> BoundsResult:
    pair = build_posteriors(model, prior, config)
    if prior.kind == "flat":
        return BoundsResult(0.0, 0.0, True, VARIANCE_BOUND, None, {"sup_abs_derivative": 0.0})
    sup, bounded, arg = sup_abs(prior.derivative, pair.p2, config)
    if not bounded:
        raise UnboundedDerivative("prior density has an unbounded derivative")
    lower = abs(pair.p2.mean - pair.p1.mean)
    diag = {"sup_abs_derivative": sup, "argmax": arg, "var_factor": scale}
    return BoundsResult(lower, sup * scale, False, VARIANCE_BOUND, None, diag)


def poisson_general_bound(n: int, xbar: float, prior: Prior,
                          config: QuadratureConfig = DEFAULT_CONFIG) -> BoundsResult:
    """sup|pi0'| * (xbar + 1/n) / n, with pi0 the prior density as parameterized.

    Raises:
        UnboundedDerivative: pi0' grows without bound near an endpoint.
    """
    model = SamplingModel.poisson(n, xbar)
    return _general_bound(model, prior, (xbar + 1 / n) / n, config)


def binomial_general_bound(n: int, y: int, prior: Prior,
                           config: QuadratureConfig = DEFAULT_CONFIG) -> BoundsResult:
    """sup|pi0'| * Var of the flat posterior Beta(y + 1, n - y + 1)."""
    model = SamplingModel.binomial(n, y)
    return _general_bound(model, prior, (y + 1) * (n - y + 1) / ((n + 2) ** 2 * (n + 3)), config)


def closed_form(model: SamplingModel, prior: Prior) -> BoundsResult | None:
    """The closed-form result for this model and prior, if one exists."""
    d, p = model.data, prior.params
    if prior.kind == "flat":
        return BoundsResult(0.0, 0.0, True, MONOTONE_LR, None, {"source": "closed_form"})
    if model.kind == NORMAL and prior.kind == "normal":
        return normal_normal_closed_form(model.sigma, d.n, d.xbar, p["mu"], p["delta"])
    if model.kind == BINOMIAL and prior.kind == "beta":
        return binomial_beta_closed_form(d.n, d.y, p["alpha"], p["beta"])
    if model.kind == BINOMIAL and prior.kind == "jeffreys":
        return binomial_jeffreys_closed_form(d.n, d.y)
    if model.kind == POISSON and prior.kind == "exponential":
        return poisson_exponential_exact(d.n, d.xbar, p["lambda"])
    return None


def model_from_dict(spec: dict) -> SamplingModel:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidInput("model must be an object with a 'kind' key")
    kind = str(spec["kind"]).lower()
    try:
        if kind == NORMAL:
            return SamplingModel.normal(float(spec["sigma"]), _int(spec["n"]), float(spec["xbar"]))
        if kind == BINOMIAL:
            return SamplingModel.binomial(_int(spec["n"]), _int(spec["y"]))
        if kind == POISSON:
            return SamplingModel.poisson(_int(spec["n"]), float(spec["xbar"]))
    except KeyError as exc:
        raise InvalidInput(f"model {kind!r} is missing {exc.args[0]!r}") from None
    raise InvalidData(f"unknown model kind {kind!r}")


def _int(v) -> int:
    if isinstance(v, bool) or float(v) != int(float(v)):
        raise InvalidData(f"expected an integer, got {v!r}")
    return int(float(v))


def prior_from_dict(spec: dict) -> Prior:
    from .distributions import _dec
    from .expr import compile_expression

    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidInput("prior must be an object with a 'kind' key")
    kind = str(spec["kind"]).lower()
    try:
        if kind == "flat":
            return Prior.flat()
        if kind == "normal":
            return Prior.normal(float(spec["mu"]), float(spec["delta"]))
        if kind == "beta":
            return Prior.beta(float(spec["alpha"]), float(spec["beta"]))
        if kind == "jeffreys":
            return Prior.jeffreys()
        if kind == "exponential":
            return Prior.exponential(float(spec.get("lambda", spec.get("rate"))))
        if kind == "custom":
            lo, hi = spec.get("support", ["-inf", "inf"])
            support = SupportInterval(_dec(lo), _dec(hi))
            keep = {k: spec[k] for k in ("pdf", "logpdf") if k in spec}
            if "logpdf" in spec:
                logd = compile_expression(spec["logpdf"])
            elif "pdf" in spec:
                pdf = compile_expression(spec["pdf"])

                def logd(t, pdf=pdf):
                    with np.errstate(divide="ignore"):
                        return np.log(pdf(t))
            else:
                raise InvalidInput("custom prior needs a 'pdf' or 'logpdf' expression")
            return Prior.custom(logd, support, params=keep)
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"prior {kind!r} is missing or has a bad parameter: {exc}") from None
    raise InvalidInput(f"unknown prior kind {kind!r}; expected one of {PRIOR_KINDS}")
