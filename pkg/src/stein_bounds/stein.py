"""Stein operators, the inverse operator, Stein kernels and likelihood ratios.

For a density p on (a, b) with mean mu the Stein kernel is

    tau(x) = (1 / p(x)) * integral_a^x (mu - y) p(y) dy,

which is nonnegative and satisfies E[tau(X) phi'(X)] = E[(X - mu) phi(X)].
Numeric kernels integrate from whichever end of the support is nearer to
``x`` so tail values never come from a difference of two large numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, QuadratureConfig
from .distributions import Distribution, fd_derivative
from .errors import (
    KernelUnstable,
    KernelZero,
    NonConvergent,
    NonIntegrableTestFunction,
    SupportNotNested,
)
from .quadrature import CumulativeIntegral, integrate

ANALYTIC = "analytic"
NUMERIC = "numeric"
FINITE_DIFFERENCE = "finite_difference"

# Below this the density is treated as zero when dividing by it.
_TINY_LOGP = math.log(1e-300)


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


class SteinKernel:
    """The Stein kernel of a distribution, callable on arrays.

    Args:
        source: The distribution the kernel belongs to.
        config: Quadrature settings for the numeric path.
        force_numeric: Ignore a closed form even when the family has one.
    """

    def __init__(self, source: Distribution, config: QuadratureConfig = DEFAULT_CONFIG,
                 force_numeric: bool = False):
        self.source = source
        self.config = config
        if source.has_analytic_kernel and not force_numeric:
            self.origin = ANALYTIC
            self._table = None
        else:
            self.origin = NUMERIC
            self._table = self._build_table()

    def _build_table(self) -> CumulativeIntegral:
        d = self.source
        mu = d.mean
        cfg = self.config.replace(rel_tol=min(self.config.rel_tol, 1e-11))

        def integrand(y):
            return (mu - y) * d.pdf(y)

        pts = tuple(p for p in d.bulk_points if d.support.lower < p < d.support.upper)
        hints = {}
        if not (d.support.finite_lower and d.support.finite_upper):
            hints = {"center": d.mean, "scale": d.sd}
        # tight target first; endpoint singularities (Beta with alpha < 1) may need the looser one
        for abs_tol in (1e-13 * d.sd, self.config.abs_tol * d.sd):
            try:
                return CumulativeIntegral(integrand, d.support.lower, d.support.upper, cfg,
                                          breakpoints=pts, abs_tol=abs_tol, **hints)
            except NonConvergent as exc:
                last = exc
        raise KernelUnstable(f"kernel integral for {d!r} did not converge: {last}")

    def __call__(self, x) -> np.ndarray:
        x = _arr(x)
        if self.origin == ANALYTIC:
            return self.source.analytic_kernel(x)
        d = self.source
        inside = d.support.contains(x)
        out = np.zeros(x.shape)
        if not inside.any():
            return out
        xi = x[inside]
        logp = d.logpdf(xi)
        if np.any(logp < _TINY_LOGP):
            raise KernelUnstable("density underflows where the kernel is requested")
        use_left = d.cdf(xi) <= 0.5
        num = np.where(use_left, self._table.left(xi), -self._table.right(xi))
        # log-space division keeps the ratio finite when p is tiny
        with np.errstate(divide="ignore"):
            val = np.exp(np.log(np.abs(num)) - logp)
        val = np.where(num < 0, -val, val)
        if not np.all(np.isfinite(val)):
            raise KernelUnstable("non-finite kernel value")
        out[inside] = val
        return out

    def __repr__(self):
        return f"SteinKernel({self.source!r}, origin={self.origin!r})"


def stein_kernel(d: Distribution, config: QuadratureConfig = DEFAULT_CONFIG) -> SteinKernel:
    """Closed-form kernel when the family has one, numeric otherwise."""
    return SteinKernel(d, config)


def stein_operator_apply(d: Distribution, f: Callable, f_prime: Callable, x) -> np.ndarray:
    """T f(x) = f'(x) + f(x) p'(x)/p(x) inside the support, 0 outside."""
    x = _arr(x)
    inside = d.support.contains(x)
    xs = np.where(inside, x, d.mean)
    with np.errstate(all="ignore"):
        val = _arr(f_prime(xs)) + _arr(f(xs)) * d.score(xs)
    return np.where(inside, val, 0.0)


def standardized_operator_apply(d: Distribution, kernel: SteinKernel, f: Callable,
                                f_prime: Callable, x) -> np.ndarray:
    """tau(x) f'(x) + (mu - x) f(x)."""
    x = _arr(x)
    return kernel(x) * _arr(f_prime(x)) + (d.mean - x) * _arr(f(x))


def _centered_mean(d: Distribution, h: Callable, config: QuadratureConfig) -> float:
    try:
        return d.expect(h, config)
    except NonConvergent as exc:
        raise NonIntegrableTestFunction(f"E[h(X)] does not converge: {exc}") from None


def inverse_stein_operator(d: Distribution, h: Callable, x, config: QuadratureConfig = DEFAULT_CONFIG,
                           *, mean_h: float | None = None) -> np.ndarray:
    """(1/p(x)) * integral_a^x (h - E h) p, evaluated from the nearer end.

    Args:
        d: Distribution of X.
        h: Vectorized test function with finite E|h(X)|.
        x: Points inside the support.
        config: Quadrature settings.
        mean_h: E[h(X)] if already known.

    Returns:
        Array shaped like ``x``.
    """
    x = _arr(x)
    eh = _centered_mean(d, h, config) if mean_h is None else float(mean_h)
    flat = np.atleast_1d(x).ravel()
    out = np.empty(flat.size)
    lo, hi = d.support.lower, d.support.upper
    for k, xk in enumerate(flat):
        if not d.support.contains(xk):
            out[k] = 0.0
            continue
        lp = float(d.logpdf(xk))
        if lp < _TINY_LOGP:
            raise KernelUnstable(f"density underflows at x={xk}")

        def integrand(y, lp=lp):
            return (_arr(h(y)) - eh) * np.exp(d.logpdf(y) - lp)

        left = float(d.cdf(xk)) <= 0.5
        a, b = (lo, xk) if left else (xk, hi)
        hints = {"center": xk, "scale": d.sd}
        res = integrate(integrand, a, b, config, **hints)
        if not res.converged:
            raise NonIntegrableTestFunction(f"inverse operator integral diverges at x={xk}")
        out[k] = res.value if left else -res.value
    return out.reshape(x.shape)


def g_h_eval(d: Distribution, kernel: SteinKernel, h: Callable, x,
             config: QuadratureConfig = DEFAULT_CONFIG, *, mean_h: float | None = None) -> np.ndarray:
    """g_h = T^{-1}(h - E h) / tau; bounded by 1 in magnitude for Lipschitz-1 ``h``."""
    x = _arr(x)
    tau = kernel(x)
    if np.any(tau < 1e-300):
        raise KernelZero("kernel vanishes at a requested point")
    return inverse_stein_operator(d, h, x, config, mean_h=mean_h) / tau


class LikelihoodRatio:
    """pi0 = p2 / p1 on the support of ``target``, with its derivatives.

    The derivative is analytic, pi0 * (rho2 - rho1), when both laws expose
    analytic scores; otherwise the log-ratio is differenced centrally.
    """

    def __init__(self, base: Distribution, target: Distribution, config: QuadratureConfig = DEFAULT_CONFIG):
        if not target.support.within(base.support):
            raise SupportNotNested(
                f"support {target.support.to_list()} of P2 is not inside {base.support.to_list()} of P1"
            )
        self.base, self.target, self.config = base, target, config
        analytic = base.has_analytic_score and target.has_analytic_score
        self.derivative_origin = ANALYTIC if analytic else FINITE_DIFFERENCE

    def log_ratio(self, x) -> np.ndarray:
        x = _arr(x)
        inside = self.target.support.contains(x)
        xs = np.where(inside, x, self.target.mean)
        val = self.target.logpdf(xs) - self.base.logpdf(xs)
        return np.where(inside, val, -np.inf)

    def ratio(self, x) -> np.ndarray:
        return np.exp(self.log_ratio(x))

    def log_derivative(self, x) -> np.ndarray:
        """(log pi0)'(x) = rho2(x) - rho1(x)."""
        x = _arr(x)
        if self.derivative_origin == ANALYTIC:
            with np.errstate(all="ignore"):
                return self.target.score(x) - self.base.score(x)
        h = np.maximum(self.config.fd_step_scale, self.config.fd_step_scale * np.abs(x))
        return fd_derivative(self.log_ratio, x, h, self.target.support)

    def derivative(self, x) -> np.ndarray:
        x = _arr(x)
        r = self.ratio(x)
        with np.errstate(invalid="ignore"):
            return np.where(r > 0, r * self.log_derivative(x), 0.0)

    def __repr__(self):
        return f"LikelihoodRatio({self.base!r} -> {self.target!r})"


def likelihood_ratio(p1: Distribution, p2: Distribution, config: QuadratureConfig = DEFAULT_CONFIG):
    return LikelihoodRatio(p1, p2, config)


@dataclass
class IdentityCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def diff(self) -> float:
        return abs(self.lhs - self.rhs)


@dataclass
class KernelIdentityReport:
    checks: list[IdentityCheck] = field(default_factory=list)
    tolerance: float = 1e-7

    @property
    def passed(self) -> bool:
        return all(c.diff <= self.tolerance for c in self.checks)

    @property
    def max_diff(self) -> float:
        return max((c.diff for c in self.checks), default=0.0)


def verify_kernel_identity(
    d: Distribution,
    kernel: SteinKernel,
    test_fns: Sequence[tuple],
    config: QuadratureConfig = DEFAULT_CONFIG,
    tolerance: float = 1e-7,
) -> KernelIdentityReport:
    """Compare E[tau phi'] with E[(X - mu) phi] for each (name, phi, phi') triple.

    Pairs ``(phi, phi')`` without a name are labelled by position.
    """
    report = KernelIdentityReport(tolerance=tolerance)
    mu = d.mean
    for k, item in enumerate(test_fns):
        name, phi, dphi = item if len(item) == 3 else (f"phi{k}", *item)
        lhs = d.expect(lambda x: kernel(x) * _arr(dphi(x)), config)
        rhs = d.expect(lambda x: (x - mu) * _arr(phi(x)), config)
        report.checks.append(IdentityCheck(name, lhs, rhs))
    return report


@dataclass
class SteinClassReport:
    """Checkable consequences of a non-empty Stein class.

    ``derivative_integrable`` is the convergence of E|rho(X)| = integral |p'|;
    ``constants_in_class`` additionally asks integral p' = 0, i.e. p vanishes
    at both ends. A density unbounded at an endpoint fails the second but
    still admits f vanishing there, so only the first gates a warning.
    """

    derivative_integrable: bool
    abs_derivative_integral: float
    derivative_integral: float
    constants_in_class: bool


def stein_class_report(d: Distribution, config: QuadratureConfig = DEFAULT_CONFIG) -> SteinClassReport:
    lo, hi = d.quad_range(config.tail_epsilon)
    hints = {"center": d.mean, "scale": d.sd, "breakpoints": [p for p in d.bulk_points if lo < p < hi]}

    def dp(x):
        with np.errstate(all="ignore"):
            val = d.pdf(x) * d.score(x)
        return np.where(np.isfinite(val), val, 0.0)

    a = integrate(lambda x: np.abs(dp(x)), lo, hi, config, **hints)
    s = integrate(dp, lo, hi, config, **hints)
    ok = bool(a.converged and math.isfinite(a.value))
    constants = ok and s.converged and abs(s.value) <= 1e-6 * max(1.0, a.value)
    return SteinClassReport(ok, a.value if ok else math.inf, s.value, bool(constants))
