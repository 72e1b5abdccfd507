"""Univariate continuous distributions: the analytic catalog plus numerically
normalized custom densities.

Every family evaluates its density through ``logpdf``; ``pdf`` is its
exponential. Quantiles of families without a closed-form inverse are found
by bracketing from the mean and Newton steps safeguarded by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import special as sc

from . import kernels
from .config import DEFAULT_CONFIG, QuadratureConfig
from .errors import InvalidInput, InvalidParams, NaNDensity, NonConvergent, NonIntegrable, OutOfRange
from .quadrature import CumulativeIntegral, integrate, make_map, quad

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
FAMILIES = ("normal", "beta", "gamma", "exponential", "skewnormal", "custom")


@dataclass(frozen=True)
class SupportInterval:
    lower: float
    upper: float
    lower_closed: bool = False
    upper_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper) or not self.lower < self.upper:
            raise InvalidInput(f"support needs lower < upper, got [{self.lower}, {self.upper}]")
        if (self.lower_closed and math.isinf(self.lower)) or (self.upper_closed and math.isinf(self.upper)):
            raise InvalidInput("an infinite endpoint cannot be closed")

    @classmethod
    def real_line(cls) -> "SupportInterval":
        return cls(-math.inf, math.inf)

    @property
    def finite_lower(self) -> bool:
        return math.isfinite(self.lower)

    @property
    def finite_upper(self) -> bool:
        return math.isfinite(self.upper)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo = (x >= self.lower) if self.lower_closed else (x > self.lower)
        hi = (x <= self.upper) if self.upper_closed else (x < self.upper)
        return lo & hi

    def within(self, other: "SupportInterval") -> bool:
        """True if this interval's closure lies inside ``other``'s closure."""
        return self.lower >= other.lower and self.upper <= other.upper

    def to_list(self) -> list:
        return [_enc(self.lower), _enc(self.upper)]


def _enc(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _dec(v) -> float:
    if v is None:
        raise InvalidInput("support endpoints must be numbers or '+-inf'")
    return float(v)


def _as_float(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def fd_derivative(fn: Callable, x: np.ndarray, h: np.ndarray, support: "SupportInterval") -> np.ndarray:
    """Central difference of ``fn``, one-sided (second order) where x - h or x + h leaves ``support``."""
    shape = np.shape(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), shape).reshape(x.shape)
    with np.errstate(all="ignore"):
        out = np.array((fn(x + h) - fn(x - h)) / (2 * h), dtype=float)
        fwd = x - h <= support.lower
        bwd = ~fwd & (x + h >= support.upper)
        if np.any(fwd):
            xf, hf = x[fwd], h[fwd]
            out[fwd] = (-3 * fn(xf) + 4 * fn(xf + hf) - fn(xf + 2 * hf)) / (2 * hf)
        if np.any(bwd):
            xb, hb = x[bwd], h[bwd]
            out[bwd] = (3 * fn(xb) - 4 * fn(xb - hb) + fn(xb - 2 * hb)) / (2 * hb)
    return out.reshape(shape)


class Distribution:
    """A univariate law with interval support.

    Subclasses provide ``logpdf``, ``cdf``, ``sf``, ``mean`` and ``var``;
    the rest has numeric defaults. Instances are immutable after construction.
    """

    family: str = "abstract"
    support: SupportInterval
    mean: float
    var: float

    def __init__(self, config: QuadratureConfig = DEFAULT_CONFIG):
        self.config = config

    # -- densities -------------------------------------------------------
    def logpdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def score(self, x) -> np.ndarray:
        """Log-density derivative p'/p (central difference unless overridden)."""
        x = _as_float(x)
        h = self.config.fd_step_scale * np.maximum(1.0, np.abs(x))
        return fd_derivative(self.logpdf, x, h, self.support)

    @property
    def has_analytic_score(self) -> bool:
        return False

    def analytic_kernel(self, x):
        """Closed-form Stein kernel, or ``None`` when the family has none."""
        return None

    @property
    def has_analytic_kernel(self) -> bool:
        return False

    # -- distribution functions -------------------------------------------
    def cdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def sf(self, x) -> np.ndarray:
        return 1.0 - self.cdf(x)

    @property
    def sd(self) -> float:
        return math.sqrt(self.var)

    def quantile(self, u):
        """Inverse cdf on (0, 1); raises :class:`OutOfRange` outside it."""
        arr = _as_float(u)
        if not np.all((arr > 0) & (arr < 1)):
            raise OutOfRange("quantile level must lie strictly inside (0, 1)")
        out = self._ppf(arr)
        return float(np.ravel(out)[0]) if np.ndim(u) == 0 else out

    def isf(self, q):
        """Upper quantile: x with sf(x) = q, accurate for small q."""
        arr = _as_float(q)
        if not np.all((arr > 0) & (arr < 1)):
            raise OutOfRange("tail probability must lie strictly inside (0, 1)")
        out = self._isf(arr)
        return float(np.ravel(out)[0]) if np.ndim(q) == 0 else out

    def _ppf(self, u):
        return _invert(self, u, upper=False)

    def _isf(self, q):
        return _invert(self, q, upper=True)

    # -- integration helpers ----------------------------------------------
    def quad_range(self, eps: float | None = None) -> tuple[float, float]:
        """Integration range: finite endpoints kept, infinite ones cut at ``eps`` tails."""
        eps = self.config.tail_epsilon if eps is None else eps
        lo = self.support.lower if self.support.finite_lower else float(np.ravel(self._ppf(np.array(eps)))[0])
        hi = self.support.upper if self.support.finite_upper else float(np.ravel(self._isf(np.array(eps)))[0])
        return lo, hi

    @cached_property
    def _default_range(self):
        return self.quad_range()

    @cached_property
    def bulk_points(self) -> tuple[float, ...]:
        """Quantiles used as quadrature breakpoints so narrow features are resolved."""
        levels = np.array([1e-6, 1e-3, 0.05, 0.25, 0.5])
        pts = np.concatenate([self._ppf(levels), self._isf(levels[:-1])])
        return tuple(float(v) for v in np.unique(pts) if np.isfinite(v))

    def expect(self, g: Callable, config: QuadratureConfig | None = None, breakpoints=()) -> float:
        """E[g(X)] by adaptive quadrature over the truncated support."""
        cfg = config or self.config
        lo, hi = self._default_range if config is None else self.quad_range(cfg.tail_epsilon)

        def integrand(x):
            p = self.pdf(x)
            return np.where(p > 0, g(x) * p, 0.0)

        pts = tuple(breakpoints) + self.bulk_points
        return quad(integrand, lo, hi, cfg, breakpoints=pts)

    def grid(self, n: int, eps: float = 1e-4) -> np.ndarray:
        """Quantile-spaced grid over [q(eps), q(1 - eps)]."""
        u = np.linspace(eps, 1.0 - eps, n)
        lower = self._ppf(u[u <= 0.5])
        upper = self._isf(1.0 - u[u > 0.5])
        return np.concatenate([lower, upper])

    # -- bookkeeping ------------------------------------------------------
    @property
    def params(self) -> dict:
        return {}

    def to_spec(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    def _validate_moments(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.var)) or self.var <= 0:
            raise InvalidParams(f"{self!r} needs finite mean and positive finite variance")


def _invert(d: Distribution, target: np.ndarray, upper: bool) -> np.ndarray:
    """Solve cdf(x) = target (or sf(x) = target) by safeguarded Newton inside a bracket."""
    target = np.atleast_1d(_as_float(target)).astype(float)
    shape = target.shape
    target = target.ravel()
    fn = d.sf if upper else d.cdf
    sign = -1.0 if upper else 1.0

    def below(x):
        # True where the root lies to the right of x
        return sign * (fn(x) - target) < 0

    sup = d.support
    lo = np.full(target.size, d.mean)
    hi = np.full(target.size, d.mean)
    step = np.full(target.size, d.sd)
    for _ in range(2100):
        need = below(lo) == False  # noqa: E712
        if sup.finite_lower:
            need &= lo > sup.lower
        if not need.any():
            break
        lo = np.where(need, lo - step, lo)
        if sup.finite_lower:
            lo = np.maximum(lo, sup.lower)
        step = np.where(need, step * 2, step)
    step = np.full(target.size, d.sd)
    for _ in range(2100):
        need = below(hi)
        if sup.finite_upper:
            need &= hi < sup.upper
        if not need.any():
            break
        hi = np.where(need, hi + step, hi)
        if sup.finite_upper:
            hi = np.minimum(hi, sup.upper)
        step = np.where(need, step * 2, step)
    # Newton steps kept inside the bracket; a step that leaves it is replaced by bisection
    x = 0.5 * (lo + hi)
    active = np.ones(target.size, dtype=bool)
    for _ in range(200):
        with np.errstate(all="ignore"):
            resid = sign * (fn(x) - target)
            lo = np.where(active & (resid < 0), x, lo)
            hi = np.where(active & (resid >= 0), x, hi)
            newton = x - resid / d.pdf(x)
        bad = ~np.isfinite(newton) | (newton < lo) | (newton > hi)
        step = np.where(bad, 0.5 * (lo + hi), newton)
        scale = np.maximum(np.abs(lo), np.abs(hi))
        tol = np.maximum(1e-12 * np.minimum(1.0, scale), 4 * np.spacing(scale))
        done = (np.abs(step - x) <= tol) | ((hi - lo) <= tol) | (resid == 0)
        step = np.where(resid == 0, x, step)
        x = np.where(active, step, x)
        active &= ~done
        if not active.any():
            break
    return x.reshape(shape)


class Normal(Distribution):
    family = "normal"

    def __init__(self, mu: float = 0.0, sigma: float = 1.0, config: QuadratureConfig = DEFAULT_CONFIG):
        super().__init__(config)
        if not (math.isfinite(mu) and math.isfinite(sigma) and sigma > 0):
            raise InvalidParams(f"Normal needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}")
        self.mu, self.sigma = float(mu), float(sigma)
        self.support = SupportInterval.real_line()
        self.mean = self.mu
        self.var = self.sigma ** 2

    @property
    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}

    def logpdf(self, x):
        z = (_as_float(x) - self.mu) / self.sigma
        return -0.5 * z * z - _LOG_SQRT_2PI - math.log(self.sigma)

    def score(self, x):
        return -(_as_float(x) - self.mu) / self.var

    @property
    def has_analytic_score(self):
        return True

    def analytic_kernel(self, x):
        return np.full_like(_as_float(x), self.var)

    @property
    def has_analytic_kernel(self):
        return True

    def cdf(self, x):
        return sc.ndtr((_as_float(x) - self.mu) / self.sigma)

    def sf(self, x):
        return sc.ndtr(-(_as_float(x) - self.mu) / self.sigma)

    def _ppf(self, u):
        return self.mu + self.sigma * sc.ndtri(u)

    def _isf(self, q):
        return self.mu - self.sigma * sc.ndtri(q)


class Beta(Distribution):
    family = "beta"

    def __init__(self, alpha: float, beta: float, config: QuadratureConfig = DEFAULT_CONFIG):
        super().__init__(config)
        if not (alpha > 0 and beta > 0 and math.isfinite(alpha) and math.isfinite(beta)):
            raise InvalidParams(f"Beta needs alpha > 0 and beta > 0, got {alpha}, {beta}")
        self.alpha, self.beta = float(alpha), float(beta)
        self.support = SupportInterval(0.0, 1.0, lower_closed=alpha >= 1, upper_closed=beta >= 1)
        s = self.alpha + self.beta
        self.mean = self.alpha / s
        self.var = self.alpha * self.beta / (s * s * (s + 1))
        self._lognorm = sc.betaln(self.alpha, self.beta)

    @property
    def params(self):
        return {"alpha": self.alpha, "beta": self.beta}

    def logpdf(self, x):
        x = _as_float(x)
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        val = sc.xlogy(self.alpha - 1, xs) + sc.xlog1py(self.beta - 1, -xs) - self._lognorm
        return np.where(inside, val, -np.inf)

    def score(self, x):
        x = _as_float(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.alpha - 1) / x - (self.beta - 1) / (1 - x)

    @property
    def has_analytic_score(self):
        return True

    def analytic_kernel(self, x):
        x = _as_float(x)
        return np.clip(x * (1 - x), 0.0, None) / (self.alpha + self.beta)

    @property
    def has_analytic_kernel(self):
        return True

    def cdf(self, x):
        return sc.betainc(self.alpha, self.beta, np.clip(_as_float(x), 0.0, 1.0))

    def sf(self, x):
        return sc.betaincc(self.alpha, self.beta, np.clip(_as_float(x), 0.0, 1.0))

    def _ppf(self, u):
        return sc.betaincinv(self.alpha, self.beta, u)

    def _isf(self, q):
        return sc.betainccinv(self.alpha, self.beta, q)


class Gamma(Distribution):
    """Gamma with shape ``shape`` (k) and scale ``scale`` (lambda); mean k*lambda."""

    family = "gamma"

    def __init__(self, shape: float, scale: float = 1.0, config: QuadratureConfig = DEFAULT_CONFIG):
        super().__init__(config)
        if not (shape > 0 and scale > 0 and math.isfinite(shape) and math.isfinite(scale)):
            raise InvalidParams(f"Gamma needs shape > 0 and scale > 0, got {shape}, {scale}")
        self.shape, self.scale = float(shape), float(scale)
        self.support = SupportInterval(0.0, math.inf, lower_closed=shape >= 1)
        self.mean = self.shape * self.scale
        self.var = self.shape * self.scale ** 2
        self._lognorm = sc.gammaln(self.shape) + self.shape * math.log(self.scale)

    @property
    def params(self):
        return {"shape": self.shape, "scale": self.scale}

    def logpdf(self, x):
        x = _as_float(x)
        inside = x > 0
        xs = np.where(inside, x, 1.0)
        val = sc.xlogy(self.shape - 1, xs) - xs / self.scale - self._lognorm
        return np.where(inside, val, -np.inf)

    def score(self, x):
        x = _as_float(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.shape - 1) / x - 1.0 / self.scale

    @property
    def has_analytic_score(self):
        return True

    def analytic_kernel(self, x):
        return self.scale * np.clip(_as_float(x), 0.0, None)

    @property
    def has_analytic_kernel(self):
        return True

    def cdf(self, x):
        return sc.gammainc(self.shape, np.clip(_as_float(x), 0.0, None) / self.scale)

    def sf(self, x):
        return sc.gammaincc(self.shape, np.clip(_as_float(x), 0.0, None) / self.scale)

    def _ppf(self, u):
        return self.scale * sc.gammaincinv(self.shape, u)

    def _isf(self, q):
        return self.scale * sc.gammainccinv(self.shape, q)


class Exponential(Distribution):
    family = "exponential"

    def __init__(self, rate: float = 1.0, config: QuadratureConfig = DEFAULT_CONFIG):
        super().__init__(config)
        if not (rate > 0 and math.isfinite(rate)):
            raise InvalidParams(f"Exponential needs rate > 0, got {rate}")
        self.rate = float(rate)
        self.support = SupportInterval(0.0, math.inf, lower_closed=True)
        self.mean = 1.0 / self.rate
        self.var = 1.0 / self.rate ** 2

    @property
    def params(self):
        return {"rate": self.rate}

    def logpdf(self, x):
        x = _as_float(x)
        return np.where(x >= 0, math.log(self.rate) - self.rate * np.where(x >= 0, x, 0.0), -np.inf)

    def score(self, x):
        return np.full_like(_as_float(x), -self.rate)

    @property
    def has_analytic_score(self):
        return True

    def analytic_kernel(self, x):
        return np.clip(_as_float(x), 0.0, None) / self.rate

    @property
    def has_analytic_kernel(self):
        return True

    def cdf(self, x):
        return -np.expm1(-self.rate * np.clip(_as_float(x), 0.0, None))

    def sf(self, x):
        return np.exp(-self.rate * np.clip(_as_float(x), 0.0, None))

    def _ppf(self, u):
        return -np.log1p(-u) / self.rate

    def _isf(self, q):
        return -np.log(q) / self.rate


class SkewNormal(Distribution):
    """Azzalini skew-normal: density 2/scale * phi(z) Phi(shape z), z = (x - loc)/scale."""

    family = "skewnormal"

    def __init__(self, loc: float = 0.0, scale: float = 1.0, shape: float = 0.0,
                 config: QuadratureConfig = DEFAULT_CONFIG):
        super().__init__(config)
        if not (math.isfinite(loc) and math.isfinite(shape) and scale > 0 and math.isfinite(scale)):
            raise InvalidParams(f"SkewNormal needs finite loc, shape and scale > 0, got {loc}, {scale}, {shape}")
        self.loc, self.scale, self.shape = float(loc), float(scale), float(shape)
        self.support = SupportInterval.real_line()
        delta = self.shape / math.sqrt(1 + self.shape ** 2)
        self.mean = self.loc + self.scale * delta * math.sqrt(2 / math.pi)
        self.var = self.scale ** 2 * (1 - 2 * delta ** 2 / math.pi)

    @property
    def params(self):
        return {"loc": self.loc, "scale": self.scale, "shape": self.shape}

    def logpdf(self, x):
        z = (_as_float(x) - self.loc) / self.scale
        return math.log(2.0) - 0.5 * z * z - _LOG_SQRT_2PI + sc.log_ndtr(self.shape * z) - math.log(self.scale)

    def score(self, x):
        z = (_as_float(x) - self.loc) / self.scale
        w = self.shape * z
        mills = np.exp(-0.5 * w * w - _LOG_SQRT_2PI - sc.log_ndtr(w))
        return (-z + self.shape * mills) / self.scale

    @property
    def has_analytic_score(self):
        return True

    def cdf(self, x):
        return kernels.skewnorm_cdf_std((_as_float(x) - self.loc) / self.scale, self.shape)

    def sf(self, x):
        return kernels.skewnorm_sf_std((_as_float(x) - self.loc) / self.scale, self.shape)


class Custom(Distribution):
    """A density known up to a constant, normalized by adaptive quadrature.

    The normalizing constant, cdf, survival function, mean and variance are
    all numeric. ``center``/``scale`` locate the bulk for the quadrature
    change of variables; when omitted they are found by scanning the density.
    """

    family = "custom"

    def __init__(
        self,
        logpdf: Callable,
        support: SupportInterval,
        config: QuadratureConfig = DEFAULT_CONFIG,
        *,
        score: Callable | None = None,
        center: float | None = None,
        scale: float | None = None,
        spec: dict | None = None,
    ):
        super().__init__(config)
        self.support = support
        self._raw_logpdf = logpdf
        self._score = score
        self._spec = spec
        center, scale, breaks, shift = self._locate_bulk(center, scale)
        self._center, self._scale = center, scale
        self._breaks = breaks
        def unnorm(x):
            return np.exp(self._interior_logpdf(x) - shift)

        # strict pass first; endpoint singularities may only meet the configured tolerance
        # Near a finite endpoint panels cannot shrink below the float spacing
        # there, which caps the accuracy for densities singular at that end.
        attempts = ((min(config.rel_tol, 1e-12), 1e-300), (config.rel_tol, config.abs_tol), (1e-6, 1e-300))
        self.warnings = []
        for rel_tol, abs_tol in attempts:
            try:
                self._table = CumulativeIntegral(
                    unnorm, support.lower, support.upper, config,
                    center=center, scale=scale, breakpoints=breaks, abs_tol=abs_tol, rel_tol=rel_tol,
                )
                break
            except NonConvergent as exc:
                last = exc
                self.warnings.append(f"normalization relaxed beyond rel_tol={rel_tol:g}")
        else:
            raise NonIntegrable(f"density is not integrable on {support.to_list()}: {last}")
        z = self._table.total
        if not (z > 0 and math.isfinite(z)):
            raise NonIntegrable(f"density integrates to {z}")
        self._z = z
        self._log_norm = shift + math.log(z)
        self.mean = self._moment(lambda x: x)
        mu = self.mean
        self.var = self._moment(lambda x: (x - mu) ** 2)
        self._validate_moments()

    def _checked_logpdf(self, x):
        x = _as_float(x)
        with np.errstate(all="ignore"):
            val = np.asarray(self._raw_logpdf(x), dtype=float)
        if np.isnan(val).any():
            raise NaNDensity("density evaluated to NaN inside its support")
        if (val == np.inf).any():
            raise NonIntegrable("density is infinite inside its support")
        return val

    def _interior_logpdf(self, x):
        """Log density with abscissae rounded onto an open endpoint dropped."""
        x = _as_float(x)
        inside = (x > self.support.lower) & (x < self.support.upper)
        out = np.full(x.shape, -np.inf)
        if inside.any():
            out[inside] = self._checked_logpdf(x[inside])
        return out

    def _locate_bulk(self, center, scale):
        sup = self.support
        probe = make_map(sup.lower, sup.upper, center, scale)
        t = np.linspace(probe.t_lo, probe.t_hi, 4003)[1:-1]
        x = probe.x(t)
        x = x[np.isfinite(x) & sup.contains(x)]
        lp = self._checked_logpdf(x)
        finite = np.isfinite(lp)
        if not finite.any():
            raise NonIntegrable("density vanishes on the probe grid")
        i = int(np.argmax(np.where(finite, lp, -np.inf)))
        # second, finer pass around the best grid point
        lo_x = x[max(i - 1, 0)]
        hi_x = x[min(i + 1, x.size - 1)]
        xf = np.linspace(lo_x, hi_x, 2001)
        lpf = self._checked_logpdf(xf)
        j = int(np.argmax(np.where(np.isfinite(lpf), lpf, -np.inf)))
        mode, top = float(xf[j]), float(lpf[j])
        if lp[i] > top:
            mode, top = float(x[i]), float(lp[i])
        allx = np.concatenate([x, xf])
        allp = np.concatenate([lp, lpf])
        near = allx[np.isfinite(allp) & (allp >= top - 2.0)]
        width = float(near.max() - near.min()) / 4.0 if near.size > 1 else 0.0
        if not width > 0:
            width = float(hi_x - lo_x) or 1.0
        if center is None:
            center = mode
        if scale is None:
            scale = width if not sup.finite_lower else max(width, mode - sup.lower)
            if sup.finite_upper and not sup.finite_lower:
                scale = max(width, sup.upper - mode)
        breaks = [mode + k * width for k in (-16, -4, -1, 0, 1, 4, 16)]
        breaks = [b for b in breaks if sup.lower < b < sup.upper]
        return center, scale, breaks, top

    def _moment(self, g):
        shift = self._log_norm

        def integrand(x):
            with np.errstate(all="ignore"):
                p = np.exp(self._interior_logpdf(x) - shift)
            return np.where(p > 0, g(x) * p, 0.0)

        for rel_tol in (self.config.rel_tol, 1e-6):
            res = integrate(integrand, self.support.lower, self.support.upper, self.config,
                            center=self._center, scale=self._scale, breakpoints=self._breaks,
                            rel_tol=rel_tol)
            if res.converged:
                return res.value
            self.warnings.append(f"moment integral relaxed beyond rel_tol={rel_tol:g}")
        raise NonIntegrable("moment integral did not converge (mean or variance infinite)")

    @property
    def params(self):
        return dict(self._spec or {})

    def to_spec(self) -> dict:
        spec = {"family": "custom"}
        spec.update(self._spec or {})
        spec["support"] = self.support.to_list()
        return spec

    def __repr__(self):
        return f"Custom(support={self.support.to_list()}, mean={self.mean:.6g})"

    def logpdf(self, x):
        x = _as_float(x)
        inside = self.support.contains(x)
        with np.errstate(all="ignore"):
            val = np.asarray(self._raw_logpdf(np.where(inside, x, self.mean)), dtype=float)
        return np.where(inside, val - self._log_norm, -np.inf)

    def score(self, x):
        if self._score is not None:
            return np.asarray(self._score(_as_float(x)), dtype=float)
        return super().score(x)

    @property
    def has_analytic_score(self):
        return self._score is not None

    def cdf(self, x):
        return np.clip(self._table.left(x) / self._z, 0.0, 1.0)

    def sf(self, x):
        return np.clip(self._table.right(x) / self._z, 0.0, 1.0)

    def partial_moment_table(self):
        return self._table


def make_catalog(family: str, params: dict, config: QuadratureConfig = DEFAULT_CONFIG) -> Distribution:
    """Build a catalog distribution from a family tag and its parameters."""
    fam = str(family).lower().replace("-", "").replace("_", "")
    p = {k: _num(v, k) for k, v in dict(params).items()}
    try:
        if fam == "normal":
            return Normal(p.get("mu", 0.0), p.get("sigma", 1.0), config)
        if fam == "beta":
            return Beta(p["alpha"], p["beta"], config)
        if fam == "gamma":
            return Gamma(p["shape"], p.get("scale", 1.0), config)
        if fam == "exponential":
            return Exponential(p.get("rate", 1.0), config)
        if fam == "skewnormal":
            return SkewNormal(p.get("loc", 0.0), p.get("scale", 1.0), p.get("shape", 0.0), config)
    except KeyError as exc:
        raise InvalidParams(f"missing parameter {exc.args[0]!r} for family {family!r}") from None
    raise InvalidParams(f"unknown family {family!r}; expected one of {FAMILIES}")


def _num(v, name):
    try:
        out = float(v)
    except (TypeError, ValueError):
        raise InvalidParams(f"parameter {name!r} must be a number, got {v!r}") from None
    if math.isnan(out):
        raise InvalidParams(f"parameter {name!r} is NaN")
    return out


def make_custom(
    pdf: Callable,
    support: SupportInterval,
    config: QuadratureConfig = DEFAULT_CONFIG,
    **kwargs,
) -> Custom:
    """Normalize a possibly unnormalized density ``pdf`` on ``support``."""

    def logpdf(x):
        with np.errstate(divide="ignore"):
            return np.log(pdf(x))

    return Custom(logpdf, support, config, **kwargs)


def from_spec(spec: dict, config: QuadratureConfig = DEFAULT_CONFIG) -> Distribution:
    """Build a distribution from its JSON description.

    Catalog: ``{"family": "normal", "params": {"mu": 0, "sigma": 1}}``.
    Custom: ``{"family": "custom", "pdf": "exp(-x^2/2)", "support": ["-inf", "inf"]}``
    (``"logpdf"`` may replace ``"pdf"``; ``"center"``/``"scale"`` are optional hints).
    """
    from .expr import compile_expression

    if not isinstance(spec, dict) or "family" not in spec:
        raise InvalidInput("distribution spec must be an object with a 'family' key")
    if str(spec["family"]).lower() != "custom":
        return make_catalog(spec["family"], spec.get("params", {}), config)
    if "support" not in spec:
        raise InvalidInput("custom distribution needs 'support': [lower, upper]")
    lo, hi = spec["support"]
    support = SupportInterval(_dec(lo), _dec(hi))
    keep = {k: spec[k] for k in ("pdf", "logpdf", "center", "scale") if k in spec}
    hints = {k: float(spec[k]) for k in ("center", "scale") if k in spec}
    if "logpdf" in spec:
        return Custom(compile_expression(spec["logpdf"]), support, config, spec=keep, **hints)
    if "pdf" in spec:
        return make_custom(compile_expression(spec["pdf"]), support, config, spec=keep, **hints)
    raise InvalidInput("custom distribution needs a 'pdf' or 'logpdf' expression")
