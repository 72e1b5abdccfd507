"""Reference Wasserstein-1 distances from the two one-dimensional formulas.

    d_W = integral |F1(x) - F2(x)| dx = integral_0^1 |Q1(u) - Q2(u)| du

This module deliberately shares nothing with the bound engine beyond the
distributions' cdf and quantile functions: integrals go through QUADPACK
(``scipy.integrate.quad``) rather than the package's own integrator.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .config import DEFAULT_CONFIG, QuadratureConfig
from .distributions import Distribution
from .errors import NonConvergent

AGREEMENT_TOL = 1e-5
SCAN_POINTS = 257
MAX_CROSSINGS = 32
U_TAIL = 1e-9


@dataclass
class OracleResult:
    value_cdf: float
    value_quantile: float
    agreement: float
    converged: bool
    error_cdf: float = 0.0
    error_quantile: float = 0.0
    crossings: int = 0

    @property
    def value(self) -> float:
        return self.value_cdf


def _cdf_gap(p1: Distribution, p2: Distribution, x):
    """F1 - F2, switching to sf2 - sf1 in the upper half to avoid cancellation."""
    x = np.asarray(x, dtype=float)
    f1, f2 = p1.cdf(x), p2.cdf(x)
    upper = (f1 > 0.5) & (f2 > 0.5)
    if np.any(upper):
        return np.where(upper, p2.sf(x) - p1.sf(x), f1 - f2)
    return f1 - f2


def _roots(fn, grid: np.ndarray) -> list[float] | None:
    vals = np.asarray([fn(g) for g in grid]) if np.ndim(fn(grid[:1])) == 0 else np.asarray(fn(grid))
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    zeros = grid[1:-1][vals[1:-1] == 0]
    if flips.size + zeros.size > MAX_CROSSINGS:
        return None
    out = [float(z) for z in zeros]
    for i in flips:
        out.append(optimize.brentq(lambda z: float(fn(np.array([z]))[0]), grid[i], grid[i + 1], xtol=1e-15))
    return out


def _quad_pieces(fn, edges, config: QuadratureConfig) -> tuple[float, float, bool]:
    total, err, ok = 0.0, 0.0, True
    for a, b in zip(edges[:-1], edges[1:]):
        if not b > a:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                v, e = integrate.quad(fn, a, b, epsabs=config.abs_tol, epsrel=config.rel_tol, limit=500)
            except integrate.IntegrationWarning:
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                v, e = integrate.quad(fn, a, b, epsabs=config.abs_tol, epsrel=config.rel_tol, limit=500)
                ok = False
        total += v
        err += e
    return total, err, ok


def _range(p1: Distribution, p2: Distribution, eps: float) -> tuple[float, float]:
    a1, b1 = p1.quad_range(eps)
    a2, b2 = p2.quad_range(eps)
    return min(a1, a2), max(b1, b2)


def _oracle_cdf(p1, p2, config) -> tuple[float, float, bool, int]:
    lo, hi = _range(p1, p2, config.tail_epsilon)
    half = SCAN_POINTS // 2
    scan = np.unique(np.concatenate([p1.grid(half, 1e-6), p2.grid(SCAN_POINTS - half, 1e-6), [lo, hi]]))
    scan = scan[(scan >= lo) & (scan <= hi)]
    roots = _roots(lambda x: _cdf_gap(p1, p2, x), scan)
    edges = [lo, hi]
    if roots is not None:
        edges = sorted(set([lo, hi] + [r for r in roots if lo < r < hi]))
    # quantile breakpoints let QUADPACK see where the mass sits
    bulk = [float(q) for d in (p1, p2) for q in (d.quantile(0.01), d.quantile(0.5), d.isf(0.01))]
    edges = sorted(set(edges + [b for b in bulk if lo < b < hi]))
    fn = lambda x: abs(float(_cdf_gap(p1, p2, np.array([x]))[0]))  # noqa: E731
    value, err, ok = _quad_pieces(fn, edges, config)
    # mass cut off beyond the truncated range
    tail = 0.0
    for d in (p1, p2):
        if math.isinf(d.support.lower) or math.isinf(d.support.upper):
            tail += 2 * config.tail_epsilon * d.sd
    return value, err + tail, ok, 0 if roots is None else len(roots)


def oracle_cdf(p1: Distribution, p2: Distribution, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """d_W as the integral of |F1 - F2| with crossing points as breakpoints.

    Raises:
        NonConvergent: QUADPACK reports failure on some piece.
    """
    value, _, ok, _ = _oracle_cdf(p1, p2, config)
    if not ok:
        raise NonConvergent("cdf-form integral did not converge")
    return value


def _quantile_at(d: Distribution, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    low = u <= 0.5
    out = np.empty_like(u)
    if low.any():
        out[low] = d.quantile(u[low])
    if (~low).any():
        out[~low] = d.isf(1.0 - u[~low])
    return out


def _oracle_quantile(p1, p2, config) -> tuple[float, float, bool]:
    def gap(u):
        u = np.atleast_1d(u)
        return _quantile_at(p1, u) - _quantile_at(p2, u)

    # logit-spaced scan so both tails are resolved
    z = np.linspace(-math.log(1 / U_TAIL - 1), math.log(1 / U_TAIL - 1), SCAN_POINTS)
    scan = 1.0 / (1.0 + np.exp(-z))
    roots = _roots(gap, scan)
    edges = [U_TAIL, 1e-6, 1e-3, 0.5, 1 - 1e-3, 1 - 1e-6, 1 - U_TAIL]
    if roots is not None:
        edges += [r for r in roots if U_TAIL < r < 1 - U_TAIL]
    edges = sorted(set(edges))
    fn = lambda u: abs(float(gap(u)[0]))  # noqa: E731
    value, err, ok = _quad_pieces(fn, edges, config)
    # the omitted end pieces are at most U_TAIL times the gap there, times a safety factor
    tail = 4 * U_TAIL * (fn(U_TAIL) + fn(1 - U_TAIL))
    return value, err + tail, ok


def oracle_quantile(p1: Distribution, p2: Distribution, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """d_W as the integral of |Q1 - Q2| over [1e-9, 1 - 1e-9].

    Raises:
        NonConvergent: QUADPACK reports failure on some piece.
    """
    value, _, ok = _oracle_quantile(p1, p2, config)
    if not ok:
        raise NonConvergent("quantile-form integral did not converge")
    return value


def oracle(p1: Distribution, p2: Distribution, config: QuadratureConfig = DEFAULT_CONFIG) -> OracleResult:
    """Run both forms; ``converged`` iff both converge and agree to 1e-5."""
    vc, ec, okc, crossings = _oracle_cdf(p1, p2, config)
    vq, eq, okq = _oracle_quantile(p1, p2, config)
    agreement = abs(vc - vq)
    return OracleResult(vc, vq, agreement, okc and okq and agreement <= AGREEMENT_TOL, ec, eq, crossings)
