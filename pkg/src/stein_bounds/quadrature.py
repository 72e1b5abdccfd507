"""Globally adaptive Gauss-Kronrod (G10/K21) quadrature on vectorized integrands.

Infinite limits are handled by mapping onto a finite ``t`` interval; the
rule is open, so neither endpoints nor singularities sitting on them are ever
evaluated. The integrand must accept and return 1-d float arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, QuadratureConfig
from .errors import NonConvergent

_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525452038,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# 21 nodes on [-1, 1] in increasing order with matching weights.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(21)
_g = np.zeros(11)
_g[1:10:2] = _WG
GAUSS_W[:10] = _g[:10]
GAUSS_W[11:] = _g[:10][::-1]

_EPS = np.finfo(float).eps


class IntervalMap:
    """Increasing change of variables x = x(t) with Jacobian dx/dt."""

    t_lo: float
    t_hi: float

    def x(self, t):
        raise NotImplementedError

    def jac(self, t):
        raise NotImplementedError

    def t(self, x):
        raise NotImplementedError


class FiniteMap(IntervalMap):
    def __init__(self, a, b):
        self.t_lo, self.t_hi = float(a), float(b)

    def x(self, t):
        return t

    def jac(self, t):
        return np.ones_like(t)

    def t(self, x):
        return np.asarray(x, dtype=float)


class UpperMap(IntervalMap):
    """[a, inf): x = a + s t / (1 - t)."""

    def __init__(self, a, s):
        self.a, self.s = float(a), float(s)
        self.t_lo, self.t_hi = 0.0, 1.0

    def x(self, t):
        with np.errstate(divide="ignore"):
            return self.a + self.s * t / (1.0 - t)

    def jac(self, t):
        with np.errstate(divide="ignore"):
            return self.s / (1.0 - t) ** 2

    def t(self, x):
        u = np.asarray(x, dtype=float) - self.a
        return u / (self.s + u)


class LowerMap(IntervalMap):
    """(-inf, b]: x = b - s (1 - t) / t."""

    def __init__(self, b, s):
        self.b, self.s = float(b), float(s)
        self.t_lo, self.t_hi = 0.0, 1.0

    def x(self, t):
        with np.errstate(divide="ignore"):
            return self.b - self.s * (1.0 - t) / t

    def jac(self, t):
        with np.errstate(divide="ignore"):
            return self.s / t ** 2

    def t(self, x):
        u = self.b - np.asarray(x, dtype=float)
        return self.s / (self.s + u)


class RealLineMap(IntervalMap):
    """(-inf, inf): x = c + s t / (1 - t^2)."""

    def __init__(self, c, s):
        self.c, self.s = float(c), float(s)
        self.t_lo, self.t_hi = -1.0, 1.0

    def x(self, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.c + self.s * t / (1.0 - t * t)

    def jac(self, t):
        with np.errstate(divide="ignore"):
            return self.s * (1.0 + t * t) / (1.0 - t * t) ** 2

    def t(self, x):
        u = np.asarray(x, dtype=float) - self.c
        return 2.0 * u / (self.s + np.sqrt(self.s * self.s + 4.0 * u * u))


def make_map(a: float, b: float, center: float | None = None, scale: float | None = None) -> IntervalMap:
    s = 1.0 if scale is None or not scale > 0 else float(scale)
    if math.isfinite(a) and math.isfinite(b):
        return FiniteMap(a, b)
    if math.isfinite(a):
        return UpperMap(a, s)
    if math.isfinite(b):
        return LowerMap(b, s)
    return RealLineMap(0.0 if center is None else center, s)


@dataclass
class Panels:
    """The final partition of an adaptive run, in ``t`` coordinates."""

    imap: IntervalMap
    lo: np.ndarray
    hi: np.ndarray
    value: np.ndarray
    error: np.ndarray


@dataclass
class QuadResult:
    value: float
    error: float
    converged: bool
    n_panels: int
    nonfinite: bool = False
    panels: Panels | None = None


def kronrod_panels(g: Callable, lo: np.ndarray, hi: np.ndarray):
    """Apply the G10/K21 pair to each panel; returns (K, err, resabs)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[:, None] + half[:, None] * NODES[None, :]
    vals = np.asarray(g(t.ravel()), dtype=float).reshape(t.shape)
    # non-finite panels are detected by the caller
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        k = vals @ KRONROD_W
        gauss = vals @ GAUSS_W
        kval = k * half
        resabs = np.abs(vals) @ KRONROD_W * np.abs(half)
        mean = k / 2.0
        resasc = np.abs(vals - mean[:, None]) @ KRONROD_W * np.abs(half)
        diff = np.abs((k - gauss) * half)
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), diff)
    floor = 50.0 * _EPS * resabs
    err = np.maximum(scaled, floor)
    return kval, err, np.isfinite(vals).all(axis=1)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    config: QuadratureConfig = DEFAULT_CONFIG,
    *,
    center: float | None = None,
    scale: float | None = None,
    breakpoints: Sequence[float] = (),
    initial_panels: int = 4,
    abs_tol: float | None = None,
    rel_tol: float | None = None,
    keep_panels: bool = False,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` (either limit may be infinite).

    The result is flagged ``converged=False`` when the error target cannot be
    met within ``config.max_depth`` bisections per panel, or when the
    integrand produces non-finite values at finite abscissae. No exception is
    raised here; see :func:`quad` for the raising variant.
    """
    abs_tol = config.abs_tol if abs_tol is None else abs_tol
    rel_tol = config.rel_tol if rel_tol is None else rel_tol
    if a == b:
        return QuadResult(0.0, 0.0, True, 0)
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    imap = make_map(a, b, center, scale)

    def g(t):
        x = imap.x(t)
        out = np.zeros_like(t)
        ok = np.isfinite(x)
        if ok.any():
            with np.errstate(over="ignore", invalid="ignore"):
                out[ok] = np.asarray(f(x[ok]), dtype=float) * imap.jac(t[ok])
        return out

    cuts = [imap.t_lo, imap.t_hi]
    inner = [float(imap.t(p)) for p in breakpoints if a < p < b]
    edges = np.unique(np.array(sorted(cuts + inner)))
    if not isinstance(imap, FiniteMap):
        # enough resolution that the bulk is not missed on the mapped interval
        initial_panels = max(initial_panels, 16)
    lo = np.concatenate([np.linspace(e0, e1, initial_panels + 1)[:-1] for e0, e1 in zip(edges[:-1], edges[1:])])
    hi = np.concatenate([np.linspace(e0, e1, initial_panels + 1)[1:] for e0, e1 in zip(edges[:-1], edges[1:])])
    depth = np.zeros(lo.size, dtype=int)
    val, err, finite = kronrod_panels(g, lo, hi)
    nonfinite = False
    converged = False
    for _ in range(64 * config.max_depth):
        if not finite.all():
            nonfinite = True
            break
        total = val.sum()
        tol = max(abs_tol, rel_tol * abs(total))
        if err.sum() <= tol:
            converged = True
            break
        width = hi - lo
        splittable = (depth < config.max_depth) & (width > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300)
        if not splittable.any() or lo.size >= config.max_panels:
            break
        order = np.argsort(-np.where(splittable, err, -1.0))
        locked = err[~splittable].sum()
        remaining = err.sum()
        chosen = []
        for i in order:
            if not splittable[i]:
                break
            chosen.append(i)
            remaining -= err[i]
            if remaining <= 0.5 * tol or len(chosen) + lo.size >= config.max_panels:
                break
        if locked > tol:
            # errors on unsplittable panels already exceed the budget
            break
        chosen = np.array(chosen, dtype=int)
        mid = 0.5 * (lo[chosen] + hi[chosen])
        new_lo = np.concatenate([lo[chosen], mid])
        new_hi = np.concatenate([mid, hi[chosen]])
        nv, ne, nf = kronrod_panels(g, new_lo, new_hi)
        keep = np.ones(lo.size, dtype=bool)
        keep[chosen] = False
        nd = np.concatenate([depth[chosen] + 1, depth[chosen] + 1])
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        finite = np.concatenate([finite[keep], nf])
        depth = np.concatenate([depth[keep], nd])
    panels = None
    if keep_panels:
        order = np.argsort(lo)
        panels = Panels(imap, lo[order], hi[order], val[order], err[order])
    return QuadResult(
        sign * float(val.sum()), float(err.sum()), converged and not nonfinite, int(lo.size), nonfinite, panels
    )


def quad(f, a, b, config: QuadratureConfig = DEFAULT_CONFIG, **kwargs) -> float:
    """Like :func:`integrate` but returns the value and raises on failure."""
    res = integrate(f, a, b, config, **kwargs)
    if not res.converged:
        raise NonConvergent(
            f"quadrature over [{a}, {b}] did not converge (estimate {res.value:.6g}, "
            f"error {res.error:.3g}, panels {res.n_panels})"
        )
    return res.value


def partial_panel_integral(g: Callable, lo: np.ndarray, t: np.ndarray) -> np.ndarray:
    """K21 estimate of the integral of ``g`` over ``[lo_i, t_i]`` for each i."""
    half = 0.5 * (t - lo)
    mid = 0.5 * (t + lo)
    nodes = mid[:, None] + half[:, None] * NODES[None, :]
    vals = np.asarray(g(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return (vals @ KRONROD_W) * half


class CumulativeIntegral:
    """Running integrals of ``g`` from either end of ``[a, b]``.

    One adaptive pass fixes the panel partition; ``left(x)`` and ``right(x)``
    then add the whole panels on one side of ``x`` to a K21 estimate over the
    fraction of the panel containing ``x``. Evaluating from the nearer end
    keeps tail values accurate relative to their own size.
    """

    def __init__(self, g, a, b, config: QuadratureConfig = DEFAULT_CONFIG, **kwargs):
        res = integrate(g, a, b, config, keep_panels=True, **kwargs)
        if not res.converged:
            raise NonConvergent(
                f"cumulative integral over [{a}, {b}] did not converge "
                f"(estimate {res.value:.6g}, error {res.error:.3g})"
            )
        p = res.panels
        self.a, self.b = float(a), float(b)
        self.total = res.value
        self.error = res.error
        self._g = g
        self._map = p.imap
        self._lo, self._hi, self._val = p.lo, p.hi, p.value
        csum = np.cumsum(p.value)
        self._before = csum - p.value
        # summed from the right so upper-tail values carry no cancellation
        self._after = np.cumsum(p.value[::-1])[::-1] - p.value

    def _gt(self, t):
        x = self._map.x(t)
        out = np.zeros_like(t)
        ok = np.isfinite(x)
        out[ok] = np.asarray(self._g(x[ok]), dtype=float) * self._map.jac(t[ok])
        return out

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        t = np.clip(self._map.t(np.clip(x, self.a, self.b)), self._lo[0], self._hi[-1])
        i = np.clip(np.searchsorted(self._hi, t, side="left"), 0, self._lo.size - 1)
        return x, t, i

    def left(self, x):
        """Integral of ``g`` over ``[a, x]``."""
        x, t, i = self._locate(x)
        flat_t, flat_i = t.ravel(), i.ravel()
        part = partial_panel_integral(self._gt, self._lo[flat_i], flat_t)
        out = (self._before[flat_i] + part).reshape(x.shape)
        out = np.where(x <= self.a, 0.0, out)
        return np.where(x >= self.b, self.total, out)

    def right(self, x):
        """Integral of ``g`` over ``[x, b]``."""
        x, t, i = self._locate(x)
        flat_t, flat_i = t.ravel(), i.ravel()
        part = partial_panel_integral(self._gt, flat_t, self._hi[flat_i])
        out = (self._after[flat_i] + part).reshape(x.shape)
        out = np.where(x >= self.b, 0.0, out)
        return np.where(x <= self.a, self.total, out)
