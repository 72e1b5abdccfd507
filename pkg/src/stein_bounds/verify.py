"""Invariant suites shared by the ``verify`` command and the test-suite.

Every suite returns a :class:`SuiteResult` listing each violated check, so a
caller can assert on zero violations or print them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import Monotonicity, bounds_theorem, detect_monotone
from .config import DEFAULT_CONFIG, QuadratureConfig
from .distributions import Beta, Distribution, Exponential, Gamma, Normal, SkewNormal
from .oracle import oracle
from .stein import LikelihoodRatio, SteinKernel, g_h_eval, stein_kernel

SANDWICH_TOL = 1e-5
KERNEL_NONNEG_TOL = 1e-10
KERNEL_VARIANCE_TOL = 1e-6
KERNEL_AGREEMENT_TOL = 1e-6
LIPSCHITZ_TOL = 1e-6
MEAN_IDENTITY_TOL = 1e-7


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    violations: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def check(self, ok: bool, message: str) -> bool:
        self.checks += 1
        if not ok:
            self.violations.append(message)
        return ok

    def track_max(self, key: str, value: float) -> None:
        if math.isfinite(value):
            self.metrics[key] = max(self.metrics.get(key, 0.0), float(value))

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": self.checks, "violations": list(self.violations),
                "metrics": dict(sorted(self.metrics.items()))}


PAIR_FAMILIES = (
    "normal/normal",
    "normal/skewnormal",
    "gamma/gamma",
    "gamma/exponential",
    "exponential/exponential",
    "beta/beta",
    "normal/gamma",
    "normal/beta",
)


def random_pair(rng: np.random.Generator, family: str, config: QuadratureConfig = DEFAULT_CONFIG):
    """One random (P1, P2) with the support of P2 inside that of P1."""
    u = rng.uniform
    if family == "normal/normal":
        return Normal(u(-2, 2), u(0.5, 2), config), Normal(u(-2, 2), u(0.5, 2), config)
    if family == "normal/skewnormal":
        return Normal(u(-1, 1), u(0.5, 2), config), SkewNormal(u(-1, 1), u(0.5, 2), u(-6, 6), config)
    if family == "gamma/gamma":
        return Gamma(u(0.8, 6), u(0.3, 2), config), Gamma(u(0.8, 6), u(0.3, 2), config)
    if family == "gamma/exponential":
        return Gamma(u(0.8, 6), u(0.3, 2), config), Exponential(u(0.3, 3), config)
    if family == "exponential/exponential":
        return Exponential(u(0.3, 3), config), Exponential(u(0.3, 3), config)
    if family == "beta/beta":
        return Beta(u(0.8, 6), u(0.8, 6), config), Beta(u(0.8, 6), u(0.8, 6), config)
    if family == "normal/gamma":
        return Normal(u(0, 4), u(1, 3), config), Gamma(u(1.5, 6), u(0.3, 1.5), config)
    if family == "normal/beta":
        return Normal(u(0, 1), u(0.3, 1.5), config), Beta(u(1.5, 6), u(1.5, 6), config)
    raise ValueError(f"unknown pair family {family!r}")


def random_pairs(seed: int = 0, count: int = 200, config: QuadratureConfig = DEFAULT_CONFIG):
    """``count`` labelled random pairs, cycling through :data:`PAIR_FAMILIES`."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        fam = PAIR_FAMILIES[i % len(PAIR_FAMILIES)]
        p1, p2 = random_pair(rng, fam, config)
        out.append((f"{i}:{fam}", p1, p2))
    return out


def pair_suites(config: QuadratureConfig = DEFAULT_CONFIG, seed: int = 0, count: int = 200):
    """Sandwich, monotone-exactness and oracle two-form agreement over random pairs.

    Returns:
        (sandwich, oracle_consistency) suite results.
    """
    sandwich = SuiteResult("sandwich")
    consistency = SuiteResult("oracle_consistency")
    for label, p1, p2 in random_pairs(seed, count, config):
        res = bounds_theorem(p1, p2, config)
        orc = oracle(p1, p2, config)
        consistency.track_max("max_agreement", orc.agreement)
        consistency.check(orc.converged and orc.agreement <= SANDWICH_TOL,
                          f"{label}: oracle forms disagree by {orc.agreement:.3g} (converged={orc.converged})")
        if not orc.converged:
            continue
        d = orc.value
        sandwich.track_max("max_lower_excess", res.lower - d)
        sandwich.track_max("max_upper_deficit", d - res.upper)
        sandwich.check(res.lower - SANDWICH_TOL <= d <= res.upper + SANDWICH_TOL,
                       f"{label}: oracle {d:.9g} outside [{res.lower:.9g}, {res.upper:.9g}]")
        identity = abs(res.diagnostics["signed_integral"] - (p2.mean - p1.mean))
        sandwich.track_max("max_mean_identity_error", identity)
        sandwich.check(identity <= MEAN_IDENTITY_TOL, f"{label}: E[pi0' tau1] misses the mean shift by {identity:.3g}")
        tag = detect_monotone(LikelihoodRatio(p1, p2, config), config)
        if tag is not Monotonicity.NON_MONOTONE:
            gap = max(abs(res.upper - res.lower), abs(res.lower - d), abs(res.upper - d))
            sandwich.track_max("max_monotone_gap", gap)
            sandwich.check(gap <= SANDWICH_TOL, f"{label}: monotone pair not exact (gap {gap:.3g})")
    return sandwich, consistency


def _distribution_pool(seed: int, count: int, config: QuadratureConfig) -> list[Distribution]:
    fixed = [Normal(0, 1, config), Normal(1, 2, config), Beta(2, 3, config), Beta(0.5, 0.7, config),
             Gamma(2, 1, config), Gamma(0.5, 2, config), Exponential(1.5, config), SkewNormal(0, 1, 3, config)]
    pool, seen = list(fixed), {repr(d) for d in fixed}
    for _, p1, p2 in random_pairs(seed, count, config):
        for d in (p1, p2):
            if repr(d) not in seen:
                seen.add(repr(d))
                pool.append(d)
    return pool


def kernel_suite(config: QuadratureConfig = DEFAULT_CONFIG, seed: int = 0, count: int = 200) -> SuiteResult:
    """tau >= 0, E tau = Var X, and analytic kernels matching the numeric integral."""
    suite = SuiteResult("kernel")
    for d in _distribution_pool(seed, count, config):
        grid = d.grid(501)
        numeric = SteinKernel(d, config, force_numeric=True)
        tau_n = numeric(grid)
        suite.track_max("max_negative", -tau_n.min())
        suite.check(tau_n.min() >= -KERNEL_NONNEG_TOL, f"{d!r}: numeric kernel negative ({tau_n.min():.3g})")
        kernel = stein_kernel(d, config)
        err = abs(d.expect(kernel, config) - d.var)
        suite.track_max("max_variance_error", err)
        suite.check(err <= KERNEL_VARIANCE_TOL, f"{d!r}: E tau - Var = {err:.3g}")
        if kernel.origin == "analytic":
            tau_a = kernel(grid)
            agree = float(np.max(np.abs(tau_n - tau_a) / (1 + np.abs(tau_a))))
            suite.track_max("max_analytic_numeric_gap", agree)
            suite.check(agree <= KERNEL_AGREEMENT_TOL, f"{d!r}: analytic/numeric kernels differ by {agree:.3g}")
    return suite


def lipschitz_test_functions(d: Distribution):
    med = float(d.quantile(0.5))
    q3 = float(d.quantile(0.75))
    return {
        "identity": lambda x: np.asarray(x, dtype=float),
        "abs": lambda x: np.abs(x),
        "sin": np.sin,
        "abs_centered": lambda x: np.abs(np.asarray(x) - med),
        "clipped": lambda x: np.minimum(x, q3),
    }


def lipschitz_suite(config: QuadratureConfig = DEFAULT_CONFIG, points: int = 41) -> SuiteResult:
    """|g_h| <= 1 for Lipschitz-1 h on Normal(0,1), Beta(2,3) and Gamma(2,1)."""
    suite = SuiteResult("lipschitz")
    for d in (Normal(0, 1, config), Beta(2, 3, config), Gamma(2, 1, config)):
        kernel = stein_kernel(d, config)
        grid = d.grid(points)
        for name, h in lipschitz_test_functions(d).items():
            g = np.abs(g_h_eval(d, kernel, h, grid, config))
            suite.track_max("max_abs_g", float(g.max()))
            suite.check(g.max() <= 1 + LIPSCHITZ_TOL, f"{d!r}, h={name}: max |g_h| = {g.max():.9g}")
    return suite


def metric_suite(config: QuadratureConfig = DEFAULT_CONFIG, seed: int = 0, count: int = 12) -> SuiteResult:
    """Identity, symmetry and triangle inequality of the oracle on random triples."""
    suite = SuiteResult("oracle_metric")
    rng = np.random.default_rng(seed + 1)
    for i in range(count):
        laws = [Normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), config),
                SkewNormal(rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.uniform(-4, 4), config),
                Gamma(rng.uniform(1, 5), rng.uniform(0.3, 1.5), config)]
        if i % 2:
            laws[2] = Normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), config)
        p, q, r = laws
        self_dist = oracle(p, p, config).value
        suite.track_max("max_self_distance", self_dist)
        suite.check(self_dist <= 1e-7, f"triple {i}: d(p, p) = {self_dist:.3g}")
        pq, qp = oracle(p, q, config).value, oracle(q, p, config).value
        suite.track_max("max_asymmetry", abs(pq - qp))
        suite.check(abs(pq - qp) <= 1e-6, f"triple {i}: asymmetry {abs(pq - qp):.3g}")
        pr, qr = oracle(p, r, config).value, oracle(q, r, config).value
        excess = pr - (pq + qr)
        suite.track_max("max_triangle_excess", excess)
        suite.check(excess <= 1e-5, f"triple {i}: triangle inequality violated by {excess:.3g}")
    return suite


SUITES = ("kernel", "lipschitz", "sandwich", "oracle")


def run_suites(which: str = "all", config: QuadratureConfig = DEFAULT_CONFIG, seed: int = 0,
               count: int = 200) -> dict:
    """Run the named suite group; ``all`` runs every one."""
    if which not in SUITES + ("all",):
        raise ValueError(f"unknown suite {which!r}")
    out = {}
    if which in ("all", "kernel"):
        out["kernel"] = kernel_suite(config, seed, count)
        out["lipschitz"] = lipschitz_suite(config)
    if which in ("all", "sandwich", "oracle"):
        sandwich, consistency = pair_suites(config, seed, count)
        if which != "oracle":
            out["sandwich"] = sandwich
        out["oracle_consistency"] = consistency
    if which in ("all", "oracle"):
        out["oracle_metric"] = metric_suite(config, seed)
    return out
