"""Command-line interface: bound, oracle, bayes, kernel, verify, sweep."""
from __future__ import annotations

import argparse
import copy
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from . import report
from .bayes import build_posteriors, closed_form, model_from_dict, prior_from_dict, prior_impact_bounds
from .bounds import compute_bounds
from .config import QuadratureConfig, load_config
from .distributions import from_spec
from .errors import InvalidInput, NumericalError, SteinBoundsError
from .oracle import oracle
from .stein import stein_kernel
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(value: str) -> dict:
    """A JSON object from a file path or an inline JSON string."""
    path = Path(value)
    try:
        text = path.read_text(encoding="utf-8") if path.exists() else value
        payload = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {value!r}: {exc}") from None
    if not isinstance(payload, dict):
        raise UsageError(f"{value!r} does not hold a JSON object")
    return payload


def _config(args) -> QuadratureConfig:
    cfg = load_config(args.config) if args.config else load_config()
    return cfg.replace(abs_tol=args.abs_tol, rel_tol=args.rel_tol, seed=args.seed)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_report(rep: dict, args, csv_header=None, csv_rows=None) -> None:
    if args.format == "csv":
        if csv_header is None:
            raise UsageError(f"--format csv is not available for '{args.command}'")
        _emit(report.to_csv(csv_header, csv_rows), args.out)
    else:
        _emit(report.dumps(rep), args.out)


def _pair_inputs(args) -> tuple[dict, dict]:
    if not args.p1 or not args.p2:
        raise UsageError("--p1 and --p2 are required")
    return _read_json(args.p1), _read_json(args.p2)


def run_bound(spec: dict, cfg: QuadratureConfig, method: str = "auto", with_oracle: bool = False) -> dict:
    p1, p2 = from_spec(spec["p1"], cfg), from_spec(spec["p2"], cfg)
    res = compute_bounds(p1, p2, cfg, method)
    orc = oracle(p1, p2, cfg) if with_oracle else None
    inputs = {"p1": spec["p1"], "p2": spec["p2"], "method": method}
    return report.bounds_report(res, cfg, "bound", inputs, orc)


def run_bayes(spec: dict, cfg: QuadratureConfig, with_oracle: bool = False) -> dict:
    if "model" not in spec or "prior" not in spec:
        raise InvalidInput("bayes spec needs 'model' and 'prior' objects")
    model, prior = model_from_dict(spec["model"]), prior_from_dict(spec["prior"])
    pair = build_posteriors(model, prior, cfg)
    res = prior_impact_bounds(pair, cfg)
    cf = closed_form(model, prior)
    if cf is not None:
        res.diagnostics["closed_form_lower"] = cf.lower
        res.diagnostics["closed_form_upper"] = cf.upper
        res.diagnostics["closed_form_exact"] = cf.exact
    res.diagnostics["p1"] = pair.p1.to_spec()
    if pair.conjugate:
        res.diagnostics["p2"] = pair.p2.to_spec()
    orc = oracle(pair.p1, pair.p2, cfg) if with_oracle else None
    return report.bounds_report(res, cfg, "bayes", {"model": spec["model"], "prior": spec["prior"]}, orc)


def _numeric_failure(rep: dict) -> bool:
    if rep.get("upper_is_infinite"):
        return True
    orc = rep.get("oracle") if rep.get("command") != "oracle" else rep
    return orc is not None and not orc.get("converged", True)


def cmd_bound(args) -> int:
    p1, p2 = _pair_inputs(args)
    rep = run_bound({"p1": p1, "p2": p2}, _config(args), args.method, args.oracle)
    row = [rep["lower"], rep["upper"] if rep["upper"] is not None else float("inf"), rep["exact"], rep["method"]]
    _emit_report(rep, args, ["lower", "upper", "exact", "method"], [row])
    return EXIT_NUMERIC if _numeric_failure(rep) else EXIT_OK


def cmd_oracle(args) -> int:
    p1s, p2s = _pair_inputs(args)
    cfg = _config(args)
    res = oracle(from_spec(p1s, cfg), from_spec(p2s, cfg), cfg)
    rep = report.oracle_report(res, cfg, {"p1": p1s, "p2": p2s})
    row = [rep["value"], rep["value_cdf"], rep["value_quantile"], rep["agreement"], rep["converged"]]
    _emit_report(rep, args, ["value", "value_cdf", "value_quantile", "agreement", "converged"], [row])
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_bayes(args) -> int:
    if not args.spec:
        raise UsageError("--spec is required")
    rep = run_bayes(_read_json(args.spec), _config(args), args.oracle)
    row = [rep["lower"], rep["upper"] if rep["upper"] is not None else float("inf"), rep["exact"], rep["method"]]
    _emit_report(rep, args, ["lower", "upper", "exact", "method"], [row])
    return EXIT_NUMERIC if _numeric_failure(rep) else EXIT_OK


def cmd_kernel(args) -> int:
    spec = args.p1 or args.spec
    if not spec:
        raise UsageError("kernel needs a distribution via --p1 (or --spec)")
    cfg = _config(args)
    d = from_spec(_read_json(spec), cfg)
    x = d.grid(args.points, eps=1e-4)
    tau = stein_kernel(d, cfg)(x)
    rows = [[xi, ti, pi] for xi, ti, pi in zip(x, tau, d.pdf(x))]
    _emit(report.to_csv(["x", "tau", "pdf"], rows), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    suites = run_suites(args.suite, cfg, cfg.seed, args.count)
    rep = report.verify_report(suites, cfg, {"suite": args.suite, "count": args.count})
    rows = [[name, s["passed"], s["checks"], len(s["violations"])] for name, s in rep["suites"].items()]
    _emit_report(rep, args, ["suite", "passed", "checks", "violations"], rows)
    for name, s in rep["suites"].items():
        print(f"{'PASS' if s['passed'] else 'FAIL'} {name}: {s['checks']} checks, "
              f"{len(s['violations'])} violations", file=sys.stderr)
    return EXIT_OK if rep["passed"] else EXIT_NUMERIC


def _set_path(spec: dict, path: str, value: Any) -> dict:
    out = copy.deepcopy(spec)
    keys = path.split(".")
    node = out
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise UsageError(f"--param path {path!r} does not exist in the spec")
        node = node[k]
    if keys[-1] not in node:
        raise UsageError(f"--param path {path!r} does not exist in the spec")
    node[keys[-1]] = value
    return out


def _sweep_point(job):
    kind, spec, cfg_dict, method = job
    cfg = QuadratureConfig.from_dict(cfg_dict)
    try:
        rep = run_bayes(spec, cfg) if kind == "bayes" else run_bound(spec, cfg, method)
    except SteinBoundsError as exc:
        return None, str(exc)
    return rep, None


def _parse_values(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        num = float(tok)
        out.append(int(num) if num.is_integer() and "." not in tok and "e" not in tok.lower() else num)
    if not out:
        raise UsageError("--values needs at least one number")
    return out


def cmd_sweep(args) -> int:
    if not args.param or not args.values:
        raise UsageError("sweep needs --param and --values")
    cfg = _config(args)
    if args.spec:
        kind, base = "bayes", _read_json(args.spec)
    else:
        p1, p2 = _pair_inputs(args)
        kind, base = "bound", {"p1": p1, "p2": p2}
    values = _parse_values(args.values)
    jobs = [(kind, _set_path(base, args.param, v), cfg.to_dict(), args.method) for v in values]
    if args.parallel and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    rows, failed = [], False
    for v, (rep, err) in zip(values, results):
        if rep is None:
            failed = True
            rows.append([args.param, v, None, None, None, None, err])
            continue
        upper = rep["upper"] if rep["upper"] is not None else float("inf")
        failed |= _numeric_failure(rep)
        rows.append([args.param, v, rep["lower"], upper, rep["exact"], rep["method"], ""])
    header = ["param", "value", "lower", "upper", "exact", "method", "error"]
    if args.format == "json":
        payload = [dict(zip(header, r)) for r in rows]
        _emit(json.dumps(report.plain(payload), indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(report.to_csv(header, rows), args.out)
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default=None,
                        help="output format (default: csv for sweep and kernel, json otherwise)")
    common.add_argument("--abs-tol", type=float, default=None)
    common.add_argument("--rel-tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", help="JSON config file (default: $STEIN_BOUNDS_CONFIG)")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--p1", help="reference distribution (JSON file or inline JSON)")
    pair.add_argument("--p2", help="target distribution (JSON file or inline JSON)")

    parser = _Parser(prog="stein-bounds", description="Stein-kernel bounds on Wasserstein-1 distances.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", parents=[common, pair], help="bounds on d_W(P1, P2)")
    p.add_argument("--method", choices=["auto", "theorem", "variance", "monotone"], default="auto")
    p.add_argument("--oracle", action="store_true", help="also compute the reference distance")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("oracle", parents=[common, pair], help="reference d_W from the cdf and quantile forms")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bayes", parents=[common], help="prior-impact bounds for a model and prior")
    p.add_argument("--spec", help="JSON with 'model' and 'prior'")
    p.add_argument("--oracle", action="store_true")
    p.set_defaults(func=cmd_bayes)

    p = sub.add_parser("kernel", parents=[common, pair], help="Stein kernel on a grid as CSV (x, tau, pdf)")
    p.add_argument("--spec", help="distribution JSON (alias of --p1)")
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--suite", choices=("all",) + SUITES, default="all")
    p.add_argument("--count", type=int, default=200, help="random pairs in the pair suites")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common, pair], help="vary one spec entry; CSV for plotting")
    p.add_argument("--spec", help="bayes spec; otherwise --p1/--p2 with paths like p2.params.sigma")
    p.add_argument("--param", help="dotted path of the entry to vary, e.g. model.n")
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--method", choices=["auto", "theorem", "variance", "monotone"], default="auto")
    p.add_argument("--parallel", type=int, default=0, metavar="N", help="worker processes (0 = serial)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command in ("sweep", "kernel") else "json"
    try:
        return args.func(args)
    except (UsageError, InvalidInput, ValueError) as exc:
        print(f"stein-bounds {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"stein-bounds {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
