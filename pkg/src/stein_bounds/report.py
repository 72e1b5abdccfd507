"""JSON reports: plain-type conversion, schema validation, stable serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from typing import Any

import numpy as np

from .bounds import BoundsResult
from .config import QuadratureConfig
from .oracle import OracleResult


def version() -> str:
    from . import __version__

    return __version__


def plain(obj: Any) -> Any:
    """Recursively convert to JSON-safe types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return str(obj)


def _envelope(command: str, config: QuadratureConfig, inputs: dict | None) -> dict:
    return {"command": command, "version": version(), "config": config.to_dict(), "inputs": inputs or {}}


def bounds_report(result: BoundsResult, config: QuadratureConfig, command: str = "bound",
                  inputs: dict | None = None, oracle: OracleResult | None = None) -> dict:
    out = _envelope(command, config, inputs)
    out.update(
        lower=result.lower,
        upper=result.upper,
        upper_is_infinite=result.upper_is_infinite,
        exact=result.exact,
        value=result.value,
        method=result.method,
        conditions=result.conditions.to_dict() if result.conditions is not None else None,
        diagnostics=dict(result.diagnostics),
    )
    if oracle is not None:
        out["oracle"] = oracle_fields(oracle)
    return plain(out)


def oracle_fields(res: OracleResult) -> dict:
    return {
        "value": res.value,
        "value_cdf": res.value_cdf,
        "value_quantile": res.value_quantile,
        "agreement": res.agreement,
        "converged": res.converged,
        "error_cdf": res.error_cdf,
        "error_quantile": res.error_quantile,
        "crossings": res.crossings,
    }


def oracle_report(res: OracleResult, config: QuadratureConfig, inputs: dict | None = None) -> dict:
    out = _envelope("oracle", config, inputs)
    out.update(oracle_fields(res))
    return plain(out)


def verify_report(suites: dict, config: QuadratureConfig, inputs: dict | None = None) -> dict:
    out = _envelope("verify", config, inputs)
    out["suites"] = {name: s.to_dict() for name, s in suites.items()}
    out["passed"] = all(s.passed for s in suites.values())
    return plain(out)


def dumps(report: dict) -> str:
    """Deterministic text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_schema() -> dict:
    text = resources.files("stein_bounds").joinpath("report_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` breaks the schema."""
    import jsonschema

    jsonschema.validate(report, load_schema())


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if not math.isfinite(v) else f"{float(v):.17g}"
    return str(v)


def to_csv(header: list[str], rows: list[list]) -> str:
    """CSV with floats at 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()
