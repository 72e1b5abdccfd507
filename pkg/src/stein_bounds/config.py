"""Numeric defaults shared by every module."""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidInput

ENV_VAR = "STEIN_BOUNDS_CONFIG"


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and grid sizes.

    ``max_depth`` is the maximum number of bisections applied to any one
    quadrature panel; ``tail_epsilon`` is the quantile level at which
    infinite supports are truncated.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_depth: int = 60
    tail_epsilon: float = 1e-12
    grid_points: int = 1025
    fd_step_scale: float = 1e-6
    seed: int = 0
    max_panels: int = 4000

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "seed":
                if v < 0:
                    raise InvalidInput("seed must be nonnegative")
                continue
            if not v > 0:
                raise InvalidInput(f"{f.name} must be positive, got {v!r}")
        if not self.tail_epsilon < 1e-3:
            raise InvalidInput("tail_epsilon must be below 1e-3")

    def replace(self, **changes) -> "QuadratureConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "QuadratureConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


DEFAULT_CONFIG = QuadratureConfig()


def load_config(path: str | os.PathLike | None = None) -> QuadratureConfig:
    """Load a config file, falling back to ``$STEIN_BOUNDS_CONFIG`` then defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if not path:
        return DEFAULT_CONFIG
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from exc
    return QuadratureConfig.from_dict(data)
