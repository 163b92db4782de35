"""Run configuration: TOML parsing, field validation, stable hashing.

A run file has two tables:

    [run]
    model = "cluster"        # cluster | toric
    size = 16                # chain length N, or lattice linear size L
    depth = 4                # ansatz layers
    backend = "cone"         # optional: cone | heisenberg | full (default per model)
    seed = 0                 # optional
    shots = 10000            # optional; default for sampled measurement columns
    out = "runs/cluster16"   # optional output directory

    [grid]
    start = 0.0
    stop = 2.0
    step = 0.1

Validation errors carry the offending field name so the CLI can report it and
exit with the dedicated status code.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, asdict

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODELS = ("cluster", "toric")
CONFIG_BACKENDS = ("cone", "heisenberg", "full")

MODEL_DEFAULT_BACKEND = {"cluster": "cone", "toric": "heisenberg"}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    model: str
    size: int
    depth: int
    grid_start: float
    grid_stop: float
    grid_step: float
    backend: str
    seed: int = 0
    shots: int | None = None
    out: str = "runs/out"
    tol: float = 1e-6
    max_iter: int = 500

    def as_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _require(table: dict, field: str, kinds, where: str):
    if field not in table:
        raise ConfigError(f"{where}.{field}", "missing required field")
    value = table[field]
    if not isinstance(value, kinds) or isinstance(value, bool):
        names = kinds.__name__ if isinstance(kinds, type) else "/".join(k.__name__ for k in kinds)
        raise ConfigError(f"{where}.{field}", f"expected {names}, got {type(value).__name__}")
    return value


def _optional(table: dict, field: str, kinds, where: str, default):
    if field not in table:
        return default
    return _require(table, field, kinds, where)


def parse_config(data: dict) -> RunConfig:
    if "run" not in data or not isinstance(data["run"], dict):
        raise ConfigError("run", "missing [run] table")
    if "grid" not in data or not isinstance(data["grid"], dict):
        raise ConfigError("grid", "missing [grid] table")
    run, grid = data["run"], data["grid"]

    model = _require(run, "model", str, "run")
    if model not in MODELS:
        raise ConfigError("run.model", f"must be one of {MODELS}, got {model!r}")
    size = _require(run, "size", int, "run")
    min_size = 3 if model == "cluster" else 2
    if size < min_size:
        raise ConfigError("run.size", f"{model} model needs size >= {min_size}, got {size}")
    depth = _require(run, "depth", int, "run")
    if depth < 0:
        raise ConfigError("run.depth", f"must be >= 0, got {depth}")
    backend = _optional(run, "backend", str, "run", MODEL_DEFAULT_BACKEND[model])
    if backend not in CONFIG_BACKENDS:
        raise ConfigError("run.backend", f"must be one of {CONFIG_BACKENDS}, got {backend!r}")
    seed = _optional(run, "seed", int, "run", 0)
    shots = _optional(run, "shots", int, "run", None)
    if shots is not None and shots < 1:
        raise ConfigError("run.shots", f"must be >= 1, got {shots}")
    out = _optional(run, "out", str, "run", "runs/out")
    tol = float(_optional(run, "tol", (int, float), "run", 1e-6))
    if not tol > 0:
        raise ConfigError("run.tol", f"must be > 0, got {tol}")
    max_iter = _optional(run, "max_iter", int, "run", 500)
    if max_iter < 1:
        raise ConfigError("run.max_iter", f"must be >= 1, got {max_iter}")

    start = float(_require(grid, "start", (int, float), "grid"))
    stop = float(_require(grid, "stop", (int, float), "grid"))
    step = float(_require(grid, "step", (int, float), "grid"))
    if step <= 0:
        raise ConfigError("grid.step", f"must be > 0, got {step}")
    if stop < start:
        raise ConfigError("grid.stop", f"must be >= start ({start}), got {stop}")
    span = stop - start
    if abs(round(span / step) * step - span) > 1e-9:
        raise ConfigError("grid.step", f"does not tile [{start}, {stop}] evenly")

    for key in run:
        if key not in ("model", "size", "depth", "backend", "seed", "shots", "out", "tol", "max_iter"):
            raise ConfigError(f"run.{key}", "unknown field")
    for key in grid:
        if key not in ("start", "stop", "step"):
            raise ConfigError(f"grid.{key}", "unknown field")

    return RunConfig(model, size, depth, start, stop, step, backend, seed, shots, out, tol, max_iter)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"not valid TOML: {exc}")
    return parse_config(data)
