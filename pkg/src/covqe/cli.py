"""Command-line driver.

Subcommands:
    optimize  --config FILE   run a coupling sweep, write manifest + CSV
    measure   MANIFEST OBS    order-parameter curve from an optimized run
    cluster   MANIFEST        fidelity matrix + spectral phase labels
    analyze   --config FILE   causal-cone profile and constraint check

Exit codes: 0 success, 2 validation error, 3 resource cap, 4 non-convergence
(suppressed by --allow-partial).

All CSV floats are written with repr so a re-run with the same seed is
byte-identical; wall-clock timings live only in the manifest.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .lightcone import CONE_QUBIT_CAP, cone_profile, covqe_check
from .models import make_point, omega_string, toric_lattice, wilson_loop
from .optimize import SweepRecord, coupling_grid, sweep
from .pauli import PauliString
from .phase import (
    FidelityMatrix,
    fidelity_matrix,
    order_parameter_curve,
    overlap_sampled,
    spectral_cluster,
)
from .circuit import bind
from .statevector import ResourceCapError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_NONCONVERGED = 4


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def record_to_dict(r: SweepRecord) -> dict:
    d = dataclasses.asdict(r)
    d["theta_opt"] = list(r.theta_opt)
    del d["wall_time"]  # timings live in the manifest; records must be reproducible
    return d


def record_from_dict(d: dict) -> SweepRecord:
    d = dict(d)
    d["theta_opt"] = tuple(float(x) for x in d["theta_opt"])
    d.setdefault("wall_time", 0.0)
    return SweepRecord(**d)


def _check_backend_compatible(cfg: RunConfig) -> None:
    if cfg.model == "cluster" and cfg.backend == "heisenberg":
        raise ConfigError(
            "run.backend",
            "heisenberg backend needs a tableau preparation; the cluster model "
            "uses a Clifford gate prefix (use cone or full)",
        )
    if cfg.model == "toric" and cfg.backend == "cone":
        raise ConfigError(
            "run.backend",
            "cone backend needs a Clifford-prefix preparation; the toric model "
            "starts from a tableau (use heisenberg or full)",
        )


def _load_any_config(path: str) -> RunConfig:
    if path.endswith(".json"):
        try:
            with open(path) as fh:
                cfg_dict = json.load(fh)["config"]
            return RunConfig(**cfg_dict)
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}")
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"not a valid manifest: {exc}")
    return load_config(path)


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    patch = {}
    if getattr(args, "seed", None) is not None:
        patch["seed"] = args.seed
    if getattr(args, "shots", None) is not None:
        patch["shots"] = args.shots
    if getattr(args, "out", None) is not None:
        patch["out"] = args.out
    return dataclasses.replace(cfg, **patch) if patch else cfg


def _embedding_inits(records: list[SweepRecord], grid: list[float], n_params: int):
    """Warm starts imported from a previous run (typically a shallower ansatz):
    parameters are prefix-copied and zero-padded, matched per grid point."""
    by_coupling = {r.coupling: np.asarray(r.theta_opt) for r in records}

    def extra(coupling: float, _i: int):
        theta = by_coupling.get(float(coupling))
        if theta is None:
            return []
        padded = np.zeros(n_params)
        m = min(n_params, theta.shape[0])
        padded[:m] = theta[:m]
        return [padded]

    return extra


def cmd_optimize(args) -> int:
    cfg = _apply_overrides(_load_any_config(args.config), args)
    _check_backend_compatible(cfg)
    grid = list(coupling_grid(cfg.grid_start, cfg.grid_stop, cfg.grid_step))
    extra_inits = None
    if args.init_from is not None:
        init_path = Path(args.init_from)
        if not init_path.exists():
            raise ConfigError("init-from", f"file not found: {init_path}")
        prev = [record_from_dict(json.loads(line)) for line in init_path.read_text().splitlines() if line]
        n_params = make_point(cfg.model, cfg.size, cfg.depth, grid[0]).circuit.n_params
        extra_inits = _embedding_inits(prev, grid, n_params)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    def progress(r: SweepRecord):
        print(
            f"  coupling={r.coupling:g} energy={r.energy:.10f} "
            f"iters={r.iterations} converged={r.converged}",
            file=sys.stderr,
            flush=True,
        )

    records = sweep(
        cfg.model, cfg.size, cfg.depth, grid,
        backend=cfg.backend, seed=cfg.seed, tol=cfg.tol, max_iter=cfg.max_iter,
        extra_inits=extra_inits, progress=progress,
    )
    wall = time.perf_counter() - t0

    records_file = out / "records.jsonl"
    with open(records_file, "w") as fh:
        for r in records:
            fh.write(json.dumps(record_to_dict(r), sort_keys=True) + "\n")
    energy_csv = out / "energy.csv"
    _write_csv(
        energy_csv,
        ["coupling", "energy", "grad_norm", "converged"],
        [[r.coupling, r.energy, r.grad_norm, r.converged] for r in records],
    )
    n_conv = sum(r.converged for r in records)
    manifest = {
        "tool": "covqe",
        "version": __version__,
        "command": "optimize",
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "grid": grid,
        "n_points": len(records),
        "converged_points": n_conv,
        "records_file": records_file.name,
        "energy_csv": energy_csv.name,
        "wall_time_s": wall,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out / 'manifest.json'} ({len(records)} points, {n_conv} converged)")
    if n_conv < len(records) and not args.allow_partial:
        print(
            f"{len(records) - n_conv} grid point(s) did not converge "
            "(re-run with --allow-partial to accept)",
            file=sys.stderr,
        )
        return EXIT_NONCONVERGED
    return EXIT_OK


def _load_manifest(path: str) -> tuple[RunConfig, list[SweepRecord], Path]:
    mpath = Path(path)
    if mpath.is_dir():
        mpath = mpath / "manifest.json"
    if not mpath.exists():
        raise ConfigError("manifest", f"file not found: {mpath}")
    try:
        manifest = json.loads(mpath.read_text())
        cfg = RunConfig(**manifest["config"])
        records_file = mpath.parent / manifest["records_file"]
        records = [
            record_from_dict(json.loads(line))
            for line in records_file.read_text().splitlines()
            if line
        ]
    except (KeyError, TypeError, json.JSONDecodeError, FileNotFoundError) as exc:
        raise ConfigError("manifest", f"cannot load run artifacts: {exc}")
    if not records:
        raise ConfigError("manifest", "run contains no records")
    return cfg, records, mpath.parent


def _resolve_observable(name: str, cfg: RunConfig) -> tuple[str, PauliString]:
    n = make_point(cfg.model, cfg.size, cfg.depth, cfg.grid_start).circuit.n_qubits
    if name == "omega":
        if cfg.model != "cluster":
            raise ConfigError("observable", "omega is the cluster-chain string order parameter")
        return "omega", omega_string(cfg.size)
    if name == "wilson":
        if cfg.model != "toric":
            raise ConfigError("observable", "wilson is the toric-lattice loop order parameter")
        return "wilson", wilson_loop(toric_lattice(cfg.size))
    try:
        op = PauliString.from_label(n, name)
    except ValueError as exc:
        raise ConfigError("observable", str(exc))
    return "custom", op


def cmd_measure(args) -> int:
    cfg, records, run_dir = _load_manifest(args.manifest)
    cfg = _apply_overrides(cfg, args)
    kind, op = _resolve_observable(args.observable, cfg)
    shots = args.shots if args.shots is not None else cfg.shots
    seed = args.seed if args.seed is not None else cfg.seed
    curve = order_parameter_curve(records, op, shots=shots, seed=seed)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"measure_{kind}.csv"
    if shots is None:
        _write_csv(path, ["coupling", "value"], [[p.coupling, p.value] for p in curve])
    else:
        _write_csv(
            path,
            ["coupling", "value", "sampled_mean", "sampled_std_error", "shots"],
            [
                [p.coupling, p.value, p.sampled.mean, p.sampled.std_error, p.sampled.shots]
                for p in curve
            ],
        )
    print(f"wrote {path}")
    return EXIT_OK


def _sampled_fidelity_matrix(records: list[SweepRecord], shots: int, seed: int) -> FidelityMatrix:
    grid = tuple(r.coupling for r in records)
    bounds = []
    for r in records:
        point = make_point(r.model, r.size, r.depth, r.coupling)
        bounds.append(bind(point.circuit, np.asarray(r.theta_opt)))
    n = len(bounds)
    f = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            child = int(np.random.SeedSequence((seed, i, j)).generate_state(1)[0])
            f[i, j] = f[j, i] = overlap_sampled(bounds[i], bounds[j], shots, child).mean
    return FidelityMatrix(grid, f)


def cmd_cluster(args) -> int:
    cfg, records, run_dir = _load_manifest(args.manifest)
    cfg = _apply_overrides(cfg, args)
    if cfg.model != "cluster":
        raise ConfigError("manifest", "phase clustering is defined for cluster-model runs")
    if len(records) < 2:
        raise ConfigError("manifest", "need at least 2 grid points to cluster")
    shots = args.shots if args.shots is not None else None
    seed = args.seed if args.seed is not None else cfg.seed
    if shots is None:
        fm = fidelity_matrix(records)
    else:
        fm = _sampled_fidelity_matrix(records, shots, seed)
    labels = spectral_cluster(fm, k=2, seed=seed)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    fpath = out / "fidelity.csv"
    rows = [
        [fm.grid[i], fm.grid[j], float(fm.values[i, j])]
        for i in range(len(fm.grid))
        for j in range(len(fm.grid))
    ]
    _write_csv(fpath, ["coupling_a", "coupling_b", "fidelity"], rows)
    lpath = out / "labels.csv"
    _write_csv(lpath, ["coupling", "label"], [[g, l] for g, l in zip(labels.grid, labels.labels)])
    print(f"wrote {fpath} and {lpath}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _apply_overrides(_load_any_config(args.config), args)
    point = make_point(cfg.model, cfg.size, cfg.depth, cfg.grid_stop)
    violations = covqe_check(point.circuit, point.hamiltonian)
    profile = cone_profile(point.circuit, point.hamiltonian)
    print(f"model={cfg.model} size={cfg.size} depth={cfg.depth} "
          f"n_qubits={point.circuit.n_qubits} terms={len(point.hamiltonian)}")
    print(f"{'term':<24} {'cone_qubits':>11} {'retained_gates':>14}")
    for term, m, retained in profile.per_term:
        print(f"{term.label():<24} {m:>11} {retained:>14}")
    print(f"cone bound: M_max={profile.m_max} cap={CONE_QUBIT_CAP} "
          f"-> {'tractable' if profile.tractable else 'INTRACTABLE (shrink depth or cap)'}")
    if violations:
        for v in violations:
            print(f"constraint ({v.constraint}) violated: {v.message}")
    else:
        print("constraints (i)-(iv) satisfied: local terms, stabilizer prep, "
              "local gates, bounded depth")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covqe",
        description="classically optimized VQE sweeps, measurement, and phase analysis",
    )
    parser.add_argument("--version", action="version", version=f"covqe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run a coupling sweep from a config file")
    p_opt.add_argument("--config", required=True, help="TOML config or manifest.json")
    p_opt.add_argument("--seed", type=int, default=None)
    p_opt.add_argument("--out", default=None)
    p_opt.add_argument("--allow-partial", action="store_true",
                       help="exit 0 even when some grid points did not converge")
    p_opt.add_argument("--init-from", default=None,
                       help="records.jsonl of a previous run used as extra warm starts")
    p_opt.set_defaults(func=cmd_optimize)

    p_meas = sub.add_parser("measure", help="order-parameter curve from a finished run")
    p_meas.add_argument("manifest", help="manifest.json or its directory")
    p_meas.add_argument("observable", help="omega | wilson | Pauli label like 'Z0 X1 Z2'")
    p_meas.add_argument("--shots", type=int, default=None)
    p_meas.add_argument("--seed", type=int, default=None)
    p_meas.add_argument("--out", default=None)
    p_meas.set_defaults(func=cmd_measure)

    p_clu = sub.add_parser("cluster", help="fidelity matrix + spectral phase labels")
    p_clu.add_argument("manifest", help="manifest.json or its directory")
    p_clu.add_argument("--shots", type=int, default=None)
    p_clu.add_argument("--seed", type=int, default=None)
    p_clu.add_argument("--out", default=None)
    p_clu.set_defaults(func=cmd_cluster)

    p_ana = sub.add_parser("analyze", help="causal-cone profile and constraint check")
    p_ana.add_argument("--config", required=True)
    p_ana.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
