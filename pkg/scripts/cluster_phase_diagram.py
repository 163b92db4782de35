#!/usr/bin/env python3
"""Full cluster-chain pipeline: coupling sweep, string order parameter with
and without shot noise, fidelity matrix + spectral phase labels.

Defaults reproduce the N=16, d=4 phase diagram (about 20 min on one core);
--quick shrinks it to a minute-scale smoke run.
"""

import argparse
import json
import sys
from pathlib import Path

from covqe.cli import main as covqe


def run(argv):
    code = covqe(argv)
    if code != 0:
        print(f"step {' '.join(argv[:2])} exited {code}", file=sys.stderr)
        sys.exit(code)


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/cluster_n16_d4.toml")
    ap.add_argument("--out", default=None, help="override the config's output dir")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--shots", type=int, default=10000)
    ap.add_argument("--quick", action="store_true",
                    help="N=8, d=2, coarse grid; minutes instead of tens of minutes")
    args = ap.parse_args()

    config = args.config
    out = args.out
    if args.quick:
        out = out or "runs/cluster_quick"
        config = str(Path(out).parent / "cluster_quick.toml")
        Path(config).parent.mkdir(parents=True, exist_ok=True)
        Path(config).write_text(
            '[run]\nmodel = "cluster"\nsize = 8\ndepth = 2\nbackend = "cone"\n'
            f'seed = 0\nshots = {args.shots}\ntol = 1e-4\nout = "{out}"\n'
            "[grid]\nstart = 0.0\nstop = 2.0\nstep = 0.25\n"
        )

    opt = ["optimize", "--config", config]
    if args.seed is not None:
        opt += ["--seed", str(args.seed)]
    if out:
        opt += ["--out", out]
    run(opt)

    run_dir = out
    if run_dir is None:
        from covqe.config import load_config
        run_dir = load_config(config).out

    run(["measure", run_dir, "omega"])
    run(["measure", run_dir, "omega", "--shots", str(args.shots)])
    run(["cluster", run_dir])

    labels = (Path(run_dir) / "labels.csv").read_text().splitlines()[1:]
    split = [row.split(",") for row in labels]
    boundary = next((g for g, l in split if l == "0"), None)
    manifest = json.loads((Path(run_dir) / "manifest.json").read_text())
    print(f"\nsweep: {manifest['n_points']} points, "
          f"{manifest['converged_points']} converged, "
          f"{manifest['wall_time_s']:.0f}s")
    print(f"phase boundary: first label-0 point at coupling {boundary}")
    print(f"artifacts in {run_dir}/")


if __name__ == "__main__":
    cli()
