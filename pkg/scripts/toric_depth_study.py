#!/usr/bin/env python3
"""Toric-lattice depth study: optimize the two-parameter-per-layer ansatz at
increasing depth (each depth warm-started from the previous via --init-from,
zero-padded layers act as identity), then measure the Wilson loop per depth.

Defaults: L=3, depths 1/3/5, h_z from 0 to 0.5.
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
    ap.add_argument("--size", type=int, default=3, help="lattice linear size L")
    ap.add_argument("--depths", type=int, nargs="+", default=[1, 3, 5])
    ap.add_argument("--out", default="runs/toric_depths")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--shots", type=int, default=None,
                    help="also sample the Wilson loop with this many shots")
    args = ap.parse_args()

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    prev_records = None
    energies = {}
    for depth in args.depths:
        out = root / f"d{depth}"
        cfg = root / f"toric_d{depth}.toml"
        # full-state backend: exact and fastest at L=3 (13 qubits); the
        # heisenberg default branches exponentially past depth 2
        cfg.write_text(
            f'[run]\nmodel = "toric"\nsize = {args.size}\ndepth = {depth}\n'
            f'backend = "full"\nseed = {args.seed}\ntol = 1e-6\nout = "{out}"\n'
            "[grid]\nstart = 0.0\nstop = 0.5\nstep = 0.05\n"
        )
        opt = ["optimize", "--config", str(cfg)]
        if prev_records is not None:
            opt += ["--init-from", str(prev_records)]
        run(opt)
        prev_records = out / "records.jsonl"
        rows = [json.loads(l) for l in prev_records.read_text().splitlines()]
        energies[depth] = {r["coupling"]: r["energy"] for r in rows}

        measure = ["measure", str(out), "wilson"]
        run(measure)
        if args.shots:
            run(measure + ["--shots", str(args.shots)])

    grid = sorted(energies[args.depths[0]])
    print("\nh_z    " + "".join(f"E(D={d})".rjust(15) for d in args.depths))
    for g in grid:
        print(f"{g:4.2f}  " + "".join(f"{energies[d][g]:15.8f}" for d in args.depths))
    drops = [
        energies[a][g] - energies[b][g]
        for a, b in zip(args.depths, args.depths[1:])
        for g in grid
    ]
    print(f"deeper-is-better violations: {sum(1 for x in drops if x < -1e-9)}")
    print(f"artifacts in {root}/")


if __name__ == "__main__":
    cli()
