#!/usr/bin/env python3
"""Run every TV-denoise reformulation on one noisy step image and compare.

Usage: python scripts/compare_tv_recipes.py [--rows 8] [--lam 0.1]
       [--sigma 0.05] [--iters 4000] [--seed 7] [--out comparison.csv]
"""
import argparse
import sys

from proxsplit.data import generate_synthetic
from proxsplit.linops import ImageGrid
from proxsplit.problems import build_tv_denoise
from proxsplit.solvers import SolverConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=8)
    ap.add_argument("--lam", type=float, default=0.1)
    ap.add_argument("--sigma", type=float, default=0.05)
    ap.add_argument("--iters", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default=None, help="write per-iteration CSV here")
    args = ap.parse_args()

    data = generate_synthetic("step_image", (args.rows, args.rows),
                              sigma=args.sigma, seed=args.seed)
    grid = ImageGrid(data["rows"], data["cols"], data["y"])
    inst = build_tv_denoise(grid, args.lam)

    results = {}
    curves = {}
    for name in sorted(inst.recipes):
        trace, x = inst.run(name, SolverConfig(max_iter=args.iters))
        results[name] = (inst.objective(x), trace.n_iter, trace.termination)
        curves[name] = trace.objective

    best = min(v[0] for v in results.values())
    print(f"{args.rows}x{args.rows} step image, lam={args.lam}, "
          f"sigma={args.sigma}, seed={args.seed}")
    print(f"{'recipe':>10s} {'objective':>16s} {'rel gap':>10s} "
          f"{'iters':>6s} {'stop':>12s}")
    for name, (obj, iters, stop) in sorted(results.items()):
        rel = (obj - best) / max(abs(best), 1e-12)
        print(f"{name:>10s} {obj:16.10f} {rel:10.2e} {iters:6d} {stop:>12s}")

    if args.out:
        names = sorted(curves)
        length = max(len(c) for c in curves.values())
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("n," + ",".join(names) + "\n")
            for i in range(length):
                row = [str(i + 1)]
                for n in names:
                    c = curves[n]
                    row.append(repr(float(c[i] if i < len(c) else c[-1])))
                fh.write(",".join(row) + "\n")
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
