#!/usr/bin/env python3
"""Desk-scale phase-transition experiment.

Sweeps the sampling rate and sparsity ratio, estimates the 50% success
transition per algorithm, and writes the trial and transition CSVs.  The
defaults finish in a few minutes on a laptop; push --n and --trials up for
smoother curves.

    python scripts/phase_transition.py --out-dir results/
"""

import argparse
import pathlib
import time

from otkit.bench import success_grid, transition_curve, write_transition_csv, write_trials_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--kappas", type=float, nargs="+",
                    default=[0.2, 0.3, 0.4, 0.5, 0.6, 0.7])
    ap.add_argument("--rhos", type=float, nargs="+",
                    default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--algos", nargs="+", default=["hbrotp", "omp", "htp"])
    ap.add_argument("--eps", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.time()
    grid = success_grid(n=args.n, kappa_list=args.kappas, rho_list=args.rhos,
                        trials_per_cell=args.trials, algorithms=args.algos,
                        base_seed=args.seed, noise_eps=args.eps,
                        workers=args.workers)
    with open(out / "trials.csv", "w") as fh:
        write_trials_csv(fh, grid, include_timing=True)
    with open(out / "transitions.csv", "w") as fh:
        write_transition_csv(fh, grid)

    print(f"finished in {time.time() - start:.1f}s")
    for algo in args.algos:
        curve = transition_curve(grid, algo)
        rendered = "  ".join(f"k={kappa:.2f}:rho50={rho50:.3f}{'*' if flag else ''}"
                             for kappa, rho50, flag in curve)
        print(f"{algo:8s} {rendered}")
    print("(* = no 50% crossing inside the grid; boundary reported)")


if __name__ == "__main__":
    main()
