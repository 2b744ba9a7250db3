"""Per-CC fairness profile for all three recommenders.

Default is a reduced scale that runs in about a minute; ``--full`` uses
n=100, m=10000, which is slow for UR and PA.
"""

import argparse
from pathlib import Path

import numpy as np

from ccfair import ModelParams, SimConfig, run_batch
from ccfair.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--runs", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    if args.full:
        args.n, args.m, args.runs = 100, 10_000, 10_000

    profiles = {}
    for rs in ("extremepa", "pa", "ur"):
        rep = run_batch(SimConfig(ModelParams(args.n, args.m), rs, args.runs, args.seed))
        profiles[rs] = rep.cc_fair_freq
        print(f"{rs:>9}: mean_time={rep.mean_time:.2f} frac_absorbed={rep.frac_absorbed:.3f}")

    print(f"\n{'i':>4} " + " ".join(f"{rs:>9}" for rs in profiles))
    for i in range(args.n):
        print(f"{i + 1:>4} " + " ".join(f"{profiles[rs][i]:>9.4f}" for rs in profiles))

    e = np.asarray(profiles["extremepa"])
    print(f"\nExtremePA non-decreasing: {bool((np.diff(e) >= 0).all())}; first={e[0]:.4f} vs 1/n={1 / args.n:.4f}")
    if args.out:
        rows = ([i + 1] + [profiles[rs][i] for rs in profiles] for i in range(args.n))
        print(write_csv(args.out, ["i", *profiles], rows))


if __name__ == "__main__":
    main()
