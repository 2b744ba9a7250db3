"""ExtremePA time to absorption against its large-m limit 2 - 1/n.

Prints Monte Carlo means over a grid of m, the round-1 tie frequency at each
m, and (for n=2) exact values from the lumped chain at small m. The gap to
the limit tracks the tie frequency: a tie at the maximum after round 1 costs
roughly one extra round.
"""

import argparse
import warnings

from ccfair import ModelParams, SimConfig, run_batch, tie_probability_experiment
from ccfair.chain import analyze, enumerate_reachable


def main():
    warnings.filterwarnings("ignore", message=r"m=\d+ < n=")  # tiny exact instances are intended
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 10, 100])
    ap.add_argument("--m", type=int, nargs="+", default=[100, 1000, 10_000])
    ap.add_argument("--runs", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--exact-m", type=int, nargs="*", default=[1, 2, 4, 8, 16, 32])
    args = ap.parse_args()

    print(f"{'n':>4} {'m':>7} {'mean':>8} {'+/-3sd':>8} {'limit':>7} {'tie@r1':>7}")
    for n in args.n:
        ties = {r["m"]: r["tie_freq"] for r in tie_probability_experiment(n, args.m, 100_000, args.seed)}
        for m in args.m:
            rep = run_batch(SimConfig(ModelParams(n, m), "extremepa", args.runs, args.seed))
            print(
                f"{n:>4} {m:>7} {rep.mean_time:>8.4f} {rep.ci_halfwidths['mean_time']:>8.4f} "
                f"{2 - 1 / n:>7.4f} {ties[m]:>7.4f}"
            )

    if args.exact_m:
        print("\nexact, n=2 (lumped chain)")
        for m in args.exact_m:
            space = enumerate_reachable(ModelParams(2, m), "extremepa", lumped=True)
            print(f"  m={m:>3}: mu={analyze(space).mu_empty:.6f} ({len(space)} states)")


if __name__ == "__main__":
    main()
