"""How UR and PA absorption times grow with n and m (measured, not assumed).

Fits log(mean_time) ~ a + b*log(x) along each axis and prints the slopes.
"""

import argparse

import numpy as np

from ccfair import ModelParams, SimConfig, run_batch


def sweep(rs, pairs, runs, seed):
    out = []
    for n, m in pairs:
        rep = run_batch(SimConfig(ModelParams(n, m), rs, runs, seed))
        out.append(rep.mean_time)
        print(f"  {rs:>2} n={n:>3} m={m:>5}: mean={rep.mean_time:9.2f} +/- {rep.ci_halfwidths['mean_time']:.2f}")
    return np.asarray(out)


def slope(x, y):
    return np.polyfit(np.log(x), np.log(y), 1)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-grid", type=int, nargs="+", default=[5, 10, 20, 40])
    ap.add_argument("--m-grid", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--fixed-n", type=int, default=10)
    ap.add_argument("--fixed-m", type=int, default=1000)
    ap.add_argument("--runs", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for rs in ("ur", "pa"):
        print(f"{rs}: varying n at m={args.fixed_m}")
        tn = sweep(rs, [(n, args.fixed_m) for n in args.n_grid], args.runs, args.seed)
        print(f"{rs}: varying m at n={args.fixed_n}")
        tm = sweep(rs, [(args.fixed_n, m) for m in args.m_grid], args.runs, args.seed)
        print(f"{rs}: log-log slope in n = {slope(args.n_grid, tn):.2f}, in m = {slope(args.m_grid, tm):.2f}\n")


if __name__ == "__main__":
    main()
