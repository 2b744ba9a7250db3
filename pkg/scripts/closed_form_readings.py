"""Compare both binomial readings of the n=2 ExtremePA expected-follower
formula with exact chain values."""

import argparse
import warnings

from ccfair.chain import closed_form_reading_report


def main():
    warnings.filterwarnings("ignore", message=r"m=\d+ < n=")  # tiny exact instances are intended
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m-max", type=int, default=6)
    args = ap.parse_args()
    rep = closed_form_reading_report(range(1, args.m_max + 1))
    for m, v in rep["per_m"].items():
        cells = "  ".join(f"{k}=({v[k][0]}, {v[k][1]})" for k in v)
        print(f"m={m}: {cells}")
    print("matching readings:", rep["matching_readings"])


if __name__ == "__main__":
    main()
