#!/usr/bin/env python3
"""Landau-scaled precision via gap tuning.

For each temperature over several decades, tunes a linear gap family so
the variance floor is minimal. Whenever the achievable gap range covers
2.4*T the tuned floor lands on ~2.2767*T^2, i.e. delta-T^2 proportional
to T^2 with a temperature-independent prefactor.
"""

import argparse
import sys

import numpy as np

from thermometry import GapFamily, tune_gap


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--t-min", type=float, default=1e-3)
    p.add_argument("--t-max", type=float, default=1e3)
    p.add_argument("--decades-per-point", type=float, default=0.5)
    return p.parse_args()


def main():
    args = parse_args()
    n = int(np.log10(args.t_max / args.t_min) / args.decades_per_point) + 1
    print("# tuned linear gap family, control range scaled with T")
    print("T,lambda_star,gap_over_T,bound,bound_over_T2")
    for T in np.geomspace(args.t_min, args.t_max, n):
        T = float(T)
        family = GapFamily.linear(1.0, 0.0, 0.01 * T, 10.0 * T)
        res = tune_gap(family, T)
        print(f"{T!r},{res.lambda_star!r},{res.gap / T!r},{res.bound!r},{res.bound / T**2!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
