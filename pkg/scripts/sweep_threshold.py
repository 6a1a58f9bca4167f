#!/usr/bin/env python3
"""Low-temperature threshold of a gapped system.

Sweeps the temperature of a fixed-gap two-level system from above the
optimal point down into the frozen regime and tabulates the variance
floor, its dimensionless form crb/T^2, and how closely the floor follows
the T^4 e^{gap/T} divergence law. Below T = gap/2.4 the dimensionless
floor grows without bound: temperatures smaller than the gap are
exponentially hard to resolve.
"""

import argparse
import sys

import numpy as np

from thermometry import fisher_information, gapped_divergence_factor, make_spectrum

HEADER = "T,x,crb,crb_over_T2,divergence_factor"


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--gap", type=float, default=1.0)
    p.add_argument("--x-min", type=float, default=0.5, help="smallest gap/T in the sweep")
    p.add_argument("--x-max", type=float, default=12.0, help="largest gap/T in the sweep")
    p.add_argument("--points", type=int, default=47)
    return p.parse_args()


def main():
    args = parse_args()
    spectrum = make_spectrum([(0.0, 1), (args.gap, 1)], label="gapped")
    print(f"# gap={args.gap!r}; one row per temperature, x = gap/T")
    print(HEADER)
    for x in np.geomspace(args.x_min, args.x_max, args.points):
        x = float(x)
        T = args.gap / x
        crb = 1.0 / fisher_information(spectrum, T)
        print(
            f"{T!r},{x!r},{crb!r},{crb / T**2!r},"
            f"{gapped_divergence_factor(T, args.gap)!r}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
