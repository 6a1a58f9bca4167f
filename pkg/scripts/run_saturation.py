#!/usr/bin/env python3
"""Saturation experiment: does likelihood processing reach the variance floor?

Simulates repeated energy measurements on a two-level system at a chosen
gap/T ratio and reports the empirical mean squared error of the estimator
against 1/(M F). At ratio 2.4 with a thousand shots per trial the ratio
should sit within a few percent of 1.
"""

import argparse
import json

from thermometry import ExperimentConfig, make_spectrum, report_to_dict, run_experiment


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--ratio", type=float, default=2.4, help="gap/T during the run")
    p.add_argument("--shots", type=int, default=1000, help="measurements per trial")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--estimator", choices=["mle", "bayes"], default="mle")
    p.add_argument("--seed", type=int, default=20260809)
    return p.parse_args()


def main():
    args = parse_args()
    cfg = ExperimentConfig(
        spectrum=make_spectrum([(0.0, 1), (1.0, 1)], label="two-level"),
        true_temperature=1.0 / args.ratio,
        shots_per_trial=args.shots,
        trials=args.trials,
        estimator=args.estimator,
        seed=args.seed,
    )
    report = run_experiment(cfg)
    print(json.dumps(report_to_dict(report, cfg), indent=2))


if __name__ == "__main__":
    main()
