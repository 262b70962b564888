"""Coverage of the asymptotic confidence interval for Delta_a.

Uniform, Laplace and logistic marginals, d in {1, 2}, a in {0.5, 1, 2, 5},
n in {10, 20, 30, 50, 100, 200}.  Long run (10000 replications per cell).

    python3 scripts/reproduce_coverage.py --reps 10000 > coverage.csv
"""

import argparse
import csv
import sys

from steinmvn import AlternativeSpec
from steinmvn.experiments import coverage_study


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=2020)
    p.add_argument("--workers", type=int, default=None)
    args = p.parse_args()
    out = csv.writer(sys.stdout)
    weights = (0.5, 1.0, 2.0, 5.0)
    out.writerow(["alternative", "d", "n"] + [f"a={a:g}" for a in weights])
    for kind in ("uniform", "laplace", "logistic"):
        for d in (1, 2):
            for n in (10, 20, 30, 50, 100, 200):
                row = [coverage_study(AlternativeSpec(kind, d), n, a, reps=args.reps,
                                      seed=args.seed, workers=args.workers).coverage
                       for a in weights]
                out.writerow([kind, d, n] + [f"{c:.2f}" for c in row])
                sys.stdout.flush()


if __name__ == "__main__":
    main()
