"""Power tables for d = 1, 2, 3, 5 against the standard alternatives.

Long run.  Prints one CSV row per (alternative, d, n) with rejection
percentages of every T_a and the competitors.

    python3 scripts/reproduce_power.py --d 2 --reps 100000 > power_d2.csv
"""

import argparse
import csv
import math
import sys

from steinmvn import parse_alternative
from steinmvn.experiments import DEFAULT_COMPETITORS, power_study
from steinmvn.montecarlo import stderr_progress

WEIGHTS = [0.5, 1.0, 2.0, 5.0, 10.0, math.inf]
ALTERNATIVES = {
    1: ["normal", "nmix1", "t:3", "t:5", "t:10", "chi2:5", "chi2:15", "logistic", "uniform",
        "p7:5", "p7:10"],
    "multi": ["normal", "nmix1", "nmix2", "t:3", "t:5", "t:10", "chi2:5", "gamma:5,1", "uniform",
              "laplace", "logistic", "p7:5", "p7:10"],
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--n", default="20,50,100")
    p.add_argument("--reps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=2020)
    p.add_argument("--workers", type=int, default=None)
    args = p.parse_args()
    alts = ALTERNATIVES[1] if args.d == 1 else ALTERNATIVES["multi"]
    out = csv.writer(sys.stdout)
    header = None
    for text in alts:
        alt = parse_alternative(text, args.d)
        for n in (int(v) for v in args.n.split(",")):
            res = power_study(alt, n, WEIGHTS, reps=args.reps, seed=args.seed,
                              competitors=DEFAULT_COMPETITORS, workers=args.workers,
                              check_size=False, progress=stderr_progress)
            if header is None:
                header = list(res.power)
                out.writerow(["alternative", "d", "n"] + header)
            out.writerow([alt.label, args.d, n] + [f"{res.power[k]:.1f}" for k in header])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
