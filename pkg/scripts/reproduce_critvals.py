"""Full critical-value grid: d in {1,2,3,5}, n in {20,50,100}, six weights.

Long run (100000 replications per cell by default).  Writes a CSV table.

    python3 scripts/reproduce_critvals.py --reps 100000 --out critvals.csv
"""

import argparse
import csv
import math

from steinmvn import SimulationConfig
from steinmvn.montecarlo import stderr_progress, statistic_key
from steinmvn.nulldist import empirical_quantile, null_statistics

WEIGHTS = [0.5, 1.0, 2.0, 5.0, 10.0, math.inf]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=2020)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default="critvals.csv")
    args = p.parse_args()
    cfg = SimulationConfig(reps=args.reps, seed=args.seed, workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "n"] + [format(a, "g") for a in WEIGHTS])
        for d in (1, 2, 3, 5):
            for n in (20, 50, 100):
                sims = null_statistics(n, d, WEIGHTS, cfg, progress=stderr_progress(f"d={d} n={n}"))
                row = [empirical_quantile(sims[statistic_key("T", a)], 0.95) for a in WEIGHTS]
                w.writerow([d, n] + [f"{q:.2f}" for q in row])
                fh.flush()


if __name__ == "__main__":
    main()
