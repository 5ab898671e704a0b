"""Witnesses and success probability versus waiting time at d = 0.1 lambda.

    python3 scripts/time_sweep.py --mode both --trajectories 20000
"""

import argparse
import sys

from superswap.runner.config import ExperimentConfig
from superswap.runner.export import export
from superswap.runner.sweeps import sweep_waiting_time


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta", default="1,0.8")
    ap.add_argument("--d", default="0.1")
    ap.add_argument("--mode", default="analytic", choices=("analytic", "mc", "both"))
    ap.add_argument("--trajectories", type=int, default=20_000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="time_sweep.csv")
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(d_over_lambda=args.d, eta=args.eta, mode=args.mode,
                           n_trajectories=args.trajectories, workers=args.workers)
    rows = sweep_waiting_time(cfg)
    export(rows, args.out, "csv", cfg.as_dict())
    print(f"{'T':>8} {'eta':>5} {'src':>11} {'S3':>8} {'B_max':>8} {'P_succ':>8}")
    for r in rows:
        print(f"{r.T:8.3f} {r.eta:5.2f} {r.source:>11} {r.s3:8.4f} {r.b_max:8.4f} {r.success_prob:8.4f}")


if __name__ == "__main__":
    sys.exit(main())
