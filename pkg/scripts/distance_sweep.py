"""Steering and CHSH witnesses versus inter-atomic distance at T = 5/gamma.

Writes a CSV with one row per (d, eta) and prints, per efficiency, the
largest distance that still violates each inequality.

    python3 scripts/distance_sweep.py --eta 1,0.9,0.8 --out distance.csv
"""

import argparse
import sys
from collections import defaultdict

from superswap.runner.config import ExperimentConfig
from superswap.runner.export import export
from superswap.runner.sweeps import sweep_distance


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta", default="1,0.9,0.8,0.7")
    ap.add_argument("--T", default="5")
    ap.add_argument("--out", default="distance_sweep.csv")
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(T=args.T, eta=args.eta)
    rows = sweep_distance(cfg)
    export(rows, args.out, "csv", cfg.as_dict())

    reach = defaultdict(lambda: {"s3": None, "bell": None})
    for r in rows:
        if r.s3 > 1:
            reach[r.eta]["s3"] = r.d_over_lambda
        if r.b_max > 2:
            reach[r.eta]["bell"] = r.d_over_lambda
    print(f"{'eta':>5} {'max d (S3>1)':>14} {'max d (B>2)':>13}")
    for eta, v in reach.items():
        print(f"{eta:5.2f} {str(v['s3']):>14} {str(v['bell']):>13}")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    sys.exit(main())
