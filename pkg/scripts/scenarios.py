"""Run the delayed-choice and three-time steering scenarios and print subset statistics.

    python3 scripts/scenarios.py --trajectories 100000
"""

import argparse
import sys
import time

from superswap.runner.config import ExperimentConfig
from superswap.runner.scenarios import delayed_choice_experiment, steering_into_past


def show(title, rows):
    print(title)
    for r in rows:
        parts = [f"{r['subset']:>17}", f"n={r['n']:>6}"]
        if "chsh" in r:
            parts.append(f"CHSH {r['chsh']:+.3f} +- {r['chsh_stderr']:.3f}")
        if "s3" in r:
            parts.append(f"S3 {r['s3']:.3f} +- {r['s3_stderr']:.3f}")
        if r["flagged"]:
            parts.append("(small subset)")
        print("  " + "  ".join(parts))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=20130412)
    ap.add_argument("--eta", default="1")
    args = ap.parse_args(argv)
    cfg = ExperimentConfig(n_trajectories=args.trajectories, master_seed=args.seed, eta=args.eta)

    t0 = time.perf_counter()
    show("delayed choice", delayed_choice_experiment(cfg).summary_rows())
    rep = steering_into_past(cfg)
    show("three-time steering", rep.summary_rows())
    print(f"ordering t1 < t2 < t3 holds for every record: {rep.ordering_ok()}")
    print(f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    sys.exit(main())
