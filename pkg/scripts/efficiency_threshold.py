"""Efficiency at which B_max drops to 2, and where S3 drops to 1, versus distance.

    python3 scripts/efficiency_threshold.py --T 5
"""

import argparse
import sys

from scipy.optimize import brentq

from superswap.model import DecayParams
from superswap.swap import analytic_rho_c_eta
from superswap.witnesses import evaluate


def crossing(p, T, which, level):
    f = lambda eta: getattr(evaluate(analytic_rho_c_eta(p, T, eta)), which) - level
    if f(1.0) <= 0:
        return None
    return brentq(f, 1e-3, 1.0, xtol=1e-10) if f(1e-3) < 0 else 0.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=5.0)
    ap.add_argument("--d", default="0.001,0.01,0.02,0.05,0.1,0.2,0.3")
    args = ap.parse_args(argv)
    print(f"{'d/lambda':>9} {'eta* (B=2)':>11} {'eta (S3=1)':>11}")
    for d in (float(x) for x in args.d.split(",")):
        p = DecayParams(d)
        b, s = crossing(p, args.T, "b_max", 2.0), crossing(p, args.T, "s3", 1.0)
        fmt = lambda v: "never" if v is None else f"{v:.4f}"
        print(f"{d:9.3f} {fmt(b):>11} {fmt(s):>11}")


if __name__ == "__main__":
    sys.exit(main())
