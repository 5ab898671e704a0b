"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from .config import ConfigError, load_config
from .export import export, rows_to_csv, rows_to_json
from .scenarios import delayed_choice_experiment, steering_into_past
from .sweeps import sweep_distance, sweep_waiting_time
from .validate import validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--seed", type=int, dest="master_seed", metavar="U64")
    p.add_argument("--trajectories", type=int, dest="n_trajectories", metavar="N")
    p.add_argument("--mode", choices=("analytic", "mc", "both"))
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--d", dest="d_over_lambda", metavar="GRID", help="e.g. 0.1, 0.05,0.1 or 0.02:0.45:0.01")
    p.add_argument("--T", dest="T", metavar="GRID", help="e.g. 5, log:0.1:10:40")
    p.add_argument("--eta", metavar="GRID")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superswap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("sweep-distance", "witnesses vs inter-atomic distance"),
        ("sweep-time", "witnesses vs waiting time"),
        ("delayed-choice", "delayed-choice subset sorting"),
        ("steer-past", "three-time steering scenario"),
        ("validate", "run the oracle cross-checks"),
    ]:
        _add_common(sub.add_parser(name, help=help_))
    return parser


def _write(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(rows: list[dict]) -> str:
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        cfg = load_config(
            args.config,
            gamma=args.gamma,
            d_over_lambda=args.d_over_lambda,
            T=args.T,
            eta=args.eta,
            n_trajectories=args.n_trajectories,
            master_seed=args.master_seed,
            mode=args.mode,
            workers=args.workers,
        )
        if args.command == "validate":
            checks = validate(cfg)
            text = "\n".join(c.line() for c in checks) + "\n"
            _write(text, args.out)
            return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION

        if args.command in ("sweep-distance", "sweep-time"):
            rows = (sweep_distance if args.command == "sweep-distance" else sweep_waiting_time)(cfg)
            if args.out:
                export(rows, args.out, args.format, cfg.as_dict(), started)
            else:
                _write(rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows, cfg.as_dict(), started), None)
            return EXIT_OK

        report = (delayed_choice_experiment if args.command == "delayed-choice" else steering_into_past)(cfg)
        summary = report.summary_rows()
        if args.format == "json":
            doc = {
                "metadata": {"config": cfg.as_dict(), "master_seed": cfg.master_seed,
                             "setting_cycle": report.cycle, "elapsed_s": time.time() - started},
                "subsets": summary,
            }
            if hasattr(report, "ordering_ok"):
                doc["metadata"]["ordering_ok"] = report.ordering_ok()
            text = json.dumps(doc, indent=2)
        else:
            text = _table(summary)
        _write(text, args.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
