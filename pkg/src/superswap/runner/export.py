"""CSV / JSON serialization of sweep rows."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .. import __version__
from .sweeps import COLUMNS, ResultRow

FLOAT_FORMAT = "{:.12g}"
_OPTIONAL = {"s2_stderr", "s3_stderr", "b_max_stderr", "success_prob_stderr"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return FLOAT_FORMAT.format(v)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def csv_to_rows(text: str) -> list[ResultRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
    out = []
    for rec in reader:
        kw = {}
        for c in COLUMNS:
            v = rec[c]
            if c == "source":
                kw[c] = v
            elif v == "" and c in _OPTIONAL:
                kw[c] = None
            else:
                kw[c] = float(v)
        out.append(ResultRow(**kw))
    return out


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else str(v)
    return v


def rows_to_json(rows: Sequence[ResultRow], config: dict | None = None, started: float | None = None) -> str:
    now = time.time()
    meta = {
        "version": __version__,
        "config": config or {},
        "master_seed": (config or {}).get("master_seed"),
        "wall_clock": {
            "finished": datetime.fromtimestamp(now, timezone.utc).isoformat(),
            "elapsed_s": None if started is None else now - started,
        },
        "columns": list(COLUMNS),
    }
    body = [{c: _json_float(getattr(r, c)) for c in COLUMNS} for r in rows]
    return json.dumps({"metadata": meta, "rows": body}, indent=2)


def json_to_rows(text: str) -> tuple[list[ResultRow], dict]:
    doc = json.loads(text)
    rows = []
    for rec in doc["rows"]:
        kw = {c: (math.nan if rec[c] is None and c not in _OPTIONAL else rec[c]) for c in COLUMNS}
        rows.append(ResultRow(**kw))
    return rows, doc["metadata"]


def export(rows: Sequence[ResultRow], path, format: str = "csv", config: dict | None = None, started: float | None = None) -> Path:
    if not rows:
        raise ValueError("nothing to export")
    if format == "csv":
        text = rows_to_csv(rows)
    elif format == "json":
        text = rows_to_json(rows, config, started)
    else:
        raise ValueError(f"unknown format {format!r}")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
