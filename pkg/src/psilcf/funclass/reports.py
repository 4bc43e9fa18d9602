"""CSV and JSON serialization of checker output."""

from __future__ import annotations

import csv
import json
import math
from typing import Iterable

import numpy as np

CSV_COLUMNS = ("check", "function", "psi", "v", "x", "value", "verdict")


def write_rows(path, rows: Iterable[dict]) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k, "")) for k in CSV_COLUMNS})
            n += 1
    return n


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def write_summary(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
