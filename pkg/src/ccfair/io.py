"""Deterministic CSV/JSON writers.

Floats are written with 10 significant digits, keys in insertion order,
NaN as JSON ``null``. Identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        x = float(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".10g")


def clean(obj):
    """Recursively convert to JSON-ready values with fixed float precision."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return None
        return float(format(x, ".10g"))
    return obj


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(clean(doc), indent=2) + "\n")
    return path


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def write_table(path_stem: Path, header: list[str], rows, fmt_kind: str = "csv") -> Path:
    """A table as CSV, or as a JSON list of records when ``fmt_kind == 'json'``."""
    rows = list(rows)
    if fmt_kind == "json":
        return write_json(
            Path(path_stem).with_suffix(".json"),
            {"rows": [dict(zip(header, r)) for r in rows]},
        )
    return write_csv(Path(path_stem).with_suffix(".csv"), header, rows)
