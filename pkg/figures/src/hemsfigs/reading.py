"""CSV readers for the simulator's emitted files.

Everything arrives as strings from csv.DictReader; the column_* helpers
convert on demand and name the offending column when a value does not
parse, per the error contract.
"""
from __future__ import annotations

import csv
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .errors import DataError, SchemaError

Row = dict[str, str]


def read_rows(path: Path, required: Sequence[str]) -> list[Row]:
    """Load a CSV and check the required columns are present and non-empty."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None:
            raise SchemaError(f"{path}: empty file, expected a CSV header")
        missing = [name for name in required if name not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def column_floats(rows: Sequence[Row], name: str) -> np.ndarray:
    try:
        return np.array([float(row[name]) for row in rows])
    except ValueError:
        raise DataError(f"column {name!r} has a non-numeric entry") from None


def column_ints(rows: Sequence[Row], name: str) -> np.ndarray:
    try:
        return np.array([int(row[name]) for row in rows])
    except ValueError:
        raise DataError(f"column {name!r} has a non-integer entry") from None


def column_flags(rows: Sequence[Row], name: str) -> np.ndarray:
    stray = {row[name] for row in rows} - {"0", "1"}
    if stray:
        raise DataError(f"column {name!r} must be 0/1, found {sorted(stray)}")
    return np.array([row[name] == "1" for row in rows])


def column_labels(rows: Sequence[Row], name: str, allowed: Sequence[str]) -> list[str]:
    labels = [row[name] for row in rows]
    stray = set(labels) - set(allowed)
    if stray:
        raise DataError(f"column {name!r} has unexpected labels {sorted(stray)}")
    return labels
