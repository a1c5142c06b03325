"""CSV ingestion."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import DatasetError

# ASCII input names of the satellite-drag (GRACE) simulator data
SATELLITE_INPUTS = ("Umag", "Ts", "Ta", "theta", "phi", "alphan", "sigmat")


def read_table(path, allow_empty: bool = False):
    """Parse a numeric CSV with a header row into ``(names, rows)``."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: file is empty") from None
        names = [h.strip() for h in header]
        if not names or any(not h for h in names):
            raise DatasetError(f"{path}: header row has blank column names")
        if len(set(names)) != len(names):
            raise DatasetError(f"{path}: duplicate column names in header")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise DatasetError(
                    f"{path}: line {line_no} has {len(row)} fields, expected {len(names)}"
                )
            vals = []
            for col, cell in zip(names, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: line {line_no}, column {col!r}: non-numeric value {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DatasetError(f"{path}: line {line_no}, column {col!r}: non-finite value")
                vals.append(v)
            rows.append(vals)
    if not rows and not allow_empty:
        raise DatasetError(f"{path}: no data rows")
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return names, data


def load_csv(path, response_column: str):
    """Load ``(X, y, input_names)``; every column except the response is an input."""
    names, data = read_table(path)
    if response_column not in names:
        raise DatasetError(f"{path}: response column {response_column!r} not found; columns are {names}")
    j = names.index(response_column)
    inputs = [c for c in names if c != response_column]
    if not inputs:
        raise DatasetError(f"{path}: no input columns besides {response_column!r}")
    X = np.delete(data, j, axis=1)
    return X, data[:, j].copy(), inputs
