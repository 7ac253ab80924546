"""CSV schema validation for the simulator's output contracts.

Every loader returns (header, columns) with columns as float arrays and
raises SchemaError naming the offending column or row on any mismatch, so a
schema drift upstream fails loudly instead of rendering garbage.
"""

from __future__ import annotations

import csv
import re

import numpy as np


class SchemaError(ValueError):
    """The CSV does not match the documented output contract."""


def _read(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if not body:
        raise SchemaError(f"{path}: no data rows")
    data = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} fields, "
                              f"header has {len(header)}")
        for j, v in enumerate(row):
            try:
                data[i, j] = float(v)
            except ValueError:
                raise SchemaError(f"{path}: non-numeric value {v!r} in "
                                  f"column '{header[j]}' (row {i + 2})") from None
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        i, j = bad[0]
        raise SchemaError(f"{path}: non-finite value in column "
                          f"'{header[j]}' (row {i + 2})")
    return header, data


def _columns(header, data) -> dict[str, np.ndarray]:
    return {name: data[:, j] for j, name in enumerate(header)}


def _require(path, header, names: list[str], prefix_patterns: list[str] = ()):
    for name in names:
        if name not in header:
            raise SchemaError(f"{path}: missing required column '{name}'")
    known = set(names)
    for col in header:
        if col in known:
            continue
        if not any(re.fullmatch(p, col) for p in prefix_patterns):
            raise SchemaError(f"{path}: unexpected column '{col}'")
    if len(set(header)) != len(header):
        dup = [c for c in header if header.count(c) > 1][0]
        raise SchemaError(f"{path}: duplicated column '{dup}'")


def _require_time(path, cols):
    t = cols["t"]
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise SchemaError(f"{path}: column 't' must be strictly increasing")


def load_timeseries(path) -> dict[str, np.ndarray]:
    """Any t-indexed series (populations, density matrix, ...): first column
    must be 't', the rest are curves."""
    header, data = _read(path)
    if header[0] != "t":
        raise SchemaError(f"{path}: first column must be 't', got '{header[0]}'")
    if len(header) < 2:
        raise SchemaError(f"{path}: a time series needs at least one "
                          "data column besides 't'")
    if len(set(header)) != len(header):
        dup = [c for c in header if header.count(c) > 1][0]
        raise SchemaError(f"{path}: duplicated column '{dup}'")
    cols = _columns(header, data)
    _require_time(path, cols)
    return cols


DICKE_COLUMNS = ["t", "P_Wbar_C", "P_D1_C", "P_D2_C", "P_W_B", "P_D1_B",
                 "P_D2_B", "P_dark_B"]


def load_dicke(path) -> dict[str, np.ndarray]:
    header, data = _read(path)
    _require(path, header, DICKE_COLUMNS)
    cols = _columns(header, data)
    _require_time(path, cols)
    return cols


def _load_long_grid(path, xname, yname, vname):
    header, data = _read(path)
    _require(path, header, [xname, yname, vname])
    cols = _columns(header, data)
    x = np.unique(cols[xname])
    y = np.unique(cols[yname])
    if x.size * y.size != cols[vname].size:
        raise SchemaError(f"{path}: rows do not form a complete "
                          f"{xname} x {yname} grid "
                          f"({x.size} x {y.size} vs {cols[vname].size} rows)")
    order = np.lexsort((cols[yname], cols[xname]))
    grid = cols[vname][order].reshape(x.size, y.size)
    return x, y, grid


def load_field_map(path):
    """Long-format (t, x, intensity) -> t axis, x axis, intensity[t, x]."""
    t, x, inten = _load_long_grid(path, "t", "x", "intensity")
    if np.any(inten < 0):
        raise SchemaError(f"{path}: column 'intensity' must be nonnegative")
    return t, x, inten


def load_sweep(path):
    """Long-format (d, L, P_dark_B) -> d axis, L axis, metric[d, L]."""
    return _load_long_grid(path, "d", "L", "P_dark_B")


def load_jsd(path):
    """Long-format (omega1, omega2, J) -> frequency axes and J grid."""
    w1, w2, j = _load_long_grid(path, "omega1", "omega2", "J")
    if np.any(j < 0):
        raise SchemaError(f"{path}: column 'J' must be nonnegative")
    return w1, w2, j


def load_style(path) -> dict:
    import json
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: style file must contain a JSON object")
    allowed = {"figsize", "dpi", "cmap", "title", "xlabel", "ylabel",
               "logy", "columns", "vmax", "vmin"}
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"{path}: unknown style key '{key}'")
    return doc
