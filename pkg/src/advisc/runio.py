"""CSV and manifest I/O for experiment runs.

All numeric output uses 17 significant digits, which round-trips IEEE
doubles exactly, so recomputing statistics from stored files reproduces the
original values bit-for-bit. Space-time matrices carry a corner-labeled
header row ``t\\x,x0,x1,...``; row n starts with the time of state n. The
manifest is written last, atomically, as the completion marker of a run.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_matrix_csv(path: str | Path, times: np.ndarray, matrix: np.ndarray) -> None:
    """Space-time matrix: header ``t\\x,x0,...``, one row per recorded time."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != len(times):
        raise ValueError("matrix must be 2D with one row per time entry")
    lines = ["t\\x," + ",".join(f"x{j}" for j in range(matrix.shape[1]))]
    for t, row in zip(times, matrix):
        lines.append(fmt(t) + "," + ",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of write_matrix_csv; returns (times, matrix)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("t\\x,"):
        raise ValueError(f"{path} is not a space-time matrix CSV")
    times = []
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        times.append(float(parts[0]))
        rows.append([float(v) for v in parts[1:]])
    return np.array(times), np.array(rows)


def write_series_csv(path: str | Path, key: str, name: str,
                     keys: np.ndarray, values: np.ndarray) -> None:
    """Two-column series like ``t,value`` or ``iter,value``."""
    if len(keys) != len(values):
        raise ValueError("series columns must have equal length")
    lines = [f"{key},{name}"]
    for k, v in zip(keys, values):
        lines.append(fmt(k) + "," + fmt(v))
    Path(path).write_text("\n".join(lines) + "\n")


def read_series_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 1 or "," not in lines[0]:
        raise ValueError(f"{path} is not a two-column series CSV")
    keys = []
    values = []
    for line in lines[1:]:
        a, b = line.split(",")
        keys.append(float(a))
        values.append(float(b))
    return np.array(keys), np.array(values)


def write_columns_csv(path: str | Path, header: list[str], columns: list[np.ndarray]) -> None:
    """General column-oriented CSV with a named header row."""
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("all columns must have equal length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(fmt(col[i]) for col in columns))
    Path(path).write_text("\n".join(lines) + "\n")


def read_columns_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, data


def write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"missing file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ValueError(f"corrupt JSON in {p}: {err}") from err


MANIFEST_NAME = "manifest.json"


def write_manifest(directory: str | Path, payload: dict) -> None:
    """Atomic write (temp file + rename): presence marks a completed run."""
    directory = Path(directory)
    tmp = directory / (MANIFEST_NAME + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, directory / MANIFEST_NAME)


def read_manifest(directory: str | Path) -> dict:
    path = Path(directory) / MANIFEST_NAME
    if not path.is_file():
        raise FileNotFoundError(f"no manifest found in {directory}")
    return read_json(path)
