"""Tabular output (CSV or a simple columnar binary) and file hashing.

CSV: UTF-8, ``\\n`` line endings, floats in shortest round-trip form.
Binary: one JSON header line, then each column as little-endian float64.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

BINARY_MAGIC = "llgfront-columns-v1"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: str | Path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_table(path: str | Path, header, data: np.ndarray, fmt: str = "csv") -> Path:
    """Write a 2-d array; ``path`` gets ``.csv`` or ``.bin`` appended."""
    data = np.asarray(data, dtype=float)
    path = Path(path)
    if fmt == "csv":
        return write_csv(path.with_suffix(".csv"), header, data.tolist())
    if fmt != "binary":
        raise ValueError(f"unknown format {fmt!r}")
    out = path.with_suffix(".bin")
    head = json.dumps({"magic": BINARY_MAGIC, "columns": list(header), "rows": int(data.shape[0])},
                      sort_keys=True)
    with open(out, "wb") as fh:
        fh.write(head.encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(data.T, dtype="<f8").tobytes())
    return out


def read_table(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read a file written by :func:`write_table` (either format)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix == ".bin":
        with open(path, "rb") as fh:
            head = json.loads(fh.readline().decode("utf-8"))
            if head.get("magic") != BINARY_MAGIC:
                raise ValueError(f"{path}: not a columnar binary file")
            raw = np.frombuffer(fh.read(), dtype="<f8")
        cols = head["columns"]
        return cols, raw.reshape(len(cols), head["rows"]).T.copy()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if header == [""]:
        raise ValueError(f"{path}: empty file")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, data


def column(header, data, name: str) -> np.ndarray:
    try:
        return data[:, header.index(name)]
    except ValueError:
        raise KeyError(f"column {name!r} not in {header}") from None


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def snapshot_rows(times, grid, snapshots):
    for t, snap in zip(times, snapshots):
        for x, m in zip(grid, snap):
            yield (t, x, m[0], m[1], m[2])


def snapshots_to_table(times, grid, snapshots) -> np.ndarray:
    nt, nx = len(times), len(grid)
    out = np.empty((nt * nx, 5))
    out[:, 0] = np.repeat(times, nx)
    out[:, 1] = np.tile(grid, nt)
    out[:, 2:] = np.asarray(snapshots).reshape(nt * nx, 3)
    return out


def table_to_snapshots(header, data):
    """Inverse of :func:`snapshots_to_table`: (times, grid, values[nt, nx, 3])."""
    t = column(header, data, "t")
    if t.size == 0:
        raise ValueError("snapshot file holds no rows")
    times, start = np.unique(t, return_index=True)
    order = np.argsort(start)
    times = times[order]
    nx = t.size // times.size
    if nx * times.size != t.size:
        raise ValueError("snapshot file is ragged (unequal rows per time)")
    grid = column(header, data, "x")[:nx]
    vals = np.stack([column(header, data, c) for c in ("m1", "m2", "m3")], axis=1)
    return times, grid, vals.reshape(times.size, nx, 3)
