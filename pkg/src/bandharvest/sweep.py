"""Sweep grids, tabular results and their on-disk formats.

CSV files start with ``#key=value`` metadata lines, then a header row, then
data rows. Floats are written with ``repr`` so a file read back gives the
identical doubles.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

__all__ = [
    "SweepGrid",
    "SweepResult",
    "parse_grid",
    "parse_float_list",
    "format_float",
    "read_csv",
    "read_structured",
    "parallel_map",
    "worker_count",
]

THREADS_ENV = "BANDHARVEST_THREADS"


@dataclass(frozen=True)
class SweepGrid:
    name: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"{self.name}: a grid needs at least 2 points")
        if not self.start < self.stop:
            raise ValueError(f"{self.name}: start must be below stop")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"{self.name}: scale must be linear or log")
        if self.scale == "log" and self.start <= 0:
            raise ValueError(f"{self.name}: log scale needs start > 0")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError(f"{self.name}: grid ends must be finite")

    def values(self):
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)

    def __str__(self):
        tail = ":log" if self.scale == "log" else ""
        return f"{format_float(self.start)}:{format_float(self.stop)}:{self.points}{tail}"


def parse_grid(name, text):
    """``start:stop:points`` with an optional ``:log`` suffix."""
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "linear")):
        raise ValueError(f"{name}: expected start:stop:points[:log], got {text!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"{name}: expected start:stop:points[:log], got {text!r}") from None
    scale = parts[3] if len(parts) == 4 else "linear"
    return SweepGrid(name, start, stop, points, scale)


def parse_float_list(name, text, allow_inf=False):
    """Comma-separated floats; ``inf`` only if ``allow_inf``."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            val = float(tok)
        except ValueError:
            raise ValueError(f"{name}: not a number: {tok!r}") from None
        if math.isnan(val) or (math.isinf(val) and not (allow_inf and val > 0)):
            raise ValueError(f"{name}: value {tok!r} not allowed")
        out.append(val)
    if not out:
        raise ValueError(f"{name}: empty list")
    return out


def format_float(x):
    """Shortest round-tripping text for a float; ``inf``/``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


@dataclass
class SweepResult:
    columns: List[str]
    rows: np.ndarray
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, len(self.columns))
        self.metadata = {str(k): str(v) for k, v in self.metadata.items()}
        for k in self.metadata:
            if "=" in k or "\n" in k:
                raise ValueError(f"bad metadata key {k!r}")

    def column(self, name):
        return self.rows[:, self.columns.index(name)]

    def to_csv(self, stream):
        for k, v in self.metadata.items():
            stream.write(f"#{k}={v}\n".replace("\r", " "))
        stream.write(",".join(self.columns) + "\n")
        for row in self.rows:
            stream.write(",".join(format_float(x) for x in row) + "\n")

    def to_structured(self, stream):
        doc = {
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": [[format_float(x) for x in row] for row in self.rows],
        }
        json.dump(doc, stream, indent=1)
        stream.write("\n")

    def write(self, path=None, fmt="csv", stream=None):
        writer = self.to_csv if fmt == "csv" else self.to_structured
        if path is None:
            writer(stream)
            return
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer(fh)

    def equals(self, other):
        """Bitwise equality of rows, same columns and metadata.

        NaN payloads are not representable in text, so all NaNs compare equal.
        """
        if self.columns != other.columns or self.metadata != other.metadata:
            return False
        if self.rows.shape != other.rows.shape:
            return False
        a, b = _canonical_nan(self.rows), _canonical_nan(other.rows)
        return a.tobytes() == b.tobytes()


def _canonical_nan(rows):
    return np.where(np.isnan(rows), np.nan, rows)


def read_csv(path):
    meta, columns, rows = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key] = val
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append([float(t) for t in line.split(",")])
    if columns is None:
        raise ValueError(f"{path}: no header row")
    return SweepResult(columns, np.array(rows, dtype=float).reshape(-1, len(columns)), meta)


def read_structured(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    rows = np.array([[float(t) for t in r] for r in doc["rows"]], dtype=float)
    return SweepResult(doc["columns"], rows.reshape(-1, len(doc["columns"])), doc["metadata"])


def worker_count():
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


def parallel_map(fn, items, min_parallel=64):
    """``[fn(x) for x in items]``, spread over worker processes when there
    are enough items. Results are always in input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1 or len(items) < min_parallel:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
