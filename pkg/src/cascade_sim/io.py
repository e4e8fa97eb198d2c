"""CSV/JSON helpers with deterministic formatting."""
from __future__ import annotations

import csv
import hashlib
import json
from os import PathLike
from typing import Iterable, Sequence

import numpy as np


def fmt(value) -> str:
    """Shortest round-trip decimal for floats, plain text otherwise."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: str | PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_series(path: str | PathLike) -> tuple[np.ndarray, np.ndarray, str]:
    """Read a two-column CSV with a ``t`` column; returns (t, values, value_name)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if "t" not in header or len(header) < 2:
        raise ValueError(f"{path}: expected a 't' column and a value column, got {header}")
    ti = header.index("t")
    vi = next(i for i in range(len(header)) if i != ti)
    try:
        t = np.array([float(r[ti]) for r in rows[1:]])
        v = np.array([float(r[vi]) for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    return t, v, header[vi]


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def digest(doc) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def write_json(path: str | PathLike, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
