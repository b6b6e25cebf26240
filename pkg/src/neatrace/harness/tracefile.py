"""Per-frame trace CSV: frame, x, y, heading, speed, turn, thrust, completion.

Floats are written with repr so a written file reads back bit-exact and two
replays of the same episode produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..evaluation import TRACE_COLUMNS


def write_trace(path, trace: np.ndarray) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(TRACE_COLUMNS)
        for row in trace:
            w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])


def read_trace(path) -> np.ndarray:
    path = Path(path)
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"{path}: not a trace file (header {header})")
        for row in reader:
            rows.append([float(v) for v in row])
    return np.array(rows, dtype=np.float64).reshape(-1, len(TRACE_COLUMNS))
