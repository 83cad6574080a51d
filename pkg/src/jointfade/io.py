"""Trace CSV reading/writing and deterministic report serialisation."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import PowerSeries
from .errors import IngestError

HEADER = ("t", "rx1_dbm", "rx2_dbm")


def fmt(v: float) -> str:
    """17 significant digits: round-trips every double."""
    return "%.17g" % v


def write_traces_csv(path, sx: PowerSeries, sy: PowerSeries) -> None:
    if len(sx) != len(sy) or not np.array_equal(sx.t, sy.t):
        raise ValueError("series must share time steps")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(HEADER) + "\n")
        for t, a, b in zip(sx.t.tolist(), sx.power.tolist(), sy.power.tolist()):
            fh.write(f"{t},{fmt(a)},{fmt(b)}\n")


def read_traces_csv(path, resolution: float = 1.0) -> tuple[PowerSeries, PowerSeries]:
    """Read ``t,rx1_dbm,rx2_dbm`` into two series; errors name the offending line."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != HEADER:
            raise IngestError(f"expected header {','.join(HEADER)}, got {','.join(header)}", 1)
        ts, xs, ys = [], [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise IngestError(f"expected 3 fields, got {len(row)}", line)
            try:
                t = int(row[0])
            except ValueError:
                raise IngestError(f"time step '{row[0]}' is not an integer", line) from None
            vals = []
            for name, cell in zip(HEADER[1:], row[1:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestError(f"{name} '{cell}' is not a number", line) from None
                if not math.isfinite(v):
                    raise IngestError(f"{name} is not finite", line)
                vals.append(v)
            if ts and t <= ts[-1]:
                raise IngestError(f"time step {t} does not increase", line)
            ts.append(t)
            xs.append(vals[0])
            ys.append(vals[1])
    if not ts:
        raise IngestError(f"{path}: no data rows")
    t_arr = np.asarray(ts, dtype=np.int64)
    return (PowerSeries(t_arr, np.asarray(xs), resolution),
            PowerSeries(t_arr.copy(), np.asarray(ys), resolution))


def to_jsonable(obj):
    """Plain-Python view of report data; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps_report(report: dict) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row) + "\n")
