"""CSV and JSON emission for paths, series and reports.

Floats are written with ``repr`` so that files are bit-stable and parse
back to the identical value.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from ..queues import QueuePath
from ..sampling import CountingPath, SubordinatorPath

__all__ = [
    "path_csv_text",
    "emit_path_csv",
    "parse_path_csv",
    "emit_series_csv",
    "write_json",
    "to_jsonable",
]


def _rows(path) -> tuple[list[str], Iterable[list[str]]]:
    if isinstance(path, QueuePath):
        rows = (
            [repr(float(t)), str(int(lv)), str(m)]
            for t, lv, m in zip(path.times, path.levels, path.marks)
        )
        return ["time", "level", "mark"], rows
    if isinstance(path, CountingPath):
        return ["time"], ([repr(float(t))] for t in path.events)
    if isinstance(path, SubordinatorPath):
        return ["t", "value"], ([repr(float(t)), repr(float(v))] for t, v in zip(path.times, path.values))
    raise TypeError(f"cannot emit a {type(path).__name__}")


def _write_rows(stream: TextIO, header, rows) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def path_csv_text(path) -> str:
    buf = io.StringIO()
    _write_rows(buf, *_rows(path))
    return buf.getvalue()


def _open_for_write(file):
    file = Path(file)
    try:
        if file.parent and not file.parent.exists():
            file.parent.mkdir(parents=True, exist_ok=True)
        return open(file, "w", newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {file}: {exc.strerror}") from exc


def emit_path_csv(path, file) -> None:
    """Write a queue, counting or subordinator path as CSV.

    ``QueuePath`` gives ``time,level,mark``; ``CountingPath`` gives ``time``;
    ``SubordinatorPath`` gives ``t,value``.
    """
    header, rows = _rows(path)
    with _open_for_write(file) as fh:
        try:
            _write_rows(fh, header, rows)
        except OSError as exc:
            raise OSError(exc.errno, f"error writing {file}: {exc.strerror}") from exc


def parse_path_csv(file, horizon: float, initial_level: int = 0):
    """Read a path written by :func:`emit_path_csv`.

    The CSV carries only the jumps, so the horizon (and, for queue paths,
    the initial level) must be supplied.
    """
    try:
        with open(file, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {file}: {exc.strerror}") from exc
    if header == ["time", "level", "mark"]:
        return QueuePath(
            horizon,
            [float(r[0]) for r in rows],
            [int(r[1]) for r in rows],
            [r[2] for r in rows],
            initial_level,
        )
    if header == ["time"]:
        return CountingPath(horizon, [float(r[0]) for r in rows])
    if header == ["t", "value"]:
        t = np.array([float(r[0]) for r in rows])
        step = float(t[1] - t[0]) if t.size > 1 else float(horizon or 1.0)
        return SubordinatorPath(step, [float(r[1]) for r in rows])
    raise ValueError(f"{file}: unrecognised header {header!r}")


def emit_series_csv(header: Iterable[str], columns: Iterable[Iterable], file: TextIO | str | os.PathLike) -> None:
    """Write equal-length columns under ``header``; ``file`` may be a stream."""
    cols = [list(c) for c in columns]
    rows = ([_cell(v) for v in row] for row in zip(*cols))
    if hasattr(file, "write"):
        _write_rows(file, list(header), rows)
        return
    with _open_for_write(file) as fh:
        _write_rows(fh, list(header), rows)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_jsonable(obj):
    """Convert numpy scalars and arrays (recursively) to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def write_json(obj, file) -> None:
    with _open_for_write(file) as fh:
        json.dump(to_jsonable(obj), fh, indent=2)
        fh.write("\n")
