"""Trace files: comma-separated, one header row, 17 significant digits."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Union

from ..trace import COLUMNS, Trace, TraceRow

HEADER = ",".join(COLUMNS)
_GAINS = ("k_v", "k_d")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(value, ".17g")


def write_rows(rows: Iterable[TraceRow], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(HEADER + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_rows(path: Union[str, Path]) -> list[TraceRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(COLUMNS):
            raise ValueError(f"{path}: unexpected trace header {header!r}")
        rows = []
        for rec in reader:
            values = []
            for name, field in zip(COLUMNS, rec):
                if name == "region":
                    values.append(field)
                elif name in _GAINS and field == "":
                    values.append(None)
                else:
                    values.append(float(field))
            rows.append(TraceRow(*values))
    return rows


def write_trace(trace: Trace, out_dir: Union[str, Path]) -> None:
    """Write ``trace.csv`` (output grid) and ``steps.csv`` (accepted steps)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_rows(trace.rows, out_dir / "trace.csv")
    if trace.steps:
        write_rows(trace.steps, out_dir / "steps.csv")


def read_trace(out_dir: Union[str, Path]) -> Trace:
    out_dir = Path(out_dir)
    steps_path = out_dir / "steps.csv"
    steps = read_rows(steps_path) if steps_path.exists() else []
    return Trace(read_rows(out_dir / "trace.csv"), steps)
