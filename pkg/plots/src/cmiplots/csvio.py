"""Readers for the documented simulation CSV schemas."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class CsvFormatError(ValueError):
    """The input CSV is empty or lacks a required column."""


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read a CSV into named columns; '#'-prefixed lines become metadata.

    Numeric columns are converted to float arrays (empty fields -> NaN);
    anything non-numeric stays a string array.  Metadata lines of the form
    '# key=value ...' are collected under the '#meta' key.
    """
    path = Path(path)
    meta: dict[str, str] = {}
    rows: list[list[str]] = []
    header: list[str] | None = None
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                for part in line.lstrip("# ").split():
                    if "=" in part:
                        key, _, value = part.partition("=")
                        meta[key] = value
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
            else:
                rows.append(cells)
    if header is None:
        raise CsvFormatError(f"{path}: empty CSV (no header)")
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    columns: dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        raw = [row[i] if i < len(row) else "" for row in rows]
        try:
            columns[name] = np.array(
                [float(v) if v != "" else np.nan for v in raw], dtype=float
            )
        except ValueError:
            columns[name] = np.array(raw, dtype=object)
    columns["#meta"] = meta  # type: ignore[assignment]
    return columns


def require_columns(columns: dict, names: list[str], path) -> None:
    for name in names:
        if name not in columns:
            raise CsvFormatError(f"{path}: missing required column {name!r}")
