"""Lifetime datasets: the embedded Aarset device data and a small CSV reader."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class DataError(ValueError):
    """Problem with input lifetimes; ``row`` is 1-based in the file when known."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class MissingFileError(DataError, FileNotFoundError):
    pass


class ParseError(DataError):
    pass


class NonPositiveValueError(DataError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Positive lifetimes. ``values`` is sorted ascending, ``original`` keeps input order."""

    values: np.ndarray
    label: str = ""
    source: str = ""
    original: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        raw = np.asarray(self.values if self.original is None else self.original, dtype=float).ravel()
        if raw.size == 0:
            raise DataError("dataset is empty")
        if not np.all(np.isfinite(raw)):
            raise DataError("dataset contains non-finite values")
        if np.any(raw <= 0):
            raise NonPositiveValueError("dataset contains non-positive values")
        object.__setattr__(self, "original", _frozen(raw))
        object.__setattr__(self, "values", _frozen(np.sort(raw)))

    @classmethod
    def from_values(cls, values: Iterable[float], label: str = "", source: str = "") -> "Dataset":
        return cls(np.asarray(list(values), dtype=float), label, source)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


# Aarset (1987), lifetimes of 50 devices, in their original order.
_AARSET = (
    0.1, 0.2, 1, 1, 1, 1, 1, 2, 3, 6,
    7, 11, 12, 18, 18, 18, 18, 18, 21, 32,
    36, 40, 45, 46, 47, 50, 55, 60, 63, 63,
    67, 67, 67, 67, 72, 75, 79, 82, 82, 83,
    84, 84, 84, 85, 85, 85, 85, 85, 86, 86,
)


def aarset() -> Dataset:
    return Dataset(np.array(_AARSET, dtype=float), "aarset", "Aarset (1987), 50 device lifetimes")


def as_array(data) -> np.ndarray:
    """Sorted positive lifetimes from a Dataset or any array-like."""
    if isinstance(data, Dataset):
        return data.values
    return Dataset(np.asarray(data, dtype=float).ravel()).values


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path: str | os.PathLike, column: str | int = 0, label: str | None = None) -> Dataset:
    """Read one lifetime per row from a comma-separated file.

    A single header row is detected when the first row's target cell is not
    numeric; ``column`` may then be a header name.  Blank lines are skipped.

    Raises:
        MissingFileError: ``path`` does not exist.
        ParseError: a cell is empty or not a number, or the column is unknown.
        NonPositiveValueError: a value is zero, negative or non-finite.
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except FileNotFoundError as exc:
        raise MissingFileError(f"no such file: {path}") from exc

    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} contains no data")

    first_row, first = rows[0]
    idx = column if isinstance(column, int) else None
    probe = first[idx].strip() if idx is not None and idx < len(first) else ""
    has_header = isinstance(column, str) or not _is_number(probe)
    if has_header:
        header = [c.strip() for c in first]
        if isinstance(column, str):
            if column not in header:
                raise ParseError(f"column {column!r} not in header {header}", first_row)
            idx = header.index(column)
        rows = rows[1:]

    values = []
    for row_no, row in rows:
        if idx >= len(row) or not row[idx].strip():
            raise ParseError("empty cell", row_no)
        cell = row[idx].strip()
        try:
            v = float(cell)
        except ValueError:
            raise ParseError(f"cannot parse {cell!r} as a number", row_no) from None
        if not math.isfinite(v) or v <= 0:
            raise NonPositiveValueError(f"lifetime must be positive and finite, got {cell!r}", row_no)
        values.append(v)
    if not values:
        raise DataError(f"{path} has a header but no values")
    return Dataset(np.array(values), label or os.path.basename(str(path)), str(path))


def write_csv(data: Dataset, path: str | os.PathLike, header: str = "time") -> None:
    """Write lifetimes (in original order) with full float precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for v in data.original:
            fh.write(repr(float(v)) + "\n")
