"""Reading and writing design matrices and responses.

Two formats are supported:

* ``csv``: comma separated, one row per line, with an optional single header
  row. The first row is a header when none of its cells parse as numbers.
* ``bin``: raw little-endian binary, two ``uint64`` dimensions (rows,
  columns) followed by ``rows * cols`` ``float64`` values in row-major order.
"""
from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..linalg import ModelData

__all__ = ["FORMATS", "read_csv_matrix", "read_matrix", "write_matrix", "write_binary", "read_binary", "load_data"]

FORMATS = ("csv", "bin", "raw-binary")  # "raw-binary" is an alias of "bin"
_HEADER_DTYPE = np.dtype("<u8")
_VALUE_DTYPE = np.dtype("<f8")


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def read_csv_matrix(path: str | os.PathLike) -> np.ndarray:
    """Parse a numeric CSV file into a 2-d array; locations in errors are 1-based."""
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            values = [_parse_float(c.strip()) for c in cells]
            if not rows and width is None and all(v is None for v in values):
                width = len(cells)  # header row
                continue
            if width is None:
                width = len(cells)
            if len(cells) != width:
                raise DataError(
                    f"{path}: expected {width} columns, found {len(cells)}", row=lineno, column=min(len(cells), width) + 1
                )
            for col, v in enumerate(values, start=1):
                if v is None:
                    raise DataError(f"{path}: non-numeric cell {cells[col - 1]!r}", row=lineno, column=col)
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no numeric rows")
    return np.array(rows, dtype=float)


def write_binary(path: str | os.PathLike, array: np.ndarray) -> None:
    """Write a matrix (or a vector, as one column) in the raw binary layout."""
    a = np.asarray(array, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"expected a vector or matrix, got shape {a.shape}")
    with open(path, "wb") as fh:
        fh.write(np.array(a.shape, dtype=_HEADER_DTYPE).tobytes())
        fh.write(np.ascontiguousarray(a, dtype=_VALUE_DTYPE).tobytes())


def read_binary(path: str | os.PathLike) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise DataError(f"{path}: file too short for the dimension header ({len(raw)} bytes)")
    rows, cols = (int(x) for x in np.frombuffer(raw[:16], dtype=_HEADER_DTYPE))
    expected = rows * cols * _VALUE_DTYPE.itemsize
    if len(raw) - 16 != expected:
        raise DataError(f"{path}: header says {rows} x {cols} ({expected} bytes) but payload has {len(raw) - 16} bytes")
    return np.frombuffer(raw[16:], dtype=_VALUE_DTYPE).reshape(rows, cols).astype(float)


def read_matrix(path: str | os.PathLike, fmt: str = "csv") -> np.ndarray:
    if fmt == "csv":
        return read_csv_matrix(path)
    if fmt in ("bin", "raw-binary"):
        return read_binary(path)
    raise DataError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def write_matrix(path: str | os.PathLike, array: np.ndarray, fmt: str = "csv") -> None:
    if fmt in ("bin", "raw-binary"):
        write_binary(path, array)
        return
    a = np.asarray(array, dtype=float)
    np.savetxt(path, a if a.ndim == 2 else a[:, None], delimiter=",", fmt="%.17g")


def load_data(design_path, response_path, fmt: str = "csv") -> ModelData:
    """Load ``W`` and ``z`` and check that they fit together."""
    if not Path(design_path).exists():
        raise DataError(f"design file not found: {design_path}")
    if not Path(response_path).exists():
        raise DataError(f"response file not found: {response_path}")
    W = read_matrix(design_path, fmt)
    z = read_matrix(response_path, fmt)
    if z.ndim == 2 and z.shape[1] != 1:
        if z.shape[0] == 1:
            z = z.T
        else:
            raise DataError(f"{response_path}: response must have a single column, found {z.shape[1]}", column=2)
    z = z.reshape(-1)
    if z.shape[0] != W.shape[0]:
        raise DataError(
            f"response has {z.shape[0]} rows but design has {W.shape[0]}",
            row=min(z.shape[0], W.shape[0]) + 1,
        )
    return ModelData(W, z)
