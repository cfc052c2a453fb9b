"""Exception hierarchy.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``DataError`` -> 3,
``NumericalError`` -> 4.
"""
from __future__ import annotations


class HorseshoeError(Exception):
    """Base class for all package errors."""


class ConfigError(HorseshoeError, ValueError):
    pass


class DataError(HorseshoeError, ValueError):
    """Malformed or inconsistent input data.

    ``row`` and ``column`` are 1-based positions in the offending file when
    known.
    """

    def __init__(self, message: str, *, row: int | None = None, column: int | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class NumericalError(HorseshoeError, ArithmeticError):
    pass


class MatrixNotSPDError(NumericalError):
    pass


class NumericalOverflowError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass


class ChainError(NumericalError):
    """A kernel failure inside ``run_chain``; ``scan`` is the 1-based scan index."""

    def __init__(self, scan: int, cause: Exception):
        super().__init__(f"scan {scan}: {cause}")
        self.scan = scan


class DiagnosticsError(HorseshoeError, ValueError):
    """Degenerate input to a diagnostic (too short, zero variance, ...)."""


class OutOfScopeError(HorseshoeError, ValueError):
    """Request outside the domain where a formula is valid."""
