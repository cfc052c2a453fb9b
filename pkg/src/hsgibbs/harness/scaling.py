"""How the asymptotic variance of chain averages grows with ``N`` and ``p``.

For each chain and each tracked coordinate the response is the OBM
asymptotic variance divided by the sample variance of the draws, i.e. the
inverse of the per-draw effective sample size ``n_e / n``. Regressing its
logarithm on ``log N`` and ``log p``, with one intercept per coordinate,
gives the growth exponents reported by :func:`scaling_table`. For a fixed
chain length this has the same slopes as a regression of ``-log n_e``.
"""
from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..diagnostics import ScalingFit, obm_variance, scaling_regression
from ..errors import ConfigError, DataError
from .runner import SampleStore
from .summary import discard_rows

__all__ = [
    "DEFAULT_SCALING_COLUMNS",
    "standardized_variance",
    "scaling_records",
    "read_manifest",
    "scaling_table",
]

DEFAULT_SCALING_COLUMNS = (
    tuple(f"beta_{j}" for j in range(1, 101))
    + tuple(f"eta_{j}" for j in range(1, 101))
    + ("log_xi", "neg2_log_sigma")
)


def standardized_variance(series: np.ndarray) -> float:
    """``sigma2_obm / var``: 1 for iid draws, larger under positive autocorrelation."""
    x = np.asarray(series, dtype=float)
    return obm_variance(x) / float(np.var(x, ddof=1))


def scaling_records(
    stores: Iterable[SampleStore],
    columns: Sequence[str] = DEFAULT_SCALING_COLUMNS,
    discard: int | None = None,
) -> tuple[list[tuple[float, float, float]], list[str]]:
    """``(N, p, response)`` records and their coordinate labels.

    Columns missing from a chain or constant after the discard are skipped.
    """
    records, groups = [], []
    for store in stores:
        names = store.column_names()
        draws = store.draws()[discard_rows(store, discard):]
        N, p = store.meta["N"], store.meta["p"]
        for col in columns:
            if col not in names:
                continue
            x = draws[:, names.index(col)]
            if np.ptp(x) == 0:
                continue
            records.append((float(N), float(p), standardized_variance(x)))
            groups.append(col)
    return records, groups


def read_manifest(path: str | os.PathLike) -> list[dict]:
    """Rows of a CSV manifest with columns ``N,p`` and either ``chain`` or ``response``.

    An optional ``group`` column labels rows for coordinate-specific
    intercepts. Relative chain paths are resolved against the manifest's
    directory.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        if not {"N", "p"} <= fields or not ({"chain", "response"} & fields):
            raise DataError(f"{path}: manifest needs columns N, p and chain or response", row=1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                entry = {"N": float(row["N"]), "p": float(row["p"])}
                if row.get("response"):
                    entry["response"] = float(row["response"])
            except ValueError as exc:
                raise DataError(f"{path}: {exc}", row=lineno) from exc
            if row.get("chain"):
                chain = Path(row["chain"])
                entry["chain"] = chain if chain.is_absolute() else path.parent / chain
            if row.get("group"):
                entry["group"] = row["group"]
            rows.append(entry)
    return rows


def scaling_table(manifest_rows: list[dict], columns: Sequence[str] = DEFAULT_SCALING_COLUMNS) -> ScalingFit:
    """Fit the log-log regression for a manifest (chains or precomputed responses)."""
    records, groups = [], []
    for row in manifest_rows:
        if "response" in row:
            records.append((row["N"], row["p"], row["response"]))
            groups.append(row.get("group", "all"))
        elif "chain" in row:
            store = SampleStore.load(row["chain"])
            r, g = scaling_records([store], columns)
            records += r
            groups += g
        else:
            raise ConfigError("manifest row has neither a chain nor a response")
    use_groups = groups if len(set(groups)) > 1 else None
    return scaling_regression(records, groups=use_groups)
