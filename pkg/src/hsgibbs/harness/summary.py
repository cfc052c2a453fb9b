"""Posterior summaries and report files for a stored chain."""
from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..diagnostics import DEFAULT_DISCARD, DiagnosticsReport, diagnostics_report
from .runner import SampleStore

__all__ = ["Summary", "discard_rows", "summarize", "write_report"]


@dataclass
class Summary:
    """Per-coordinate posterior summaries of the tracked ``beta`` columns.

    ``lower``/``upper`` are the empirical 2.5% and 97.5% quantiles.
    ``sq_error``, ``covered``, ``mse`` and ``coverage`` are only set when a
    true coefficient vector was supplied.
    """

    beta_indices: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    sq_error: np.ndarray | None
    covered: np.ndarray | None
    mse: float | None
    coverage: float | None
    n_used: int
    diagnostics: DiagnosticsReport
    label: str | None = None


def discard_rows(store: SampleStore, discard: int | None = None) -> int:
    """Stored rows to drop before computing diagnostics.

    ``discard`` counts scans from the start of the chain; rows whose scan
    index is at most ``discard`` are dropped. ``None`` means the default of
    5000 scans, capped at half the stored rows for short chains.
    """
    if discard is None:
        n_drop = int(np.sum(store.scan_index <= DEFAULT_DISCARD))
        cap = store.n_rows // 2
        if n_drop > cap:
            warnings.warn(
                f"chain too short for the default {DEFAULT_DISCARD}-scan discard; dropping {cap} rows instead",
                stacklevel=2,
            )
            n_drop = cap
        return n_drop
    return int(np.sum(store.scan_index <= discard))


def summarize(
    store: SampleStore,
    true_beta: np.ndarray | None = None,
    discard: int | None = None,
    max_lag: int = 100,
) -> Summary:
    """Posterior means, 95% equal-tailed intervals, MSE and coverage, plus diagnostics.

    ``true_beta`` is the full length-``p`` truth; only tracked coordinates
    are scored. ``discard`` is passed to :func:`discard_rows`.
    """
    if store.n_rows == 0:
        raise ValueError("empty sample store")
    start = discard_rows(store, discard)
    beta = store.beta[start:]
    if beta.shape[0] == 0:
        raise ValueError("no rows left after discarding")
    mean = beta.mean(axis=0)
    lower, upper = np.quantile(beta, [0.025, 0.975], axis=0)
    sq_error = covered = None
    mse = coverage = None
    if true_beta is not None:
        truth = np.asarray(true_beta, dtype=float)[store.beta_indices]
        sq_error = (mean - truth) ** 2
        covered = (lower <= truth) & (truth <= upper)
        mse = float(sq_error.mean()) if sq_error.size else math.nan
        coverage = float(covered.mean()) if covered.size else math.nan
    kept = store.n_rows - start
    # timings and acceptance cover every scan after the discard point
    first_scan = int(store.scan_index[start]) if kept else 1
    wall = float(np.mean(store.timings[first_scan - 1:])) if store.timings.size else math.nan
    acc = store.xi_accepted[first_scan - 1:]
    acc = acc[acc >= 0]
    rate = float(acc.mean()) if acc.size else math.nan
    report = diagnostics_report(store.draws()[start:], store.column_names(), rate, wall, max_lag=max_lag)
    return Summary(
        beta_indices=store.beta_indices,
        mean=mean,
        lower=lower,
        upper=upper,
        sq_error=sq_error,
        covered=covered,
        mse=mse,
        coverage=coverage,
        n_used=kept,
        diagnostics=report,
        label=store.meta.get("label"),
    )


def write_report(summary: Summary, store: SampleStore, out_dir: str | os.PathLike) -> Path:
    """Write ``posterior.csv``, ``ess.csv``, ``autocorrelation.csv`` and ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = [summary.beta_indices + 1, summary.mean, summary.lower, summary.upper]
    header = "coordinate,mean,lower_95,upper_95"
    if summary.sq_error is not None:
        cols += [summary.sq_error, summary.covered.astype(int)]
        header += ",sq_error,covered"
    np.savetxt(out / "posterior.csv", np.column_stack(cols), delimiter=",", fmt="%.17g", header=header, comments="")

    rep = summary.diagnostics
    with open(out / "ess.csv", "w") as fh:
        fh.write("coordinate,ess,mcse,super_efficient\n")
        for name, e, s, f in zip(rep.names, rep.ess, rep.mcse, rep.super_efficient):
            fh.write(f"{name},{float(e)!r},{float(s)!r},{int(f)}\n")
    lags = np.arange(1, rep.autocorrelations.shape[0] + 1)
    np.savetxt(out / "autocorrelation.csv", np.column_stack([lags, rep.autocorrelations]), delimiter=",",
               fmt="%.17g", header="lag," + ",".join(rep.names), comments="")

    cfg = store.meta.get("config", {})
    info = {
        "seed": cfg.get("seed"),
        "mode": cfg.get("mode"),
        "delta": cfg.get("hyper", {}).get("delta"),
        "N": store.meta.get("N"),
        "p": store.meta.get("p"),
        "n_used": summary.n_used,
        "accept_counts": store.accept_counts,
        "mse": summary.mse,
        "coverage": summary.coverage,
        "label": summary.label,
        **rep.as_dict(),
    }
    (out / "summary.json").write_text(json.dumps(info, indent=2, sort_keys=True, default=float))
    return out
