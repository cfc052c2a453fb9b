"""Pathwise and analytical accuracy diagnostics.

Pathwise: sample autocorrelation, overlapping-batch-means (OBM) asymptotic
variance with batch size ``floor(n**(1/3))``, effective sample size, Monte
Carlo standard errors, a split-mean stationarity z-score, and the log-log
scaling regression used to study how the asymptotic variance grows with
``N`` and ``p``.

Analytical: KL divergence between multivariate-normal inverse-gamma laws with
a shared shape, the leading-order uniform TV bound between the exact and
thresholded kernels, and the Pinsker conversion from KL to TV.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DiagnosticsError, MatrixNotSPDError, OutOfScopeError, RankDeficiencyError

__all__ = [
    "DEFAULT_DISCARD",
    "MNIGParams",
    "DiagnosticsReport",
    "ScalingFit",
    "autocorrelation",
    "obm_batch_size",
    "obm_variance",
    "effective_sample_size",
    "is_super_efficient",
    "mcse",
    "geweke_z",
    "scaling_regression",
    "kl_mnig",
    "tv_bound_theorem1",
    "pinsker_check",
    "operator_norm",
    "diagnostics_report",
]

DEFAULT_DISCARD = 5000
MIN_OBM_LENGTH = 100


@dataclass(frozen=True)
class MNIGParams:
    """``beta | sigma2 ~ N(m, sigma2 Sigma)``, ``sigma2 ~ InvGamma(a, b)``."""

    m: np.ndarray
    Sigma: np.ndarray
    a: float
    b: float


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise DiagnosticsError(f"expected a 1-d series, got shape {x.shape}")
    return x


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``1..max_lag`` (autocovariances normalized by ``1/n``)."""
    x = _as_series(series)
    n = x.size
    if n <= max_lag + 1:
        raise DiagnosticsError(f"series of length {n} too short for max_lag={max_lag}")
    xc = x - x.mean()
    c0 = float(xc @ xc)
    if c0 == 0.0:
        raise DiagnosticsError("autocorrelation undefined for a zero-variance series")
    return np.array([float(xc[:-k] @ xc[k:]) / c0 for k in range(1, max_lag + 1)])


def obm_batch_size(n: int) -> int:
    b = int(math.floor(n ** (1.0 / 3.0)))
    # guard against floating error at perfect cubes
    while (b + 1) ** 3 <= n:
        b += 1
    while b**3 > n:
        b -= 1
    return max(b, 1)


def obm_variance(series) -> float:
    """Overlapping batch means estimate of the asymptotic variance.

    ``n b / ((n - b)(n - b + 1)) * sum_j (Ybar_j - Ybar)^2`` over the
    ``n - b + 1`` windows of length ``b = floor(n^(1/3))``.
    """
    x = _as_series(series)
    n = x.size
    if n < MIN_OBM_LENGTH:
        raise DiagnosticsError(f"series too short for OBM: n={n} < {MIN_OBM_LENGTH}")
    b = obm_batch_size(n)
    mu = x.mean()
    c = np.concatenate(([0.0], np.cumsum(x - mu)))
    batch_dev = (c[b:] - c[:-b]) / b
    a = n - b + 1
    return float(n * b * np.sum(batch_dev**2) / ((a - 1) * a))


def _ess_raw(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    s2 = obm_variance(x)
    var = float(np.var(x, ddof=1))
    if var == 0.0:
        raise DiagnosticsError("effective sample size undefined for a zero-variance series")
    return n * var / s2 if s2 > 0 else math.inf, n


def effective_sample_size(series) -> float:
    """``n * var / sigma2_obm``, clamped to ``n`` for super-efficient series."""
    x = _as_series(series)
    ess, n = _ess_raw(x)
    return float(min(ess, n))


def is_super_efficient(series) -> bool:
    """True when the unclamped effective sample size exceeds the path length."""
    x = _as_series(series)
    ess, n = _ess_raw(x)
    return bool(ess > n)


def mcse(series) -> float:
    x = _as_series(series)
    return math.sqrt(obm_variance(x) / x.size)


def geweke_z(series, first: float = 0.1, last: float = 0.5) -> float:
    """Split-mean z-score comparing the first and last fractions of a path.

    Each mean's variance is estimated by OBM, so the score accounts for
    autocorrelation. Large ``|z|`` indicates the path has not settled.
    """
    x = _as_series(series)
    n = x.size
    a = x[: int(first * n)]
    b = x[n - int(last * n):]
    va = obm_variance(a) / a.size if np.ptp(a) > 0 else 0.0
    vb = obm_variance(b) / b.size if np.ptp(b) > 0 else 0.0
    diff = a.mean() - b.mean()
    if va + vb == 0.0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return float(diff / math.sqrt(va + vb))


@dataclass(frozen=True)
class ScalingFit:
    intercept: float
    a1: float
    a2: float
    se_intercept: float
    se_a1: float
    se_a2: float
    n_records: int
    group_effects: dict = field(default_factory=dict)


def scaling_regression(records: Sequence[tuple[float, float, float]], groups: Sequence | None = None) -> ScalingFit:
    """OLS of ``log(response)`` on ``log N`` and ``log p``.

    ``records`` are ``(N, p, response)`` triples. With ``groups`` (one label
    per record) each group gets its own intercept, as when pooling several
    coordinates per run; ``intercept`` is then that of the first group.
    """
    rec = np.asarray(records, dtype=float)
    if rec.ndim != 2 or rec.shape[1] != 3:
        raise ValueError("records must be a sequence of (N, p, response) triples")
    if rec.shape[0] < 4:
        raise ValueError(f"need at least 4 records, got {rec.shape[0]}")
    if np.any(rec <= 0):
        raise ValueError("N, p and response must all be positive")
    y = np.log(rec[:, 2])
    cols = [np.ones(len(rec)), np.log(rec[:, 0]), np.log(rec[:, 1])]
    labels = []
    if groups is not None:
        groups = list(groups)
        if len(groups) != len(rec):
            raise ValueError("groups must have one label per record")
        labels = list(dict.fromkeys(groups))
        for g in labels[1:]:
            cols.append(np.array([1.0 if gi == g else 0.0 for gi in groups]))
    X = np.column_stack(cols)
    if np.ptp(X[:, 1]) == 0 or np.ptp(X[:, 2]) == 0 or np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficiencyError("scaling regression design is rank deficient (N or p does not vary)")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = X.shape[0] - X.shape[1]
    s2 = float(resid @ resid) / dof if dof > 0 else math.nan
    cov = s2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    effects = {g: float(coef[0] + (coef[2 + i] if i > 0 else 0.0)) for i, g in enumerate(labels)}
    return ScalingFit(
        intercept=float(coef[0]),
        a1=float(coef[1]),
        a2=float(coef[2]),
        se_intercept=float(se[0]),
        se_a1=float(se[1]),
        se_a2=float(se[2]),
        n_records=len(rec),
        group_effects=effects,
    )


def kl_mnig(p0: MNIGParams, p1: MNIGParams) -> float:
    """KL(p0 || p1) between MNIG laws sharing the inverse-gamma shape.

    ``0.5 [tr(S1^{-1} S0 - I) - log|S1^{-1} S0| + (m1-m0)' S1^{-1} (m1-m0) a/b0]
    + a log(b0/b1) + (b1 - b0) a / b0``. The trace/log-det part is evaluated
    from the eigenvalues of the whitened ``S0`` so the result is never
    negative.
    """
    if not math.isclose(p0.a, p1.a, rel_tol=1e-12, abs_tol=0.0):
        raise OutOfScopeError(f"kl_mnig requires equal shapes, got {p0.a} and {p1.a}")
    m0, m1 = np.atleast_1d(p0.m), np.atleast_1d(p1.m)
    S0, S1 = np.atleast_2d(p0.Sigma), np.atleast_2d(p1.Sigma)
    if S0.shape != S1.shape or m0.shape != m1.shape or S0.shape[0] != m0.shape[0]:
        raise ValueError("MNIG dimensions do not match")
    d1 = np.diag(S1)
    if np.any(d1 <= 0):
        raise MatrixNotSPDError("Sigma of the reference law is not positive definite")
    s = 1.0 / np.sqrt(d1)
    A1 = S1 * np.outer(s, s)
    A0 = S0 * np.outer(s, s)
    try:
        L = np.linalg.cholesky(A1)
    except np.linalg.LinAlgError as exc:
        raise MatrixNotSPDError(f"Sigma of the reference law is not SPD: {exc}") from exc
    X = scipy.linalg.solve_triangular(L, A0, lower=True)
    C = scipy.linalg.solve_triangular(L, X.T, lower=True)
    zeta = np.linalg.eigvalsh(0.5 * (C + C.T))
    if np.any(zeta <= 0):
        raise MatrixNotSPDError("Sigma of the first law is not positive definite")
    e = zeta - 1.0
    kl_cov = float(np.sum(e - np.log1p(e)))
    y = scipy.linalg.solve_triangular(L, (m1 - m0) * s, lower=True)
    a, b0, b1 = p0.a, p0.b, p1.b
    maha = float(y @ y) * a / b0
    r = b1 / b0 - 1.0
    kl_ig = a * (r - math.log1p(r))
    return 0.5 * (kl_cov + maha) + kl_ig


def tv_bound_theorem1(delta: float, op_norm_W: float, N: int, a0: float, b0: float, z_norm_sq: float) -> float:
    """Leading-order uniform TV distance between the exact and thresholded kernels."""
    return math.sqrt(delta) * op_norm_W * math.sqrt(4.0 + (N + a0) / b0 + 0.5 * N * z_norm_sq / b0)


def pinsker_check(kl: float) -> float:
    """Upper bound ``sqrt(kl / 2)`` on total variation."""
    if kl < 0:
        raise DiagnosticsError(f"KL divergence must be non-negative, got {kl!r}")
    return math.sqrt(kl / 2.0)


def operator_norm(W: np.ndarray) -> float:
    return float(np.linalg.norm(W, 2))


@dataclass
class DiagnosticsReport:
    names: list[str]
    ess: np.ndarray
    mcse: np.ndarray
    autocorrelations: np.ndarray  # (max_lag, n_coordinates)
    super_efficient: np.ndarray
    accept_rate_xi: float
    wall_seconds_per_scan: float
    n: int

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "accept_rate_xi": self.accept_rate_xi,
            "wall_seconds_per_scan": self.wall_seconds_per_scan,
            "median_ess": float(np.nanmedian(self.ess)) if self.ess.size else math.nan,
            "min_ess": float(np.nanmin(self.ess)) if self.ess.size else math.nan,
            "n_super_efficient": int(np.sum(self.super_efficient)),
        }


def diagnostics_report(
    draws: np.ndarray,
    names: Sequence[str],
    accept_rate_xi: float,
    wall_seconds_per_scan: float,
    max_lag: int = 100,
) -> DiagnosticsReport:
    """Per-column ESS, MCSE and autocorrelations of a ``(n, k)`` draw matrix.

    Constant columns get ``nan`` ESS and autocorrelations and zero MCSE.
    """
    draws = np.asarray(draws, dtype=float)
    n, k = draws.shape
    max_lag = min(max_lag, n - 2)
    ess = np.full(k, np.nan)
    se = np.full(k, np.nan)
    super_eff = np.zeros(k, dtype=bool)
    acf = np.full((max(max_lag, 0), k), np.nan)
    for j in range(k):
        x = draws[:, j]
        if np.ptp(x) == 0:
            se[j] = 0.0
            continue
        if n >= MIN_OBM_LENGTH:
            se[j] = mcse(x)
            ess[j] = effective_sample_size(x)
            super_eff[j] = is_super_efficient(x)
        if max_lag > 0:
            acf[:, j] = autocorrelation(x, max_lag)
    return DiagnosticsReport(
        names=list(names),
        ess=ess,
        mcse=se,
        autocorrelations=acf,
        super_efficient=super_eff,
        accept_rate_xi=float(accept_rate_xi),
        wall_seconds_per_scan=float(wall_seconds_per_scan),
        n=n,
    )
