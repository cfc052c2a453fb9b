"""Structured linear algebra shared by the kernels.

Everything revolves around the N x N matrix ``M_c = I + c^{-1} W D W'`` with
``D = diag(1/eta)``. The dense route forms ``W D W'`` once per scan and
factorizes ``M_c`` by Cholesky for each ``c`` that is needed. The low-rank
route keeps only the ``s`` active columns and works with the ``s x s`` inner
matrix of the Woodbury identity. Its determinant equals the product of
``1 + s_k^2/c`` over the singular values ``s_k`` of ``W_S D_S^{1/2}``;
:func:`logdet_lowrank` evaluates it from an SVD, the sampling loop from the
Cholesky factor of the inner matrix it already holds.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DataError, MatrixNotSPDError, NumericalError, NumericalOverflowError

__all__ = [
    "ModelData",
    "LowRankFactor",
    "CholeskyFactor",
    "DenseSystem",
    "LowRankSystem",
    "IdentitySystem",
    "weighted_gram",
    "form_M",
    "solve_M",
    "logdet_M",
    "woodbury_apply",
    "logdet_lowrank",
    "sample_structured_gaussian",
]


@dataclass(frozen=True)
class ModelData:
    """Design matrix ``W`` (N x p) and response ``z`` (N,)."""

    W: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        W = np.ascontiguousarray(self.W, dtype=float)
        z = np.ascontiguousarray(self.z, dtype=float).reshape(-1)
        if W.ndim != 2:
            raise DataError(f"design must be 2-dimensional, got shape {W.shape}")
        if W.shape[0] < 1 or W.shape[1] < 1:
            raise DataError(f"design must have N >= 1 and p >= 1, got shape {W.shape}")
        if z.shape[0] != W.shape[0]:
            raise DataError(f"response length {z.shape[0]} does not match design rows {W.shape[0]}")
        if not np.all(np.isfinite(W)):
            r, c = np.argwhere(~np.isfinite(W))[0]
            raise DataError("non-finite design entry", row=int(r) + 1, column=int(c) + 1)
        if not np.all(np.isfinite(z)):
            r = int(np.argwhere(~np.isfinite(z))[0, 0])
            raise DataError("non-finite response entry", row=r + 1)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "z", z)

    @property
    def N(self) -> int:
        return self.W.shape[0]

    @property
    def p(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class LowRankFactor:
    """Active columns ``W_S`` with their prior scales ``D_S = diag(1/eta_S)``.

    The global precision is passed separately to the operations that use the
    factor, so ``scales`` holds the local variances only.
    """

    columns: np.ndarray
    scales: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        scales = np.asarray(self.scales, dtype=float).reshape(-1)
        idx = np.asarray(self.indices, dtype=np.intp).reshape(-1)
        if cols.ndim != 2 or cols.shape[1] != scales.shape[0] or idx.shape[0] != scales.shape[0]:
            raise ValueError(
                f"inconsistent factor shapes: columns {cols.shape}, scales {scales.shape}, "
                f"indices {idx.shape}"
            )
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0):
            raise ValueError("indices must be strictly increasing and non-negative")
        if not np.all(scales > 0) or not np.all(np.isfinite(scales)):
            raise ValueError("factor scales must be strictly positive and finite")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_data(cls, W: np.ndarray, scales: np.ndarray, indices) -> "LowRankFactor":
        indices = np.asarray(indices, dtype=np.intp)
        return cls(W[:, indices], np.asarray(scales)[indices], indices)

    @property
    def N(self) -> int:
        return self.columns.shape[0]

    @property
    def size(self) -> int:
        return self.columns.shape[1]


def _check_scales(scales: np.ndarray) -> np.ndarray:
    scales = np.asarray(scales, dtype=float).reshape(-1)
    if not np.all(scales > 0) or not np.all(np.isfinite(scales)):
        bad = scales[~((scales > 0) & np.isfinite(scales))][0]
        raise ValueError(f"scales must be strictly positive and finite (found {bad!r})")
    return scales


def weighted_gram(W: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Return ``W diag(d) W'``."""
    with np.errstate(over="ignore", invalid="ignore"):
        G = (W * d) @ W.T
    if not np.all(np.isfinite(G)):
        raise NumericalOverflowError(
            f"W diag(d) W' overflowed; largest scale magnitude is {np.max(np.abs(d)):.3e}"
        )
    return G


def form_M(data: ModelData | np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Return ``I_N + W diag(scales) W'``."""
    W = data.W if isinstance(data, ModelData) else np.asarray(data, dtype=float)
    scales = _check_scales(scales)
    M = weighted_gram(W, scales)
    M[np.diag_indices_from(M)] += 1.0
    return M


class CholeskyFactor:
    """Lower Cholesky factor of an SPD matrix with solve and log-determinant."""

    def __init__(self, M: np.ndarray):
        try:
            self._cf = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise MatrixNotSPDError(f"Cholesky failed on {M.shape[0]}x{M.shape[0]} matrix: {exc}") from exc
        if not np.all(np.isfinite(np.diag(self._cf[0]))):
            raise MatrixNotSPDError("Cholesky produced non-finite pivots")

    @cached_property
    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self._cf[0]))))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self._cf, rhs, check_finite=False)

    def quad(self, z: np.ndarray) -> float:
        """``z' M^{-1} z``."""
        return float(z @ self.solve(z))


def solve_M(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return CholeskyFactor(np.asarray(M, dtype=float)).solve(np.asarray(rhs, dtype=float))


def logdet_M(M: np.ndarray) -> float:
    return CholeskyFactor(np.asarray(M, dtype=float)).logdet


class _WoodburySolver:
    """Solves and log-determinant of ``M_xi`` through an ``s x s`` Cholesky factor.

    With ``B = W_S D_S^{1/2}`` and ``A = B'B``, the inner matrix is
    ``K = I_s + A/xi``. Then ``M^{-1} r = r - B K^{-1} B' r / xi`` (the
    Woodbury identity, equal to ``r - W_S (xi D_S^{-1} + W_S'W_S)^{-1} W_S' r``)
    and ``log|M| = log|K| = sum_k log(1 + s_k^2/xi)`` with ``s_k`` the singular
    values of ``B``. ``K`` has eigenvalues in ``[1, 1 + |A|/xi]``, so it is
    better conditioned than the unscaled inner matrix.
    """

    def __init__(self, system: "LowRankSystem", xi: float):
        K = system.scaled_gram / xi
        K[np.diag_indices_from(K)] += 1.0
        self._chol = CholeskyFactor(K)
        self._system = system
        self._xi = xi

    @property
    def logdet(self) -> float:
        return self._chol.logdet

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        B = self._system.scaled_columns
        return rhs - B @ self._chol.solve(B.T @ rhs) / self._xi

    def quad(self, z: np.ndarray) -> float:
        y = self._system.scaled_columns.T @ z
        return float(z @ z - y @ self._chol.solve(y) / self._xi)


class LowRankSystem:
    """``M_c = I + c^{-1} W_S D_S W_S'`` through the Woodbury identity.

    ``B = W_S D_S^{1/2}`` and ``B'B`` are computed once and shared by every
    ``c`` requested through :meth:`at`. The singular values of ``B``
    (:attr:`singular_values`) give the same determinant and are computed
    only on request.
    """

    route = "lowrank"

    def __init__(self, factor: LowRankFactor):
        self.factor = factor

    @cached_property
    def scaled_columns(self) -> np.ndarray:
        f = self.factor
        return f.columns * np.sqrt(f.scales)

    @cached_property
    def scaled_gram(self) -> np.ndarray:
        B = self.scaled_columns
        return B.T @ B

    @cached_property
    def singular_values(self) -> np.ndarray:
        B = self.scaled_columns
        try:
            return np.linalg.svd(B, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed on {B.shape[0]}x{B.shape[1]} matrix: {exc}") from exc

    def at(self, c: float) -> _WoodburySolver:
        return _WoodburySolver(self, c)


class DenseSystem:
    """``M_c = I + c^{-1} W diag(d) W'`` with one Gram product per instance."""

    route = "dense"

    def __init__(self, W: np.ndarray, d: np.ndarray):
        self.gram = weighted_gram(W, d)
        self._eye = np.eye(W.shape[0])

    def at(self, c: float) -> CholeskyFactor:
        M = self._eye + self.gram / c
        if not np.all(np.isfinite(M)):
            raise NumericalOverflowError(f"M overflowed at global precision {c:.3e}")
        return CholeskyFactor(M)


class _IdentitySolver:
    logdet = 0.0

    @staticmethod
    def solve(rhs: np.ndarray) -> np.ndarray:
        return rhs.copy()

    @staticmethod
    def quad(z: np.ndarray) -> float:
        return float(z @ z)


class IdentitySystem:
    """Empty active set: ``M_c = I`` for every ``c``."""

    route = "identity"

    def at(self, c: float) -> _IdentitySolver:
        return _IdentitySolver()


def woodbury_apply(factor: LowRankFactor, xi: float, rhs: np.ndarray) -> np.ndarray:
    """Apply ``(I + xi^{-1} W_S D_S W_S')^{-1}`` to ``rhs``.

    Computed as ``rhs - W_S (xi D_S^{-1} + W_S'W_S)^{-1} W_S' rhs``; only an
    ``s x s`` system is factorized.
    """
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi!r}")
    rhs = np.asarray(rhs, dtype=float)
    if factor.size == 0:
        return rhs.copy()
    return LowRankSystem(factor).at(xi).solve(rhs)


def logdet_lowrank(factor: LowRankFactor, xi: float) -> float:
    """``log|I + xi^{-1} W_S D_S W_S'|`` from the singular values of ``W_S D_S^{1/2}``."""
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi!r}")
    if factor.size == 0:
        return 0.0
    sv = LowRankSystem(factor).singular_values
    return float(np.sum(np.log1p(sv**2 / xi)))


def sample_structured_gaussian(
    W: np.ndarray,
    z: np.ndarray,
    scales: np.ndarray,
    sigma2: float,
    rng,
    solve: Callable[[np.ndarray], np.ndarray],
    active: np.ndarray | None = None,
    W_active: np.ndarray | None = None,
) -> np.ndarray:
    """Draw ``beta ~ N((W'W + G^{-1})^{-1} W'z, sigma2 (W'W + G^{-1})^{-1})``, ``G = diag(scales)``.

    Uses the O(N^2 p) construction: ``u ~ N(0, G)``, ``f ~ N(0, I_N)``,
    ``v = W u + f``, ``v* = solve(z/sigma - v)``, ``beta = sigma (u + G W' v*)``.
    ``rng`` is consumed as ``standard_normal(p)`` then ``standard_normal(N)``.

    With ``active`` given, the correction ``G W' v*`` is restricted to those
    columns (thresholded scales set to zero) while ``u`` still covers all
    ``p`` coordinates; ``solve`` must then apply the matching thresholded
    ``M^{-1}``.
    """
    N, p = W.shape
    sigma = np.sqrt(sigma2)
    u = np.sqrt(scales) * rng.standard_normal(p)
    f = rng.standard_normal(N)
    v = W @ u + f
    v_star = solve(z / sigma - v)
    if active is None:
        correction = scales * (W.T @ v_star)
    else:
        if W_active is None:
            W_active = W[:, active]
        correction = np.zeros(p)
        correction[active] = scales[active] * (W_active.T @ v_star)
    return sigma * (u + correction)
