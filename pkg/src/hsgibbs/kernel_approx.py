"""Thresholded approximate kernel.

Identical in structure to :mod:`hsgibbs.kernel_exact`, except that
``D = diag(1/eta)`` is replaced by ``D_delta``, which zeroes every local
variance whose scaled value ``xi_max^{-1} eta_j^{-1}`` does not exceed
``delta``. ``xi_max^{-1}`` is the larger of ``1/xi`` and ``1/xi*`` for the
current Metropolis proposal ``xi*``. The active set is built once per scan
inside the ``xi`` step and reused, with the accepted ``xi``, for the
``sigma2`` and ``beta`` updates.

When fewer than ``N`` columns survive, every solve and determinant goes
through the Woodbury identity and an SVD of ``W_S D_S^{1/2}``; otherwise
``W_S D_S W_S'`` is formed densely.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import MNIGParams
from .kernel_exact import ScanInfo, blocked_scan
from .linalg import (
    CholeskyFactor,
    DenseSystem,
    IdentitySystem,
    LowRankFactor,
    LowRankSystem,
    ModelData,
    form_M,
)
from .state import ChainState, HyperParams

__all__ = [
    "ActiveSet",
    "build_active_set",
    "scan_approx",
    "step_approx",
    "approx_conditional_law",
]

ROUTES = ("auto", "dense", "lowrank")


@dataclass(frozen=True)
class ActiveSet:
    """Indices ``S`` (0-based, increasing) that escape the threshold."""

    indices: np.ndarray
    threshold_used: float

    @property
    def size(self) -> int:
        return int(self.indices.size)


def build_active_set(eta: np.ndarray, xi: float, xi_star: float, delta: float) -> ActiveSet:
    """``S = {j : max(1/xi, 1/xi_star) / eta_j > delta}`` (strict inequality)."""
    inv_xi_max = max(1.0 / xi, 1.0 / xi_star)
    scaled = inv_xi_max * (1.0 / np.asarray(eta, dtype=float))
    return ActiveSet(np.flatnonzero(scaled > delta), inv_xi_max)


class _ThresholdedSystem:
    def __init__(self, inner, active: ActiveSet, full: bool, W_active: np.ndarray | None):
        self.inner = inner
        self.active = active.indices
        self.active_set = active
        self.full = full
        self.W_active = W_active
        self.route = inner.route

    def at(self, c: float):
        return self.inner.at(c)


def _make_system_factory(data: ModelData, eta: np.ndarray, d: np.ndarray, delta: float, route: str):
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}, got {route!r}")
    W, N, p = data.W, data.N, data.p

    def make_system(xi, xi_prop):
        act = build_active_set(eta, xi, xi_prop, delta)
        s = act.size
        if s == 0:
            return _ThresholdedSystem(IdentitySystem(), act, False, W[:, :0])
        use_lowrank = route == "lowrank" or (route == "auto" and s < N)
        if s == p and not use_lowrank:
            # D_delta = D: same arithmetic as the exact kernel
            return _ThresholdedSystem(DenseSystem(W, d), act, True, None)
        W_S = W[:, act.indices]
        if use_lowrank:
            inner = LowRankSystem(LowRankFactor(W_S, d[act.indices], act.indices))
        else:
            inner = DenseSystem(W_S, d[act.indices])
        return _ThresholdedSystem(inner, act, s == p, W_S)

    return make_system


def _route_info(system: _ThresholdedSystem):
    if system.full:
        return None, None
    return system.active, system.W_active


def scan_approx(
    state: ChainState, data: ModelData, hp: HyperParams, rng, route: str = "auto"
) -> tuple[ChainState, ScanInfo]:
    """One scan of the approximate kernel; ``info.active`` holds the active set.

    ``route="dense"`` disables the Woodbury path, ``"lowrank"`` forces it for
    any non-empty active set.
    """
    d = 1.0 / state.eta
    make_system = _make_system_factory(data, state.eta, d, hp.delta, route)
    return blocked_scan(state, data, hp, rng, make_system, d, _route_info)


def step_approx(state: ChainState, data: ModelData, hp: HyperParams, rng, route: str = "auto") -> ChainState:
    """Advance the approximate kernel by one scan."""
    return scan_approx(state, data, hp, rng, route)[0]


def approx_conditional_law(
    data: ModelData,
    xi: float,
    eta: np.ndarray,
    hp: HyperParams,
    delta: float | None = None,
    xi_star: float | None = None,
) -> MNIGParams:
    """MNIG law of ``(beta, sigma2)`` produced by the approximate ``sigma2``/``beta`` steps.

    ``beta | sigma2 ~ N(m, sigma2 Sigma)`` with ``m = G_d W' M_d^{-1} z`` and
    ``Sigma = cov(u - G_d W' M_d^{-1} v)`` where ``u ~ N(0, G)``,
    ``v = W u + f`` and ``G``/``G_d`` are the full and thresholded prior
    scales. ``sigma2 ~ IG((N + a0)/2, (z' M_d^{-1} z + b0)/2)``.

    Dense p x p algebra; meant for diagnostics, not for the sampling loop.
    """
    delta = hp.delta if delta is None else delta
    xi_star = xi if xi_star is None else xi_star
    W, z, N, p = data.W, data.z, data.N, data.p
    eta = np.asarray(eta, dtype=float)
    g = (1.0 / eta) / xi
    act = build_active_set(eta, xi, xi_star, delta)
    g_d = np.zeros(p)
    g_d[act.indices] = g[act.indices]

    M = form_M(W, g)
    if act.size:
        M_d = form_M(W[:, act.indices], g[act.indices])
    else:
        M_d = np.eye(N)
    chol_d = CholeskyFactor(M_d)
    B = chol_d.solve(W * g_d)  # M_d^{-1} W G_d
    WG = W * g
    cross = WG.T @ B
    Sigma = np.diag(g) - cross - cross.T + B.T @ (M @ B)
    Sigma = 0.5 * (Sigma + Sigma.T)
    m = B.T @ z
    return MNIGParams(
        m=m,
        Sigma=Sigma,
        a=0.5 * (N + hp.a0),
        b=0.5 * (chol_d.quad(z) + hp.b0),
    )
