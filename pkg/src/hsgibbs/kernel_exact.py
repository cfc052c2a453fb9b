"""Blocked exact Gibbs kernel for horseshoe regression.

One scan updates ``(xi, sigma2, beta) | eta, z`` jointly, as
``xi | eta, z`` (random-walk Metropolis on ``log xi`` with ``beta`` and
``sigma2`` integrated out), then ``sigma2 | xi, eta, z``, then
``beta | sigma2, xi, eta, z``, and finally ``eta | xi, sigma2, beta`` by
slice sampling. The matrix ``M_xi = I + xi^{-1} W D W'`` is built once per
scan and its factorization at the accepted ``xi`` is reused by the
``sigma2`` and ``beta`` updates.

Random numbers are drawn from the single generator passed in, in this order:
``standard_normal()`` and ``random()`` for the ``xi`` proposal;
``standard_gamma()`` (gibbs) or ``standard_normal()``, ``random()`` (mh) for
``sigma2``; ``standard_normal(p)``, ``standard_normal(N)`` for ``beta``;
``random(p)``, ``random(p)`` for ``eta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diagnostics import MNIGParams
from .linalg import CholeskyFactor, DenseSystem, ModelData, form_M, sample_structured_gaussian
from .state import ChainState, HyperParams

__all__ = [
    "ScanInfo",
    "log_prior_xi",
    "log_marginal_likelihood_xi",
    "mh_step_xi",
    "sample_sigma2",
    "eta_slice_draw",
    "sample_eta",
    "scan_exact",
    "step_exact",
    "exact_conditional_law",
]

# below this value of m_j * r_j the truncated exponential is uniform on (0, r_j)
_ETA_SERIES_CUTOFF = 1e-300


@dataclass(frozen=True)
class ScanInfo:
    """Bookkeeping from one scan."""

    xi_accepted: bool
    sigma_accepted: bool | None = None
    active: np.ndarray | None = None
    route: str = "dense"

    @property
    def active_size(self) -> int | None:
        return None if self.active is None else int(self.active.size)


def log_prior_xi(xi: float) -> float:
    """Unnormalized log density of ``xi`` induced by a half-Cauchy on ``xi**-0.5``."""
    return -0.5 * math.log(xi) - math.log1p(xi)


def _log_lik(solver, z: np.ndarray, N: int, hp: HyperParams) -> float:
    return -0.5 * solver.logdet - 0.5 * (N + hp.a0) * math.log(0.5 * hp.b0 + 0.5 * solver.quad(z))


def log_marginal_likelihood_xi(
    data: ModelData, eta: np.ndarray, xi: float, hp: HyperParams, solver=None
) -> float:
    """``log L(z | xi, eta)`` with ``beta`` and ``sigma2`` integrated out.

    ``solver`` may be any object exposing ``logdet`` and ``quad(z)`` for
    ``M_xi``; by default the dense Cholesky route is used.
    """
    if solver is None:
        solver = DenseSystem(data.W, 1.0 / np.asarray(eta)).at(xi)
    return _log_lik(solver, data.z, data.N, hp)


def _xi_update(
    xi: float,
    z: np.ndarray,
    N: int,
    hp: HyperParams,
    rng,
    make_system: Callable[[float, float], object],
):
    xi_prop = xi * math.exp(hp.prop_sd_xi * rng.standard_normal())
    u = rng.random()
    log_u = math.log(u) if u > 0 else -math.inf
    system = make_system(xi, xi_prop)
    cur = system.at(xi)
    prop = cur if xi_prop == xi else system.at(xi_prop)
    log_q = (
        (_log_lik(prop, z, N, hp) - _log_lik(cur, z, N, hp))
        + (log_prior_xi(xi_prop) - log_prior_xi(xi))
        + (math.log(xi_prop) - math.log(xi))
    )
    if log_u < log_q:
        return xi_prop, True, prop, system
    return xi, False, cur, system


def mh_step_xi(state: ChainState, data: ModelData, hp: HyperParams, rng) -> tuple[ChainState, bool]:
    """Metropolis update of ``log xi`` targeting ``xi | eta, z``."""
    d = 1.0 / state.eta
    xi, accepted, _, _ = _xi_update(
        state.xi, data.z, data.N, hp, rng, lambda a, b: DenseSystem(data.W, d)
    )
    return state.replace(xi=xi), accepted


def _sigma2_update(sigma2: float, quad: float, N: int, hp: HyperParams, rng) -> tuple[float, bool | None]:
    shape = 0.5 * (N + hp.a0)
    rate = 0.5 * (quad + hp.b0)
    if hp.sigma_update == "gibbs":
        return rate / rng.standard_gamma(shape), None
    # random walk on log(1/sigma2); target precision ~ Gamma(shape, rate)
    step = hp.prop_sd_sigma * rng.standard_normal()
    u = rng.random()
    prop = sigma2 * math.exp(-step)
    log_q = shape * step - rate * (1.0 / prop - 1.0 / sigma2)
    if (math.log(u) if u > 0 else -math.inf) < log_q:
        return prop, True
    return sigma2, False


def sample_sigma2(state: ChainState, data: ModelData, hp: HyperParams, rng, quad: float | None = None) -> float:
    """Draw ``sigma2 | xi, eta, z`` from ``InvGamma((N+a0)/2, (z'M^{-1}z + b0)/2)``.

    In ``mh`` mode a single random-walk Metropolis step on ``log(1/sigma2)``
    targeting the same law is taken instead. ``quad`` is ``z' M_xi^{-1} z``;
    it is computed densely when omitted.
    """
    if quad is None:
        quad = DenseSystem(data.W, 1.0 / state.eta).at(state.xi).quad(data.z)
    return _sigma2_update(state.sigma2, quad, data.N, hp, rng)[0]


def eta_slice_draw(u: np.ndarray, m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw from ``Exp(rate=m)`` truncated to ``(0, r)``, ``r = (1-u)/u``.

    ``u`` is the slice level and ``v`` the uniform driving the inversion.
    ``-log(1 - (1 - e^{-m r}) v) / m`` is evaluated with ``expm1``/``log1p``;
    the ``m r -> 0`` limit ``r v`` is used below a cutoff.
    """
    u, m, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(m, float), np.asarray(v, float))
    r = (1.0 - u) / u
    mr = m * r
    out = r * v
    big = mr >= _ETA_SERIES_CUTOFF
    if np.any(big):
        a = -np.expm1(-mr[big])
        q = a * v[big]
        # -log1p(-q)/m = r v (a / (m r)) (1 + q/2 + ...): avoids underflow of q
        series = r[big] * v[big] * (a / mr[big]) * (1.0 + 0.5 * q)
        with np.errstate(divide="ignore"):
            closed = -np.log1p(-q) / m[big]
        out[big] = np.where(q < 1e-8, series, closed)
    return out


def _eta_update(state: ChainState, rng) -> np.ndarray:
    eta = state.eta
    p = eta.shape[0]
    u = (1.0 - rng.random(p)) / (1.0 + eta)
    v = 1.0 - rng.random(p)
    m = state.beta**2 * state.xi / (2.0 * state.sigma2)
    return eta_slice_draw(u, m, v)


def sample_eta(state: ChainState, hp: HyperParams | None, rng) -> np.ndarray:
    """Slice-sampling update of the local precisions given ``beta, sigma2, xi``."""
    return _eta_update(state, rng)


def _dense_full(data: ModelData, eta: np.ndarray):
    d = 1.0 / eta

    def make_system(xi, xi_prop):
        return DenseSystem(data.W, d)

    return d, make_system


def blocked_scan(
    state: ChainState,
    data: ModelData,
    hp: HyperParams,
    rng,
    make_system: Callable[[float, float], object],
    d: np.ndarray,
    route_info: Callable[[object], tuple[np.ndarray | None, np.ndarray | None]] | None = None,
) -> tuple[ChainState, ScanInfo]:
    """One blocked scan with a pluggable ``M`` constructor.

    ``make_system(xi, xi_prop)`` returns an object whose ``at(c)`` gives the
    solver for ``M_c``. ``route_info(system)`` returns the active indices and
    the matching columns of ``W`` (``(None, None)`` for the full matrix).
    """
    W, z, N = data.W, data.z, data.N
    xi, xi_acc, solver, system = _xi_update(state.xi, z, N, hp, rng, make_system)
    sigma2, sig_acc = _sigma2_update(state.sigma2, solver.quad(z), N, hp, rng)
    active, W_active = route_info(system) if route_info is not None else (None, None)
    beta = sample_structured_gaussian(W, z, d / xi, sigma2, rng, solver.solve, active, W_active)
    new = ChainState(beta=beta, sigma2=sigma2, xi=xi, eta=state.eta)
    eta = _eta_update(new, rng)
    info = ScanInfo(
        xi_accepted=xi_acc,
        sigma_accepted=sig_acc,
        active=getattr(system, "active", None),
        route=system.route,
    )
    return new.replace(eta=eta), info


def scan_exact(state: ChainState, data: ModelData, hp: HyperParams, rng) -> tuple[ChainState, ScanInfo]:
    d, make_system = _dense_full(data, state.eta)
    return blocked_scan(state, data, hp, rng, make_system, d)


def step_exact(state: ChainState, data: ModelData, hp: HyperParams, rng) -> ChainState:
    """Advance the exact blocked kernel by one scan."""
    return scan_exact(state, data, hp, rng)[0]


def exact_conditional_law(data: ModelData, xi: float, eta: np.ndarray, hp: HyperParams) -> MNIGParams:
    """MNIG full conditional of ``(beta, sigma2)`` given ``(xi, eta, z)``.

    ``m = G W' M^{-1} z``, ``Sigma = G - G W' M^{-1} W G`` with
    ``G = diag(1/(xi eta))``, shape ``(N + a0)/2`` and rate
    ``(z' M^{-1} z + b0)/2``.
    """
    W, z = data.W, data.z
    g = (1.0 / np.asarray(eta, dtype=float)) / xi
    chol = CholeskyFactor(form_M(W, g))
    WG = W * g
    B = chol.solve(WG)
    Sigma = np.diag(g) - WG.T @ B
    return MNIGParams(
        m=B.T @ z,
        Sigma=0.5 * (Sigma + Sigma.T),
        a=0.5 * (data.N + hp.a0),
        b=0.5 * (chol.quad(z) + hp.b0),
    )
