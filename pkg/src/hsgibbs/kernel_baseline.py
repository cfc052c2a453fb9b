"""Legacy ("old") Gibbs kernel, kept as a comparator.

Update order per scan: ``beta | sigma2, xi, eta`` (structured Gaussian,
dense), ``sigma2 | beta, xi, eta`` (inverse-gamma, conditioning on
``beta``), ``xi | beta, sigma2, eta`` by slice sampling, ``eta`` by the same
slice update as the exact kernel. After each draw the truncation floor is
applied: ``sigma2``, ``1/xi`` and ``1/eta_j`` below ``hp.floor`` are replaced
by the floor. ``hp.floor = None`` turns truncation off.

The slice update for ``xi`` mirrors the one for ``eta``: with
``u ~ Unif(0, 1/(1 + xi))`` the new ``xi`` is a ``Gamma((p + 1)/2, rate=m)``
draw truncated to ``(0, (1 - u)/u)``, ``m = sum_j eta_j beta_j^2 / (2 sigma2)``.

This kernel does not target the posterior reliably; it exists to reproduce
the failure modes of the older approach. Reports label its output as such.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .kernel_exact import _eta_update
from .linalg import DenseSystem, ModelData, sample_structured_gaussian
from .state import ChainState, HyperParams

__all__ = ["COMPARATOR_LABEL", "truncated_gamma", "apply_floor", "step_old"]

COMPARATOR_LABEL = "comparator (legacy kernel, not a supported inference path)"

# use inverse-CDF sampling while the truncated mass stays above this
_INVERSION_MIN_MASS = 1e-100


def truncated_gamma(shape: float, rate: float, upper: float, rng) -> float:
    """Draw from ``Gamma(shape, rate)`` restricted to ``(0, upper)``.

    Inverse-CDF through the regularized incomplete gamma function while the
    retained mass is not negligible. Deep in the left tail (where the
    density is increasing and log-concave on ``(0, upper)``) rejection from
    the tangent exponential envelope at ``upper`` is used instead. For
    ``rate * upper`` effectively zero the law is ``upper * U**(1/shape)``.
    """
    x_up = rate * upper
    if x_up < 1e-300 or rate == 0.0:
        return upper * rng.random() ** (1.0 / shape)
    if math.isinf(upper):
        return rng.standard_gamma(shape) / rate
    mass = special.gammainc(shape, x_up)
    if mass >= _INVERSION_MIN_MASS:
        v = 1.0 - rng.random()
        x = special.gammaincinv(shape, v * mass) / rate
        return min(x, upper)
    # log g(x) = (shape - 1) log x - rate x, tangent slope at upper is positive here
    slope = (shape - 1.0) / upper - rate
    log_g_up = (shape - 1.0) * math.log(upper) - rate * upper
    while True:
        # exponential with rate `slope` reflected at `upper`, truncated to (0, upper)
        e = -math.log1p(-(1.0 - rng.random()) * -math.expm1(-slope * upper)) / slope
        x = upper - e
        if x <= 0:
            continue
        log_accept = (shape - 1.0) * math.log(x) - rate * x - (log_g_up - slope * e)
        if math.log(1.0 - rng.random()) <= log_accept:
            return x


def apply_floor(value, floor: float | None):
    """Replace values below ``floor`` by ``floor`` (no-op for ``floor=None``)."""
    if floor is None:
        return value
    return np.maximum(value, floor) if isinstance(value, np.ndarray) else max(value, floor)


def step_old(state: ChainState, data: ModelData, hp: HyperParams, rng) -> ChainState:
    """Advance the legacy kernel by one scan."""
    W, z, N, p = data.W, data.z, data.N, data.p
    xi, eta, sigma2 = state.xi, state.eta, state.sigma2
    d = 1.0 / eta

    solver = DenseSystem(W, d).at(xi)
    beta = sample_structured_gaussian(W, z, d / xi, sigma2, rng, solver.solve)

    resid = z - W @ beta
    shape = 0.5 * (N + p + hp.a0)
    rate = 0.5 * (float(resid @ resid) + xi * float(eta @ beta**2) + hp.b0)
    sigma2 = apply_floor(rate / rng.standard_gamma(shape), hp.floor)

    m = float(eta @ beta**2) / (2.0 * sigma2)
    u = (1.0 - rng.random()) / (1.0 + xi)
    xi = truncated_gamma(0.5 * (p + 1), m, (1.0 - u) / u, rng)
    if hp.floor is not None:
        xi = 1.0 / apply_floor(1.0 / xi, hp.floor)

    new = ChainState(beta=beta, sigma2=sigma2, xi=xi, eta=eta)
    eta = _eta_update(new, rng)
    if hp.floor is not None:
        eta = 1.0 / apply_floor(1.0 / eta, hp.floor)
    return new.replace(eta=eta)
