"""Synthetic data with a decreasing sequence of 23 signals."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..linalg import ModelData
from ..rng import make_rng

__all__ = ["N_SIGNALS", "DESIGN_KINDS", "SimulationConfig", "true_beta", "simulate_design", "simulate_data"]

N_SIGNALS = 23
DESIGN_KINDS = ("independent", "ar1")


@dataclass(frozen=True)
class SimulationConfig:
    """Dimensions and design of a simulated data set.

    ``design_kind="ar1"`` draws rows from ``N(0, Sigma)`` with
    ``Sigma_ij = phi**|i - j|`` (unit diagonal); ``"independent"`` uses
    ``Sigma = I``. The response noise has sd ``residual_sd``.
    """

    N: int
    p: int
    design_kind: str = "independent"
    phi: float = 0.9
    residual_sd: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.p < 1:
            raise ConfigError(f"N and p must be positive, got N={self.N}, p={self.p}")
        if self.design_kind not in DESIGN_KINDS:
            raise ConfigError(f"design_kind must be one of {DESIGN_KINDS}, got {self.design_kind!r}")
        if not -1.0 < self.phi < 1.0:
            raise ConfigError(f"phi must lie in (-1, 1), got {self.phi}")
        if not self.residual_sd > 0:
            raise ConfigError(f"residual_sd must be positive, got {self.residual_sd}")


def true_beta(p: int) -> np.ndarray:
    """``beta_j = 2**(-(j/4 - 9/4))`` for ``j = 1..23`` (1-based), zero afterwards."""
    beta = np.zeros(p)
    k = min(p, N_SIGNALS)
    j = np.arange(1, k + 1)
    beta[:k] = 2.0 ** (-(j / 4.0 - 9.0 / 4.0))
    return beta


def simulate_design(N: int, p: int, design_kind: str, phi: float, rng) -> np.ndarray:
    """Rows iid ``N(0, Sigma)``; the AR(1) design is built column by column."""
    e = rng.standard_normal((N, p))
    if design_kind == "independent":
        return e
    # stationary AR(1) across columns: unit marginal variance, corr phi**|i-j|
    W = np.empty_like(e)
    W[:, 0] = e[:, 0]
    c = math.sqrt(1.0 - phi * phi)
    for j in range(1, p):
        W[:, j] = phi * W[:, j - 1] + c * e[:, j]
    return W


def simulate_data(cfg: SimulationConfig, rng=None) -> tuple[ModelData, np.ndarray]:
    """Draw ``(W, z)`` and return it with the true coefficient vector.

    ``rng`` defaults to ``make_rng(cfg.seed)``. The design is drawn first,
    then the noise.
    """
    if cfg.p <= N_SIGNALS:
        warnings.warn(
            f"p={cfg.p} keeps only {min(cfg.p, N_SIGNALS)} of the {N_SIGNALS} signals",
            stacklevel=2,
        )
    rng = make_rng(cfg.seed) if rng is None else rng
    beta = true_beta(cfg.p)
    W = simulate_design(cfg.N, cfg.p, cfg.design_kind, cfg.phi, rng)
    z = W @ beta + cfg.residual_sd * rng.standard_normal(cfg.N)
    return ModelData(W, z), beta
