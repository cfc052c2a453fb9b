"""Chain state and hyperparameters."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError

SIGMA_UPDATE_MODES = ("gibbs", "mh")


@dataclass(frozen=True)
class ChainState:
    """One point ``(beta, sigma2, xi, eta)`` of the chain.

    ``xi`` is the global precision and ``eta`` the local precisions; the
    usual horseshoe scales are ``tau = xi**-0.5`` and ``lambda_j = eta_j**-0.5``.
    """

    beta: np.ndarray
    sigma2: float
    xi: float
    eta: np.ndarray

    @classmethod
    def initial(cls, p: int) -> "ChainState":
        return cls(beta=np.zeros(p), sigma2=1.0, xi=1.0, eta=np.ones(p))

    @property
    def tau(self) -> float:
        return self.xi**-0.5

    @property
    def lam(self) -> np.ndarray:
        return self.eta**-0.5

    def replace(self, **changes) -> "ChainState":
        return replace(self, **changes)

    def validate(self) -> None:
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2!r}")
        if not (np.isfinite(self.xi) and self.xi > 0):
            raise ValueError(f"xi must be positive and finite, got {self.xi!r}")
        if not (np.all(np.isfinite(self.eta)) and np.all(self.eta > 0)):
            raise ValueError("eta must be positive and finite")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("beta must be finite")


@dataclass(frozen=True)
class HyperParams:
    """Prior constants and tuning knobs.

    ``sigma2 ~ InvGamma(a0/2, b0/2)``. ``prop_sd_xi`` is the random-walk sd on
    ``log xi`` and ``prop_sd_sigma`` the one on ``log(1/sigma2)`` (used when
    ``sigma_update == "mh"``). ``delta`` is the threshold of the approximate
    kernel and ``floor`` the truncation value of the legacy kernel (``None``
    disables truncation).
    """

    a0: float = 1.0
    b0: float = 1.0
    prop_sd_xi: float = 0.8
    prop_sd_sigma: float = 0.1
    sigma_update: str = "gibbs"
    delta: float = 1e-4
    floor: float | None = 1e-10

    def __post_init__(self):
        if not (self.a0 > 0 and self.b0 > 0):
            raise ConfigError(f"a0 and b0 must be positive, got {self.a0}, {self.b0}")
        if self.prop_sd_xi < 0 or self.prop_sd_sigma < 0:
            raise ConfigError("proposal standard deviations must be non-negative")
        if self.sigma_update not in SIGMA_UPDATE_MODES:
            raise ConfigError(f"sigma_update must be one of {SIGMA_UPDATE_MODES}, got {self.sigma_update!r}")
        if not self.delta >= 0:
            raise ConfigError(f"delta must be non-negative, got {self.delta!r}")
        if self.floor is not None and not self.floor > 0:
            raise ConfigError(f"floor must be positive or None, got {self.floor!r}")

    def replace(self, **changes) -> "HyperParams":
        return replace(self, **changes)
