"""Random number generation.

Every run uses one counter-based Philox generator from numpy, seeded by an
integer. All kernels draw from it sequentially in a documented order, so a
seed, a configuration and a data set fix every number a run produces.
"""
from __future__ import annotations

import numpy as np

RNG_NAME = "numpy.random.Philox"
RNG_VERSION = f"numpy-{np.__version__}"


def make_rng(seed: int) -> np.random.Generator:
    """Philox-backed generator for ``seed`` (a non-negative integer)."""
    return np.random.Generator(np.random.Philox(int(seed)))
