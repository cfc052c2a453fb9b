"""Blocked Gibbs samplers for Bayesian linear regression under the horseshoe prior.

Three kernels share one state type and one linear-algebra layer:

* :func:`step_exact` -- blocked exact kernel,
* :func:`step_approx` -- thresholded approximate kernel with low-rank algebra,
* :func:`step_old` -- legacy unblocked kernel with truncation floors (comparator).

:mod:`hsgibbs.diagnostics` holds the MCMC and analytical accuracy tools and
:mod:`hsgibbs.harness` the simulation, I/O, run orchestration and CLI.
"""
from .errors import (
    ChainError,
    ConfigError,
    DataError,
    DiagnosticsError,
    HorseshoeError,
    MatrixNotSPDError,
    NumericalError,
    NumericalOverflowError,
    OutOfScopeError,
    RankDeficiencyError,
)
from .kernel_approx import ActiveSet, approx_conditional_law, build_active_set, scan_approx, step_approx
from .kernel_baseline import step_old, truncated_gamma
from .kernel_exact import (
    exact_conditional_law,
    log_marginal_likelihood_xi,
    mh_step_xi,
    sample_eta,
    sample_sigma2,
    scan_exact,
    step_exact,
)
from .linalg import (
    LowRankFactor,
    ModelData,
    form_M,
    logdet_lowrank,
    logdet_M,
    sample_structured_gaussian,
    solve_M,
    woodbury_apply,
)
from .rng import make_rng
from .state import ChainState, HyperParams

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "ChainError",
    "ChainState",
    "ConfigError",
    "DataError",
    "DiagnosticsError",
    "HorseshoeError",
    "HyperParams",
    "LowRankFactor",
    "MatrixNotSPDError",
    "ModelData",
    "NumericalError",
    "NumericalOverflowError",
    "OutOfScopeError",
    "RankDeficiencyError",
    "approx_conditional_law",
    "build_active_set",
    "exact_conditional_law",
    "form_M",
    "log_marginal_likelihood_xi",
    "logdet_M",
    "logdet_lowrank",
    "make_rng",
    "mh_step_xi",
    "sample_eta",
    "sample_sigma2",
    "sample_structured_gaussian",
    "scan_approx",
    "scan_exact",
    "solve_M",
    "step_approx",
    "step_exact",
    "step_old",
    "truncated_gamma",
    "woodbury_apply",
]
