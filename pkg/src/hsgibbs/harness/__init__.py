"""Simulation, data I/O, chain orchestration, summaries and the CLI."""
from .dataio import load_data, read_binary, write_binary
from .runner import RunConfig, SampleStore, run_chain
from .scaling import scaling_records, standardized_variance
from .simulate import SimulationConfig, simulate_data, true_beta
from .summary import Summary, summarize

__all__ = [
    "RunConfig",
    "SampleStore",
    "SimulationConfig",
    "Summary",
    "load_data",
    "read_binary",
    "run_chain",
    "scaling_records",
    "simulate_data",
    "standardized_variance",
    "summarize",
    "true_beta",
    "write_binary",
]
