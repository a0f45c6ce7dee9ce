"""
Hybrid Poisson-session / on-off teletraffic lab.

Synthesizes traces where heavy-tailed sessions carry heavy-tailed on-off
sources, computes the limiting Hurst exponents and variance constants, and
estimates H with a wavelet logscale diagram.
"""

from __future__ import annotations

from .config_flow import build_experiment, load_config_file, preset
from .const import VERSION
from .coordinator import ReproductionCoordinator, run
from .data import ExperimentConfig, ReplicateResult, RunReport
from .heavytail import ExponentialDist, ParetoDist, pareto_from_mean
from .onoff import OnOffParams, r_tail_asymptote, solve_pi11
from .scaling import classify, hurst_formulas, variance_profile
from .sessions import GenerationMode, SessionParams, busy_servers, generate_sessions
from .wavelet import dwt_logscale, estimate_hurst, fgn_generate
from .workload import Trace, synthesize

__version__ = VERSION

__all__ = [
    "ExperimentConfig",
    "ExponentialDist",
    "GenerationMode",
    "OnOffParams",
    "ParetoDist",
    "ReplicateResult",
    "ReproductionCoordinator",
    "RunReport",
    "SessionParams",
    "Trace",
    "build_experiment",
    "busy_servers",
    "classify",
    "dwt_logscale",
    "estimate_hurst",
    "fgn_generate",
    "generate_sessions",
    "hurst_formulas",
    "load_config_file",
    "pareto_from_mean",
    "preset",
    "r_tail_asymptote",
    "run",
    "solve_pi11",
    "synthesize",
    "variance_profile",
]
