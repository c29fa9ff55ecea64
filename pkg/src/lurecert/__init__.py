"""Contractivity certificates for Lur'e systems.

Verifies and synthesizes contraction certificates for linear plants in
feedback with Lipschitz, incrementally sector-bounded, or monotone static
nonlinearities, in both continuous and discrete time.  Certificates are
matrix-inequality feasibility problems solved by an embedded barrier
method and validated empirically by trajectory simulation.
"""

__version__ = "0.1.0"

from .model import (
    CONTINUOUS,
    DISCRETE,
    ClosedLoop,
    Gains,
    Lipschitz,
    LureSystem,
    Monotone,
    NonlinearFn,
    SectorBounded,
    close_loop,
    recover_gains,
)
from .catalog import LmiSpec, auto_tag, lower_monotone
from .solver import FeasibilityProblem, FeasibilityResult, SolveOptions, audit, solve
from .simulate import certify_empirically, rate_estimate, simulate_ct, simulate_dt

__all__ = [
    "CONTINUOUS", "DISCRETE", "ClosedLoop", "Gains", "Lipschitz",
    "LureSystem", "Monotone", "NonlinearFn", "SectorBounded", "close_loop",
    "recover_gains", "LmiSpec", "auto_tag", "lower_monotone",
    "FeasibilityProblem", "FeasibilityResult", "SolveOptions", "audit",
    "solve", "certify_empirically", "rate_estimate", "simulate_ct",
    "simulate_dt",
]
