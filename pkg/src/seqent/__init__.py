"""Entanglement produced by sequential coherent measurements.

Simulates measurement devices that copy outcomes coherently through
controlled-shift unitaries, and checks the entropic bounds on the resulting
system-device entanglement, decoupling and coherent teleportation.
"""

from .bounds import BoundReport, PreconditionError
from .circuit import MeasurementStep, Scenario, Trajectory, scenario_from_bases, simulate
from .entropy import conditional_vn, hmax_conditional, hmin_conditional, relative_entropy, von_neumann
from .linalg import DimensionCapError, DomainError, ShapeError
from .qstate import Basis, DensityState, make_basis, overlap_c
from .sdp import ConvergenceError, SdpResult, solve_hmin_sdp

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "BoundReport",
    "ConvergenceError",
    "DensityState",
    "DimensionCapError",
    "DomainError",
    "MeasurementStep",
    "PreconditionError",
    "Scenario",
    "SdpResult",
    "ShapeError",
    "Trajectory",
    "conditional_vn",
    "hmax_conditional",
    "hmin_conditional",
    "make_basis",
    "overlap_c",
    "relative_entropy",
    "scenario_from_bases",
    "simulate",
    "solve_hmin_sdp",
    "von_neumann",
]
