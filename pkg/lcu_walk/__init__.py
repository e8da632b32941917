"""
LCU Walk Simulator - dense classical simulator and verifier for
Hamiltonian simulation by quantum walks and linear combinations of unitaries.

Every operator of the algorithm (isometry, swap, walk step, select,
block encoding, amplitude amplification) is built explicitly and the
segmented evolution is certified against the exact matrix exponential.
"""

__version__ = "0.1.0"

from .bessel import CoefficientSet, choose_k, lcu_coefficients, truncation_bound
from .errors import LcuWalkError
from .hamiltonian import (
    ParitySpec,
    SparseHamiltonian,
    make_blown_up_parity,
    make_parity_path,
    make_random_sparse,
)
from .lcu import LcuAssembly
from .simulator import SegmentPlan, SimulationReport, plan_segments, run, simulate
from .walk import WalkSystem, build_walk_system

__all__ = [
    "CoefficientSet",
    "LcuAssembly",
    "LcuWalkError",
    "ParitySpec",
    "SegmentPlan",
    "SimulationReport",
    "SparseHamiltonian",
    "WalkSystem",
    "build_walk_system",
    "choose_k",
    "lcu_coefficients",
    "make_blown_up_parity",
    "make_parity_path",
    "make_random_sparse",
    "plan_segments",
    "run",
    "simulate",
    "truncation_bound",
]
