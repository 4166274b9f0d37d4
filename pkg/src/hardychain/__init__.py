"""Bell-type operator chains: classical bounds, quantum spectra and Hardy-type paradoxes."""

from __future__ import annotations

from .bell import build_X_operator, build_Xij_operator, member_operator, spectrum_report
from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    HardyChainError,
    InvalidMemberError,
    ResourceLimitError,
    SingularityError,
    ValidationError,
)
from .hardy import HardyVariant, OptimizerConfig, check_hardy, maximize_violation
from .lhv import Assignment, ChainMember, lhv_bounds_bruteforce
from .quantum import MeasurementFrame, StateVector

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ChainMember",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "HardyChainError",
    "HardyVariant",
    "InvalidMemberError",
    "MeasurementFrame",
    "OptimizerConfig",
    "ResourceLimitError",
    "SingularityError",
    "StateVector",
    "ValidationError",
    "build_X_operator",
    "build_Xij_operator",
    "check_hardy",
    "lhv_bounds_bruteforce",
    "maximize_violation",
    "member_operator",
    "spectrum_report",
]
