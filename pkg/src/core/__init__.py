"""Core device model, problem definitions and profiling."""

from .device import DeviceConfig, DeviceModel, ProfileSample
from .errors import (
    BudgetExhaustedError,
    CalibrationError,
    ConfigError,
    EdgeTuneError,
    InsufficientDataError,
    InvalidModeError,
    TraceError,
)
from .oracle import GroundTruth, optimal_oracle, recheck
from .pareto import ParetoFront, ParetoPoint, build_front, hypervolume
from .power_mode import DIMENSIONS, PowerMode, PowerModeGrid
from .problem import Assessment, ProblemConfig, Solution, Variant, assess
from .profiler import ProfileHistory, ProfilingSession
from .workload import PRESETS, WorkloadSpec, get_preset

__all__ = [
    "DeviceConfig",
    "DeviceModel",
    "ProfileSample",
    "EdgeTuneError",
    "InvalidModeError",
    "BudgetExhaustedError",
    "CalibrationError",
    "InsufficientDataError",
    "TraceError",
    "ConfigError",
    "GroundTruth",
    "optimal_oracle",
    "recheck",
    "ParetoFront",
    "ParetoPoint",
    "build_front",
    "hypervolume",
    "DIMENSIONS",
    "PowerMode",
    "PowerModeGrid",
    "Assessment",
    "ProblemConfig",
    "Solution",
    "Variant",
    "assess",
    "ProfileHistory",
    "ProfilingSession",
    "PRESETS",
    "WorkloadSpec",
    "get_preset",
]
