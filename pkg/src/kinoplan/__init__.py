"""Bidirectional kinodynamic sampling-based motion planning."""

from .core import (
    AblationFlags,
    Edge,
    KinoplanError,
    Path,
    PlannerConfig,
    Scenario,
    SearchTree,
)
from .dynamics import SYSTEMS, get_system, rk4_propagate
from .planners import ALGORITHMS, PlannerRun, Result, run_planner, validate_path

__all__ = [
    "AblationFlags",
    "ALGORITHMS",
    "Edge",
    "KinoplanError",
    "Path",
    "PlannerConfig",
    "PlannerRun",
    "Result",
    "Scenario",
    "SearchTree",
    "SYSTEMS",
    "get_system",
    "rk4_propagate",
    "run_planner",
    "validate_path",
    "__version__",
]

__version__ = "0.1.0"
