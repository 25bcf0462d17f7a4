"""Built-in 0/1 branch-and-bound solver and its exhaustive oracle."""

from .kernel import KERNEL
from .oracle import OracleTooLarge, oracle_enumerate, oracle_optimum
from .search import SolveOutcome, SolverConfig, SolveStats, propagate, solve, validate_model

__all__ = [
    "KERNEL",
    "OracleTooLarge",
    "SolveOutcome",
    "SolveStats",
    "SolverConfig",
    "oracle_enumerate",
    "oracle_optimum",
    "propagate",
    "solve",
    "validate_model",
]
