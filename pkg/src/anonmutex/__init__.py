"""Symmetric deadlock-free mutual exclusion over anonymous registers:
step-machine simulator, trace checkers, exhaustive explorer and the
lock-step ring construction."""

from .executor import RunConfig, SchedulerSpec, lock_step_schedule, run
from .kernel import NATIVE_AVAILABLE
from .numtheory import RMW, RW, FeasibilityQuery, is_feasible, min_feasible_m
from .verifier import (check_deadlock_freedom_bounded, check_entry_invariant, check_mutual_exclusion,
                       check_ownership, check_snapshot_linearizability, check_trace, explore, impossibility_demo)

__version__ = "0.1.0"

__all__ = [
    "RW", "RMW", "FeasibilityQuery", "is_feasible", "min_feasible_m",
    "RunConfig", "SchedulerSpec", "lock_step_schedule", "run",
    "check_mutual_exclusion", "check_entry_invariant", "check_ownership", "check_snapshot_linearizability",
    "check_trace", "check_deadlock_freedom_bounded", "explore", "impossibility_demo",
    "NATIVE_AVAILABLE",
]
