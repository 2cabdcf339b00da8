"""Shared vocabulary for the per-process step machines."""

import enum

from .memory import BOT


class Outcome(enum.Enum):
    BUSY = "busy"
    ENTERED = "entered_cs"
    WITHDRAWN = "withdrawn"
    EXITING = "exiting"
    RELEASED = "released"


def count_equal(values, target) -> int:
    return sum(1 for v in values if v == target)


def distinct_values(values) -> list:
    """Distinct entries using equality only (identities are not hashable)."""
    seen: list = []
    for v in values:
        if not any(v == s for s in seen):
            seen.append(v)
    return seen


def max_multiplicity(values) -> int:
    """Largest number of times one non-BOT value occurs."""
    best = 0
    for v in distinct_values(values):
        if v is not BOT:
            best = max(best, count_equal(values, v))
    return best
