"""Feasibility of anonymous-memory sizes for symmetric mutual exclusion.

A memory of ``m`` anonymous registers admits a symmetric deadlock-free lock
for ``n`` processes iff ``m`` is coprime to every ``l`` in ``2..n``. The
read/write model additionally excludes ``m == 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

RW = "rw"
RMW = "rmw"
MODELS = (RW, RMW)


@dataclass(frozen=True)
class FeasibilityQuery:
    n: int
    m: int
    model: str = RW

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")


def gcd(a: int, b: int) -> int:
    if a < 1 or b < 1:
        raise ValueError("gcd is defined here for positive integers only")
    return math.gcd(a, b)


def blocking_divisor(n: int, m: int) -> int | None:
    """Smallest ``l`` in ``2..n`` sharing a factor with ``m``, or None."""
    for ell in range(2, n + 1):
        if math.gcd(ell, m) != 1:
            return ell
    return None


def is_feasible(q: FeasibilityQuery) -> bool:
    if q.model == RW and q.m == 1:
        return False
    return blocking_divisor(q.n, q.m) is None


def min_feasible_m(n: int, model: str = RW) -> int:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    m = 1 if model == RMW else 2
    while not is_feasible(FeasibilityQuery(n, m, model)):
        m += 1
    return m


def explain(q: FeasibilityQuery) -> str:
    """Human-readable verdict, naming the witnessing ``l`` on failure."""
    if q.model == RW and q.m == 1:
        return "infeasible: a single read/write register cannot support the lock (m=1)"
    ell = blocking_divisor(q.n, q.m)
    if ell is None:
        return "feasible"
    return f"infeasible: gcd({ell},{q.m})={math.gcd(ell, q.m)}"
