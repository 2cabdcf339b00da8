"""Successor function over packed global states, used by the explorer.

A packed key is a flat tuple of ints: the m external cells (0 = BOT,
k+1 = id<k>) followed by one fixed-width record per process::

    rw:  pc, cursor, cnt, view[1..m]
    rmw: pc, cursor, owned, most_present, view[1..m]

Two interchangeable backends expose ``expand(key) -> [(proc, key', flags)]``:
the compiled ``_kernel`` extension, and a pure-Python fallback that loads
the key into the real step machines, steps them, and re-encodes. The
compiled one is picked at import when it was built.
"""

from __future__ import annotations

from dataclasses import replace

from .errors import ConfigurationError, HarnessError
from .executor import RunConfig, Simulation, record_width
from .numtheory import RW
from .process import Outcome
from .snapshot import ATOMIC

ENTERED_CS = 1
ENTRY_VIOLATION = 2
HARNESS_VIOLATION = 4

PC_IN_CS = 5
LOCK_PCS = frozenset({1, 2, 3, 4})

try:
    from . import _kernel as _native
except ImportError:  # extension not built
    _native = None

NATIVE_AVAILABLE = _native is not None
DEFAULT_BACKEND = "native" if NATIVE_AVAILABLE else "python"


def view_offset(algorithm: str) -> int:
    return 3 if algorithm == RW else 4


def entry_ok(key, proc: int, algorithm: str, m: int) -> bool:
    start = m + proc * record_width(algorithm, m) + view_offset(algorithm)
    view = key[start:start + m]
    mine = sum(1 for c in view if c == proc + 1)
    return mine == m if algorithm == RW else 2 * mine > m


class PythonKernel:
    name = "python"

    def __init__(self, config: RunConfig):
        if config.algorithm == RW and config.snapshot_mode != ATOMIC:
            raise ConfigurationError("packed states need atomic snapshots")
        self.config = replace(config, cycles=None)
        self.sim = Simulation(self.config, record=False)

    def expand(self, key: tuple) -> list:
        sim, alg, m = self.sim, self.config.algorithm, self.config.m
        out = []
        for i in range(self.config.n):
            sim.load(key)
            try:
                res = sim.step(i)
            except HarnessError:
                out.append((i, key, HARNESS_VIOLATION))
                continue
            nk = sim.key()
            flags = 0
            if res is Outcome.ENTERED:
                flags = ENTERED_CS
                if not entry_ok(nk, i, alg, m):
                    flags |= ENTRY_VIOLATION
            out.append((i, nk, flags))
        sim.schedule.clear()
        return out


def make_kernel(config: RunConfig, backend: str = "auto"):
    if backend == "auto":
        backend = DEFAULT_BACKEND
    if backend == "python":
        return PythonKernel(config)
    if backend == "native":
        if _native is None:
            raise ConfigurationError("native kernel not built (pip install -e . --no-build-isolation)")
        if config.algorithm == RW and config.snapshot_mode != ATOMIC:
            raise ConfigurationError("packed states need atomic snapshots")
        sim = Simulation(replace(config, cycles=None), record=False)
        perms = [list(p.targets) for p in sim.perms]
        return _native.NativeKernel(config.algorithm == RW, config.n, config.m, perms)
    raise ConfigurationError(f"unknown kernel backend {backend!r}")


def initial_key(config: RunConfig) -> tuple:
    return Simulation(replace(config, cycles=None), record=False).key()
