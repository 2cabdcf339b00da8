"""Symmetric deadlock-free lock over anonymous read/write registers.

A process keeps writing its identity into free cells until a snapshot shows
it owning every cell. When the memory is full it counts the competitors
present and, if it owns fewer than ``m / cnt`` cells, withdraws (shrink) and
waits for an empty memory. Coprimality of ``m`` with ``2..n`` guarantees
some competitor always withdraws.

Granularity: one memory event per :meth:`RwProcess.step`; the local
decisions (owned, cnt, the withdrawal test) ride on the snapshot step that
produced the view.
"""

from __future__ import annotations

import enum
from typing import Sequence

from .errors import HarnessError, UsageError
from .memory import BOT, ProcessIdentity, payload_code
from .process import Outcome, count_equal, distinct_values
from .snapshot import ATOMIC, SnapshotMachine


class RwPc(enum.IntEnum):
    REMAINDER = 0
    SNAPSHOT = 1
    WRITE = 2  # cursor = target
    SHRINK_READ = 3  # withdrawal sweep
    SHRINK_WRITE = 4
    IN_CS = 5
    UNLOCK_READ = 6  # same sweep, ending in the remainder
    UNLOCK_WRITE = 7


LOCK_REGION = frozenset({RwPc.SNAPSHOT, RwPc.WRITE, RwPc.SHRINK_READ, RwPc.SHRINK_WRITE})
UNLOCK_REGION = frozenset({RwPc.UNLOCK_READ, RwPc.UNLOCK_WRITE})


def owned(view: Sequence, me: ProcessIdentity) -> int:
    return count_equal(view, me)


def should_withdraw(own: int, cnt: int, m: int) -> bool:
    """``owned < m / cnt`` without division."""
    return own * cnt < m


class RwProcess:
    algorithm = "rw"

    def __init__(self, index: int, identity: ProcessIdentity, m: int,
                 snapshot_mode: str = ATOMIC, scan_order: Sequence[int] | None = None):
        self.index = index
        self.id = identity
        self.m = m
        self.pc = RwPc.REMAINDER
        self.view: list = [BOT] * m
        self.cnt = 0
        self.cursor = 0
        self.snap = SnapshotMachine(m, snapshot_mode, scan_order)

    def owned(self) -> int:
        return owned(self.view, self.id)

    @property
    def trying(self) -> bool:
        return self.pc in LOCK_REGION

    @property
    def in_cs(self) -> bool:
        return self.pc == RwPc.IN_CS

    @property
    def in_remainder(self) -> bool:
        return self.pc == RwPc.REMAINDER

    def begin_lock(self) -> None:
        if self.pc != RwPc.REMAINDER:
            raise UsageError(f"lock() while at {self.pc.name}")
        self.pc = RwPc.SNAPSHOT

    def begin_unlock(self) -> Outcome:
        if self.pc != RwPc.IN_CS:
            raise UsageError(f"unlock() while at {self.pc.name}")
        self.cursor = 0
        self.pc = RwPc.UNLOCK_READ
        if self._shrink_advance() is Outcome.RELEASED:
            return Outcome.RELEASED
        return Outcome.EXITING

    def step(self, mem) -> Outcome:
        pc = self.pc
        if pc == RwPc.SNAPSHOT:
            view = self.snap.step(mem, self.index)
            if view is None:
                return Outcome.BUSY
            self.view = list(view)
            return self._decide()
        if pc == RwPc.WRITE:
            if self.view[self.cursor - 1] is not BOT:
                raise HarnessError("write into a cell the view did not show as BOT")
            mem.write(self.index, self.cursor, self.id)
            self.cursor = 0
            self.pc = RwPc.SNAPSHOT
            return Outcome.BUSY
        if pc == RwPc.SHRINK_READ or pc == RwPc.UNLOCK_READ:
            if mem.read(self.index, self.cursor) == self.id:
                self.pc = RwPc(pc + 1)
                return Outcome.BUSY
            return self._shrink_advance()
        if pc == RwPc.SHRINK_WRITE or pc == RwPc.UNLOCK_WRITE:
            mem.write(self.index, self.cursor, BOT)
            self.pc = RwPc(pc - 1)
            return self._shrink_advance()
        raise UsageError(f"step() while at {pc.name}")

    def _decide(self) -> Outcome:
        view, m = self.view, self.m
        own = owned(view, self.id)
        free = [x for x in range(1, m + 1) if view[x - 1] is BOT]
        if own == 0 and len(free) < m:
            self.pc = RwPc.SNAPSHOT  # not present and memory not empty: wait
            return Outcome.BUSY
        if free:
            self.cursor = free[0]  # lowest free local index
            self.pc = RwPc.WRITE
            return Outcome.BUSY
        self.cnt = len(distinct_values(view))  # view is full, so no BOT here
        if should_withdraw(own, self.cnt, m):
            self.cursor = 0
            self.pc = RwPc.SHRINK_READ
            return self._shrink_advance()
        if own == m:
            self.pc = RwPc.IN_CS
            return Outcome.ENTERED
        self.pc = RwPc.SNAPSHOT
        return Outcome.BUSY

    def _shrink_advance(self) -> Outcome:
        """Move the shrink cursor to the next own entry of the view, or finish."""
        for x in range(self.cursor + 1, self.m + 1):
            if self.view[x - 1] == self.id:
                self.cursor = x
                return Outcome.BUSY
        self.cursor = 0
        if self.pc in UNLOCK_REGION:
            self.pc = RwPc.REMAINDER
            return Outcome.RELEASED
        self.pc = RwPc.SNAPSHOT
        return Outcome.WITHDRAWN

    def encode(self, with_tags: bool = False) -> tuple:
        return (int(self.pc), self.cursor, self.cnt,
                *(payload_code(v) for v in self.view), *self.snap.encode(with_tags))

    def load(self, rec: Sequence[int], identities: Sequence[ProcessIdentity]) -> None:
        if self.snap.mode != ATOMIC:
            raise ValueError("state loading is supported for atomic snapshots only")
        self.pc = RwPc(rec[0])
        self.cursor = rec[1]
        self.cnt = rec[2]
        self.view = [BOT if c == 0 else identities[c - 1] for c in rec[3:3 + self.m]]
