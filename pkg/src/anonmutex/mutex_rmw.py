"""Symmetric deadlock-free lock over anonymous compare&swap registers.

Each outer iteration claims every free cell by compare&swap, reads the whole
array cell by cell (not atomically), and then either enters (owning a strict
majority), withdraws (someone else holds more cells: release own cells and
wait for an all-BOT sweep), or tries again.
"""

from __future__ import annotations

import enum
from typing import Sequence

from .errors import UsageError
from .memory import BOT, ProcessIdentity, payload_code
from .process import Outcome, count_equal, max_multiplicity


class RmwPc(enum.IntEnum):
    REMAINDER = 0
    CAS = 1  # claim sweep
    READ = 2  # read sweep
    RELEASE = 3  # give back own cells
    WAIT = 4  # read sweeps until all BOT
    IN_CS = 5
    UNLOCK = 6  # CAS own -> BOT sweep


LOCK_REGION = frozenset({RmwPc.CAS, RmwPc.READ, RmwPc.RELEASE, RmwPc.WAIT})


def has_majority(own: int, m: int) -> bool:
    """``owned > m / 2`` without division."""
    return 2 * own > m


class RmwProcess:
    algorithm = "rmw"

    def __init__(self, index: int, identity: ProcessIdentity, m: int):
        self.index = index
        self.id = identity
        self.m = m
        self.pc = RmwPc.REMAINDER
        self.cursor = 0
        self.view: list = [BOT] * m
        self.owned_i = 0
        self.most_present = 0

    def owned(self) -> int:
        return count_equal(self.view, self.id)

    @property
    def trying(self) -> bool:
        return self.pc in LOCK_REGION

    @property
    def in_cs(self) -> bool:
        return self.pc == RmwPc.IN_CS

    @property
    def in_remainder(self) -> bool:
        return self.pc == RmwPc.REMAINDER

    def begin_lock(self) -> None:
        if self.pc != RmwPc.REMAINDER:
            raise UsageError(f"lock() while at {self.pc.name}")
        self.pc, self.cursor = RmwPc.CAS, 1

    def begin_unlock(self) -> Outcome:
        if self.pc != RmwPc.IN_CS:
            raise UsageError(f"unlock() while at {self.pc.name}")
        self.pc, self.cursor = RmwPc.UNLOCK, 1
        return Outcome.EXITING

    def step(self, mem) -> Outcome:
        pc, x, m = self.pc, self.cursor, self.m
        if pc == RmwPc.CAS:
            mem.cas(self.index, x, BOT, self.id)
            if x < m:
                self.cursor = x + 1
            else:
                self.pc, self.cursor = RmwPc.READ, 1
            return Outcome.BUSY
        if pc == RmwPc.READ:
            self.view[x - 1] = mem.read(self.index, x)
            if x < m:
                self.cursor = x + 1
                return Outcome.BUSY
            return self._decide()
        if pc == RmwPc.RELEASE:
            mem.write(self.index, x, BOT)
            return self._release_advance(x)
        if pc == RmwPc.WAIT:
            self.view[x - 1] = mem.read(self.index, x)
            if x < m:
                self.cursor = x + 1
            elif all(v is BOT for v in self.view):
                self.pc, self.cursor = RmwPc.CAS, 1  # memory drained: compete again
            else:
                self.cursor = 1
            return Outcome.BUSY
        if pc == RmwPc.UNLOCK:
            mem.cas(self.index, x, self.id, BOT)
            if x < m:
                self.cursor = x + 1
                return Outcome.BUSY
            self.pc, self.cursor = RmwPc.REMAINDER, 0
            return Outcome.RELEASED
        raise UsageError(f"step() while at {pc.name}")

    def _decide(self) -> Outcome:
        self.most_present = max_multiplicity(self.view)
        self.owned_i = self.owned()
        if self.owned_i < self.most_present:  # someone holds more: withdraw
            return self._release_advance(0)
        if has_majority(self.owned_i, self.m):
            self.pc, self.cursor = RmwPc.IN_CS, 0
            return Outcome.ENTERED
        self.pc, self.cursor = RmwPc.CAS, 1
        return Outcome.BUSY

    def _release_advance(self, after: int) -> Outcome:
        for x in range(after + 1, self.m + 1):
            if self.view[x - 1] == self.id:
                self.pc, self.cursor = RmwPc.RELEASE, x
                return Outcome.BUSY
        self.pc, self.cursor = RmwPc.WAIT, 1
        return Outcome.WITHDRAWN

    def encode(self, with_tags: bool = False) -> tuple:
        return (int(self.pc), self.cursor, self.owned_i, self.most_present,
                *(payload_code(v) for v in self.view))

    def load(self, rec: Sequence[int], identities: Sequence[ProcessIdentity]) -> None:
        self.pc = RmwPc(rec[0])
        self.cursor = rec[1]
        self.owned_i = rec[2]
        self.most_present = rec[3]
        self.view = [BOT if c == 0 else identities[c - 1] for c in rec[4:4 + self.m]]
