"""Snapshot of the anonymous array, atomic or by repeated double collect.

Fine mode reads the m cells one step at a time, twice, and accepts the view
only when both collects agree cell by cell on payload *and* write tag;
otherwise it starts over. Atomic mode is a single memory transition and
keeps the global state finite for exhaustive search.
"""

from __future__ import annotations

from typing import Sequence

from .memory import payload_code, view_text

ATOMIC = "atomic"
FINE = "fine"
SNAPSHOT_MODES = (ATOMIC, FINE)

IDLE, FIRST_COLLECT, SECOND_COLLECT = 0, 1, 2


class SnapshotMachine:
    def __init__(self, m: int, mode: str = ATOMIC, order: Sequence[int] | None = None):
        if mode not in SNAPSHOT_MODES:
            raise ValueError(f"snapshot mode must be one of {SNAPSHOT_MODES}")
        self.m = m
        self.mode = mode
        self.order = tuple(order) if order is not None else tuple(range(1, m + 1))
        if sorted(self.order) != list(range(1, m + 1)):
            raise ValueError(f"collect order must be a permutation of 1..{m}")
        self.phase = IDLE
        self.cursor = 0
        self.collect_a: list = [None] * m
        self.collect_b: list = [None] * m
        self.attempts = 0
        self.reads = 0

    def step(self, mem, proc: int):
        """Advance by one memory event; return the view when complete, else None."""
        if self.mode == ATOMIC:
            return mem.snapshot(proc)
        if self.phase == IDLE or (self.phase == FIRST_COLLECT and self.cursor == 0):
            self.phase = FIRST_COLLECT
            self.cursor = 0
            self.attempts += 1
            if mem.trace is not None:
                mem.trace.record(proc, "snapshot", phase="begin")
        x = self.order[self.cursor]
        value = mem.read_tagged(proc, x)
        self.reads += 1
        self.cursor += 1
        if self.phase == FIRST_COLLECT:
            self.collect_a[x - 1] = value
            if self.cursor == self.m:
                self.phase, self.cursor = SECOND_COLLECT, 0
            return None
        self.collect_b[x - 1] = value
        if self.cursor < self.m:
            return None
        if all(a[0] == b[0] and a[1] == b[1] for a, b in zip(self.collect_a, self.collect_b)):
            view = tuple(b[0] for b in self.collect_b)
            self.phase, self.cursor = IDLE, 0
            if mem.trace is not None:
                mem.trace.record(proc, "snapshot", after=view_text(view), phase="done")
            return view
        self.phase, self.cursor = FIRST_COLLECT, 0
        if mem.trace is not None:
            mem.trace.record(proc, "snapshot", phase="retry")
        return None

    def encode(self, with_tags: bool = False) -> tuple:
        if self.mode == ATOMIC:
            return ()

        def cells(collect):
            out = []
            for c in collect:
                if c is None:
                    out.append(-1)
                else:
                    out.append(payload_code(c[0]))
                    if with_tags:
                        out.append(c[1])
            return out

        return (self.phase, self.cursor, *cells(self.collect_a), *cells(self.collect_b))
