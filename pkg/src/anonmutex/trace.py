"""Totally ordered event log and its line-delimited JSON encoding.

Every record has the same nine fields::

    step      executor step at which the event happened (consecutive from 0;
              one step may produce several records)
    proc      external process index
    kind      read | write | cas | snapshot | phase
    local     local register index (1-based) or null
    external  external register index (1-based) or null
    before    payload before the operation ("bot", "id<k>") or ""
    after     payload after the operation, or a comma-joined view
    ok        compare&swap outcome, else null
    phase     phase label for ``phase`` records (trying, withdrawn, in_cs,
              exiting, remainder); sub-label for ``snapshot`` records
              (atomic, begin, retry, done)
"""

from __future__ import annotations

import json
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Iterator

KINDS = ("read", "write", "cas", "snapshot", "phase")
PHASES = ("trying", "withdrawn", "in_cs", "exiting", "remainder")


class MalformedTrace(ValueError):
    pass


@dataclass(slots=True)
class Event:
    step: int
    proc: int
    kind: str
    local: int | None = None
    external: int | None = None
    before: str = ""
    after: str = ""
    ok: bool | None = None
    phase: str | None = None

    def to_json(self) -> str:
        return json.dumps(
            {f.name: getattr(self, f.name) for f in fields(self)},
            separators=(",", ":"),
            ensure_ascii=False,
        )


_FIELDS = tuple(f.name for f in fields(Event))


def parse_payload(text: str) -> int:
    """``"bot"`` -> -1, ``"id<k>"`` -> k."""
    if text == "bot":
        return -1
    if text.startswith("id") and text[2:].isdigit():
        return int(text[2:])
    raise MalformedTrace(f"bad payload {text!r}")


def parse_view(text: str) -> list[int]:
    return [parse_payload(t) for t in text.split(",")] if text else []


class Trace:
    """Append-only list of events; ``step`` is advanced by the executor."""

    def __init__(self, events: Iterable[Event] = ()):
        self.events: list[Event] = list(events)
        self.step = 0

    def record(self, proc, kind, local=None, external=None, before="", after="", ok=None, phase=None):
        self.events.append(Event(self.step, proc, kind, local, external, before, after, ok, phase))

    def __len__(self):
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def prefix(self, end: int) -> "Trace":
        return Trace(self.events[:end])

    def schedule(self) -> list[int]:
        """Process chosen at each executor step, recovered from the records."""
        out: list[int] = []
        for ev in self.events:
            if ev.step == len(out):
                out.append(ev.proc)
        return out

    def validate(self) -> None:
        expected = 0
        for i, ev in enumerate(self.events):
            if ev.kind not in KINDS:
                raise MalformedTrace(f"record {i}: unknown kind {ev.kind!r}")
            if ev.step not in (expected - 1, expected) or (i == 0 and ev.step != 0):
                raise MalformedTrace(f"record {i}: step {ev.step} out of sequence")
            if ev.step == expected:
                expected += 1
            if ev.kind == "phase" and ev.phase not in PHASES:
                raise MalformedTrace(f"record {i}: unknown phase {ev.phase!r}")
            if ev.kind in ("read", "write", "cas") and (ev.local is None or ev.external is None):
                raise MalformedTrace(f"record {i}: memory event without indices")

    def dumps(self) -> str:
        return "".join(ev.to_json() + "\n" for ev in self.events)

    def write(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "Trace":
        events = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedTrace(f"line {lineno}: {exc}") from None
            if not isinstance(obj, dict) or set(obj) != set(_FIELDS):
                raise MalformedTrace(f"line {lineno}: expected fields {_FIELDS}")
            events.append(Event(**obj))
        trace = cls(events)
        trace.validate()
        return trace

    @classmethod
    def read(cls, path) -> "Trace":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return [astuple(e) for e in self.events] == [astuple(e) for e in other.events]
