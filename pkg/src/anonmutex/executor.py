"""Drives n step machines against one anonymous memory under a scheduler.

Each executor step lets one process perform exactly one memory operation,
except the critical-section body, which is a single step with no memory
event. The run stops when every process has done its quota of critical
sections, when a scripted schedule runs out, or when the step budget is
spent; the last case is classified, not raised.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .errors import ConfigurationError
from .memory import (RegisterArray, identity_permutations, make_identities, ring_permutations,
                     seeded_permutations, view_text, Permutation)
from .mutex_rmw import RmwProcess
from .mutex_rw import RwProcess
from .numtheory import RMW, RW
from .process import Outcome
from .rng import XorShift64Star
from .snapshot import ATOMIC, FINE, SNAPSHOT_MODES
from .trace import Trace

ROUND_ROBIN = "round_robin"
RANDOM = "random"
LOCK_STEP = "lock_step"
SCRIPTED = "scripted"
SCHEDULERS = (ROUND_ROBIN, RANDOM, LOCK_STEP, SCRIPTED)
PERMUTATION_SOURCES = ("identity", "seeded", "ring", "explicit")

# seeded permutations and the random scheduler draw from separate streams
_SCHED_STREAM = 0x5CED


@dataclass(frozen=True)
class SchedulerSpec:
    kind: str = ROUND_ROBIN
    ell: int | None = None
    script: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in SCHEDULERS:
            raise ConfigurationError(f"unknown scheduler {self.kind!r}")
        if self.kind == LOCK_STEP and (self.ell is None or self.ell < 2):
            raise ConfigurationError("lock-step scheduling needs ell >= 2")
        object.__setattr__(self, "script", tuple(int(p) for p in self.script))

    @property
    def deterministic(self) -> bool:
        return self.kind != RANDOM


def lock_step_schedule(ell: int) -> SchedulerSpec:
    if ell < 2:
        raise ConfigurationError("lock-step scheduling needs ell >= 2")
    return SchedulerSpec(LOCK_STEP, ell=ell)


@dataclass(frozen=True)
class RunConfig:
    n: int
    m: int
    algorithm: str = RW
    snapshot_mode: str = ATOMIC
    scheduler: SchedulerSpec = field(default_factory=SchedulerSpec)
    permutations: str = "identity"
    ell: int | None = None
    perms: tuple[tuple[int, ...], ...] | None = None
    cycles: int | None = 1
    max_steps: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigurationError("need n >= 1 and m >= 1")
        if self.algorithm not in (RW, RMW):
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if self.snapshot_mode not in SNAPSHOT_MODES:
            raise ConfigurationError(f"unknown snapshot mode {self.snapshot_mode!r}")
        if self.permutations not in PERMUTATION_SOURCES:
            raise ConfigurationError(f"unknown permutation source {self.permutations!r}")
        if self.permutations == "ring":
            if self.ell is None or self.ell < 1 or self.m % self.ell or self.ell > self.n:
                raise ConfigurationError(f"ring layout needs ell | m and ell <= n (m={self.m}, ell={self.ell})")
        if self.permutations == "explicit":
            if self.perms is None or len(self.perms) != self.n:
                raise ConfigurationError("explicit permutations: need one per process")
            object.__setattr__(self, "perms", tuple(tuple(p) for p in self.perms))
        if self.scheduler.kind == LOCK_STEP and self.scheduler.ell > self.n:
            raise ConfigurationError("lock-step ell exceeds the number of processes")
        if any(not 0 <= p < self.n for p in self.scheduler.script):
            raise ConfigurationError("scripted schedule names a process that does not exist")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be >= 1")
        if self.cycles is not None and self.cycles < 1:
            raise ConfigurationError("cycles must be >= 1 (or None for unbounded)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheduler"]["script"] = list(self.scheduler.script)
        if self.perms is not None:
            d["perms"] = [list(p) for p in self.perms]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["scheduler"] = SchedulerSpec(**d.get("scheduler", {}))
        if d.get("perms") is not None:
            d["perms"] = tuple(tuple(p) for p in d["perms"])
        return cls(**d)


def build_permutations(config: RunConfig) -> list[Permutation]:
    n, m = config.n, config.m
    if config.permutations == "identity":
        return identity_permutations(n, m)
    if config.permutations == "seeded":
        return seeded_permutations(n, m, config.seed)
    if config.permutations == "ring":
        return ring_permutations(m, config.ell, n)
    return [Permutation(p) for p in config.perms]


class Scheduler:
    def __init__(self, spec: SchedulerSpec, n: int, seed: int):
        self.spec = spec
        self.n = n
        self.pos = 0
        self.rng = XorShift64Star(seed ^ _SCHED_STREAM) if spec.kind == RANDOM else None

    def choose(self, enabled: list[int]) -> int | None:
        kind = self.spec.kind
        if not enabled:
            return None
        if kind == RANDOM:
            return enabled[self.rng.below(len(enabled))]
        if kind == SCRIPTED:
            if self.pos >= len(self.spec.script):
                return None
            p = self.spec.script[self.pos]
            self.pos += 1
            if p not in enabled:
                raise ConfigurationError(f"scripted step {self.pos - 1} picks parked process {p}")
            return p
        width = self.spec.ell if kind == LOCK_STEP else self.n
        for k in range(width):
            p = (self.pos + k) % width
            if p in enabled:
                self.pos = (p + 1) % width
                return p
        return None

    def state(self):
        return self.pos


def make_process(config: RunConfig, index: int, identity, scan_order=None):
    if config.algorithm == RW:
        return RwProcess(index, identity, config.m, config.snapshot_mode, scan_order)
    return RmwProcess(index, identity, config.m)


class Simulation:
    """Memory plus process machines; one :meth:`step` is one scheduled action."""

    def __init__(self, config: RunConfig, *, record: bool = True, scan_orders=None):
        self.config = config
        self.identities = make_identities(config.n)
        self.perms = build_permutations(config)
        self.trace = Trace() if record else None
        self.mem = RegisterArray(
            config.m, self.perms, self.identities,
            rmw=config.algorithm == RMW,
            tagged=config.algorithm == RW and config.snapshot_mode == FINE,
            trace=self.trace,
        )
        orders = scan_orders or [None] * config.n
        self.procs = [make_process(config, i, ident, orders[i]) for i, ident in enumerate(self.identities)]
        self.entries = [0] * config.n
        self.parked = [False] * config.n
        self.park_step: list[int | None] = [None] * config.n
        self.steps = 0
        self.schedule: list[int] = []
        self.max_in_cs = 0

    def enabled(self) -> list[int]:
        return [i for i in range(self.config.n) if not self.parked[i]]

    def _phase(self, i: int, label: str, after: str = "") -> None:
        if self.trace is not None:
            self.trace.record(i, "phase", phase=label, after=after)

    def step(self, i: int) -> Outcome:
        if self.trace is not None:
            self.trace.step = self.steps
        self.schedule.append(i)
        p = self.procs[i]
        if p.in_remainder:
            p.begin_lock()
            self._phase(i, "trying")
            out = p.step(self.mem)
        elif p.in_cs:
            out = p.begin_unlock()
            self._phase(i, "exiting")
        else:
            out = p.step(self.mem)
        if out is Outcome.ENTERED:
            self.entries[i] += 1
            self._phase(i, "in_cs", view_text(p.view))
            self.max_in_cs = max(self.max_in_cs, sum(q.in_cs for q in self.procs))
        elif out is Outcome.WITHDRAWN:
            self._phase(i, "withdrawn")
        elif out is Outcome.RELEASED:
            self._phase(i, "remainder")
            cycles = self.config.cycles
            if cycles is not None and self.entries[i] >= cycles:
                self.parked[i] = True
                self.park_step[i] = self.steps
        self.steps += 1
        return out

    def in_cs(self) -> list[int]:
        return [i for i, p in enumerate(self.procs) if p.in_cs]

    def key(self, with_tags: bool = False) -> tuple:
        out = list(self.mem.encode(with_tags))
        for p in self.procs:
            out.extend(p.encode(with_tags))
        return tuple(out)

    def load(self, key) -> None:
        m = self.config.m
        self.mem.load(key[:m])
        width = record_width(self.config.algorithm, m)
        for i, p in enumerate(self.procs):
            start = m + i * width
            p.load(key[start:start + width], self.identities)


def record_width(algorithm: str, m: int) -> int:
    """Packed per-process record length (atomic snapshot mode)."""
    return 3 + m if algorithm == RW else 4 + m


@dataclass
class RunSummary:
    entries: list[int]
    steps: int
    termination: str
    classification: str | None = None
    livelock_conclusive: bool = False
    first_repeat_step: int | None = None
    max_in_cs: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    config: RunConfig
    trace: Trace | None
    summary: RunSummary
    schedule: list[int]
    park_step: list[int | None]
    final_key: tuple


def run(config: RunConfig, *, record: bool = True, scan_orders=None, observer=None) -> RunResult:
    """Execute the lock/CS/unlock workload until done or out of budget.

    ``observer(sim, proc, outcome)`` is called after every step.
    """
    sim = Simulation(config, record=record, scan_orders=scan_orders)
    sched = Scheduler(config.scheduler, config.n, config.seed)
    deterministic = config.scheduler.deterministic
    seen: dict = {}
    first_repeat = None
    termination = "budget-exhausted"
    while True:
        enabled = sim.enabled()
        if not enabled:
            termination = "completed"
            break
        if sim.steps >= config.max_steps:
            break
        i = sched.choose(enabled)
        if i is None:
            termination = "script-exhausted"
            break
        out = sim.step(i)
        if observer is not None:
            observer(sim, i, out)
        if out is Outcome.ENTERED:
            seen.clear()
            first_repeat = None
        elif first_repeat is None and config.scheduler.kind != SCRIPTED:
            k = (sim.key(with_tags=True), sched.state() if deterministic else None)
            if k in seen:
                first_repeat = sim.steps
            else:
                seen[k] = sim.steps
    classification = None
    if termination == "budget-exhausted":
        classification = "livelock-suspected" if first_repeat is not None else "inconclusive"
    summary = RunSummary(
        entries=list(sim.entries),
        steps=sim.steps,
        termination=termination,
        classification=classification,
        livelock_conclusive=classification == "livelock-suspected" and deterministic,
        first_repeat_step=first_repeat,
        max_in_cs=sim.max_in_cs,
    )
    return RunResult(config, sim.trace, summary, sim.schedule, list(sim.park_step), sim.key())


def fairness_gap(result: RunResult) -> int:
    """Longest run of consecutive steps any still-active process went unscheduled."""
    n = result.config.n
    last = [-1] * n
    worst = 0
    end = len(result.schedule)
    for t, p in enumerate(result.schedule):
        worst = max(worst, t - last[p] - 1)
        last[p] = t
    for p in range(n):
        stop = result.park_step[p]
        if stop is None:
            worst = max(worst, end - last[p] - 1)
    return worst
