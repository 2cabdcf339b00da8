"""Safety and liveness checks: over recorded traces, over the exhaustively
explored state graph, and for the lock-step ring construction.

Liveness is checked two ways, both explicitly bounded surrogates for
"eventually": graph reachability on a closed state space, and a bounded
wait (default ``50*n*m**2`` steps) on seeded runs.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace

from .errors import ConfigurationError
from .executor import (SCRIPTED, RunConfig, SchedulerSpec, Simulation, fairness_gap,
                       lock_step_schedule, record_width, run)
from .kernel import (ENTRY_VIOLATION, HARNESS_VIOLATION, LOCK_PCS, PC_IN_CS,
                     initial_key, make_kernel, view_offset)
from .memory import payload_code
from .numtheory import RW
from .process import Outcome
from .snapshot import ATOMIC
from .trace import MalformedTrace, Trace, parse_payload, parse_view

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass
class Witness:
    """A schedule that replays the finding through :func:`run` with a
    scripted scheduler. For lassos, ``schedule[cycle_start:]`` repeats."""

    config: RunConfig | None
    schedule: list[int]
    cycle_start: int | None = None

    def scripted_config(self) -> RunConfig:
        if self.config is None:
            raise ConfigurationError("witness carries no run configuration")
        return replace(self.config, scheduler=SchedulerSpec(SCRIPTED, script=tuple(self.schedule)),
                       max_steps=max(1, len(self.schedule)))

    def to_dict(self) -> dict:
        cfg = self.scripted_config().to_dict() if self.config is not None else None
        return {"config": cfg, "schedule": list(self.schedule), "cycle_start": self.cycle_start}

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        cfg = RunConfig.from_dict(d["config"]) if d.get("config") else None
        return cls(cfg, list(d["schedule"]), d.get("cycle_start"))


@dataclass
class Verdict:
    prop: str
    status: str
    witness: Witness | None = None
    stats: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def to_dict(self) -> dict:
        return {
            "property": self.prop,
            "status": self.status,
            "detail": self.detail,
            "stats": self.stats,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def replay_witness(witness: Witness):
    return run(witness.scripted_config())


def default_bound(n: int, m: int) -> int:
    return 50 * n * m * m


# ---------------------------------------------------------------- traces

def check_mutual_exclusion(trace: Trace, config: RunConfig | None = None) -> Verdict:
    trace.validate()
    inside: list[int] = []
    entries = 0
    for idx, ev in enumerate(trace):
        if ev.kind != "phase":
            continue
        if ev.phase == "in_cs":
            if ev.proc in inside:
                raise MalformedTrace(f"record {idx}: process {ev.proc} enters twice")
            inside.append(ev.proc)
            entries += 1
            if len(inside) > 1:
                return Verdict("mutual_exclusion", VIOLATED,
                               Witness(config, trace.prefix(idx + 1).schedule()),
                               {"event": idx, "in_cs": list(inside)},
                               f"processes {inside} simultaneously in the critical section")
        elif ev.phase == "exiting":
            if ev.proc not in inside:
                raise MalformedTrace(f"record {idx}: process {ev.proc} exits without entering")
            inside.remove(ev.proc)
    return Verdict("mutual_exclusion", HOLDS, stats={"events": len(trace), "cs_entries": entries})


def check_entry_invariant(trace: Trace, algorithm: str, config: RunConfig | None = None) -> Verdict:
    """rw: the snapshot that let a process in shows it owning every cell.
    rmw: the read sweep that let it in shows it owning a strict majority."""
    last_snap: dict[int, list[int]] = {}
    sweep: dict[int, dict[int, int]] = {}
    checked = 0
    for idx, ev in enumerate(trace):
        if ev.kind == "snapshot" and ev.phase in ("atomic", "done"):
            last_snap[ev.proc] = parse_view(ev.after)
        elif ev.kind == "read":
            sweep.setdefault(ev.proc, {})[ev.local] = parse_payload(ev.after)
        elif ev.kind == "phase" and ev.phase == "in_cs":
            p, view = ev.proc, parse_view(ev.after)
            m = len(view)
            mine = sum(1 for v in view if v == p)
            if algorithm == RW:
                ok = m > 0 and mine == m and last_snap.get(p) == view
            else:
                seen = sweep.get(p, {})
                ok = 2 * mine > m and all(seen.get(x) == view[x - 1] for x in range(1, m + 1))
            checked += 1
            if not ok:
                return Verdict("entry_invariant", VIOLATED,
                               Witness(config, trace.prefix(idx + 1).schedule()),
                               {"event": idx}, f"process {p} entered with view {ev.after}")
    return Verdict("entry_invariant", HOLDS, stats={"entries_checked": checked})


def check_ownership(trace: Trace, config: RunConfig | None = None) -> list[Verdict]:
    """Replays memory from the trace and checks three facts:

    * only_own_identity: a cell holding id<k> was last set by process k;
    * shrink_postcondition: after a withdrawal or an unlock, the process
      owns no cell;
    * remainder_owns_nothing: no process in its remainder section owns a cell.
    """
    cells: dict[int, int] = {}
    owned: dict[int, int] = {}
    phase: dict[int, str] = {}
    found: dict[str, tuple[int, str]] = {}
    shrinks = 0

    def flag(name, idx, msg):
        found.setdefault(name, (idx, msg))

    for idx, ev in enumerate(trace):
        if ev.kind in ("write", "cas"):
            old, new = parse_payload(ev.before), parse_payload(ev.after)
            if cells.get(ev.external, -1) != old:
                raise MalformedTrace(f"record {idx}: before={ev.before} disagrees with replayed memory")
            if ev.kind == "cas" and not ev.ok:
                if new != old:
                    raise MalformedTrace(f"record {idx}: failed compare&swap changed the cell")
                continue
            if new >= 0 and new != ev.proc:
                flag("only_own_identity", idx, f"process {ev.proc} stored id{new}")
            if old >= 0:
                owned[old] = owned.get(old, 0) - 1
            if new >= 0:
                owned[new] = owned.get(new, 0) + 1
                if phase.get(new, "remainder") == "remainder":
                    flag("remainder_owns_nothing", idx, f"process {new} acquired a cell from its remainder section")
            cells[ev.external] = new
        elif ev.kind == "read":
            if cells.get(ev.external, -1) != parse_payload(ev.after):
                raise MalformedTrace(f"record {idx}: read disagrees with replayed memory")
        elif ev.kind == "phase":
            p = ev.proc
            if ev.phase in ("withdrawn", "remainder"):
                shrinks += 1
                if owned.get(p, 0):
                    flag("shrink_postcondition", idx, f"process {p} still owns {owned[p]} cell(s) after {ev.phase}")
            if ev.phase != "withdrawn":
                phase[p] = ev.phase

    out = []
    for name in ("only_own_identity", "shrink_postcondition", "remainder_owns_nothing"):
        if name in found:
            idx, msg = found[name]
            out.append(Verdict(name, VIOLATED, Witness(config, trace.prefix(idx + 1).schedule()),
                               {"event": idx}, msg))
        else:
            out.append(Verdict(name, HOLDS, stats={"sweeps_checked": shrinks}))
    return out


def check_snapshot_linearizability(trace: Trace, config: RunConfig | None = None) -> Verdict:
    """Every completed double-collect snapshot must equal the memory contents
    (through the caller's permutation) at the instant its second collect began."""
    reads: dict[int, list[int]] = {}
    checkpoints: dict[int, list[int]] = {}
    done: list[tuple[int, int, list[int], list[tuple[int, int]]]] = []
    for idx, ev in enumerate(trace):
        if ev.kind == "snapshot" and ev.phase == "begin":
            reads[ev.proc] = []
        elif ev.kind == "read" and ev.proc in reads:
            reads[ev.proc].append(idx)
        elif ev.kind == "snapshot" and ev.phase in ("done", "retry"):
            rs = reads.pop(ev.proc, [])
            if ev.phase == "retry":
                continue
            view = parse_view(ev.after)
            m = len(view)
            if len(rs) != 2 * m:
                raise MalformedTrace(f"record {idx}: snapshot with {len(rs)} reads for m={m}")
            second = [(trace[j].local, trace[j].external) for j in rs[m:]]
            checkpoints.setdefault(rs[m], []).append(len(done))
            done.append((idx, ev.proc, view, second))
    images: dict[int, dict[int, int]] = {}
    cells: dict[int, int] = {}
    for idx, ev in enumerate(trace):
        for k in checkpoints.get(idx, ()):
            images[k] = dict(cells)
        if ev.kind in ("write", "cas"):
            cells[ev.external] = parse_payload(ev.after)
    for k, (idx, p, view, second) in enumerate(done):
        mem = images[k]
        for local, ext in second:
            if mem.get(ext, -1) != view[local - 1]:
                return Verdict("snapshot_linearizability", VIOLATED,
                               Witness(config, trace.prefix(idx + 1).schedule()),
                               {"event": idx}, f"snapshot by process {p} matches no instant")
    return Verdict("snapshot_linearizability", HOLDS, stats={"snapshots_checked": len(done)})


def check_trace(trace: Trace, algorithm: str, config: RunConfig | None = None) -> list[Verdict]:
    verdicts = [check_mutual_exclusion(trace, config), check_entry_invariant(trace, algorithm, config)]
    verdicts += check_ownership(trace, config)
    verdicts.append(check_snapshot_linearizability(trace, config))
    return verdicts


# ------------------------------------------------------- bounded liveness

class _WaitTooLong(Exception):
    pass


def check_deadlock_freedom_bounded(config: RunConfig, bound: int | None = None, trials: int = 100) -> Verdict:
    """For each of ``trials`` seeds: whenever some process is trying and the
    critical section is empty, some process must enter within ``bound`` steps."""
    bound = bound if bound is not None else default_bound(config.n, config.m)
    worst_wait = 0
    worst_gap = 0
    for t in range(trials):
        cfg = replace(config, seed=config.seed + t)
        state = {"since": None, "sim": None}

        def observe(sim, i, out, state=state):
            nonlocal worst_wait
            state["sim"] = sim
            if out is Outcome.ENTERED:
                state["since"] = None
                return
            waiting = any(p.trying for p in sim.procs) and not any(p.in_cs for p in sim.procs)
            if not waiting:
                state["since"] = None
            elif state["since"] is None:
                state["since"] = sim.steps - 1
            else:
                wait = sim.steps - state["since"]
                worst_wait = max(worst_wait, wait)
                if wait > bound:
                    raise _WaitTooLong

        try:
            res = run(cfg, record=False, observer=observe)
        except _WaitTooLong:
            sim = state["sim"]
            return Verdict("deadlock_freedom", VIOLATED, Witness(cfg, list(sim.schedule)),
                           {"trial": t, "bound": bound, "waiting_since": state["since"]},
                           f"no critical-section entry within {bound} steps")
        if config.scheduler.kind != SCRIPTED:
            worst_gap = max(worst_gap, fairness_gap(res))
    return Verdict("deadlock_freedom", HOLDS,
                   stats={"trials": trials, "bound": bound, "max_wait": worst_wait, "max_fairness_gap": worst_gap},
                   detail=f"bounded surrogate: every wait resolved within {bound} steps")


# ------------------------------------------------------------ exploration

@dataclass
class ExploreReport:
    config: RunConfig
    verdicts: dict[str, Verdict]
    stats: dict
    keys: list | None = None

    @property
    def holds(self) -> bool:
        return all(v.status == HOLDS for v in self.verdicts.values())

    @property
    def violated(self) -> bool:
        return any(v.status == VIOLATED for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "stats": self.stats,
                "verdicts": [v.to_dict() for v in self.verdicts.values()]}


class _Layout:
    def __init__(self, config: RunConfig, perms):
        self.n, self.m, self.alg = config.n, config.m, config.algorithm
        self.width = record_width(self.alg, self.m)
        self.pc_at = [self.m + i * self.width for i in range(self.n)]
        self.view_at = [p + view_offset(self.alg) for p in self.pc_at]
        self.perms = [p.targets for p in perms]

    def in_cs(self, key) -> list[int]:
        return [i for i, at in enumerate(self.pc_at) if key[at] == PC_IN_CS]

    def trying(self, key) -> bool:
        return any(key[at] in LOCK_PCS for at in self.pc_at)

    def withdrawal_check(self, key):
        """None if the configuration is not the one the withdrawal argument is
        about; else True/False for whether some present process must withdraw.

        The configuration: memory full, at least two identities present, and
        every present process holding a view equal to the current memory."""
        m = self.m
        cells = key[:m]
        if 0 in cells:
            return None
        counts: dict[int, int] = {}
        for c in cells:
            counts[c] = counts.get(c, 0) + 1
        if len(counts) < 2:
            return None
        for c in counts:
            i = c - 1
            at = self.view_at[i]
            if any(key[at + x] != cells[self.perms[i][x] - 1] for x in range(m)):
                return None
        ell = len(counts)
        if self.alg == RW:
            return any(k * ell < m for k in counts.values())
        top = max(counts.values())
        return any(k < top for k in counts.values())


def _path(parent, via, j) -> list[int]:
    out = []
    while parent[j] >= 0:
        out.append(via[j])
        j = parent[j]
    out.reverse()
    return out


def explore(config: RunConfig, depth: int | None = None, max_states: int = 2_000_000,
            backend: str = "auto", keep_keys: bool = False) -> ExploreReport:
    """Breadth-first search over every interleaving of single steps, with
    processes cycling lock/CS/unlock forever. States are deduplicated by their
    packed key, so each reachable key (within ``depth``) is expanded once."""
    if config.algorithm == RW and config.snapshot_mode != ATOMIC:
        raise ConfigurationError("exhaustive exploration needs atomic snapshots for rw")
    cfg = replace(config, cycles=None, scheduler=SchedulerSpec())
    started = time.perf_counter()
    kernel = make_kernel(cfg, backend)
    layout = _Layout(cfg, Simulation(cfg, record=False).perms)
    init = initial_key(cfg)
    index = {init: 0}
    keys = [init]
    parent, via, depth_of = [-1], [-1], [0]
    succ: list[tuple[int, ...]] = []
    closed = True
    truncated_by = None
    first: dict[str, tuple] = {}
    withdrawal_seen = 0

    def inspect(j):
        nonlocal withdrawal_seen
        k = keys[j]
        if len(layout.in_cs(k)) > 1:
            first.setdefault("mutual_exclusion", (j, None))
        w = layout.withdrawal_check(k)
        if w is not None:
            withdrawal_seen += 1
            if not w:
                first.setdefault("withdrawal_soundness", (j, None))

    inspect(0)
    i = 0
    while i < len(keys):
        if depth is not None and depth_of[i] >= depth:
            succ.append(())
            closed = False
            truncated_by = "depth"
            i += 1
            continue
        out = []
        for proc, nk, flags in kernel.expand(keys[i]):
            j = index.get(nk)
            if j is None:
                if len(keys) >= max_states:
                    closed = False
                    truncated_by = "max_states"
                    break
                j = len(keys)
                index[nk] = j
                keys.append(nk)
                parent.append(i)
                via.append(proc)
                depth_of.append(depth_of[i] + 1)
                inspect(j)
            out.append(j)
            if flags & ENTRY_VIOLATION:
                first.setdefault("entry_invariant", (i, proc))
            if flags & HARNESS_VIOLATION:
                first.setdefault("write_discipline", (i, proc))
        succ.append(tuple(out))
        if truncated_by == "max_states":
            break
        i += 1
    expanded = len(succ)

    stats = {
        "states": len(keys),
        "expanded": expanded,
        "edges": sum(len(s) for s in succ),
        "max_depth": max(depth_of),
        "closed": closed,
        "truncated_by": truncated_by,
        "backend": kernel.name if hasattr(kernel, "name") else "native",
        "withdrawal_configurations": withdrawal_seen,
    }

    verdicts: dict[str, Verdict] = {}
    for name in ("mutual_exclusion", "entry_invariant", "write_discipline", "withdrawal_soundness"):
        if name in first:
            j, proc = first[name]
            sched = _path(parent, via, j) + ([proc] if proc is not None else [])
            verdicts[name] = Verdict(name, VIOLATED, Witness(cfg, sched), {"depth": len(sched)})
        elif closed:
            verdicts[name] = Verdict(name, HOLDS, detail="closed state space")
        else:
            verdicts[name] = Verdict(name, INCONCLUSIVE, detail=f"no violation before truncation ({truncated_by})")

    if closed:
        verdicts["deadlock_freedom"], live_stats = _reachability(keys, succ, parent, via, layout, cfg)
        stats.update(live_stats)
    else:
        verdicts["deadlock_freedom"] = Verdict("deadlock_freedom", INCONCLUSIVE,
                                               detail="state space not closed; reachability not decided")
    stats["seconds"] = round(time.perf_counter() - started, 3)
    return ExploreReport(cfg, verdicts, stats, keys if keep_keys else None)


def layouts(n: int, m: int):
    """Every assignment of permutations up to renaming the external cells:
    process 0 keeps the identity, the others range over all of S_m."""
    ident = tuple(range(1, m + 1))
    for rest in itertools.product(itertools.permutations(ident), repeat=n - 1):
        yield (ident, *rest)


def explore_layouts(config: RunConfig, max_states: int = 2_000_000, backend: str = "auto") -> list[ExploreReport]:
    """:func:`explore` once per layout from :func:`layouts`."""
    return [explore(replace(config, permutations="explicit", perms=p), max_states=max_states, backend=backend)
            for p in layouts(config.n, config.m)]


def _reachability(keys, succ, parent, via, layout: _Layout, cfg: RunConfig):
    """From every state with a process trying and nobody in the critical
    section, some critical-section state must be reachable. A state that
    fails this is a trap: every continuation, fair ones included, starves."""
    count = len(keys)
    preds: list[list[int]] = [[] for _ in range(count)]
    for a, outs in enumerate(succ):
        for b in outs:
            preds[b].append(a)
    can_reach = bytearray(count)
    stack = [j for j in range(count) if layout.in_cs(keys[j])]
    for j in stack:
        can_reach[j] = 1
    while stack:
        b = stack.pop()
        for a in preds[b]:
            if not can_reach[a]:
                can_reach[a] = 1
                stack.append(a)
    waiting = [j for j in range(count) if layout.trying(keys[j]) and not layout.in_cs(keys[j])]
    traps = [j for j in waiting if not can_reach[j]]
    stats = {"cs_states": sum(1 for j in range(count) if layout.in_cs(keys[j])),
             "waiting_states": len(waiting), "trap_states": len(traps)}
    if not traps:
        return Verdict("deadlock_freedom", HOLDS, stats=stats,
                       detail="every waiting state reaches a critical-section state"), stats
    start = min(traps)  # BFS order: shallowest
    prefix = _path(parent, via, start)
    # fair lasso inside the trap region: processes take turns
    n = cfg.n
    seen: dict[tuple[int, int], int] = {}
    lasso: list[int] = []
    j, turn = start, 0
    while (j, turn) not in seen:
        seen[(j, turn)] = len(lasso)
        lasso.append(turn)
        j = succ[j][turn]
        turn = (turn + 1) % n
    cycle_at = seen[(j, turn)]
    witness = Witness(cfg, prefix + lasso, cycle_start=len(prefix) + cycle_at)
    stats["cycle_length"] = len(lasso) - cycle_at
    return Verdict("deadlock_freedom", VIOLATED, witness, stats,
                   "reachable states from which no process can ever enter; fair zero-progress cycle included"), stats


# ------------------------------------------------------- lock-step ring

def _rename(code: int, shift: int, ell: int) -> int:
    return 0 if code == 0 else (code - 1 + shift) % ell + 1


def _rename_tag(tag, shift: int, ell: int):
    return None if tag is None else ((tag[0] + shift) % ell, tag[1])


def _local_image(p, shift: int, ell: int) -> tuple:
    view = tuple(_rename(payload_code(v), shift, ell) for v in p.view)
    snap = getattr(p, "snap", None)
    if snap is not None:
        collects = tuple(
            None if c is None else (_rename(payload_code(c[0]), shift, ell), _rename_tag(c[1], shift, ell))
            for c in (*snap.collect_a, *snap.collect_b)
        )
        return (int(p.pc), p.cursor, p.cnt, view, snap.phase, snap.cursor, collects)
    return (int(p.pc), p.cursor, p.owned_i, p.most_present, view)


def rotationally_symmetric(sim: Simulation, ell: int) -> bool:
    """Process i looks exactly like process 0 with identities renamed
    id<j> -> id<j+i> and the ring turned by ``i*m/ell`` cells."""
    mem = sim.mem
    m = mem.m
    gap = m // ell
    codes = [payload_code(v) for v in mem.cells]
    for i in range(1, ell):
        for e in range(m):
            f = (e + i * gap) % m
            if codes[f] != _rename(codes[e], i, ell) or mem.tags[f] != _rename_tag(mem.tags[e], i, ell):
                return False
        if _local_image(sim.procs[i], 0, ell) != _local_image(sim.procs[0], i, ell):
            return False
        if mem._sn[i] != mem._sn[0]:
            return False
    return True


@dataclass
class DemoReport:
    algorithm: str
    m: int
    ell: int
    horn: str | None
    rounds: int
    steps: int
    entries: list[int]
    first_repeat_round: int | None
    repeats_round: int | None
    symmetry_checks: int
    symmetry_failures: int
    verdict: Verdict

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("algorithm", "m", "ell", "horn", "rounds", "steps", "entries",
                                             "first_repeat_round", "repeats_round", "symmetry_checks",
                                             "symmetry_failures")}
        d["verdict"] = self.verdict.to_dict()
        return d


def impossibility_demo(algorithm: str, m: int, ell: int, max_steps: int = 100_000,
                       snapshot_mode: str = ATOMIC) -> DemoReport:
    """Run ``ell`` processes in lock step on the ring layout and report which
    property breaks: simultaneous entries, or a repeated state with nobody
    ever entering."""
    if ell < 2 or m % ell:
        raise ConfigurationError(f"ring layout needs ell >= 2 dividing m (m={m}, ell={ell})")
    config = RunConfig(n=ell, m=m, algorithm=algorithm, snapshot_mode=snapshot_mode,
                       scheduler=lock_step_schedule(ell), permutations="ring", ell=ell,
                       cycles=None, max_steps=max_steps)
    sim = Simulation(config, record=False)
    seen: dict[tuple, int] = {}
    horn = None
    first_repeat = repeats = None
    checks = failures = 0
    rounds = 0
    while sim.steps + ell <= max_steps:
        entered = False
        for i in range(ell):
            if sim.step(i) is Outcome.ENTERED:
                entered = True
        rounds += 1
        checks += 1
        if not rotationally_symmetric(sim, ell):
            failures += 1
        if sim.max_in_cs > 1:
            horn = "mutual_exclusion"
            break
        if entered:
            seen.clear()
            continue
        k = sim.key(with_tags=True)
        if k in seen:
            horn = "deadlock_freedom"
            first_repeat, repeats = rounds, seen[k]
            break
        seen[k] = rounds
    witness = Witness(replace(config, max_steps=sim.steps), list(sim.schedule))
    if horn == "mutual_exclusion":
        verdict = Verdict("mutual_exclusion", VIOLATED, witness, detail="processes entered together")
    elif horn == "deadlock_freedom":
        verdict = Verdict("deadlock_freedom", VIOLATED, witness,
                          {"cycle_rounds": first_repeat - repeats},
                          f"state after round {first_repeat} equals state after round {repeats}; "
                          "no entry in between")
    else:
        verdict = Verdict("impossibility", INCONCLUSIVE, detail=f"no violation within {max_steps} steps")
    if failures:
        verdict.detail += f"; SYMMETRY BROKEN in {failures} round(s): identities leaked structure"
    return DemoReport(algorithm, m, ell, horn, rounds, sim.steps, list(sim.entries), first_repeat, repeats,
                      checks, failures, verdict)
