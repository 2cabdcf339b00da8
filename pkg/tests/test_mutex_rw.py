import pytest
from hypothesis import given, settings, strategies as st

from anonmutex.errors import HarnessError, UsageError
from anonmutex.executor import RANDOM, RunConfig, SchedulerSpec, run
from anonmutex.memory import BOT, RegisterArray, identity_permutations, make_identities
from anonmutex.mutex_rw import RwPc, RwProcess, owned, should_withdraw
from anonmutex.numtheory import RW
from anonmutex.process import Outcome
from anonmutex.trace import Trace, parse_view
from anonmutex.verifier import HOLDS, check_trace


def solo(m=3):
    ids = make_identities(1)
    trace = Trace()
    mem = RegisterArray(m, identity_permutations(1, m), ids, trace=trace)
    return RwProcess(0, ids[0], m), mem, trace


def test_owned_examples():
    a, b = make_identities(2)
    assert owned([BOT, BOT, BOT], a) == 0
    assert owned([a, b, a], a) == 2
    assert owned([a] * 5, a) == 5


def test_withdraw_threshold():
    assert should_withdraw(1, 2, 3)
    assert not should_withdraw(2, 2, 3)
    assert not should_withdraw(3, 1, 3)


def test_solo_lock_sequence():
    p, mem, trace = solo()
    p.begin_lock()
    outcomes = [p.step(mem) for _ in range(7)]
    assert outcomes[-1] is Outcome.ENTERED and all(o is Outcome.BUSY for o in outcomes[:-1])
    assert [e.kind for e in trace] == ["snapshot", "write"] * 3 + ["snapshot"]
    assert [e.local for e in trace if e.kind == "write"] == [1, 2, 3]
    assert p.in_cs and p.view == [p.id] * 3


def test_solo_unlock_resets_memory():
    p, mem, trace = solo()
    p.begin_lock()
    while p.step(mem) is not Outcome.ENTERED:
        pass
    start = len(trace)
    assert p.begin_unlock() is Outcome.EXITING
    while p.step(mem) is not Outcome.RELEASED:
        pass
    assert [e.kind for e in trace][start:] == ["read", "write"] * 3
    assert mem.cells == [BOT] * 3 and p.in_remainder


def test_shrink_touches_only_own_entries():
    p, mem, trace = solo()
    mem.write(0, 1, p.id)
    mem.write(0, 3, p.id)
    p.pc, p.view = RwPc.IN_CS, [p.id, BOT, p.id]
    p.begin_unlock()
    while p.step(mem) is not Outcome.RELEASED:
        pass
    assert [(e.kind, e.local) for e in trace][2:] == [("read", 1), ("write", 1), ("read", 3), ("write", 3)]
    assert mem.cells == [BOT] * 3


def test_shrink_skips_cells_already_reset():
    p, mem, trace = solo()
    p.pc, p.view = RwPc.IN_CS, [p.id, BOT, BOT]
    p.begin_unlock()
    assert p.step(mem) is Outcome.RELEASED
    assert [e.kind for e in trace] == ["read"]


def test_shrink_with_nothing_owned_is_immediate():
    p, mem, trace = solo()
    p.pc, p.view = RwPc.IN_CS, [BOT, BOT, BOT]
    assert p.begin_unlock() is Outcome.RELEASED
    assert len(trace) == 0 and p.in_remainder


def test_usage_errors():
    p, mem, _ = solo()
    with pytest.raises(UsageError):
        p.begin_unlock()
    p.begin_lock()
    with pytest.raises(UsageError):
        p.begin_lock()
    while p.step(mem) is not Outcome.ENTERED:
        pass
    p.begin_unlock()
    with pytest.raises(UsageError):
        p.begin_unlock()


def test_write_guard_catches_stale_target():
    p, mem, _ = solo()
    p.pc, p.cursor, p.view = RwPc.WRITE, 1, [p.id, BOT, BOT]
    with pytest.raises(HarnessError):
        p.step(mem)


def test_withdraws_when_outnumbered():
    a, b = make_identities(2)
    mem = RegisterArray(3, identity_permutations(2, 3), [a, b])
    mem.write(0, 1, a)
    mem.write(1, 2, b)
    mem.write(1, 3, b)
    p = RwProcess(0, a, 3)
    p.begin_lock()
    assert p.step(mem) is Outcome.BUSY and p.pc == RwPc.SHRINK_READ and p.cnt == 2
    assert p.step(mem) is Outcome.BUSY
    assert p.step(mem) is Outcome.WITHDRAWN
    assert mem.cells == [BOT, b, b]


def test_stays_when_holding_share():
    a, b = make_identities(2)
    mem = RegisterArray(3, identity_permutations(2, 3), [a, b])
    mem.write(0, 1, a)
    mem.write(0, 2, a)
    mem.write(1, 3, b)
    p = RwProcess(0, a, 3)
    p.begin_lock()
    assert p.step(mem) is Outcome.BUSY and p.pc == RwPc.SNAPSHOT


def _write_discipline(trace):
    last_view = {}
    for ev in trace:
        if ev.kind == "snapshot" and ev.phase in ("atomic", "done"):
            last_view[ev.proc] = parse_view(ev.after)
        if ev.kind == "write" and ev.after != "bot":
            assert ev.after == f"id{ev.proc}"
            assert last_view[ev.proc][ev.local - 1] == -1


@settings(max_examples=40)
@given(n=st.integers(2, 3), seed=st.integers(0, 2**32), fine=st.booleans(), perm=st.sampled_from(["identity", "seeded"]))
def test_random_runs_hold(n, seed, fine, perm):
    m = {2: 3, 3: 5}[n]
    cfg = RunConfig(n=n, m=m, algorithm=RW, snapshot_mode="fine" if fine else "atomic",
                    scheduler=SchedulerSpec(RANDOM), permutations=perm, cycles=3, seed=seed)
    res = run(cfg)
    assert res.summary.termination == "completed"
    assert res.summary.entries == [3] * n
    assert all(v.status == HOLDS for v in check_trace(res.trace, RW, cfg))
    _write_discipline(res.trace)
