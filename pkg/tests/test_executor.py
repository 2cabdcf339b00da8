import pytest
from hypothesis import given, settings, strategies as st

from anonmutex.errors import ConfigurationError
from anonmutex.executor import (RANDOM, ROUND_ROBIN, SCRIPTED, RunConfig, Scheduler, SchedulerSpec,
                                Simulation, build_permutations, fairness_gap, lock_step_schedule, run)
from anonmutex.numtheory import RMW, RW
from anonmutex.verifier import HOLDS, check_mutual_exclusion


def test_solo_rw_trace_matches_hand_simulation():
    res = run(RunConfig(n=1, m=3, algorithm=RW))
    got = [(e.kind, e.phase) for e in res.trace]
    lock = [("phase", "trying")] + [("snapshot", "atomic"), ("write", None)] * 3 + [("snapshot", "atomic"),
                                                                                     ("phase", "in_cs")]
    unlock = [("phase", "exiting")] + [("read", None), ("write", None)] * 3 + [("phase", "remainder")]
    assert got == lock + unlock
    assert res.summary.entries == [1] and res.summary.termination == "completed"


def test_rw_two_processes_seed_42():
    cfg = RunConfig(n=2, m=3, algorithm=RW, scheduler=SchedulerSpec(RANDOM), permutations="seeded",
                    cycles=10, seed=42)
    res = run(cfg)
    assert res.summary.entries == [10, 10]
    assert check_mutual_exclusion(res.trace).status == HOLDS


def test_lock_step_orders():
    for ell in (2, 3):
        s = Scheduler(lock_step_schedule(ell), ell, 0)
        assert [s.choose(list(range(ell))) for _ in range(2 * ell)] == list(range(ell)) * 2
    with pytest.raises(ConfigurationError):
        lock_step_schedule(1)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        RunConfig(n=2, m=5, permutations="ring", ell=2)
    with pytest.raises(ConfigurationError):
        RunConfig(n=2, m=6, permutations="ring", ell=3)
    with pytest.raises(ConfigurationError):
        RunConfig(n=2, m=3, max_steps=0)
    with pytest.raises(ConfigurationError):
        RunConfig(n=2, m=3, algorithm="tas")
    with pytest.raises(ConfigurationError):
        RunConfig(n=2, m=3, scheduler=SchedulerSpec(SCRIPTED, script=(0, 2)))
    with pytest.raises(ConfigurationError):
        SchedulerSpec("fifo")


def test_scripted_runs():
    cfg = RunConfig(n=2, m=3, scheduler=SchedulerSpec(SCRIPTED, script=(0, 1, 0)))
    res = run(cfg)
    assert res.schedule == [0, 1, 0]
    assert res.summary.termination == "script-exhausted"


def test_scripted_step_on_parked_process_rejected():
    cfg = RunConfig(n=2, m=1, algorithm=RMW, scheduler=SchedulerSpec(SCRIPTED, script=(0,) * 5))
    with pytest.raises(ConfigurationError):
        run(cfg)


def test_parked_processes_leave_the_schedule():
    res = run(RunConfig(n=3, m=5, algorithm=RMW, scheduler=SchedulerSpec(RANDOM), cycles=2, seed=3))
    for p, stop in enumerate(res.park_step):
        assert stop is not None
        assert p not in res.schedule[stop + 1:]


configs = st.builds(
    RunConfig,
    n=st.integers(2, 3),
    m=st.sampled_from([5, 7]),
    algorithm=st.sampled_from([RW, RMW]),
    snapshot_mode=st.sampled_from(["atomic", "fine"]),
    scheduler=st.sampled_from([SchedulerSpec(ROUND_ROBIN), SchedulerSpec(RANDOM)]),
    permutations=st.sampled_from(["identity", "seeded"]),
    cycles=st.integers(1, 3),
    seed=st.integers(0, 2**63),
)


@settings(max_examples=30)
@given(configs)
def test_determinism_and_fidelity(cfg):
    a, b = run(cfg), run(cfg)
    assert a.trace.dumps() == b.trace.dumps()
    a.trace.validate()
    perms = build_permutations(cfg)
    for ev in a.trace:
        if ev.local is not None:
            assert ev.external == perms[ev.proc](ev.local)


@settings(max_examples=30)
@given(configs)
def test_config_round_trip(cfg):
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


@settings(max_examples=30)
@given(configs)
def test_round_robin_fairness(cfg):
    cfg = RunConfig.from_dict({**cfg.to_dict(), "scheduler": {"kind": ROUND_ROBIN}})
    res = run(cfg, record=False)
    assert res.summary.termination == "completed"
    assert fairness_gap(res) <= cfg.n - 1


def test_lock_step_fairness():
    cfg = RunConfig(n=3, m=6, algorithm=RMW, scheduler=lock_step_schedule(3), permutations="ring", ell=3,
                    max_steps=3000)
    res = run(cfg, record=False)
    assert fairness_gap(res) <= 2


def test_simulation_key_round_trip():
    cfg = RunConfig(n=2, m=3, algorithm=RMW, cycles=None)
    sim = Simulation(cfg, record=False)
    for i in [0, 1, 1, 0, 0, 0, 1, 1, 0, 1]:
        sim.step(i)
    key = sim.key()
    other = Simulation(cfg, record=False)
    other.load(key)
    assert other.key() == key
