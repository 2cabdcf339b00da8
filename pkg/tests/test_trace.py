import pytest
from hypothesis import given, settings, strategies as st

from anonmutex.executor import RANDOM, RunConfig, SchedulerSpec, run
from anonmutex.trace import Event, MalformedTrace, Trace, parse_payload, parse_view


def test_payload_parsing():
    assert parse_payload("bot") == -1
    assert parse_payload("id12") == 12
    assert parse_view("id0,bot,id1") == [0, -1, 1]
    with pytest.raises(MalformedTrace):
        parse_payload("nil")


def test_record_fields_and_bot_literal():
    res = run(RunConfig(n=1, m=1, algorithm="rmw"))
    line = res.trace.dumps().splitlines()[1]
    assert line == '{"step":0,"proc":0,"kind":"cas","local":1,"external":1,"before":"bot","after":"id0","ok":true,"phase":null}'


@settings(max_examples=20)
@given(st.integers(0, 2**32), st.sampled_from(["rw", "rmw"]))
def test_round_trip(seed, alg):
    res = run(RunConfig(n=2, m=3, algorithm=alg, snapshot_mode="fine", scheduler=SchedulerSpec(RANDOM),
                        cycles=2, seed=seed))
    again = Trace.loads(res.trace.dumps())
    assert again == res.trace
    assert again.dumps() == res.trace.dumps()
    assert again.schedule() == res.schedule


def test_file_round_trip(tmp_path):
    res = run(RunConfig(n=2, m=3, scheduler=SchedulerSpec(RANDOM), cycles=2))
    path = tmp_path / "t.jsonl"
    res.trace.write(path)
    assert Trace.read(path) == res.trace


@pytest.mark.parametrize("text", [
    "not json\n",
    '{"step":0}\n',
    '{"step":1,"proc":0,"kind":"read","local":1,"external":1,"before":"bot","after":"bot","ok":null,"phase":null}\n',
    '{"step":0,"proc":0,"kind":"poke","local":1,"external":1,"before":"","after":"","ok":null,"phase":null}\n',
    '{"step":0,"proc":0,"kind":"phase","local":null,"external":null,"before":"","after":"","ok":null,"phase":"nap"}\n',
    '{"step":0,"proc":0,"kind":"read","local":null,"external":1,"before":"","after":"","ok":null,"phase":null}\n',
])
def test_malformed_rejected(text):
    with pytest.raises(MalformedTrace):
        Trace.loads(text)


def test_empty_trace_is_valid():
    assert len(Trace.loads("")) == 0
    Trace([Event(0, 0, "phase", phase="trying")]).validate()
