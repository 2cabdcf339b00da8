import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from anonmutex.errors import ConfigurationError
from anonmutex.executor import RunConfig
from anonmutex.kernel import NATIVE_AVAILABLE, PythonKernel, initial_key, make_kernel
from anonmutex.numtheory import RMW, RW
from anonmutex.verifier import explore

native = pytest.mark.skipif(not NATIVE_AVAILABLE, reason="compiled kernel not built")


def reachable(kernel, start, limit):
    seen, todo = {start}, [start]
    while todo and len(seen) < limit:
        k = todo.pop()
        for _, nk, _ in kernel.expand(k):
            if nk not in seen:
                seen.add(nk)
                todo.append(nk)
    return seen


def test_python_kernel_rejects_fine_rw():
    with pytest.raises(ConfigurationError):
        PythonKernel(RunConfig(n=2, m=3, snapshot_mode="fine"))
    with pytest.raises(ConfigurationError):
        make_kernel(RunConfig(n=2, m=3), backend="gpu")


def test_python_kernel_successors():
    cfg = RunConfig(n=2, m=1, algorithm=RMW)
    k = make_kernel(cfg, "python")
    out = k.expand(initial_key(cfg))
    assert [p for p, _, _ in out] == [0, 1]
    assert out[0][1][0] == 1 and out[1][1][0] == 2


@native
@settings(max_examples=30)
@given(alg=st.sampled_from([RW, RMW]), n=st.integers(1, 3), m=st.integers(1, 5), seed=st.integers(0, 2**32))
def test_backends_agree(alg, n, m, seed):
    cfg = RunConfig(n=n, m=m, algorithm=alg, permutations="seeded", seed=seed)
    py, nat = make_kernel(cfg, "python"), make_kernel(cfg, "native")
    for key in reachable(nat, initial_key(cfg), 400):
        assert nat.expand(key) == py.expand(key)


@native
@pytest.mark.parametrize("alg,m", [(RW, 3), (RMW, 3), (RMW, 2), (RW, 2)])
def test_backends_explore_identically(alg, m):
    cfg = RunConfig(n=2, m=m, algorithm=alg, permutations="seeded", seed=11)
    a, b = explore(cfg, backend="python"), explore(cfg, backend="native")
    for name in ("states", "edges", "max_depth", "trap_states"):
        assert a.stats[name] == b.stats[name]
    assert {k: v.status for k, v in a.verdicts.items()} == {k: v.status for k, v in b.verdicts.items()}
    assert a.verdicts["deadlock_freedom"].to_dict() == b.verdicts["deadlock_freedom"].to_dict()


@native
def test_native_limits():
    with pytest.raises(ValueError):
        make_kernel(RunConfig(n=2, m=40), "native")
    k = make_kernel(RunConfig(n=2, m=3), "native")
    with pytest.raises(ValueError):
        k.expand((0, 0))


def test_fallback_selected_without_extension():
    code = (
        "import sys; sys.modules['anonmutex._kernel'] = None\n"
        "from anonmutex import kernel\n"
        "from anonmutex.executor import RunConfig\n"
        "from anonmutex.verifier import explore\n"
        "assert not kernel.NATIVE_AVAILABLE and kernel.DEFAULT_BACKEND == 'python'\n"
        "rep = explore(RunConfig(n=2, m=3, algorithm='rw'))\n"
        "assert rep.holds and rep.stats['backend'] == 'python' and rep.stats['states'] == 4698\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
