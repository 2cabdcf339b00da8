from collections import Counter

import pytest
from hypothesis import given, strategies as st

from anonmutex.rng import XorShift64Star


def test_reproducible():
    a, b = XorShift64Star(42), XorShift64Star(42)
    assert [a.next64() for _ in range(10)] == [b.next64() for _ in range(10)]
    assert XorShift64Star(1).next64() != XorShift64Star(2).next64()


def test_zero_seed_is_usable():
    r = XorShift64Star(0)
    assert len({r.next64() for _ in range(100)}) == 100


@given(st.integers(0, 2**64 - 1), st.integers(1, 1000))
def test_below_in_range(seed, k):
    r = XorShift64Star(seed)
    assert all(0 <= r.below(k) < k for _ in range(20))


def test_below_rejects_empty_range():
    with pytest.raises(ValueError):
        XorShift64Star(1).below(0)


def test_below_roughly_uniform():
    r = XorShift64Star(7)
    counts = Counter(r.below(3) for _ in range(30000))
    assert all(9500 < counts[k] < 10500 for k in range(3))
