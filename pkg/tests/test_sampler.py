from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dynoprimal.sampler import SamplerTree


def scan(values, y):
    """Linear-scan oracle: smallest i with A_{i-1} <= y < A_i, 1-based."""
    acc = 0
    for i, a in enumerate(values, start=1):
        if acc <= y < acc + a:
            return i
        acc += a
    return None


A = [Fraction(3, 10), Fraction(1, 2), Fraction(1, 5), Fraction(2, 5)]


def tree():
    return SamplerTree.from_values(A, zero=Fraction(0))


def test_increment():
    t = tree()
    t.increment(2, Fraction(1, 10))
    assert t.values() == [Fraction(3, 10), Fraction(3, 5), Fraction(1, 5), Fraction(2, 5)]
    assert t.total == Fraction(3, 2)
    assert t.check() == []


def test_increment_zero_is_noop():
    t = tree()
    t.increment(3, 0)
    assert t.values() == A
    assert t.total == sum(A)


def test_increment_to_zero():
    t = tree()
    t.increment(1, Fraction(-3, 10))
    assert t.value(1) == 0
    assert t.total == Fraction(11, 10)
    assert t.check() == []
    assert t.return_index(0) == 2


def test_negative_result_rejected():
    t = tree()
    with pytest.raises(ValueError):
        t.increment(3, Fraction(-1, 2))
    with pytest.raises(IndexError):
        t.increment(5, 1)


def test_return_index():
    t = tree()
    assert t.return_index(Fraction(9, 10)) == 3
    assert t.return_index(0) == 1
    assert t.return_index(Fraction(7, 5)) is None
    with pytest.raises(ValueError):
        t.return_index(-1)


def test_prefix_and_grow():
    t = tree()
    assert [t.prefix(i) for i in range(5)] == [0, Fraction(3, 10), Fraction(4, 5), 1, Fraction(7, 5)]
    t.grow(9)
    assert len(t) == 9
    assert t.values()[:4] == A and t.total == sum(A)
    t.set(9, 1)
    assert t.return_index(Fraction(7, 5)) == 9
    assert t.check() == []


@settings(max_examples=200, deadline=None)
@given(size=st.integers(1, 40),
       ops=st.lists(st.tuples(st.integers(0, 10_000), st.integers(-8, 16), st.integers(0, 10_000)), max_size=80))
def test_matches_scan_oracle(size, ops):
    t = SamplerTree(size, zero=Fraction(0))
    ref = [Fraction(0)] * size
    for i, delta, y in ops:
        i = i % size + 1
        d = Fraction(delta, 8)
        if ref[i - 1] + d < 0:
            d = -ref[i - 1]
        t.increment(i, d)
        ref[i - 1] += d
        total = sum(ref)
        probe = Fraction(y, 10_000) * (total + 1)
        assert t.return_index(probe) == scan(ref, probe)
    assert t.values() == ref
    assert t.check() == []
