"""Balanced sum tree over a growable row of nonnegative leaf values.

Leaves are addressed 1-based, matching the ``a_1 .. a_k`` labelling of big
nodes. ``return_index(y)`` finds the leaf whose half-open prefix interval
``[A_{i-1}, A_i)`` contains ``y``.

Internal sums are rebuilt from their two children on every update instead
of being bumped by the delta, so a subtree of zero leaves always sums to an
exact zero and no drift accumulates.
"""
from __future__ import annotations

from typing import List, Optional


class SamplerTree:
    def __init__(self, size: int = 1, zero=0.0):
        if size < 1:
            raise ValueError("size must be positive")
        self._zero = zero
        self._size = size
        self._cap = 1
        while self._cap < size:
            self._cap *= 2
        self._sums: List = [zero] * (2 * self._cap)

    @classmethod
    def from_values(cls, values, zero=0.0) -> "SamplerTree":
        tree = cls(max(1, len(values)), zero=zero)
        cap = tree._cap
        for i, a in enumerate(values):
            if a < 0:
                raise ValueError(f"leaf {i + 1} is negative")
            tree._sums[cap + i] = a
        for x in range(cap - 1, 0, -1):
            tree._sums[x] = tree._sums[2 * x] + tree._sums[2 * x + 1]
        return tree

    def __len__(self) -> int:
        return self._size

    @property
    def total(self):
        return self._sums[1]

    def values(self) -> List:
        return self._sums[self._cap:self._cap + self._size]

    def value(self, i: int):
        self._check(i)
        return self._sums[self._cap + i - 1]

    def grow(self, size: int) -> None:
        """Extend to ``size`` leaves; new leaves are zero."""
        if size <= self._size:
            return
        if size > self._cap:
            old = self.values()
            cap = self._cap
            while cap < size:
                cap *= 2
            self._cap = cap
            self._sums = [self._zero] * (2 * cap)
            self._sums[cap:cap + len(old)] = old
            for x in range(cap - 1, 0, -1):
                self._sums[x] = self._sums[2 * x] + self._sums[2 * x + 1]
        self._size = size

    def increment(self, i: int, delta) -> None:
        self._check(i)
        new = self._sums[self._cap + i - 1] + delta
        if new < 0:
            raise ValueError(f"leaf {i} would become negative ({new})")
        self._write(i, new)

    def set(self, i: int, value) -> None:
        self._check(i)
        if value < 0:
            raise ValueError(f"leaf {i} would become negative ({value})")
        self._write(i, value)

    def return_index(self, y) -> Optional[int]:
        """Leaf ``i`` with ``A_{i-1} <= y < A_i``, or ``None`` past the total."""
        if y < 0:
            raise ValueError("y must be nonnegative")
        sums = self._sums
        if not y < sums[1]:
            return None
        x = 1
        acc = self._zero
        cap = self._cap
        while x < cap:
            left = 2 * x
            if y < acc + sums[left]:
                x = left
            else:
                acc = acc + sums[left]
                x = left + 1
        return x - cap + 1

    def prefix(self, i: int):
        """``A_i``, the sum of the first ``i`` leaves."""
        if not 0 <= i <= self._size:
            raise IndexError(i)
        sums = self._sums
        if i == self._cap:
            return sums[1]
        acc = self._zero
        x = self._cap + i
        # walk up from the boundary, adding left siblings
        while x > 1:
            if x & 1:
                acc = acc + sums[x - 1]
            x >>= 1
        return acc

    def check(self) -> List[str]:
        """Internal nodes that disagree with their children."""
        sums = self._sums
        bad = []
        for x in range(1, self._cap):
            if sums[x] != sums[2 * x] + sums[2 * x + 1]:
                bad.append(f"node {x}: {sums[x]!r} != {sums[2 * x]!r} + {sums[2 * x + 1]!r}")
        for x in range(self._cap + self._size, 2 * self._cap):
            if sums[x] != self._zero:
                bad.append(f"padding leaf {x - self._cap + 1} is nonzero")
        return bad

    def _check(self, i: int) -> None:
        if not 1 <= i <= self._size:
            raise IndexError(f"leaf index {i} outside [1, {self._size}]")

    def _write(self, i: int, value) -> None:
        sums = self._sums
        x = self._cap + i - 1
        sums[x] = value
        x >>= 1
        while x:
            sums[x] = sums[2 * x] + sums[2 * x + 1]
            x >>= 1
