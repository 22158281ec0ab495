"""Dynamic set cover on top of the partition engine.

Each set becomes a node whose capacity is the set's cost, each element an
edge over the sets containing it, and the edge cap is ``mu = max cost + 1``.
The cover is the set of nodes whose fractional load reaches ``c_S / lam``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .partition import DRIFT_TOL, Config, PartitionError, PartitionState, Violation

__all__ = ["SetCoverError", "SetCoverInstance", "SetCoverState", "build_setcover"]


class SetCoverError(PartitionError):
    pass


@dataclass(frozen=True)
class SetCoverInstance:
    """Named sets with positive costs; element frequency at most ``f``."""

    costs: Mapping[Hashable, float]
    f: int
    m: int
    eps: float = 0.1


class SetCoverState:
    def __init__(self, instance: SetCoverInstance):
        if not instance.costs:
            raise SetCoverError("the set collection is empty")
        names = list(instance.costs)
        costs = [float(instance.costs[s]) for s in names]
        for name, c in zip(names, costs):
            if not c > 0:
                raise SetCoverError(f"set {name!r} has non-positive cost {c}")
        self.instance = instance
        self.names: List[Hashable] = names
        self.index: Dict[Hashable, int] = {s: i for i, s in enumerate(names)}
        self.mu = max(costs) + 1
        config = Config(n=len(names), m=instance.m, f=instance.f, mu=self.mu, eps=instance.eps)
        self.engine = PartitionState(config, costs)
        self.lam = self.engine.lam
        self.elements: Dict[Hashable, int] = {}
        self.members: Dict[Hashable, Tuple[int, ...]] = {}
        self.in_cover: List[bool] = [False] * len(names)
        self.cover_cost = 0.0

    def insert_element(self, element: Hashable, member_sets: Iterable[Hashable]) -> None:
        if element in self.elements:
            raise SetCoverError(f"element {element!r} is already live")
        sets = list(member_sets)
        if not sets:
            raise SetCoverError(f"element {element!r} belongs to no set and cannot be covered")
        try:
            nodes = [self.index[s] for s in sets]
        except KeyError as exc:
            raise SetCoverError(f"unknown set {exc.args[0]!r}") from None
        eid = self.engine.insert_edge(nodes)
        self.elements[element] = eid
        self.members[element] = tuple(sorted(set(nodes)))
        self._refresh(self.engine.touched_nodes)

    def delete_element(self, element: Hashable) -> None:
        eid = self.elements.pop(element, None)
        if eid is None:
            raise SetCoverError(f"unknown element {element!r}")
        del self.members[element]
        self.engine.delete_edge(eid)
        self._refresh(self.engine.touched_nodes)

    def _refresh(self, nodes: Iterable[int]) -> None:
        eng = self.engine
        for v in nodes:
            now = eng.weight[v] >= eng.cstar[v]
            if now != self.in_cover[v]:
                self.in_cover[v] = now
                self.cover_cost += eng.cap[v] if now else -eng.cap[v]
        if not any(self.in_cover):
            self.cover_cost = 0.0

    def current_cover(self) -> Tuple[List[Hashable], float]:
        chosen = [self.names[v] for v, flag in enumerate(self.in_cover) if flag]
        cost = math.fsum(self.engine.cap[v] for v, flag in enumerate(self.in_cover) if flag)
        return chosen, cost

    def solution_value(self) -> float:
        return self.engine.solution_value()

    def verify_cover(self, cover: Optional[Iterable[Hashable]] = None) -> List[Violation]:
        """Live elements not hit by ``cover`` (defaults to the maintained one)."""
        if cover is None:
            chosen = set(v for v, flag in enumerate(self.in_cover) if flag)
        else:
            chosen = {self.index[s] for s in cover}
        return [
            Violation("uncovered", u, f"member sets {[self.names[v] for v in sets]}")
            for u, sets in self.members.items()
            if not chosen.intersection(sets)
        ]

    def verify_threshold(self) -> List[Violation]:
        """Cover membership against exactly recomputed node weights."""
        eng = self.engine
        exact = eng.exact_weights()
        out = []
        for v in range(eng.n):
            thr = eng.cap[v] / self.lam
            if abs(exact[v] - thr) <= DRIFT_TOL * max(1.0, thr):
                continue
            if (exact[v] >= thr) != self.in_cover[v]:
                out.append(Violation("threshold", self.names[v], f"W={exact[v]!r}, c/lam={thr!r}"))
        return out

    def cost_bound(self) -> float:
        """``lam * f * sum(x)``, the certified ceiling on the cover cost."""
        return self.lam * self.instance.f * self.solution_value()


def build_setcover(instance: SetCoverInstance) -> SetCoverState:
    return SetCoverState(instance)
