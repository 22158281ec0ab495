"""Dynamic integral b-matching by rounding the fractional partition solution.

The fractional layer is a :class:`PartitionState` with ``f = 2``, ``mu = 1``
and capacities ``c_v / gamma``. On top of it three random or derived edge
sets are kept current:

* ``E*``: edges of weight exactly 1 (level 0).
* ``H_B``: edges touching a big node. Edges between two big nodes are kept
  independently with probability ``w(e)``. A small node picks its big
  neighbours through a sum tree over its incident weights and one fixed
  uniform offset ``eta_v``, so it never picks more than ``c_v`` of them.
* ``H_S``: edges touching a small node, each kept independently with
  probability ``p_e = min(1, w(e) * c * lam * log2(n) / eps)``; ``M_S`` is a
  maximal b-matching inside ``H_S`` repaired greedily after every change.

Membership of an edge is redrawn every time its fractional weight changes.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .oracles import check_maximal, is_bmatching
from .partition import Config, PartitionError, PartitionState, Violation
from .sampler import SamplerTree

__all__ = ["BMatchError", "BMatchState", "MaximalBMatching", "RoundingConfig", "create_bmatch"]

Pair = Tuple[int, int]


class BMatchError(PartitionError):
    pass


@dataclass(frozen=True)
class RoundingConfig:
    eps: float = 0.1
    c: float = 4.0
    lam: float = 4.0

    def __post_init__(self) -> None:
        if not 0 < self.eps < 0.25:
            raise BMatchError(f"eps must lie in (0, 1/4), got {self.eps}")
        if not self.c > 1:
            raise BMatchError(f"sampling constant c must exceed 1, got {self.c}")

    @property
    def gamma(self) -> float:
        return 1 + 4 * self.eps

    def threshold(self, n: int) -> float:
        """Degree at which a node counts as big: ``c * log2 n``, at least 1."""
        return max(1.0, self.c * math.log2(max(n, 2)))

    def scale(self, n: int) -> float:
        """Factor turning a fractional weight into an H_S sampling probability."""
        return self.c * self.lam * math.log2(max(n, 2)) / self.eps


class MaximalBMatching:
    """Greedy maximal b-matching over a dynamic edge set.

    Every node keeps the set of its neighbours that still have residual
    capacity, refreshed whenever a node switches between saturated and
    free. A node that loses a matched edge rescans only that set.
    """

    def __init__(self, capacities: Sequence[int]):
        self.cap = list(capacities)
        n = len(self.cap)
        self.adj: List[Dict[int, int]] = [{} for _ in range(n)]
        self.free_nbrs: List[Dict[int, int]] = [{} for _ in range(n)]
        self.mdeg = [0] * n
        self.matched: Dict[int, Pair] = {}
        self.edges: Dict[int, Pair] = {}

    def __contains__(self, eid: int) -> bool:
        return eid in self.matched

    def __len__(self) -> int:
        return len(self.matched)

    def is_free(self, v: int) -> bool:
        return self.mdeg[v] < self.cap[v]

    def add(self, eid: int, u: int, v: int) -> None:
        self.edges[eid] = (u, v)
        self.adj[u][v] = eid
        self.adj[v][u] = eid
        if self.is_free(v):
            self.free_nbrs[u][v] = eid
        if self.is_free(u):
            self.free_nbrs[v][u] = eid
        if self.is_free(u) and self.is_free(v):
            self._match(eid, u, v)

    def remove(self, eid: int) -> List[int]:
        """Drop an edge; returns endpoints that gained residual capacity."""
        u, v = self.edges.pop(eid)
        del self.adj[u][v]
        del self.adj[v][u]
        self.free_nbrs[u].pop(v, None)
        self.free_nbrs[v].pop(u, None)
        if eid in self.matched:
            self._unmatch(eid, u, v)
            return [u, v]
        return []

    def rematch(self, nodes: Iterable[int]) -> None:
        for q in nodes:
            if not self.is_free(q):
                continue
            for u, eid in list(self.free_nbrs[q].items()):
                if eid in self.matched:
                    continue
                if self.is_free(u):
                    self._match(eid, q, u)
                    if not self.is_free(q):
                        break

    def clear(self) -> None:
        self.__init__(self.cap)

    def pairs(self) -> List[Pair]:
        return sorted(self.edges[e] for e in self.matched)

    def _match(self, eid: int, u: int, v: int) -> None:
        self.matched[eid] = (u, v)
        for x in (u, v):
            self.mdeg[x] += 1
            if self.mdeg[x] == self.cap[x]:
                for y in self.adj[x]:
                    self.free_nbrs[y].pop(x, None)

    def _unmatch(self, eid: int, u: int, v: int) -> None:
        del self.matched[eid]
        for x in (u, v):
            if self.mdeg[x] == self.cap[x]:
                for y, e in self.adj[x].items():
                    self.free_nbrs[y][x] = e
            self.mdeg[x] -= 1


class BMatchState:
    """Fractional b-matching plus the rounding structures on top of it."""

    def __init__(self, capacities: Sequence[int], config: RoundingConfig = RoundingConfig(),
                 seed: int = 0, m: Optional[int] = None):
        n = len(capacities)
        if n == 0:
            raise BMatchError("at least one node required")
        for v, c in enumerate(capacities):
            if int(c) != c or not 1 <= c <= n:
                raise BMatchError(f"capacity of node {v} must be an integer in [1, {n}], got {c}")
        self.n = n
        self.cap = [int(c) for c in capacities]
        self.config = config
        self.gamma = config.gamma
        self.tau = config.threshold(n)
        self.scale = config.scale(n)
        engine_cfg = Config(n=n, m=m if m is not None else n * n, f=2, mu=1.0, eps=config.eps)
        self.engine = PartitionState(engine_cfg, [c / self.gamma for c in self.cap])
        self.rng = random.Random(seed)
        self.eta = [self.rng.random() for _ in range(n)]

        self.pair_id: Dict[Pair, int] = {}
        self.pairs: Dict[int, Pair] = {}
        self.adj: List[Dict[int, int]] = [{} for _ in range(n)]
        self.big = [False] * n
        self.label: List[Optional[int]] = [None] * n
        self.labelled: List[int] = []  # label - 1 -> node
        self.trees: Dict[int, SamplerTree] = {}
        self.picks: Dict[int, Dict[int, int]] = {}  # small node -> {big nbr: eid}
        self.hb_coin: Set[int] = set()
        self.H_B: Dict[int, None] = {}
        self.H_S: Dict[int, float] = {}
        self.E_star: Dict[int, None] = {}
        self.M_S = MaximalBMatching(self.cap)
        self.reclassifications = 0
        self.last_events = 0

    # ----------------------------------------------------------------- queries

    def weight(self, eid: int) -> float:
        return self.engine.edge_weight(eid)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def p_sample(self, w: float) -> float:
        return min(1.0, w * self.scale)

    def ws_weight(self, w: float) -> float:
        return w if w * self.scale >= 1 else 1.0 / self.scale

    def in_ES(self, eid: int) -> bool:
        u, v = self.pairs[eid]
        return not self.big[u] or not self.big[v]

    def in_EB(self, eid: int) -> bool:
        u, v = self.pairs[eid]
        return self.big[u] or self.big[v]

    def nearly_tight(self) -> List[int]:
        return [v for v in range(self.n) if self.engine.weight[v] >= self.cap[v] / self.config.lam]

    def fractional_value(self) -> float:
        return self.engine.solution_value()

    def edge_set(self, ids: Iterable[int]) -> List[Pair]:
        return sorted(self.pairs[e] for e in ids)

    def current_matching(self) -> List[Pair]:
        """Largest of ``E*``, capacity-repaired ``H_B`` and ``M_S``."""
        return self.candidates()[0][1]

    def candidates(self) -> List[Tuple[str, List[Pair]]]:
        cands = [
            ("E*", self.edge_set(self.E_star)),
            ("H_B", self._repair(self.edge_set(self.H_B))),
            ("M_S", self.M_S.pairs()),
        ]
        return sorted(cands, key=lambda kv: -len(kv[1]))

    def _repair(self, edges: List[Pair]) -> List[Pair]:
        deg = [0] * self.n
        kept = []
        for u, v in edges:
            if deg[u] < self.cap[u] and deg[v] < self.cap[v]:
                deg[u] += 1
                deg[v] += 1
                kept.append((u, v))
        return kept

    # ----------------------------------------------------------------- updates

    def insert_edge(self, u: int, v: int) -> int:
        pair = self._pair(u, v)
        if pair in self.pair_id:
            raise BMatchError(f"edge {pair} is already live")
        eid = self.engine.insert_edge(pair)
        self.pair_id[pair] = eid
        self.pairs[eid] = pair
        self.adj[pair[0]][pair[1]] = eid
        self.adj[pair[1]][pair[0]] = eid
        dirty = set(self.engine.changed_edges)
        dirty.add(eid)
        self._after_update(pair, dirty)
        return eid

    def delete_edge(self, u: int, v: int) -> None:
        pair = self._pair(u, v)
        eid = self.pair_id.pop(pair, None)
        if eid is None:
            raise BMatchError(f"edge {pair} is not live")
        self.engine.delete_edge(eid)
        del self.pairs[eid]
        del self.adj[pair[0]][pair[1]]
        del self.adj[pair[1]][pair[0]]
        self.E_star.pop(eid, None)
        self.hb_coin.discard(eid)
        self.H_B.pop(eid, None)
        freed: List[int] = []
        if eid in self.H_S:
            del self.H_S[eid]
            freed = self.M_S.remove(eid)
        marks: Set[int] = set()
        a, b = pair
        for s, t in ((a, b), (b, a)):
            if not self.big[s] and self.label[t] is not None and s in self.trees:
                self._set_leaf(s, t, 0.0)
                self.picks.get(s, {}).pop(t, None)
                marks.add(s)
        self._after_update(pair, set(self.engine.changed_edges), marks, freed)

    def apply_weight_events(self, events: Iterable[Tuple[int, float]],
                            marks: Optional[Set[int]] = None) -> Tuple[List[int], List[int]]:
        """Redraw memberships of edges whose fractional weight changed.

        Returns the ``(removed, added)`` edge ids of ``H_S``; small nodes
        whose sampler tree changed have their big picks recomputed.
        """
        marks = set() if marks is None else marks
        hs_removed: List[int] = []
        hs_added: List[int] = []
        count = 0
        for eid, w in events:
            count += 1
            u, v = self.pairs[eid]
            if w == 1.0:
                self.E_star[eid] = None
            else:
                self.E_star.pop(eid, None)
            if self.in_ES(eid):
                keep = self.rng.random() < self.p_sample(w)
                if keep:
                    if eid not in self.H_S:
                        hs_added.append(eid)
                    self.H_S[eid] = self.ws_weight(w)
                elif eid in self.H_S:
                    del self.H_S[eid]
                    hs_removed.append(eid)
            elif eid in self.H_S:
                del self.H_S[eid]
                hs_removed.append(eid)
            if self.big[u] and self.big[v]:
                if self.rng.random() < w:
                    self.hb_coin.add(eid)
                    self.H_B[eid] = None
                else:
                    self.hb_coin.discard(eid)
                    self.H_B.pop(eid, None)
            else:
                if eid in self.hb_coin:
                    self.hb_coin.discard(eid)
                    self.H_B.pop(eid, None)
                for s, t in ((u, v), (v, u)):
                    if not self.big[s] and self.label[t] is not None:
                        self._set_leaf(s, t, w if self.big[t] else 0.0)
                        marks.add(s)
        for s in sorted(marks):
            if not self.big[s]:
                self._repick(s)
        self.last_events = count
        return hs_removed, hs_added

    def repair_maximal_matching(self, removed: Iterable[int], added: Iterable[int],
                                freed: Iterable[int] = ()) -> None:
        freed = list(freed)
        for eid in removed:
            if eid in self.M_S.edges:
                freed.extend(self.M_S.remove(eid))
        for eid in added:
            u, v = self.pairs[eid]
            self.M_S.add(eid, u, v)
        self.M_S.rematch(sorted(set(freed)))

    def resample(self, seed: int) -> None:
        """Redraw every random choice from a fresh seed, keeping ``w`` fixed."""
        self.rng = random.Random(seed)
        self.eta = [self.rng.random() for _ in range(self.n)]
        self.hb_coin.clear()
        self.H_B.clear()
        self.H_S.clear()
        self.picks.clear()
        self.M_S.clear()
        events = [(eid, self.weight(eid)) for eid in sorted(self.pairs)]
        _, added = self.apply_weight_events(events, set(self.trees))
        self.repair_maximal_matching([], added)

    # --------------------------------------------------------------- internals

    def _pair(self, u: int, v: int) -> Pair:
        for x in (u, v):
            if not isinstance(x, int) or not 0 <= x < self.n:
                raise BMatchError(f"unknown node {x!r}")
        if u == v:
            raise BMatchError(f"self-loop on node {u}")
        return (u, v) if u < v else (v, u)

    def _after_update(self, pair: Pair, dirty: Set[int], marks: Optional[Set[int]] = None,
                      freed: Sequence[int] = ()) -> None:
        marks = set() if marks is None else marks
        freed = list(freed)
        for x in pair:
            d = len(self.adj[x])
            if not self.big[x] and d >= self.tau:
                self._promote(x, marks, freed)
                dirty.update(self.adj[x].values())
            elif self.big[x] and d <= self.tau / 2:
                self._demote(x, marks)
                dirty.update(self.adj[x].values())
        events = [(eid, self.weight(eid)) for eid in sorted(dirty) if eid in self.pairs]
        removed, added = self.apply_weight_events(events, marks)
        self.repair_maximal_matching(removed, added, freed)

    def _promote(self, v: int, marks: Set[int], freed: List[int]) -> None:
        self.reclassifications += 1
        for eid in self.picks.pop(v, {}).values():
            self.H_B.pop(eid, None)
        self.trees.pop(v, None)
        marks.discard(v)
        self.big[v] = True
        if self.label[v] is None:
            self.labelled.append(v)
            self.label[v] = len(self.labelled)
        # edges to big neighbours leave E_S
        for u, eid in self.adj[v].items():
            if self.big[u] and eid in self.H_S:
                del self.H_S[eid]
                freed.extend(self.M_S.remove(eid))

    def _demote(self, v: int, marks: Set[int]) -> None:
        self.reclassifications += 1
        self.big[v] = False
        for u, eid in self.adj[v].items():
            if eid in self.hb_coin:
                self.hb_coin.discard(eid)
                self.H_B.pop(eid, None)
        marks.add(v)

    def _tree(self, s: int) -> SamplerTree:
        tree = self.trees.get(s)
        size = max(1, len(self.labelled))
        if tree is None:
            tree = self.trees[s] = SamplerTree(size)
        else:
            tree.grow(size)
        return tree

    def _set_leaf(self, s: int, t: int, w: float) -> None:
        tree = self._tree(s)
        tree.set(self.label[t], w)

    def _repick(self, s: int) -> None:
        tree = self.trees.get(s)
        old = self.picks.get(s, {})
        new: Dict[int, int] = {}
        if tree is not None and tree.total > 0:
            eta = self.eta[s]
            for k in range(self.cap[s]):
                i = tree.return_index(k + eta)
                if i is None:
                    break
                t = self.labelled[i - 1]
                new[t] = self.adj[s][t]
        for t, eid in old.items():
            if t not in new:
                self.H_B.pop(eid, None)
        for t, eid in new.items():
            self.H_B[eid] = None
        if new:
            self.picks[s] = new
        else:
            self.picks.pop(s, None)

    # ------------------------------------------------------------ verification

    def verify_rounding(self) -> List[Violation]:
        out: List[Violation] = []
        eng = self.engine
        hb_deg = [0] * self.n
        for eid in self.H_B:
            if eid not in self.pairs or not self.in_EB(eid):
                out.append(Violation("H_B-outside-E_B", eid))
                continue
            u, v = self.pairs[eid]
            hb_deg[u] += 1
            hb_deg[v] += 1
        for v in range(self.n):
            if not self.big[v] and hb_deg[v] > self.cap[v]:
                out.append(Violation("small-H_B-degree", v, f"{hb_deg[v]} > {self.cap[v]}"))
        for eid in self.H_S:
            if eid not in self.pairs or not self.in_ES(eid):
                out.append(Violation("H_S-outside-E_S", eid))
        for eid in self.M_S.matched:
            if eid not in self.H_S:
                out.append(Violation("M_S-outside-H_S", eid))
        hs_pairs = [self.pairs[e] for e in self.H_S if e in self.pairs]
        out += check_maximal(self.M_S.pairs(), hs_pairs, self.cap)
        exact_star = {eid for eid, e in eng.edges.items() if e.level == 0}
        if exact_star != set(self.E_star):
            out.append(Violation("E*", None, f"{len(exact_star ^ set(self.E_star))} edges differ"))
        for v in range(self.n):
            d = len(self.adj[v])
            if self.big[v] and d <= self.tau / 2 or not self.big[v] and d >= self.tau:
                out.append(Violation("class", v, f"big={self.big[v]} with degree {d}"))
        out += self._verify_trees()
        for name, edges in self.candidates():
            if not is_bmatching(edges, self.cap):
                out.append(Violation("invalid-b-matching", name))
        return out

    def _verify_trees(self) -> List[Violation]:
        out: List[Violation] = []
        for s in range(self.n):
            if self.big[s]:
                if s in self.picks:
                    out.append(Violation("big-node-picks", s))
                continue
            tree = self.trees.get(s)
            leaves = [0.0] * len(self.labelled)
            for t, eid in self.adj[s].items():
                if self.big[t]:
                    leaves[self.label[t] - 1] = self.weight(eid)
            if tree is None:
                if any(leaves):
                    out.append(Violation("missing-tree", s))
                continue
            for msg in tree.check():
                out.append(Violation("tree-sum", s, msg))
            vals = tree.values() + [0.0] * (len(leaves) - len(tree))
            if vals != leaves:
                out.append(Violation("tree-leaves", s, "leaf weights differ from incident edges"))
            # interval rule by linear scan over exact prefix sums
            prefix = [0.0]
            for a in leaves:
                prefix.append(prefix[-1] + a)
            expect = set()
            for k in range(self.cap[s]):
                y = k + self.eta[s]
                for i in range(1, len(prefix)):
                    if prefix[i - 1] <= y < prefix[i]:
                        expect.add(self.labelled[i - 1])
                        break
            got = set(self.picks.get(s, {}))
            if got != expect:
                out.append(Violation("interval-rule", s, f"picked {sorted(got)}, scan {sorted(expect)}"))
            for t, eid in self.picks.get(s, {}).items():
                if eid not in self.H_B:
                    out.append(Violation("pick-not-in-H_B", s, f"edge {eid}"))
        picked = {eid for p in self.picks.values() for eid in p.values()}
        if set(self.H_B) != picked | self.hb_coin:
            out.append(Violation("H_B-bookkeeping", None, "H_B differs from picks plus coins"))
        return out


def create_bmatch(n: int, capacities: Sequence[int], config: RoundingConfig = RoundingConfig(),
                  seed: int = 0, m: Optional[int] = None) -> BMatchState:
    if len(capacities) != n:
        raise BMatchError(f"expected {n} capacities, got {len(capacities)}")
    return BMatchState(capacities, config, seed=seed, m=m)
