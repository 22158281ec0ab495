"""Dynamic (alpha, beta)-partition for fractional hypergraph b-matching.

Every node sits on a level in ``[0, L]``; an edge inherits the highest level
among its endpoints and carries weight ``mu * beta**-level``. After each
insertion or deletion, nodes whose weight leaves the band
``[c*_v, c_v]`` are moved one level at a time until every node is clean
again. The resulting edge weights are a feasible, ``f*alpha*beta``-maximal
fractional b-matching.

Incidence lists are kept per node and per level as insertion-ordered dicts
(``level -> {edge_id: None}``). An edge always lives in bucket ``level(e)``
of every endpoint, so the bucket at ``level(v)`` is exactly the edge set that
moves when ``v`` changes level.
"""
from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

__all__ = [
    "DRIFT_TOL",
    "BankAudit",
    "Config",
    "EdgeRecord",
    "Metrics",
    "PartitionError",
    "PartitionState",
    "Violation",
    "create_partition",
]

# Relative slack allowed between the cached node weight and an exact
# recomputation, and in the threshold checks done by the verifiers.
DRIFT_TOL = 1e-9


class PartitionError(ValueError):
    """Raised on invalid configuration or an invalid update."""


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: object
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}[{self.subject}]: {self.detail}"


@dataclass(frozen=True)
class Config:
    """Static parameters of a partition.

    ``n`` nodes, at most ``m`` live edges, at most ``f`` endpoints per edge,
    edge multiplicity cap ``mu`` and accuracy ``eps``.
    """

    n: int
    m: int
    f: int
    mu: float = 1.0
    eps: float = 0.1

    def __post_init__(self) -> None:
        if not 0 < self.eps < 1:
            raise PartitionError(f"eps must lie in (0, 1), got {self.eps}")
        if self.n < 1:
            raise PartitionError("n must be positive")
        if self.m < 1:
            raise PartitionError("m must be positive")
        if self.f < 1:
            raise PartitionError("f must be positive")
        if not self.mu > 0:
            raise PartitionError("mu must be positive")

    @property
    def alpha(self) -> float:
        return 1.0 + 1.0 / self.f + 3.0 * self.eps

    @property
    def beta(self) -> float:
        return 1.0 + self.eps

    @property
    def lam(self) -> float:
        """Maximality factor guaranteed by a settled partition."""
        return self.f * self.alpha * self.beta

    def num_levels(self, c_min: float) -> int:
        """Top level ``L = ceil(log_beta(m * mu * alpha / c_min))``, at least 1."""
        ratio = self.m * self.mu * self.alpha / c_min
        L = max(1, math.ceil(math.log(ratio) / math.log(self.beta)))
        # ceil of a float log can land one short; the top level must push
        # every weight below c_min / alpha.
        while self.m * self.mu * self.beta ** -L > c_min / self.alpha:
            L += 1
        return L


class EdgeRecord:
    __slots__ = ("id", "nodes", "level")

    def __init__(self, eid: int, nodes: Tuple[int, ...], level: int):
        self.id = eid
        self.nodes = nodes
        self.level = level

    def __repr__(self) -> str:
        return f"EdgeRecord(id={self.id}, nodes={self.nodes}, level={self.level})"


@dataclass
class Metrics:
    count: int = 0
    t: int = 0
    dirty_iterations: int = 0
    last_relabels: int = 0
    last_settle_ns: int = 0


@dataclass
class BankAudit:
    phi: Dict[int, float]
    psi: List[float]
    balance: float

    @property
    def phi_total(self) -> float:
        return math.fsum(self.phi.values())

    @property
    def psi_total(self) -> float:
        return math.fsum(self.psi)


class PartitionState:
    """Hypergraph plus its (alpha, beta)-partition.

    Use :func:`create_partition` to build one. Node ids are ``0..n-1``;
    edge ids are assigned by :meth:`insert_edge`.
    """

    def __init__(self, config: Config, capacities: Sequence[float]):
        if len(capacities) == 0:
            raise PartitionError("capacities must not be empty")
        if len(capacities) != config.n:
            raise PartitionError(
                f"expected {config.n} capacities, got {len(capacities)}"
            )
        caps = [float(c) for c in capacities]
        for v, c in enumerate(caps):
            if not c > 0 or math.isinf(c):
                raise PartitionError(f"capacity of node {v} must be positive, got {c}")

        self.config = config
        self.cap: List[float] = caps
        self.c_min = min(caps)
        self.alpha = config.alpha
        self.beta = config.beta
        self.mu = float(config.mu)
        self.lam = config.lam
        self.L = config.num_levels(self.c_min)
        self.cstar: List[float] = [c / self.lam for c in caps]
        # weight of an edge at each level
        self.table: List[float] = [self.mu * self.beta ** -i for i in range(self.L + 1)]

        n = config.n
        self.level: List[int] = [0] * n
        self.weight: List[float] = [0.0] * n
        self.kappa: List[int] = [0] * n
        self.inc: List[Dict[int, Dict[int, None]]] = [{} for _ in range(n)]
        self.edges: Dict[int, EdgeRecord] = {}
        self.metrics = Metrics()
        self._next_id = 0
        self._queue: deque = deque()
        self._queued = [False] * n
        # journal of the most recent update, read by layered consumers
        self.changed_edges: Dict[int, int] = {}
        self.touched_nodes: set = set()

    # ------------------------------------------------------------------ queries

    @property
    def n(self) -> int:
        return self.config.n

    def edge_weight(self, eid: int) -> float:
        return self.table[self.edges[eid].level]

    def node_weight(self, v: int) -> float:
        return self.weight[v]

    def node_weight_at(self, v: int, i: int) -> float:
        """Weight ``v`` would receive if it sat at level ``i``."""
        if not 0 <= i <= self.L:
            raise PartitionError(f"level {i} outside [0, {self.L}]")
        table = self.table
        return math.fsum(
            len(bucket) * table[max(lvl, i)] for lvl, bucket in self.inc[v].items()
        )

    def degree_counts(self, v: int) -> Dict[int, int]:
        return {lvl: len(b) for lvl, b in self.inc[v].items() if b}

    def degree(self, v: int) -> int:
        return sum(len(b) for b in self.inc[v].values())

    def is_active(self, v: int) -> bool:
        return self.mu * self.kappa[v] >= self.cap[v]

    def is_dirty(self, v: int) -> bool:
        w = self.weight[v]
        return w > self.cap[v] or (w < self.cstar[v] and self.level[v] > 0)

    def solution_value(self) -> float:
        table = self.table
        return math.fsum(table[e.level] for e in self.edges.values())

    def budget(self) -> float:
        """Upper bound ``3 t L / eps`` on the relabel counter."""
        return 3.0 * self.metrics.t * self.L / self.config.eps

    def exact_weights(self) -> List[float]:
        """Node weights recomputed from the live edges, ignoring caches."""
        acc: List[List[float]] = [[] for _ in range(self.n)]
        table = self.table
        for e in self.edges.values():
            w = table[e.level]
            for v in e.nodes:
                acc[v].append(w)
        return [math.fsum(a) for a in acc]

    # ---------------------------------------------------------------- updates

    def insert_edge(self, endpoints: Iterable[int]) -> int:
        nodes = self._validate_endpoints(endpoints)
        if len(self.edges) >= self.config.m:
            raise PartitionError(f"edge budget m={self.config.m} exhausted")
        self._begin_update()
        eid = self._next_id
        self._next_id += 1
        level = max(self.level[v] for v in nodes)
        self.edges[eid] = EdgeRecord(eid, nodes, level)
        w = self.table[level]
        for v in nodes:
            self.inc[v].setdefault(level, {})[eid] = None
            self.weight[v] += w
            self.kappa[v] += 1
            self.touched_nodes.add(v)
        self.metrics.t += 1
        self._enqueue_dirty(nodes)
        self.settle()
        return eid

    def delete_edge(self, eid: int) -> None:
        e = self.edges.get(eid)
        if e is None:
            raise PartitionError(f"unknown edge id {eid!r}")
        self._begin_update()
        del self.edges[eid]
        w = self.table[e.level]
        for v in e.nodes:
            lists = self.inc[v]
            bucket = lists[e.level]
            del bucket[eid]
            if not bucket:
                del lists[e.level]
            self.weight[v] = self.weight[v] - w if lists else 0.0
            self.touched_nodes.add(v)
        self.metrics.t += 1
        self._enqueue_dirty(e.nodes)
        self.settle()

    def settle(self) -> None:
        """Move dirty nodes one level at a time until none remain.

        The node at the head of the queue is processed until it is clean
        before the next one is looked at.
        """
        started = time.perf_counter_ns()
        m = self.metrics
        relabels_before = m.count
        guard = self.budget()
        queue = self._queue
        while queue:
            v = queue.popleft()
            self._queued[v] = False
            while True:
                w = self.weight[v]
                if w > self.cap[v]:
                    touched = self._raise(v)
                elif w < self.cstar[v] and self.level[v] > 0:
                    touched = self._lower(v)
                else:
                    break
                m.dirty_iterations += 1
                self._enqueue_dirty(sorted(touched))
                if m.count > guard:
                    raise RuntimeError(
                        f"relabel count {m.count} exceeded budget {guard:.1f}"
                    )
        m.last_relabels = m.count - relabels_before
        m.last_settle_ns = time.perf_counter_ns() - started

    # -------------------------------------------------------------- internals

    def _validate_endpoints(self, endpoints: Iterable[int]) -> Tuple[int, ...]:
        nodes = tuple(endpoints)
        if not nodes:
            raise PartitionError("an edge needs at least one endpoint")
        if len(set(nodes)) != len(nodes):
            raise PartitionError(f"repeated endpoint in {nodes}")
        if len(nodes) > self.config.f:
            raise PartitionError(
                f"edge has {len(nodes)} endpoints, frequency bound is {self.config.f}"
            )
        for v in nodes:
            if not isinstance(v, int) or not 0 <= v < self.n:
                raise PartitionError(f"unknown node {v!r}")
        return tuple(sorted(nodes))

    def _begin_update(self) -> None:
        self.changed_edges = {}
        self.touched_nodes = set()

    def _enqueue_dirty(self, nodes: Iterable[int]) -> None:
        for v in nodes:
            if not self._queued[v] and self.is_dirty(v):
                self._queued[v] = True
                self._queue.append(v)

    def _relevel(self, e: EdgeRecord, new_level: int) -> None:
        self.changed_edges.setdefault(e.id, e.level)
        e.level = new_level

    def _raise(self, v: int) -> List[int]:
        i = self.level[v]
        assert i < self.L, "a node above capacity is always below the top level"
        lists = self.inc[v]
        moved = lists.pop(i, {})
        self.level[v] = i + 1
        target = lists.setdefault(i + 1, {})
        dw = self.table[i] - self.table[i + 1]
        touched = []
        for eid in moved:
            e = self.edges[eid]
            self._relevel(e, i + 1)
            target[eid] = None
            for u in e.nodes:
                if u == v:
                    continue
                ulists = self.inc[u]
                bucket = ulists[i]
                del bucket[eid]
                if not bucket:
                    del ulists[i]
                ulists.setdefault(i + 1, {})[eid] = None
                self.weight[u] -= dw
                touched.append(u)
        if not target:
            del lists[i + 1]
        self.metrics.count += len(moved)
        self.weight[v] = self._recompute(v)
        self.touched_nodes.add(v)
        self.touched_nodes.update(touched)
        return touched

    def _lower(self, v: int) -> List[int]:
        i = self.level[v]
        lists = self.inc[v]
        self.level[v] = i - 1
        bucket = lists.get(i, {})
        dropping = []
        for eid in bucket:
            e = self.edges[eid]
            if all(self.level[u] < i for u in e.nodes if u != v):
                dropping.append(e)
        touched = []
        if dropping:
            dw = self.table[i - 1] - self.table[i]
            below = lists.setdefault(i - 1, {})
            for e in dropping:
                self._relevel(e, i - 1)
                del bucket[e.id]
                below[e.id] = None
                for u in e.nodes:
                    if u == v:
                        continue
                    ulists = self.inc[u]
                    ub = ulists[i]
                    del ub[e.id]
                    if not ub:
                        del ulists[i]
                    ulists.setdefault(i - 1, {})[e.id] = None
                    self.weight[u] += dw
                    touched.append(u)
            if not bucket:
                del lists[i]
        self.metrics.count += len(dropping)
        self.weight[v] = self._recompute(v)
        self.touched_nodes.add(v)
        self.touched_nodes.update(touched)
        return touched

    def _recompute(self, v: int) -> float:
        table = self.table
        return math.fsum(len(b) * table[lvl] for lvl, b in self.inc[v].items())

    # ----------------------------------------------------------- verification

    def verify_invariant(self) -> List[Violation]:
        """Check the weight band of every node against exact weights."""
        out: List[Violation] = []
        exact = self.exact_weights()
        for v in range(self.n):
            w = exact[v]
            cached = self.weight[v]
            if abs(cached - w) > DRIFT_TOL * max(1.0, w):
                out.append(Violation("drift", v, f"cached {cached!r} vs exact {w!r}"))
            upper = self.cap[v] * (1 + DRIFT_TOL)
            lower = self.cstar[v] * (1 - DRIFT_TOL)
            if w > upper:
                out.append(
                    Violation("overweight", v, f"W={w!r} > c={self.cap[v]!r} at level {self.level[v]}")
                )
            if self.level[v] > 0 and w < lower:
                out.append(
                    Violation("underweight", v, f"W={w!r} < c*={self.cstar[v]!r} at level {self.level[v]}")
                )
            if self._queued[v]:
                out.append(Violation("queued", v, "node left in dirty queue"))
        return out

    def verify_lambda_maximal(self, lam: Optional[float] = None) -> List[Violation]:
        lam = self.lam if lam is None else lam
        if lam < 1:
            raise PartitionError("lambda must be at least 1")
        exact = self.exact_weights()
        out = []
        for e in self.edges.values():
            if self.table[e.level] >= self.mu:
                continue
            if not any(exact[v] >= self.cap[v] / lam * (1 - DRIFT_TOL) for v in e.nodes):
                out.append(Violation("not-maximal", e.id, f"w={self.table[e.level]!r}"))
        return out

    def check_structure(self) -> List[Violation]:
        """Consistency of levels, incidence buckets and kappa counters."""
        out: List[Violation] = []
        seen: Dict[int, int] = {}
        for v in range(self.n):
            for lvl, bucket in self.inc[v].items():
                if not bucket:
                    out.append(Violation("empty-bucket", v, f"level {lvl}"))
                if lvl < self.level[v]:
                    out.append(Violation("bucket-below-node", v, f"level {lvl}"))
                for eid in bucket:
                    e = self.edges.get(eid)
                    if e is None or v not in e.nodes or e.level != lvl:
                        out.append(Violation("stale-handle", v, f"edge {eid} in bucket {lvl}"))
                    seen[eid] = seen.get(eid, 0) + 1
            if not self.is_active(v) and self.level[v] != 0:
                out.append(Violation("passive-above-zero", v, f"level {self.level[v]}"))
        for e in self.edges.values():
            top = max(self.level[v] for v in e.nodes)
            if e.level != top:
                out.append(Violation("edge-level", e.id, f"{e.level} != {top}"))
            if seen.get(e.id, 0) != len(e.nodes):
                out.append(Violation("missing-handle", e.id, f"found in {seen.get(e.id, 0)} lists"))
        if len(seen) != len(self.edges):
            out.append(Violation("orphan", None, "bucket entries without live edge"))
        return out

    def compute_bank_balance(self) -> BankAudit:
        eps, beta, f, mu = self.config.eps, self.beta, self.config.f, self.mu
        phi = {eid: (1 + eps) * (self.L - e.level) for eid, e in self.edges.items()}
        psi = []
        for v in range(self.n):
            if self.is_active(v):
                slack = max(0.0, f * self.alpha * self.cstar[v] - self.weight[v])
                psi.append(beta ** (self.level[v] + 1) / (f * mu * (beta - 1)) * slack)
            else:
                psi.append(beta / (f * (beta - 1)) * self.kappa[v])
        balance = (math.fsum(phi.values()) + math.fsum(psi)) / eps
        return BankAudit(phi=phi, psi=psi, balance=balance)


def create_partition(config: Config, capacities: Sequence[float] | Mapping[int, float]) -> PartitionState:
    """Empty partition with every node clean on level 0."""
    if isinstance(capacities, Mapping):
        if not capacities:
            raise PartitionError("capacities must not be empty")
        if sorted(capacities) != list(range(config.n)):
            raise PartitionError("capacity map must cover nodes 0..n-1")
        capacities = [capacities[v] for v in range(config.n)]
    return PartitionState(config, capacities)
