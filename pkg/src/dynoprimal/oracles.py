"""Reference solvers and certificates for checking the dynamic engines.

Everything here works on plain data (node count, edge tuples, weight lists)
and shares no state with the engines it checks.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from .partition import DRIFT_TOL, Config, Violation

Edge = Tuple[int, ...]


class OracleError(ValueError):
    pass


@dataclass
class StaticSolution:
    x: List[float]
    edge_level: List[int]
    # level at which a node froze; None for nodes left slack (V_0)
    node_level: List[Optional[int]]
    L: int
    cstar: List[float]

    @property
    def frozen(self) -> List[int]:
        return [v for v, lvl in enumerate(self.node_level) if lvl is not None]


def static_primal_dual(n: int, edges: Sequence[Edge], capacities: Sequence[float],
                       config: Config) -> StaticSolution:
    """Discretised primal-dual growth on a static hypergraph.

    All edges start at ``mu * beta**-L``. Going down from level ``L`` the
    slack edges gain a factor ``beta`` per level, and a node freezes (with
    all its still-growing edges) once its load reaches ``c*_v``. Edges that
    never freeze end on level 0 with weight ``mu``.
    """
    if len(capacities) != n:
        raise OracleError("one capacity per node required")
    if len(edges) > config.m:
        raise OracleError(f"{len(edges)} edges exceed m={config.m}")
    for e in edges:
        if not 1 <= len(e) <= config.f or len(set(e)) != len(e):
            raise OracleError(f"edge {e} violates the frequency bound")
        if any(not 0 <= v < n for v in e):
            raise OracleError(f"edge {e} names an unknown node")
    if n == 0:
        return StaticSolution([], [], [], 0, [])

    L = config.num_levels(min(capacities))
    beta, mu = config.beta, float(config.mu)
    table = [mu * beta ** -i for i in range(L + 1)]
    cstar = [c / config.lam for c in capacities]

    incident: List[List[int]] = [[] for _ in range(n)]
    for j, e in enumerate(edges):
        for v in e:
            incident[v].append(j)

    edge_level: List[Optional[int]] = [None] * len(edges)
    node_level: List[Optional[int]] = [None] * n
    frozen_sum = [0.0] * n
    growing = [len(incident[v]) for v in range(n)]

    def freeze_at(i: int) -> None:
        newly = [v for v in range(n)
                 if node_level[v] is None and frozen_sum[v] + growing[v] * table[i] >= cstar[v]]
        for v in newly:
            node_level[v] = i
        for v in newly:
            for j in incident[v]:
                if edge_level[j] is None:
                    edge_level[j] = i
                    for u in edges[j]:
                        frozen_sum[u] += table[i]
                        growing[u] -= 1

    for i in range(L, 0, -1):
        freeze_at(i)
    final = [0 if lvl is None else lvl for lvl in edge_level]
    return StaticSolution(
        x=[table[lvl] for lvl in final],
        edge_level=final,
        node_level=node_level,
        L=L,
        cstar=cstar,
    )


def node_loads(n: int, edges: Sequence[Edge], x: Sequence[float]) -> List[float]:
    acc: List[List[float]] = [[] for _ in range(n)]
    for e, xe in zip(edges, x):
        for v in e:
            acc[v].append(xe)
    return [math.fsum(a) for a in acc]


def check_feasible(n: int, edges: Sequence[Edge], x: Sequence[float],
                   capacities: Sequence[float], mu: float) -> List[Violation]:
    out = []
    for j, xe in enumerate(x):
        if xe < 0 or xe > mu * (1 + DRIFT_TOL):
            out.append(Violation("edge-bound", j, f"x={xe!r}"))
    for v, load in enumerate(node_loads(n, edges, x)):
        if load > capacities[v] * (1 + DRIFT_TOL):
            out.append(Violation("capacity", v, f"load {load!r} > {capacities[v]!r}"))
    return out


def check_lambda_maximal(n: int, edges: Sequence[Edge], x: Sequence[float],
                         capacities: Sequence[float], mu: float, lam: float) -> List[Violation]:
    loads = node_loads(n, edges, x)
    out = []
    for j, (e, xe) in enumerate(zip(edges, x)):
        if xe >= mu:
            continue
        if not any(loads[v] >= capacities[v] / lam * (1 - DRIFT_TOL) for v in e):
            out.append(Violation("not-maximal", j, f"x={xe!r}"))
    return out


@dataclass
class DualCertificate:
    y: List[int]
    z: List[int]
    value: float
    violations: List[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations


def dual_certificate(n: int, edges: Sequence[Edge], x: Sequence[float],
                     capacities: Sequence[float], mu: float, lam: float) -> DualCertificate:
    """0/1 dual built from a lam-maximal primal.

    A node is bought when its load is at least ``c_v / lam``; an edge is
    bought when it sits at its cap ``mu``. Feasibility of the result is
    checked edge by edge and any uncovered edge is reported.
    """
    loads = node_loads(n, edges, x)
    y = [1 if loads[v] >= capacities[v] / lam * (1 - DRIFT_TOL) else 0 for v in range(n)]
    z = [1 if xe >= mu else 0 for xe in x]
    violations = [
        Violation("dual-infeasible", j, f"edge {e}")
        for j, e in enumerate(edges)
        if z[j] + sum(y[v] for v in e) < 1
    ]
    value = math.fsum(capacities[v] for v in range(n) if y[v]) + mu * sum(z)
    return DualCertificate(y=y, z=z, value=value, violations=violations)


def exact_bmatching(n: int, edges: Iterable[Tuple[int, int]], capacities: Sequence[int],
                    max_nodes: int = 200) -> int:
    """Maximum cardinality b-matching of a simple graph.

    Uses the classic gadget: node ``v`` becomes ``c_v`` copies, edge
    ``(u, v)`` becomes a path ``u* - eu - ev - v*`` where ``eu`` sees every
    copy of ``u`` and ``ev`` every copy of ``v``. A maximum matching of the
    gadget graph has size ``|E| + OPT``.
    """
    if n > max_nodes:
        raise OracleError(f"n={n} exceeds the oracle cap of {max_nodes}")
    edges = [tuple(e) for e in edges]
    if not edges:
        return 0
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    g = nx.Graph()
    for j, (u, v) in enumerate(edges):
        cu = min(capacities[u], deg[u])
        cv = min(capacities[v], deg[v])
        g.add_edge(("e", j, u), ("e", j, v))
        for k in range(cu):
            g.add_edge(("e", j, u), ("c", u, k))
        for k in range(cv):
            g.add_edge(("e", j, v), ("c", v, k))
    matching = nx.max_weight_matching(g, maxcardinality=True)
    return len(matching) - len(edges)


def brute_force_bmatching(n: int, edges: Sequence[Tuple[int, int]], capacities: Sequence[int]) -> int:
    """Largest subset of ``edges`` respecting capacities, by enumeration."""
    best = 0
    for mask in range(1 << len(edges)):
        size = bin(mask).count("1")
        if size <= best:
            continue
        deg = [0] * n
        ok = True
        for j, (u, v) in enumerate(edges):
            if mask >> j & 1:
                deg[u] += 1
                deg[v] += 1
                if deg[u] > capacities[u] or deg[v] > capacities[v]:
                    ok = False
                    break
        if ok:
            best = size
    return best


def exact_setcover(costs: Mapping[Hashable, float],
                   elements: Mapping[Hashable, Iterable[Hashable]],
                   max_sets: int = 20) -> float:
    """Minimum cover cost of the live ``elements`` by subset enumeration."""
    names = list(costs)
    if len(names) > max_sets:
        raise OracleError(f"{len(names)} sets exceed the enumeration cap of {max_sets}")
    index = {s: i for i, s in enumerate(names)}
    masks = []
    for u, sets in elements.items():
        mask = 0
        for s in sets:
            mask |= 1 << index[s]
        if not mask:
            raise OracleError(f"element {u!r} is in no set")
        masks.append(mask)
    if not masks:
        return 0.0
    best = math.inf
    for pick in range(1, 1 << len(names)):
        if all(pick & m for m in masks):
            cost = math.fsum(costs[names[i]] for i in range(len(names)) if pick >> i & 1)
            best = min(best, cost)
    return best


def check_maximal(matching: Iterable[Tuple[int, int]], edge_set: Iterable[Tuple[int, int]],
                  capacities: Sequence[int]) -> List[Violation]:
    """Capacity violations, stray edges, and unmatched edges between two free nodes."""
    norm = lambda e: (min(e), max(e))
    matched = {norm(e) for e in matching}
    pool = {norm(e) for e in edge_set}
    deg: Dict[int, int] = {}
    for u, v in matched:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    out = [Violation("not-in-edge-set", e) for e in sorted(matched - pool)]
    out += [Violation("capacity", v, f"deg {d} > {capacities[v]}")
            for v, d in sorted(deg.items()) if d > capacities[v]]
    for u, v in sorted(pool - matched):
        if deg.get(u, 0) < capacities[u] and deg.get(v, 0) < capacities[v]:
            out.append(Violation("augmentable", (u, v), "both endpoints have residual capacity"))
    return out


def is_bmatching(edges: Iterable[Tuple[int, int]], capacities: Sequence[int]) -> bool:
    deg: Dict[int, int] = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return all(d <= capacities[v] for v, d in deg.items())
