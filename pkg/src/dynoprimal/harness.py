"""Replay update streams against an engine, verify, and collect metrics."""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, TextIO

from . import oracles
from .bmatch import BMatchState, RoundingConfig
from .partition import Config, PartitionState, Violation
from .setcover import SetCoverInstance, SetCoverState
from .stream import UpdateStream

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_STATS = 3
EXIT_ORACLE = 4
EXIT_CHECK = 5
EXIT_INVARIANT = 6

# check family -> exit status; higher is stronger
SEVERITY = {
    "sampling": EXIT_STATS,
    "oracle": EXIT_ORACLE,
    "maximality": EXIT_CHECK,
    "duality": EXIT_CHECK,
    "cover": EXIT_CHECK,
    "rounding": EXIT_CHECK,
    "invariant": EXIT_INVARIANT,
    "structure": EXIT_INVARIANT,
    "budget": EXIT_INVARIANT,
}


@dataclass
class MetricsRow:
    update_index: int
    op: str
    count: int
    budget: float
    dirty_iterations: int
    primal_value: Optional[float] = None
    dual_value: Optional[float] = None
    objective: Optional[float] = None
    oracle_opt: Optional[float] = None
    elapsed_ns: int = 0


COLUMNS = [f.name for f in fields(MetricsRow)]


@dataclass
class RunOptions:
    verify: str = "invariants"  # none | invariants | full
    verify_every: int = 1  # 0: only after the last update
    oracle: bool = False
    trials: int = 0
    seed: int = 0
    epsilon: Optional[float] = None
    c: Optional[float] = None


@dataclass
class Failure:
    update_index: int
    check: str
    violation: Violation

    def __str__(self) -> str:
        return f"update {self.update_index}: {self.check}: {self.violation}"


@dataclass
class SamplingReport:
    trials: int
    probes: int
    outside: int
    budget_fraction: float = 0.02
    details: List[Dict[str, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.outside <= self.budget_fraction * self.probes


@dataclass
class RunResult:
    rows: List[MetricsRow]
    failures: List[Failure]
    summary: Dict[str, object]
    engine: object
    sampling: Optional[SamplingReport] = None

    @property
    def exit_code(self) -> int:
        codes = [SEVERITY[f.check] for f in self.failures]
        if self.sampling is not None and not self.sampling.ok:
            codes.append(EXIT_STATS)
        return max(codes, default=EXIT_OK)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_csv(rows: List[MetricsRow], out: TextIO, timing: bool = True) -> None:
    cols = COLUMNS if timing else COLUMNS[:-1]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in cols])


def rows_to_csv(rows: List[MetricsRow], timing: bool = True) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, timing)
    return buf.getvalue()


class _Replay:
    """Engine-specific glue between stream ids and engine operations."""

    def __init__(self, stream: UpdateStream, opts: RunOptions):
        self.stream = stream
        self.opts = opts
        eps = opts.epsilon if opts.epsilon is not None else stream.eps
        self.mode = stream.mode
        self.ids: Dict[str, object] = {}
        if self.mode == "hypergraph":
            cfg = Config(n=stream.n, m=stream.m, f=stream.f, mu=stream.mu, eps=eps)
            self.engine = PartitionState(cfg, stream.capacities)
            self.partition = self.engine
        elif self.mode == "setcover":
            inst = SetCoverInstance(costs={v: c for v, c in enumerate(stream.capacities)},
                                    f=stream.f, m=stream.m, eps=eps)
            self.engine = SetCoverState(inst)
            self.partition = self.engine.engine
        else:
            c = opts.c if opts.c is not None else float(stream.params.get("c", 4.0))
            rc = RoundingConfig(eps=eps, c=c)
            m = int(stream.params["m"]) if "m" in stream.params else None
            self.engine = BMatchState([int(x) for x in stream.capacities], rc, seed=opts.seed, m=m)
            self.partition = self.engine.engine

    def apply(self, u) -> None:
        eng = self.engine
        if u.op == "+":
            if self.mode == "hypergraph":
                self.ids[u.id] = eng.insert_edge(u.nodes)
            elif self.mode == "setcover":
                eng.insert_element(u.id, u.nodes)
            else:
                eng.insert_edge(*u.nodes)
                self.ids[u.id] = tuple(sorted(u.nodes))
        else:
            if self.mode == "hypergraph":
                eng.delete_edge(self.ids.pop(u.id))
            elif self.mode == "setcover":
                eng.delete_element(u.id)
            else:
                eng.delete_edge(*self.ids.pop(u.id))

    def objective(self) -> float:
        if self.mode == "hypergraph":
            return self.partition.solution_value()
        if self.mode == "setcover":
            return self.engine.current_cover()[1]
        return float(len(self.engine.current_matching()))

    def checks(self, level: str) -> Dict[str, List[Violation]]:
        p = self.partition
        found: Dict[str, List[Violation]] = {}
        found["invariant"] = p.verify_invariant()
        found["structure"] = p.check_structure()
        if level == "full":
            found["maximality"] = p.verify_lambda_maximal(p.lam)
            if p.compute_bank_balance().balance < 0:
                found.setdefault("invariant", []).append(Violation("bank", None, "negative balance"))
            if self.mode == "setcover":
                sc = self.engine
                cover = sc.verify_cover() + sc.verify_threshold()
                cost = sc.current_cover()[1]
                if cost > sc.cost_bound() * (1 + 1e-9):
                    cover.append(Violation("cost-bound", None, f"{cost} > {sc.cost_bound()}"))
                found["cover"] = cover
            if self.mode == "bmatching":
                found["rounding"] = self.engine.verify_rounding()
        return found

    def dual(self):
        p = self.partition
        eids = list(p.edges)
        edges = [p.edges[e].nodes for e in eids]
        x = [p.edge_weight(e) for e in eids]
        cert = oracles.dual_certificate(p.n, edges, x, p.cap, p.mu, p.lam)
        return cert, math.fsum(x)

    def oracle(self) -> Optional[float]:
        if self.mode == "setcover":
            sc = self.engine
            live = {u: [sc.names[v] for v in sets] for u, sets in sc.members.items()}
            return oracles.exact_setcover(sc.instance.costs, live)
        if self.mode == "bmatching":
            bm = self.engine
            return float(oracles.exact_bmatching(bm.n, list(bm.pairs.values()), bm.cap))
        return None


def sampling_report(state: BMatchState, trials: int, seed: int = 0,
                    max_probes: Optional[int] = None) -> SamplingReport:
    """Resample a frozen state ``trials`` times and compare edge frequencies.

    Edges of ``E_B`` are expected in ``H_B`` with probability ``w(e)``, edges
    of ``E_S`` in ``H_S`` with probability ``p_e``. A probe is outside its
    band when the empirical frequency is more than three binomial standard
    deviations from the target.
    """
    eids = sorted(state.pairs)
    targets = []
    for eid in eids:
        w = state.weight(eid)
        if state.in_EB(eid):
            targets.append((eid, "H_B", w))
        if state.in_ES(eid):
            targets.append((eid, "H_S", state.p_sample(w)))
    if max_probes is not None:
        targets = targets[:max_probes]
    hits = [0] * len(targets)
    for k in range(trials):
        state.resample(seed * 1_000_003 + k + 1)
        for j, (eid, which, _) in enumerate(targets):
            if eid in (state.H_B if which == "H_B" else state.H_S):
                hits[j] += 1
    details = []
    outside = 0
    for (eid, which, p), h in zip(targets, hits):
        freq = h / trials if trials else 0.0
        sigma = math.sqrt(p * (1 - p) / trials) if trials else 0.0
        bad = abs(freq - p) > 3 * sigma + 1e-12
        outside += bad
        details.append({"edge": eid, "set": which, "target": p, "freq": freq, "sigma": sigma, "outside": bad})
    return SamplingReport(trials=trials, probes=len(targets), outside=outside, details=details)


def run(stream: UpdateStream, opts: RunOptions = RunOptions(), csv_out: Optional[TextIO] = None) -> RunResult:
    replay = _Replay(stream, opts)
    p = replay.partition
    rows: List[MetricsRow] = []
    failures: List[Failure] = []
    total = len(stream.updates)
    writer = None
    if csv_out is not None:
        writer = csv.writer(csv_out, lineterminator="\n")
        writer.writerow(COLUMNS)

    worst_ratio = None
    for k, u in enumerate(stream.updates, start=1):
        started = time.perf_counter_ns()
        replay.apply(u)
        elapsed = time.perf_counter_ns() - started
        checkpoint = k == total or (opts.verify_every > 0 and k % opts.verify_every == 0)
        row = MetricsRow(
            update_index=k,
            op=u.op,
            count=p.metrics.count,
            budget=p.budget(),
            dirty_iterations=p.metrics.dirty_iterations,
            elapsed_ns=elapsed,
        )
        if p.metrics.count > row.budget:
            failures.append(Failure(k, "budget", Violation("budget", k, f"{p.metrics.count} > {row.budget}")))
        if checkpoint:
            row.primal_value = p.solution_value()
            row.objective = replay.objective()
            if opts.verify != "none":
                for check, vs in replay.checks(opts.verify).items():
                    failures.extend(Failure(k, check, v) for v in vs)
            if opts.verify == "full":
                cert, primal = replay.dual()
                row.dual_value = cert.value
                failures.extend(Failure(k, "duality", v) for v in cert.violations)
                if primal * (p.lam * p.config.f + 1) < cert.value * (1 - 1e-9):
                    failures.append(Failure(k, "duality", Violation("weak-duality", k, f"{primal} vs {cert.value}")))
            if opts.oracle:
                opt = replay.oracle()
                row.oracle_opt = opt
                if opt is not None and replay.mode == "setcover":
                    lam_f = p.lam * p.config.f
                    if row.objective > lam_f * opt * (1 + 1e-9):
                        failures.append(Failure(k, "oracle", Violation(
                            "approx", k, f"cover {row.objective} > {lam_f:.4g} * {opt}")))
                if opt and replay.mode == "bmatching":
                    ratio = opt / row.objective if row.objective else math.inf
                    worst_ratio = ratio if worst_ratio is None else max(worst_ratio, ratio)
        rows.append(row)
        if writer is not None:
            writer.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
            if checkpoint:
                csv_out.flush()

    sampling = None
    if opts.trials and replay.mode == "bmatching":
        sampling = sampling_report(replay.engine, opts.trials, seed=opts.seed)

    t = p.metrics.t
    summary = {
        "mode": replay.mode,
        "updates": total,
        "count": p.metrics.count,
        "budget": p.budget(),
        "L": p.L,
        "relabels_per_update": p.metrics.count / t if t else 0.0,
        "dirty_iterations": p.metrics.dirty_iterations,
        "failures": len(failures),
    }
    if rows:
        summary["objective"] = rows[-1].objective
    if worst_ratio is not None:
        summary["worst_oracle_ratio"] = worst_ratio
    if sampling is not None:
        summary["sampling_probes"] = sampling.probes
        summary["sampling_outside"] = sampling.outside
    return RunResult(rows=rows, failures=failures, summary=summary, engine=replay.engine, sampling=sampling)
