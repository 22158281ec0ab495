"""Text update streams: parsing, writing and seeded generation.

Format, one directive per line (``#`` starts a comment)::

    mode hypergraph | setcover | bmatching
    n 2
    cap 0 1                 # node capacity, or set cost in setcover mode
    params f=2 m=4 mu=1 eps=0.25
    + e1 0 1                # insert: id, then endpoints / member sets
    - e1                    # delete by id

Header directives must precede the first update. In ``bmatching`` mode
every insert has exactly two endpoints; ``f`` and ``mu`` are fixed at 2
and 1. Capacities default to 1.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

MODES = ("hypergraph", "setcover", "bmatching")


class StreamError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class Update:
    op: str  # "+" or "-"
    id: str
    nodes: Tuple[int, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass
class UpdateStream:
    mode: str
    n: int
    capacities: List[float]
    params: Dict[str, float] = field(default_factory=dict)
    updates: List[Update] = field(default_factory=list)

    @property
    def f(self) -> int:
        return int(self.params.get("f", 2))

    @property
    def eps(self) -> float:
        return float(self.params.get("eps", 0.1))

    @property
    def mu(self) -> float:
        return float(self.params.get("mu", 1))

    @property
    def m(self) -> int:
        if "m" in self.params:
            return int(self.params["m"])
        return max_live(self)

    def to_text(self) -> str:
        lines = [f"mode {self.mode}", f"n {self.n}"]
        lines += [f"cap {v} {_num(c)}" for v, c in enumerate(self.capacities)]
        if self.params:
            lines.append("params " + " ".join(f"{k}={_num(v)}" for k, v in self.params.items()))
        for u in self.updates:
            if u.op == "+":
                lines.append(" ".join(["+", u.id] + [str(x) for x in u.nodes]))
            else:
                lines.append(f"- {u.id}")
        return "\n".join(lines) + "\n"


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def max_live(stream: UpdateStream) -> int:
    live = peak = 0
    for u in stream.updates:
        live += 1 if u.op == "+" else -1
        peak = max(peak, live)
    return max(1, peak)


_PARAM_KEYS = {"f": int, "m": int, "mu": float, "eps": float, "c": float}


def parse_stream(text: str) -> UpdateStream:
    mode: Optional[str] = None
    n: Optional[int] = None
    caps: Dict[int, float] = {}
    params: Dict[str, float] = {}
    updates: List[Update] = []
    live: Dict[str, Tuple[int, ...]] = {}
    pairs: Dict[Tuple[int, ...], str] = {}
    peak = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if head in ("+", "-"):
            if mode is None or n is None:
                raise StreamError(lineno, "updates must follow the 'mode' and 'n' header")
            if len(tok) < 2:
                raise StreamError(lineno, "missing update id")
            uid = tok[1]
            if head == "-":
                if len(tok) != 2:
                    raise StreamError(lineno, "delete takes exactly one id")
                if uid not in live:
                    raise StreamError(lineno, f"delete of unknown id {uid!r}")
                pairs.pop(live.pop(uid), None)
                updates.append(Update("-", uid, line=lineno))
                continue
            if uid in live:
                raise StreamError(lineno, f"duplicate live id {uid!r}")
            try:
                nodes = tuple(int(x) for x in tok[2:])
            except ValueError:
                raise StreamError(lineno, "endpoints must be integers") from None
            if not nodes:
                raise StreamError(lineno, "insert needs at least one endpoint")
            if len(set(nodes)) != len(nodes):
                raise StreamError(lineno, "repeated endpoint")
            for v in nodes:
                if not 0 <= v < n:
                    raise StreamError(lineno, f"node {v} outside [0, {n})")
            if mode == "bmatching":
                if len(nodes) != 2:
                    raise StreamError(lineno, "b-matching edges have exactly two endpoints")
                key = tuple(sorted(nodes))
                if key in pairs:
                    raise StreamError(lineno, f"edge {key} already live as {pairs[key]!r}")
                pairs[key] = uid
            elif len(nodes) > int(params.get("f", 2)):
                raise StreamError(lineno, f"{len(nodes)} endpoints exceed f={int(params.get('f', 2))}")
            live[uid] = tuple(sorted(nodes))
            peak = max(peak, len(live))
            if "m" in params and peak > params["m"]:
                raise StreamError(lineno, f"live edges exceed m={int(params['m'])}")
            updates.append(Update("+", uid, nodes, line=lineno))
            continue
        if updates:
            raise StreamError(lineno, f"header directive {head!r} after the first update")
        if head == "mode":
            if len(tok) != 2 or tok[1] not in MODES:
                raise StreamError(lineno, f"mode must be one of {', '.join(MODES)}")
            mode = tok[1]
        elif head == "n":
            try:
                n = int(tok[1])
            except (IndexError, ValueError):
                raise StreamError(lineno, "n takes one integer") from None
            if n < 1:
                raise StreamError(lineno, "n must be positive")
        elif head in ("cap", "cost"):
            if n is None:
                raise StreamError(lineno, "'n' must precede capacities")
            try:
                v, c = int(tok[1]), float(tok[2])
            except (IndexError, ValueError):
                raise StreamError(lineno, f"{head} takes a node and a number") from None
            if not 0 <= v < n:
                raise StreamError(lineno, f"node {v} outside [0, {n})")
            if not c > 0:
                raise StreamError(lineno, "capacities must be positive")
            caps[v] = c
        elif head == "params":
            for item in tok[1:]:
                key, sep, val = item.partition("=")
                if not sep or key not in _PARAM_KEYS:
                    raise StreamError(lineno, f"bad parameter {item!r}")
                try:
                    params[key] = _PARAM_KEYS[key](val)
                except ValueError:
                    raise StreamError(lineno, f"bad value for {key}: {val!r}") from None
        else:
            raise StreamError(lineno, f"unknown directive {head!r}")

    if mode is None or n is None:
        raise StreamError(0, "stream lacks 'mode' or 'n'")
    if mode == "bmatching":
        for v, c in caps.items():
            if not float(c).is_integer() or not 1 <= c <= n:
                raise StreamError(0, f"b-matching capacity of node {v} must be an integer in [1, n]")
    return UpdateStream(mode, n, [caps.get(v, 1.0) for v in range(n)], params, updates)


def generate_stream(mode: str = "hypergraph", n: int = 100, updates: int = 1000,
                    f: int = 2, mu: float = 1.0, eps: float = 0.1,
                    delete_ratio: float = 0.5, window: Optional[int] = None,
                    max_cap: int = 3, hubs: float = 0.0, c: Optional[float] = None,
                    seed: int = 0) -> UpdateStream:
    """Seeded random stream.

    Each step deletes a random live id with probability ``delete_ratio``
    (when anything is live), otherwise inserts. With ``window`` set, the
    oldest live id is deleted whenever an insert would exceed the window.
    ``hubs`` is the probability that an endpoint is drawn from the first
    tenth of the nodes, which skews degrees.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    if mode == "bmatching":
        f, mu = 2, 1.0
        caps = [float(rng.randint(1, min(max_cap, n))) for _ in range(n)]
    else:
        caps = [float(rng.randint(1, max_cap)) for _ in range(n)]
    hub_count = max(1, n // 10)

    def pick(k: int) -> Tuple[int, ...]:
        chosen: List[int] = []
        while len(chosen) < k:
            v = rng.randrange(hub_count) if rng.random() < hubs else rng.randrange(n)
            if v not in chosen:
                chosen.append(v)
        return tuple(sorted(chosen))

    out: List[Update] = []
    live: List[str] = []
    live_pairs: Dict[Tuple[int, ...], str] = {}
    id_pair: Dict[str, Tuple[int, ...]] = {}
    next_id = 0
    for _ in range(updates):
        if live and (rng.random() < delete_ratio or (window is not None and len(live) >= window)):
            if window is not None and len(live) >= window:
                uid = live.pop(0)
            else:
                uid = live.pop(rng.randrange(len(live)))
            key = id_pair.pop(uid, None)
            if key is not None:
                del live_pairs[key]
            out.append(Update("-", uid))
            continue
        if mode == "bmatching":
            for _attempt in range(20):
                nodes = pick(2)
                if nodes not in live_pairs:
                    break
            else:
                continue
        else:
            nodes = pick(rng.randint(1, min(f, n)))
        uid = f"e{next_id}"
        next_id += 1
        live.append(uid)
        if mode == "bmatching":
            live_pairs[nodes] = uid
            id_pair[uid] = nodes
        out.append(Update("+", uid, nodes))

    params: Dict[str, float] = {"f": f, "mu": mu, "eps": eps}
    if c is not None:
        params["c"] = c
    stream = UpdateStream(mode, n, caps, params, out)
    stream.params["m"] = max_live(stream)
    return stream
