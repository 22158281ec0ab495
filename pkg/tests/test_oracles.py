import random

import pytest
from hypothesis import given, settings, strategies as st

from dynoprimal import oracles
from dynoprimal.oracles import OracleError
from dynoprimal.partition import Config


def test_static_empty_graph():
    sol = oracles.static_primal_dual(2, [], [1, 1], Config(n=2, m=1, f=2, mu=1, eps=0.1))
    assert sol.x == []


def test_static_single_edge_freezes_at_top_of_ladder():
    cfg = Config(n=2, m=1, f=2, mu=1, eps=0.1)
    sol = oracles.static_primal_dual(2, [(0, 1)], [1, 1], cfg)
    # slack edge grows until one endpoint reaches c* = 1/3.96
    assert sol.edge_level == [7]
    assert sol.x[0] == pytest.approx(1.1 ** -7)
    assert sol.node_level == [7, 7]


def test_static_rejects_bad_input():
    cfg = Config(n=2, m=1, f=2, mu=1, eps=0.1)
    with pytest.raises(OracleError):
        oracles.static_primal_dual(2, [(0, 1), (0, 1)], [1, 1], cfg)
    with pytest.raises(OracleError):
        oracles.static_primal_dual(2, [(0, 0)], [1, 1], cfg)
    with pytest.raises(OracleError):
        oracles.static_primal_dual(2, [(0, 1)], [1], cfg)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 100_000), f=st.integers(1, 3), mu=st.sampled_from([1.0, 3.0]))
def test_static_output_is_feasible_and_maximal(seed, f, mu):
    rng = random.Random(seed)
    n = rng.randint(2, 15)
    edges = [tuple(rng.sample(range(n), rng.randint(1, min(f, n)))) for _ in range(rng.randint(1, 40))]
    caps = [float(rng.randint(1, 4)) for _ in range(n)]
    cfg = Config(n=n, m=len(edges), f=f, mu=mu, eps=0.1)
    sol = oracles.static_primal_dual(n, edges, caps, cfg)
    assert oracles.check_feasible(n, edges, sol.x, caps, mu) == []
    assert oracles.check_lambda_maximal(n, edges, sol.x, caps, mu, cfg.lam) == []
    cert = oracles.dual_certificate(n, edges, sol.x, caps, mu, cfg.lam)
    assert cert.feasible
    assert sum(sol.x) * (cfg.lam * f + 1) >= cert.value * (1 - 1e-9)
    loads = oracles.node_loads(n, edges, sol.x)
    for v in range(n):
        lvl = sol.node_level[v]
        if lvl is None:
            assert loads[v] <= cfg.beta * sol.cstar[v] * (1 + 1e-9)
        elif lvl < sol.L:
            assert sol.cstar[v] * (1 - 1e-9) <= loads[v] <= cfg.beta * sol.cstar[v] * (1 + 1e-9)


def test_dual_of_saturated_solution():
    cert = oracles.dual_certificate(2, [(0, 1)], [1.0], [5, 5], 1.0, 3.0)
    assert cert.z == [1] and cert.feasible
    assert oracles.dual_certificate(3, [], [], [1, 1, 1], 1.0, 3.0).value == 0


def test_dual_reports_uncovered_edge():
    cert = oracles.dual_certificate(2, [(0, 1)], [0.01], [5, 5], 1.0, 3.0)
    assert not cert.feasible


@pytest.mark.parametrize("n,edges,caps,opt", [
    (3, [(0, 1), (1, 2), (0, 2)], [1, 1, 1], 1),
    (4, [(0, 1), (0, 2), (0, 3)], [2, 1, 1, 1], 2),
    (3, [], [1, 1, 1], 0),
    (4, [(0, 1), (1, 2), (2, 3), (0, 3)], [2, 2, 2, 2], 4),
])
def test_exact_bmatching_small(n, edges, caps, opt):
    assert oracles.exact_bmatching(n, edges, caps) == opt
    assert oracles.brute_force_bmatching(n, edges, caps) == opt


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_exact_bmatching_matches_enumeration(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 7)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = rng.sample(pairs, min(len(pairs), rng.randint(0, 10)))
    caps = [rng.randint(1, 3) for _ in range(n)]
    assert oracles.exact_bmatching(n, edges, caps) == oracles.brute_force_bmatching(n, edges, caps)


def test_exact_bmatching_size_cap():
    with pytest.raises(OracleError):
        oracles.exact_bmatching(500, [(0, 1)], [1] * 500)


def test_exact_setcover():
    costs = {"S1": 1, "S2": 1}
    assert oracles.exact_setcover(costs, {"a": ["S1"], "b": ["S1", "S2"]}) == 1
    assert oracles.exact_setcover(costs, {}) == 0
    with pytest.raises(OracleError):
        oracles.exact_setcover(costs, {"a": []})
    with pytest.raises(OracleError):
        oracles.exact_setcover({f"S{i}": 1 for i in range(21)}, {})


def test_check_maximal():
    assert oracles.check_maximal([], [], []) == []
    assert oracles.check_maximal([(0, 1)], [(0, 1), (1, 2)], [1, 1, 1]) == []
    bad = oracles.check_maximal([], [(0, 1)], [1, 1])
    assert [v.kind for v in bad] == ["augmentable"]
    over = oracles.check_maximal([(0, 1), (0, 2)], [(0, 1), (0, 2)], [1, 1, 1])
    assert any(v.kind == "capacity" for v in over)
