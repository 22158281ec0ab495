import random

import pytest
from hypothesis import given, settings, strategies as st

from dynoprimal.oracles import exact_setcover
from dynoprimal.setcover import SetCoverError, SetCoverInstance, build_setcover


def state(costs, f=2, m=10, eps=0.1):
    return build_setcover(SetCoverInstance(costs=costs, f=f, m=m, eps=eps))


@pytest.mark.parametrize("costs,mu", [({"S1": 1, "S2": 1}, 2), ({"S": 7}, 8)])
def test_edge_cap_is_max_cost_plus_one(costs, mu):
    assert state(costs).mu == mu


@pytest.mark.parametrize("costs", [{}, {"S1": 0}, {"S1": 1, "S2": -3}])
def test_bad_costs(costs):
    with pytest.raises(SetCoverError):
        state(costs)


def test_empty_universe():
    sc = state({"S1": 1, "S2": 2})
    assert sc.current_cover() == ([], 0)
    assert sc.verify_cover() == []


def test_element_errors():
    sc = state({"S1": 1})
    with pytest.raises(SetCoverError):
        sc.insert_element("a", [])
    with pytest.raises(SetCoverError):
        sc.insert_element("a", ["nope"])
    sc.insert_element("a", ["S1"])
    with pytest.raises(SetCoverError):
        sc.insert_element("a", ["S1"])
    with pytest.raises(SetCoverError):
        sc.delete_element("b")


def test_insert_then_delete_empties_cover():
    sc = state({"S1": 1, "S2": 1})
    sc.insert_element("a", ["S1", "S2"])
    names, cost = sc.current_cover()
    assert names and cost >= 1
    sc.delete_element("a")
    assert sc.current_cover() == ([], 0)


def test_delete_one_of_two_keeps_the_other_covered():
    sc = state({"S1": 1, "S2": 1})
    sc.insert_element("a", ["S1"])
    sc.insert_element("b", ["S2"])
    sc.delete_element("a")
    assert sc.verify_cover() == []
    assert "S2" in sc.current_cover()[0]


def test_truncated_cover_is_reported():
    sc = state({"S1": 1, "S2": 1})
    sc.insert_element("a", ["S1"])
    sc.insert_element("b", ["S2"])
    bad = sc.verify_cover(cover=["S1"])
    assert [v.subject for v in bad] == ["b"]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 8), f=st.integers(1, 3))
def test_random_churn_against_exhaustive(seed, k, f):
    rng = random.Random(seed)
    costs = {f"S{i}": rng.randint(1, 5) for i in range(k)}
    sc = state(costs, f=f, m=40, eps=0.1)
    live = {}
    for step in range(40):
        if live and rng.random() < 0.4:
            u = rng.choice(sorted(live))
            del live[u]
            sc.delete_element(u)
        else:
            sets = rng.sample(sorted(costs), rng.randint(1, min(f, k)))
            live[f"u{step}"] = sets
            sc.insert_element(f"u{step}", sets)
        assert sc.verify_cover() == []
        assert sc.verify_threshold() == []
        names, cost = sc.current_cover()
        assert cost == pytest.approx(sc.cover_cost, abs=1e-9)
        assert cost <= sc.cost_bound() * (1 + 1e-9)
        assert cost <= sc.lam * f * exact_setcover(costs, live) * (1 + 1e-9)
