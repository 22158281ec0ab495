import pytest

from dynoprimal.stream import StreamError, generate_stream, max_live, parse_stream

HEADER = "mode hypergraph\nn 2\ncap 0 1\ncap 1 1\nparams f=2 m=4 mu=1 eps=0.25\n"
SMALL = HEADER + "+ e1 0 1\n+ e2 0 1\n- e1\n"


def test_parse_small_stream():
    s = parse_stream(SMALL)
    assert (s.mode, s.n, s.capacities) == ("hypergraph", 2, [1.0, 1.0])
    assert (s.f, s.m, s.mu, s.eps) == (2, 4, 1.0, 0.25)
    assert [(u.op, u.id) for u in s.updates] == [("+", "e1"), ("+", "e2"), ("-", "e1")]
    assert parse_stream(s.to_text()).updates == s.updates


@pytest.mark.parametrize("body,line", [
    ("+ e1 0 1\n+ e1 0 1\n", 7),
    ("- ghost\n", 6),
    ("+ e1 0 7\n", 6),
    ("+ e1 0 x\n", 6),
    ("+ e1 0 0\n", 6),
    ("+ e1\n", 6),
    ("+ e1 0 1\nn 3\n", 7),
    ("bogus 1\n", 6),
])
def test_positioned_errors(body, line):
    with pytest.raises(StreamError) as err:
        parse_stream(HEADER + body)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_live_count_respects_m():
    text = HEADER + "".join(f"+ e{i} 0 1\n" for i in range(5))
    with pytest.raises(StreamError):
        parse_stream(text)


def test_bmatching_rules():
    head = "mode bmatching\nn 3\n"
    with pytest.raises(StreamError):
        parse_stream(head + "+ a 0 1 2\n")
    with pytest.raises(StreamError):
        parse_stream(head + "+ a 0 1\n+ b 1 0\n")
    with pytest.raises(StreamError):
        parse_stream(head + "cap 0 1.5\n")
    assert len(parse_stream(head + "+ a 0 1\n- a\n+ b 1 0\n").updates) == 3


def test_missing_header():
    with pytest.raises(StreamError):
        parse_stream("+ e1 0 1\n")
    with pytest.raises(StreamError):
        parse_stream("")


def test_generator_is_seeded():
    a = generate_stream("hypergraph", n=30, updates=300, seed=4)
    b = generate_stream("hypergraph", n=30, updates=300, seed=4)
    c = generate_stream("hypergraph", n=30, updates=300, seed=5)
    assert a.to_text() == b.to_text() != c.to_text()


def test_insert_only_and_window():
    s = generate_stream("hypergraph", n=20, updates=200, delete_ratio=0.0, seed=1)
    assert all(u.op == "+" for u in s.updates)
    w = generate_stream("bmatching", n=20, updates=500, delete_ratio=0.0, window=15, seed=1)
    assert max_live(w) <= 15
    assert parse_stream(w.to_text()).updates == w.updates


@pytest.mark.parametrize("mode", ["hypergraph", "setcover", "bmatching"])
def test_generated_streams_parse(mode):
    s = generate_stream(mode, n=12, updates=300, f=3, seed=2)
    again = parse_stream(s.to_text())
    assert again.updates == s.updates and again.capacities == s.capacities
