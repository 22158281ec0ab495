import csv
import io
import json

import pytest

from dynoprimal import harness
from dynoprimal.cli import main
from dynoprimal.harness import COLUMNS, RunOptions, rows_to_csv, run
from dynoprimal.stream import generate_stream, parse_stream

SMALL = ("mode hypergraph\nn 2\ncap 0 1\ncap 1 1\nparams f=2 m=4 mu=1 eps=0.25\n"
         "+ e1 0 1\n+ e2 0 1\n- e1\n")


@pytest.fixture
def small_file(tmp_path):
    path = tmp_path / "small.txt"
    path.write_text(SMALL)
    return path


def test_run_small_stream(small_file, tmp_path, capsys):
    out = tmp_path / "m.csv"
    code = main(["run", "--mode", "hypergraph", "--stream", str(small_file), "--verify", "full",
                 "--metrics-out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["count"] == 8
    assert summary["budget"] == 360
    rows = list(csv.reader(out.open()))
    assert rows[0] == COLUMNS
    assert [r[2] for r in rows[1:]] == ["0", "8", "8"]


def test_mode_mismatch_and_bad_input(small_file, tmp_path, capsys):
    assert main(["run", "--mode", "setcover", "--stream", str(small_file)]) == harness.EXIT_INPUT
    bad = tmp_path / "bad.txt"
    bad.write_text("mode hypergraph\nn 2\n- e9\n")
    assert main(["run", "--stream", str(bad)]) == harness.EXIT_INPUT
    assert "line 3" in capsys.readouterr().err
    assert main(["run", "--stream", str(tmp_path / "missing")]) == harness.EXIT_INPUT


def test_csv_is_reproducible():
    s = generate_stream("bmatching", n=30, updates=400, hubs=0.5, seed=3)
    opts = RunOptions(verify="full", verify_every=50, oracle=True, seed=9)
    a = rows_to_csv(run(s, opts).rows, timing=False)
    b = rows_to_csv(run(s, opts).rows, timing=False)
    assert a == b
    assert a.splitlines()[0] == ",".join(COLUMNS[:-1])


def test_streamed_csv_matches_rows():
    s = generate_stream("hypergraph", n=20, updates=100, seed=1)
    buf = io.StringIO()
    result = run(s, RunOptions(verify_every=10), csv_out=buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert len(rows) == 101
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 101))
    assert all(float(r[2]) <= float(r[3]) for r in rows[1:])
    assert result.exit_code == 0


def test_setcover_oracle_run():
    s = generate_stream("setcover", n=10, updates=120, f=3, window=25, seed=6)
    result = run(s, RunOptions(verify="full", verify_every=5, oracle=True))
    assert result.exit_code == 0
    checked = [r for r in result.rows if r.oracle_opt is not None]
    assert checked
    lam_f = result.engine.lam * s.f
    assert all(r.objective <= lam_f * r.oracle_opt * (1 + 1e-9) for r in checked)


def test_bmatching_trials_report():
    s = generate_stream("bmatching", n=40, updates=500, hubs=0.7, delete_ratio=0.3, seed=2, c=1.5)
    result = run(s, RunOptions(verify="invariants", verify_every=0, trials=300, seed=1))
    assert result.sampling is not None and result.sampling.probes > 0
    assert result.exit_code in (0, harness.EXIT_STATS)


def test_exit_code_is_strongest_violation():
    from dynoprimal.partition import Violation
    v = Violation("x", 0)
    r = harness.RunResult(rows=[], failures=[harness.Failure(1, "oracle", v), harness.Failure(2, "budget", v)],
                          summary={}, engine=None)
    assert r.exit_code == harness.EXIT_INVARIANT


def test_corrupted_engine_fails_checks():
    s = parse_stream(SMALL)
    replay = harness._Replay(s, RunOptions())
    for u in s.updates[:2]:
        replay.apply(u)
    replay.partition.weight[0] = 7.0
    found = replay.checks("invariants")
    assert found["invariant"]


def test_gen_command(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert main(["gen", "--mode", "setcover", "--n", "8", "--updates", "50", "--seed", "2", "--out", str(out)]) == 0
    s = parse_stream(out.read_text())
    assert s.mode == "setcover" and len(s.updates) == 50
    assert main(["gen", "--n", "5", "--updates", "5"]) == 0
    assert capsys.readouterr().out.startswith("mode hypergraph")
