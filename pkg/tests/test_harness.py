from __future__ import annotations

import json
import os

import pytest

import xheal.harness as harness
from xheal import cli
from xheal.errors import ConfigError, InvariantViolation
from xheal.harness import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, RunConfig, build_topology, emit, run
from xheal.metrics import CSV_COLUMNS


def small(**kw):
    base = dict(seed=3, kappa=4, n0=16, steps=40, metrics_every=10)
    base.update(kw)
    return RunConfig(**base)


def test_same_seed_same_bytes():
    a, b = run(small()), run(small())
    assert a.csv_text() == b.csv_text()
    assert a.jsonl_text() == b.jsonl_text()
    assert run(small(seed=4)).jsonl_text() != a.jsonl_text()


def test_csv_layout():
    res = run(small())
    lines = res.csv_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert [r[0] for r in res.csv_rows] == ["10", "20", "30", "40"]


def test_zero_steps_header_only():
    res = run(small(steps=0))
    assert res.csv_text() == ",".join(CSV_COLUMNS) + "\n"
    assert res.jsonl_text() == ""


def test_deletions_logged():
    res = run(small(strategy="random-delete", steps=9))
    assert [r["case"] for r in res.records].count("insert") == 0
    assert len(res.records) == 9 and res.ledger.deletions == 9
    assert all(r["deleted"] is not None for r in res.records)


def test_ledger_matches_reports():
    res = run(small(steps=60))
    dels = [r for r in res.reports if r.deleted is not None]
    assert res.ledger.total_messages == sum(r.messages for r in dels)
    assert res.ledger.max_rounds == max(r.rounds for r in dels)
    assert res.cost_checks["total_messages"] <= res.cost_checks["message_budget"]
    assert len(res.alive_before) == len(res.reports)


def test_noheal_star_disconnects():
    res = run(small(topology="star", n0=8, healer="noheal", strategy="max-degree", steps=1))
    assert res.exit_code == EXIT_OK
    assert res.final.connected is False
    assert res.csv_rows[-1][CSV_COLUMNS.index("connected")] == "false"


def test_xheal_star_stays_connected():
    res = run(small(topology="star", n0=8, strategy="max-degree", steps=1))
    assert res.final.connected is True


def test_treeheal_runs():
    res = run(small(healer="treeheal"))
    assert res.exit_code == EXIT_OK and res.final.connected


@pytest.mark.parametrize("topo, edges", [("cycle", 6), ("path", 5), ("clique", 15), ("star", 5), ("random-regular:4", 12)])
def test_topologies(topo, edges):
    import random
    g = build_topology(topo, 6, random.Random(0))
    assert len(g) == 6 and g.num_edges() == edges


@pytest.mark.parametrize("kw", [
    dict(kappa=3), dict(kappa=2), dict(metrics_every=0), dict(healer="magic"),
    dict(topology="torus"), dict(strategy="chaos"), dict(strategy="trace"),
    dict(topology="random-regular:5", n0=7), dict(strategy="churn:2"), dict(seed=-1),
])
def test_bad_config(kw):
    with pytest.raises(ConfigError):
        run(small(**kw))


def test_trace_replay_and_from_trace():
    text = "I 1 0\nI 2 0,1\nI 3 1,2\nI 4 0,3\nD 0\nD 3\n"
    res = run(small(topology="from-trace", strategy="trace", trace_text=text, steps=10))
    assert res.exit_code == EXIT_OK
    assert res.steps_run == 2
    assert [r["deleted"] for r in res.records] == [0, 3]
    assert sorted(res.graph.nodes) == [1, 2, 4]

    res = run(small(topology="cycle", n0=6, strategy="trace", trace_text="I 6 0,3\nD 0\nD 6\n"))
    assert res.steps_run == 3 and res.final.connected


def test_atomic_emit(tmp_path):
    res = run(small())
    out = tmp_path / "sub" / "m.csv"
    emit(res, csv_path=str(out), jsonl_path=str(tmp_path / "r.jsonl"))
    assert out.read_text() == res.csv_text()
    assert [json.loads(l) for l in (tmp_path / "r.jsonl").read_text().splitlines()] == res.records
    assert not [p for p in os.listdir(out.parent) if p.endswith(".tmp")]


def test_cli_ok(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("XHEAL_SEED", raising=False)
    csv_path = tmp_path / "out.csv"
    code = cli.main(["--n0", "16", "--kappa", "4", "--steps", "20", "--csv", str(csv_path)])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["steps"] == 20 and summary["connected"] is True
    assert csv_path.read_text().startswith(",".join(CSV_COLUMNS))


def test_cli_config_errors(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("XHEAL_SEED", raising=False)
    assert cli.main(["--kappa", "3"]) == EXIT_CONFIG
    bad = tmp_path / "bad.trace"
    bad.write_text("I 1 0\nQ 2\n")
    assert cli.main(["--topology", "from-trace", "--trace", str(bad)]) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["--trace", str(tmp_path / "missing")]) == EXIT_CONFIG


def test_cli_invariant_exit(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("XHEAL_SEED", raising=False)

    def broken(healer, report, n_before):
        raise InvariantViolation("forced", {"nodes": []})

    monkeypatch.setattr(harness, "check_event", broken)
    dump = tmp_path / "v.json"
    code = cli.main(["--n0", "16", "--kappa", "4", "--steps", "5", "--violation-dump", str(dump)])
    assert code == EXIT_INVARIANT
    assert json.loads(dump.read_text()) == {"nodes": []}
    assert "forced" in capsys.readouterr().err


def test_env_seed_overrides(monkeypatch, tmp_path):
    args = ["--n0", "16", "--kappa", "4", "--steps", "30"]
    monkeypatch.setenv("XHEAL_SEED", "11")
    cfg = cli.config_from_args(cli.build_parser().parse_args(args + ["--seed", "1"]))
    assert cfg.seed == 11
    monkeypatch.setenv("XHEAL_SEED", "abc")
    with pytest.raises(ConfigError):
        cli.config_from_args(cli.build_parser().parse_args(args))


def test_cli_summary_is_strict_json(capsys, monkeypatch):
    monkeypatch.delenv("XHEAL_SEED", raising=False)
    args = ["--healer", "noheal", "--topology", "star", "--n0", "9", "--strategy", "max-degree", "--steps", "1"]
    assert cli.main(args) == EXIT_OK
    summary = json.loads(capsys.readouterr().out, parse_constant=lambda c: pytest.fail(f"non-JSON {c}"))
    assert summary["connected"] is False and summary["stretch_max"] is None
