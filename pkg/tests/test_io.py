"""File formats: round trips and malformed-input diagnostics."""
from __future__ import annotations

import json

import pytest

import reweval as rw
from reweval import io
from conftest import FIX1_EVENTS


def test_log_csv_round_trip(tmp_path):
    log = rw.InteractionLog(FIX1_EVENTS)
    path = io.write_log_csv(log, tmp_path / "log.csv")
    assert path.read_text().splitlines()[0] == "user_id,item_id,timestamp"
    back = io.read_interaction_log(path)
    assert back.events == log.events


def test_log_jsonl_round_trip(tmp_path):
    path = tmp_path / "log.jsonl"
    rows = [
        {"user_id": e.user, "item_id": e.item, "timestamp": e.timestamp}
        for e in FIX1_EVENTS
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    back = io.read_interaction_log(path)
    assert back.events == FIX1_EVENTS


def test_log_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "log.csv"
    path.write_text("user,item,ts\nu1,a,1\n")
    with pytest.raises(rw.DataFileError) as err:
        io.read_log_csv(path)
    assert err.value.line == 1


def test_log_csv_names_bad_line(tmp_path):
    path = tmp_path / "log.csv"
    path.write_text("user_id,item_id,timestamp\nu1,a,1\nu2,b,not_a_number\n")
    with pytest.raises(rw.DataFileError) as err:
        io.read_log_csv(path)
    assert err.value.line == 3
    assert "log.csv" in str(err.value)


def test_log_jsonl_names_bad_line(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text('{"user_id":"u1","item_id":"a","timestamp":1}\n{"user_id":"u2"}\n')
    with pytest.raises(rw.DataFileError) as err:
        io.read_log_jsonl(path)
    assert err.value.line == 2


def test_missing_file():
    with pytest.raises(rw.DataFileError):
        io.read_interaction_log("no_such_file.csv")


def test_weights_round_trip_exact(tmp_path):
    w = rw.WeightVector({"a": 1 / 3, "b": 2.5000000000000004, "c": 1e-7})
    path = io.write_weights_csv(w, tmp_path / "w.csv")
    back = io.read_weights_csv(path)
    assert back.weights == w.weights  # bit-exact via 17 significant digits
    assert back.get("absent") == 1.0


def test_weights_rejects_nonpositive(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("item_id,weight\na,0.0\n")
    with pytest.raises(rw.DataFileError):
        io.read_weights_csv(path)


def test_timeline_round_trip(tmp_path):
    rows = [
        (300, rw.EvalResult(score=0.125, std_error=0.0, pairs_evaluated=4)),
        (301, rw.EvalResult(score=1 / 3, std_error=0.01, pairs_evaluated=4)),
    ]
    path = io.write_timeline_csv(rows, tmp_path / "tl.csv")
    assert path.read_text().splitlines()[0] == "time,score,std_error,pairs"
    back = io.read_timeline_csv(path)
    assert back[0] == {"time": 300, "score": 0.125, "std_error": 0.0, "pairs": 4}
    assert back[1]["score"] == 1 / 3


def test_scenario_round_trip(tmp_path):
    cfg = rw.scenario_s1()
    path = io.write_scenario_json(cfg, tmp_path / "scenario.json")
    assert io.read_scenario_json(path) == cfg


def test_scenario_rejects_bad_config(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text('{"population": {"n_users": 0, "n_items": 5}}')
    with pytest.raises(rw.DataFileError):
        io.read_scenario_json(path)
    path.write_text("{not json")
    with pytest.raises(rw.DataFileError):
        io.read_scenario_json(path)


def test_report_json(tmp_path):
    report = rw.OptimizerReport(
        iterations=2,
        kl_trace=(0.5, 0.25, 0.1),
        final_kl=0.1,
        final_weights=rw.WeightVector({"a": 2.0}),
        converged=True,
        reason="kl_tol",
    )
    path = io.write_report_json(report, tmp_path / "report.json")
    doc = json.loads(path.read_text())
    assert doc["iterations"] == 2
    assert doc["kl_trace"] == [0.5, 0.25, 0.1]
    assert doc["converged"] is True
    assert doc["reason"] == "kl_tol"
