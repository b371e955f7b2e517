"""SVG rendering of timeline series."""
from __future__ import annotations

import pytest

import reweval as rw
from reweval import io
from reweval.charts import render_series


def _series(tmp_path, name, rows):
    payload = [
        (t, rw.EvalResult(score=s, std_error=0.0, pairs_evaluated=1)) for t, s in rows
    ]
    return io.write_timeline_csv(payload, tmp_path / f"{name}.csv")


def test_single_series_polyline(tmp_path):
    path = _series(tmp_path, "one", [(300, 0.1), (400, 0.3), (500, 0.2)])
    out = render_series([path], tmp_path / "chart.svg")
    svg = out.read_text()
    assert svg.count("<polyline") == 1
    points = svg.split('points="')[1].split('"')[0]
    assert len(points.split()) == 3
    assert "time" in svg and "score" in svg


def test_two_series_legend_order(tmp_path):
    a = _series(tmp_path, "alpha", [(0, 0.0), (10, 1.0)])
    b = _series(tmp_path, "beta", [(0, 1.0), (10, 0.0)])
    out = render_series([a, b], tmp_path / "chart.svg")
    svg = out.read_text()
    assert svg.count("<polyline") == 2
    assert svg.index(">alpha<") < svg.index(">beta<")


def test_empty_series_is_error_and_writes_nothing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("time,score,std_error,pairs\n")
    out = tmp_path / "chart.svg"
    with pytest.raises(rw.DataFileError):
        render_series([empty], out)
    assert not out.exists()


def test_malformed_series_names_line(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,score,std_error,pairs\n300,oops,0,4\n")
    with pytest.raises(rw.DataFileError) as err:
        render_series([bad], tmp_path / "chart.svg")
    assert err.value.line == 2


def test_rendering_is_byte_deterministic(tmp_path):
    path = _series(tmp_path, "one", [(300, 0.1), (400, 0.3)])
    out1 = render_series([path], tmp_path / "c1.svg")
    out2 = render_series([path], tmp_path / "c2.svg")
    assert out1.read_bytes() == out2.read_bytes()


def test_flat_series_renders(tmp_path):
    path = _series(tmp_path, "flat", [(100, 0.5), (200, 0.5)])
    out = render_series([path], tmp_path / "chart.svg")
    assert out.read_text().count("<polyline") == 1
