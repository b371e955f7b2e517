"""Dependency-free SVG line charts for timeline series.

The output is a self-contained SVG document with labeled time/score axes
and one polyline per input series. Rendering is byte-deterministic for
identical inputs: fixed canvas, fixed coordinate formatting, no timestamps.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .errors import DataFileError
from .io import read_timeline_csv

WIDTH, HEIGHT = 800, 500
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 30, 30, 55
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _coord(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + k * step for k in range(n)]


def render_series(series: Sequence, out) -> Path:
    """Render one SVG line chart from timeline CSV files.

    ``series`` is a sequence of CSV paths (timeline schema); legend entries
    follow the input order, labeled by file stem. A series without data
    rows is a data error and no file is written.
    """
    paths = [Path(s) for s in series]
    if not paths:
        raise DataFileError(out, "no series given")
    datasets = []
    for p in paths:
        rows = read_timeline_csv(p)
        if not rows:
            raise DataFileError(p, "series has no data rows")
        datasets.append((p.stem, [(r["time"], r["score"]) for r in rows]))

    times = [t for _, rows in datasets for t, _ in rows]
    scores = [s for _, rows in datasets for _, s in rows]
    t_lo, t_hi = min(times), max(times)
    s_lo, s_hi = min(scores), max(scores)
    if t_hi == t_lo:
        t_lo, t_hi = t_lo - 1, t_hi + 1
    if s_hi == s_lo:
        s_lo, s_hi = s_lo - 0.5, s_hi + 0.5
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(t: float) -> float:
        return MARGIN_LEFT + (t - t_lo) / (t_hi - t_lo) * plot_w

    def sy(s: float) -> float:
        return MARGIN_TOP + plot_h - (s - s_lo) / (s_hi - s_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h
    x1, y1 = MARGIN_LEFT + plot_w, MARGIN_TOP
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for tv in _ticks(t_lo, t_hi):
        x = _coord(sx(tv))
        parts.append(f'<line x1="{x}" y1="{y0}" x2="{x}" y2="{y0 + 6}" stroke="black"/>')
        parts.append(
            f'<text x="{x}" y="{y0 + 22}" font-size="13" text-anchor="middle">{tv:g}</text>'
        )
    for sv in _ticks(s_lo, s_hi):
        y = _coord(sy(sv))
        parts.append(f'<line x1="{x0 - 6}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 10}" y="{y}" font-size="13" text-anchor="end" '
            f'dominant-baseline="middle">{sv:.4g}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.0f}" y="{HEIGHT - 12}" font-size="15" '
        f'text-anchor="middle">time</text>'
    )
    parts.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.0f}" font-size="15" text-anchor="middle" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.0f})">score</text>'
    )
    for k, (label, rows) in enumerate(datasets):
        color = PALETTE[k % len(PALETTE)]
        points = " ".join(f"{_coord(sx(t))},{_coord(sy(s))}" for t, s in rows)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>')
        ly = MARGIN_TOP + 18 + 20 * k
        parts.append(
            f'<line x1="{x1 - 150}" y1="{ly - 4}" x2="{x1 - 120}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{x1 - 112}" y="{ly}" font-size="13">{label}</text>')
    parts.append("</svg>")

    out_path = Path(out)
    out_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return out_path
