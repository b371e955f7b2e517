"""File formats: interaction logs, weights, timelines, scenarios, reports.

All writers are byte-deterministic for identical inputs: rows are emitted
in a fixed order, floats use round-trip decimal formatting, and JSON is
dumped with sorted keys.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

from .core import InteractionEvent, InteractionLog, WeightVector
from .debias import OptimizerReport
from .errors import DataFileError
from .evaluation import EvalResult
from .simworld import CampaignConfig, PopulationConfig, ScenarioConfig

LOG_HEADER = ["user_id", "item_id", "timestamp"]
TIMELINE_HEADER = ["time", "score", "std_error", "pairs"]
WEIGHTS_HEADER = ["item_id", "weight"]


def _fmt(x: float) -> str:
    """Round-trip decimal form of a float (17 significant digits)."""
    return format(float(x), ".17g")


def _open_checked(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise DataFileError(p, "file not found")
    return p


# ---------------------------------------------------------------------------
# Interaction logs
# ---------------------------------------------------------------------------


def _parse_event(user, item, ts, path, line) -> InteractionEvent:
    if not user or not item:
        raise DataFileError(path, "empty user_id or item_id", line)
    try:
        timestamp = int(ts)
    except (TypeError, ValueError):
        raise DataFileError(path, f"timestamp {ts!r} is not an integer", line) from None
    if timestamp < 0:
        raise DataFileError(path, f"negative timestamp {timestamp}", line)
    return InteractionEvent(str(user), str(item), timestamp)


def read_log_csv(path) -> InteractionLog:
    p = _open_checked(path)
    events = []
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LOG_HEADER:
            raise DataFileError(p, f"expected header {','.join(LOG_HEADER)}", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataFileError(p, f"expected 3 fields, got {len(row)}", line)
            events.append(_parse_event(row[0], row[1], row[2], p, line))
    return InteractionLog(events)


def read_log_jsonl(path) -> InteractionLog:
    p = _open_checked(path)
    events = []
    with p.open(encoding="utf-8") as fh:
        for line, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataFileError(p, f"invalid JSON: {exc.msg}", line) from None
            try:
                user, item, ts = obj["user_id"], obj["item_id"], obj["timestamp"]
            except (TypeError, KeyError):
                raise DataFileError(p, "expected fields user_id, item_id, timestamp", line) from None
            events.append(_parse_event(user, item, ts, p, line))
    return InteractionLog(events)


def read_interaction_log(path) -> InteractionLog:
    """Read a log; dispatches on the .csv / .jsonl suffix."""
    p = Path(path)
    if p.suffix == ".jsonl":
        return read_log_jsonl(p)
    return read_log_csv(p)


def write_log_csv(log: InteractionLog, path) -> Path:
    p = Path(path)
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for ev in log:
            writer.writerow([ev.user, ev.item, ev.timestamp])
    return p


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


def write_weights_csv(weights: WeightVector, path) -> Path:
    """Items sorted, weights at full round-trip precision; omitted items weigh 1."""
    p = Path(path)
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(WEIGHTS_HEADER)
        for item in sorted(weights.weights):
            writer.writerow([item, _fmt(weights.weights[item])])
    return p


def read_weights_csv(path) -> WeightVector:
    p = _open_checked(path)
    stored = {}
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != WEIGHTS_HEADER:
            raise DataFileError(p, f"expected header {','.join(WEIGHTS_HEADER)}", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataFileError(p, f"expected 2 fields, got {len(row)}", line)
            try:
                stored[row[0]] = float(row[1])
            except ValueError:
                raise DataFileError(p, f"weight {row[1]!r} is not a number", line) from None
    try:
        return WeightVector(stored)
    except ValueError as exc:
        raise DataFileError(p, str(exc)) from None


# ---------------------------------------------------------------------------
# Timelines
# ---------------------------------------------------------------------------


def write_timeline_csv(rows: Sequence[tuple[int, EvalResult]], path) -> Path:
    p = Path(path)
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMELINE_HEADER)
        for t, res in rows:
            writer.writerow([t, _fmt(res.score), _fmt(res.std_error), res.pairs_evaluated])
    return p


def read_timeline_csv(path) -> list[dict]:
    """Rows of a timeline CSV as dicts with parsed numbers."""
    p = _open_checked(path)
    rows = []
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TIMELINE_HEADER:
            raise DataFileError(p, f"expected header {','.join(TIMELINE_HEADER)}", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataFileError(p, f"expected 4 fields, got {len(row)}", line)
            try:
                rows.append(
                    {
                        "time": int(row[0]),
                        "score": float(row[1]),
                        "std_error": float(row[2]),
                        "pairs": int(row[3]),
                    }
                )
            except ValueError:
                raise DataFileError(p, f"malformed row {row!r}", line) from None
    return rows


# ---------------------------------------------------------------------------
# Scenarios and optimizer reports
# ---------------------------------------------------------------------------


def read_scenario_json(path) -> ScenarioConfig:
    """Parse a scenario config whose JSON mirrors the config field names."""
    p = _open_checked(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFileError(p, f"invalid JSON: {exc.msg}", exc.lineno) from None
    try:
        population = PopulationConfig(**doc["population"])
        campaigns = tuple(
            CampaignConfig(**{**c, "items": tuple(c["items"])}) for c in doc.get("campaigns", [])
        )
        return ScenarioConfig(
            population=population,
            background_rate=doc.get("background_rate", 0.0),
            campaigns=campaigns,
            horizon=doc.get("horizon", 0),
        )
    except (TypeError, KeyError, ValueError) as exc:
        raise DataFileError(p, f"bad scenario config: {exc}") from None


def write_scenario_json(cfg: ScenarioConfig, path) -> Path:
    p = Path(path)
    doc = asdict(cfg)
    doc["campaigns"] = [dict(c, items=list(c["items"])) for c in doc["campaigns"]]
    p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return p


def write_report_json(report: OptimizerReport, path) -> Path:
    p = Path(path)
    doc = {
        "iterations": report.iterations,
        "kl_trace": list(report.kl_trace),
        "final_kl": report.final_kl,
        "converged": report.converged,
        "reason": report.reason,
    }
    p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return p
