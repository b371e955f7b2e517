"""Batch command-line front end.

Subcommands: ``eval`` (score one recommender at one time), ``timeline``
(scores over a day range, as CSV plus SVG), ``optimize`` (fit debiasing
weights between two times), ``simulate`` (generate a synthetic log from a
scenario JSON), and ``stats`` (snapshot statistics).

Exit status: 0 on success, 1 on usage errors, 2 on data errors. All
diagnostics go to standard error; results go to standard output or to the
files named by ``--out``. Every file-writing command also writes a
``*.manifest.json`` recording inputs, seeds, the package version, wall
time, and a content hash per emitted file.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from . import io
from .charts import render_series
from .core import ProbabilityModel, build_snapshot, item_marginal
from .debias import DebiasTarget, OptimizerConfig, optimize_weights
from .errors import DataFileError, RewevalError
from .evaluation import QUALITY_FUNCTIONS, ConstantRecommender, EvalConfig, evaluate
from .simworld import build_scenario


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _common() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--threads",
        type=_positive_int,
        default=1,
        help="cap on parallel workers; results never depend on it "
        "(the current build computes single-process)",
    )
    return common


def build_parser() -> _Parser:
    parser = _Parser(
        prog="reweval",
        description="Offline recommender evaluation with feedback-loop bias correction.",
    )
    common = _common()
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_eval_flags(p: _Parser, with_at: bool):
        p.add_argument("--log", required=True, help="interaction log (.csv or .jsonl)")
        if with_at:
            p.add_argument("--at", type=int, required=True, help="snapshot time (day)")
        else:
            p.add_argument("--t0", type=int, required=True, help="first day of the range")
            p.add_argument("--t1", type=int, required=True, help="last day of the range")
        p.add_argument(
            "--recommend",
            required=True,
            help="comma-separated items of the constant recommender",
        )
        p.add_argument("--k", type=_positive_int, default=5, help="recommendation size (default 5)")
        p.add_argument(
            "--quality",
            choices=sorted(QUALITY_FUNCTIONS),
            default="hit",
            help="quality function (default hit)",
        )
        p.add_argument(
            "--mode",
            choices=["exhaustive", "stochastic"],
            default="exhaustive",
            help="estimation mode (default exhaustive)",
        )
        p.add_argument(
            "--draws",
            type=_positive_int,
            default=None,
            help="stochastic sample size; required with --mode stochastic "
            "(20000 is the standard protocol)",
        )
        p.add_argument("--seed", type=int, default=0, help="stochastic sampling seed (default 0)")
        p.add_argument("--weights", default=None, help="item weights CSV to apply")

    p_eval = sub.add_parser("eval", parents=[common], help="score one recommender at one time")
    add_eval_flags(p_eval, with_at=True)
    p_eval.set_defaults(handler=_cmd_eval)

    p_tl = sub.add_parser(
        "timeline", parents=[common], help="scores for every day in a range, as CSV plus SVG"
    )
    add_eval_flags(p_tl, with_at=False)
    p_tl.add_argument("--out", required=True, help="output CSV path")
    p_tl.set_defaults(handler=_cmd_timeline)

    p_opt = sub.add_parser(
        "optimize", parents=[common], help="fit debiasing weights between two times"
    )
    p_opt.add_argument("--log", required=True, help="interaction log (.csv or .jsonl)")
    p_opt.add_argument("--t0", type=int, required=True, help="reference time")
    p_opt.add_argument("--t1", type=int, required=True, help="current time")
    p_opt.add_argument("--p", type=_positive_int, required=True, help="active-set size")
    p_opt.add_argument("--out", required=True, help="output weights CSV path")
    p_opt.set_defaults(handler=_cmd_optimize)

    p_sim = sub.add_parser(
        "simulate", parents=[common], help="generate a synthetic interaction log"
    )
    p_sim.add_argument("--scenario", required=True, help="scenario config JSON")
    p_sim.add_argument("--out", required=True, help="output log CSV path")
    p_sim.set_defaults(handler=_cmd_simulate)

    p_stats = sub.add_parser("stats", parents=[common], help="snapshot statistics")
    p_stats.add_argument("--log", required=True, help="interaction log (.csv or .jsonl)")
    p_stats.add_argument("--at", type=int, required=True, help="snapshot time (day)")
    p_stats.set_defaults(handler=_cmd_stats)

    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _parse_recommend(raw: str, k: int) -> ConstantRecommender:
    items = tuple(tok for tok in raw.split(",") if tok)
    if not items:
        raise _UsageError("--recommend needs at least one item")
    try:
        return ConstantRecommender(items[:k])
    except ValueError as exc:
        raise _UsageError(f"--recommend: {exc}") from None


def _eval_config(args) -> EvalConfig:
    weights = io.read_weights_csv(args.weights) if args.weights else None
    if args.mode == "stochastic" and args.draws is None:
        raise _UsageError("--draws is required when --mode stochastic")
    return EvalConfig(mode=args.mode, draws=args.draws, seed=args.seed, weights=weights)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, command: str, inputs: dict, seeds: dict, artifacts: list[Path], started: float):
    doc = {
        "command": command,
        "inputs": inputs,
        "seeds": seeds,
        "version": __version__,
        "timings": {"wall_seconds": round(time.perf_counter() - started, 6)},
        "artifacts": [{"path": p.name, "sha256": _sha256(p)} for p in artifacts],
    }
    manifest = out.with_suffix(".manifest.json")
    manifest.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def _print_json(doc: dict):
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _cmd_eval(args) -> int:
    log = io.read_interaction_log(args.log)
    cfg = _eval_config(args)
    g = _parse_recommend(args.recommend, args.k)
    snap = build_snapshot(log, args.at)
    res = evaluate(g, snap, ProbabilityModel(), QUALITY_FUNCTIONS[args.quality], cfg)
    _print_json(
        {"score": res.score, "std_error": res.std_error, "pairs": res.pairs_evaluated}
    )
    return 0


def _cmd_timeline(args) -> int:
    started = time.perf_counter()
    log = io.read_interaction_log(args.log)
    cfg = _eval_config(args)
    g = _parse_recommend(args.recommend, args.k)
    if args.t1 < args.t0:
        raise _UsageError("--t1 must not precede --t0")
    quality = QUALITY_FUNCTIONS[args.quality]
    model = ProbabilityModel()
    rows = []
    for t in range(args.t0, args.t1 + 1):
        snap = build_snapshot(log, t)
        rows.append((t, evaluate(g, snap, model, quality, cfg)))
    out = Path(args.out)
    csv_path = io.write_timeline_csv(rows, out)
    svg_path = render_series([csv_path], out.with_suffix(".svg"))
    _write_manifest(
        out,
        "timeline",
        inputs={
            "log": str(args.log),
            "t0": args.t0,
            "t1": args.t1,
            "recommend": args.recommend,
            "k": args.k,
            "quality": args.quality,
            "mode": args.mode,
            "draws": args.draws,
            "weights": args.weights,
        },
        seeds={"seed": args.seed} if args.mode == "stochastic" else {},
        artifacts=[csv_path, svg_path],
        started=started,
    )
    return 0


def _cmd_optimize(args) -> int:
    started = time.perf_counter()
    log = io.read_interaction_log(args.log)
    model = ProbabilityModel()
    snap_ref = build_snapshot(log, args.t0)
    snap_cur = build_snapshot(log, args.t1)
    target = DebiasTarget(item_marginal(snap_ref, model))
    weights, report = optimize_weights(target, snap_cur, model, OptimizerConfig(p=args.p))
    out = Path(args.out)
    weights_path = io.write_weights_csv(weights, out)
    report_path = io.write_report_json(report, out.with_suffix(".report.json"))
    _write_manifest(
        out,
        "optimize",
        inputs={"log": str(args.log), "t0": args.t0, "t1": args.t1, "p": args.p},
        seeds={},
        artifacts=[weights_path, report_path],
        started=started,
    )
    return 0


def _cmd_simulate(args) -> int:
    started = time.perf_counter()
    scenario = io.read_scenario_json(args.scenario)
    log = build_scenario(scenario)
    out = Path(args.out)
    log_path = io.write_log_csv(log, out)
    _write_manifest(
        out,
        "simulate",
        inputs={"scenario": str(args.scenario)},
        seeds={
            "population": scenario.population.seed,
            "campaigns": [c.seed for c in scenario.campaigns],
        },
        artifacts=[log_path],
        started=started,
    )
    return 0


def _cmd_stats(args) -> int:
    log = io.read_interaction_log(args.log)
    snap = build_snapshot(log, args.at)
    _print_json(
        {
            "n_users": snap.n_users,
            "n_items": snap.n_items,
            "nnz": snap.nnz,
            "mean_profile_size": snap.nnz / snap.n_users,
        }
    )
    return 0


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def run(argv: Sequence[str] | None = None) -> int:
    """Parse and execute one invocation; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RewevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
