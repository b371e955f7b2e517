"""Leave-one-out offline evaluation of recommenders.

A recommender is scored by removing one item from a user profile and
checking how well the recommendation computed from the reduced profile
recovers the removed item. The expectation runs over a user prior P(u) and
a per-profile conditional P(i|u), either exhaustively over all (user, item)
pairs or by seeded stochastic sampling.
"""
from __future__ import annotations

import abc
from collections.abc import Mapping
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import (
    InteractionLog,
    ItemDistribution,
    ItemId,
    ProbabilityModel,
    Snapshot,
    UserId,
    WeightVector,
    _WeightedState,
    build_snapshot,
)
from .errors import ItemNotInProfileError

# A quality function scores how well a ranked recommendation recovers the
# removed item; it maps (recommended sequence, removed item) to [0, 1].
QualityFunction = Callable[[Sequence[ItemId], ItemId], float]


def hit_in_top_k(recommended: Sequence[ItemId], item: ItemId) -> float:
    """1.0 when the removed item appears in the recommendation, else 0.0."""
    return 1.0 if item in recommended else 0.0


def inverse_rank(recommended: Sequence[ItemId], item: ItemId) -> float:
    """1/rank of the removed item (1-based), 0.0 when absent."""
    for rank, rec in enumerate(recommended, start=1):
        if rec == item:
            return 1.0 / rank
    return 0.0


QUALITY_FUNCTIONS: Mapping[str, QualityFunction] = {
    "hit": hit_in_top_k,
    "invrank": inverse_rank,
}


class Recommender(abc.ABC):
    """Maps a (possibly reduced) profile and a snapshot to ranked items.

    Implementations must return at most ``k`` distinct items, best first.
    """

    @property
    @abc.abstractmethod
    def k(self) -> int:
        """Recommendation size."""

    @abc.abstractmethod
    def recommend(self, profile: frozenset[ItemId], snap: Snapshot) -> tuple[ItemId, ...]:
        """Ranked items for the given reduced profile."""


@dataclass(frozen=True)
class ConstantRecommender(Recommender):
    """Always recommends the same fixed item sequence."""

    items: tuple[ItemId, ...]

    def __post_init__(self):
        items = tuple(self.items)
        if len(set(items)) != len(items):
            raise ValueError("recommended items must be distinct")
        object.__setattr__(self, "items", items)

    @property
    def k(self) -> int:
        return len(self.items)

    def recommend(self, profile: frozenset[ItemId], snap: Snapshot) -> tuple[ItemId, ...]:
        return self.items


def remove_item(profile: frozenset[ItemId], item: ItemId) -> frozenset[ItemId]:
    """Profile with one item removed; the input is unchanged.

    The result may be empty. Raises ItemNotInProfileError when the item is
    not on the profile.
    """
    if item not in profile:
        raise ItemNotInProfileError(f"item {item!r} not in profile")
    return profile - {item}


@dataclass(frozen=True)
class EvalConfig:
    """How to estimate the offline score.

    ``mode`` is "exhaustive" (weighted sum over all pairs) or "stochastic"
    (``draws`` seeded samples). ``weights`` optionally reshapes P(i|u);
    in :func:`timeline_evaluate` it may instead be a mapping time -> weights.
    """

    mode: str = "exhaustive"
    draws: int | None = None
    seed: int = 0
    weights: WeightVector | Mapping[int, WeightVector] | None = None

    def __post_init__(self):
        if self.mode not in ("exhaustive", "stochastic"):
            raise ValueError(f"mode must be 'exhaustive' or 'stochastic', got {self.mode!r}")
        if self.mode == "stochastic":
            if self.draws is None or self.draws < 1:
                raise ValueError("stochastic mode requires draws >= 1")


@dataclass(frozen=True)
class EvalResult:
    """Offline score with sampling error.

    ``std_error`` is 0 in exhaustive mode; ``seed`` records the generator
    seed for stochastic runs.
    """

    score: float
    std_error: float
    pairs_evaluated: int
    seed: int | None = None


def _quality_table(
    g: ConstantRecommender, items: Sequence[ItemId], quality: QualityFunction
) -> np.ndarray:
    """Per-item quality of a constant recommendation, aligned with ``items``."""
    return np.array([quality(g.items, item) for item in items], dtype=float)


def _evaluate_exhaustive(
    g: Recommender,
    snap: Snapshot,
    state: _WeightedState,
    quality: QualityFunction,
) -> EvalResult:
    idx = state.idx
    pu_pair = state.pu[idx.pair_user]
    if isinstance(g, ConstantRecommender):
        # A constant recommendation makes the quality depend on the removed
        # item only; the sum still runs over every (user, item) pair.
        q = _quality_table(g, idx.items, quality)
        score = float(np.dot(state.wc * pu_pair, q[idx.pair_item]))
    else:
        score = 0.0
        pos = 0
        for upos, user in enumerate(idx.users):
            prof = snap.profiles[user]
            hi = int(idx.user_ptr[upos + 1])
            while pos < hi:
                item = idx.items[idx.pair_item[pos]]
                rec = g.recommend(prof - {item}, snap)
                score += float(pu_pair[pos] * state.wc[pos]) * quality(rec, item)
                pos += 1
    return EvalResult(score=score, std_error=0.0, pairs_evaluated=int(idx.user_ptr[-1]))


def _sample_pairs(state: _WeightedState, draws: int, seed: int) -> np.ndarray:
    """Draw pair positions: users from P(u), then one profile item each.

    The draw sequence is fixed: a PCG64 generator seeded with ``seed`` first
    draws all ``draws`` users (inverse CDF over P(u)), then one uniform per
    draw mapped through the user's cumulative weighted conditional.
    """
    idx = state.idx
    rng = np.random.default_rng(seed)
    users = rng.choice(len(idx.users), size=draws, replace=True, p=state.pu)
    u = rng.random(draws)
    cum = np.cumsum(state.wc)
    cum0 = np.concatenate(([0.0], cum))
    start = idx.user_ptr[users]
    end = idx.user_ptr[users + 1]
    target = cum0[start] + u * (cum0[end] - cum0[start])
    pos = np.searchsorted(cum, target, side="right")
    return np.clip(pos, start, end - 1)


def _evaluate_stochastic(
    g: Recommender,
    snap: Snapshot,
    state: _WeightedState,
    quality: QualityFunction,
    draws: int,
    seed: int,
) -> EvalResult:
    idx = state.idx
    pos = _sample_pairs(state, draws, seed)
    if isinstance(g, ConstantRecommender):
        q = _quality_table(g, idx.items, quality)
        values = q[idx.pair_item[pos]]
    else:
        values = np.empty(draws, dtype=float)
        for j, p in enumerate(pos):
            user = idx.users[idx.pair_user[p]]
            item = idx.items[idx.pair_item[p]]
            rec = g.recommend(snap.profiles[user] - {item}, snap)
            values[j] = quality(rec, item)
    score = float(np.mean(values))
    std_error = float(np.std(values, ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0
    return EvalResult(score=score, std_error=std_error, pairs_evaluated=draws, seed=seed)


def evaluate(
    g: Recommender,
    snap: Snapshot,
    model: ProbabilityModel,
    quality: QualityFunction = hit_in_top_k,
    cfg: EvalConfig = EvalConfig(),
) -> EvalResult:
    """Offline score of a recommender on one snapshot.

    Exhaustive mode returns
    sum over pairs (u, i in profile) of P(u) P(i|u, w) q(g(u without i), i),
    iterating every pair once in a fixed order. Stochastic mode draws
    ``cfg.draws`` users from P(u) with replacement, then one item per drawn
    user from P(i|u, w), and reports the sample mean with its standard
    error; results are fully determined by ``cfg.seed``.
    """
    weights = cfg.weights
    if weights is not None and not isinstance(weights, WeightVector):
        raise TypeError("evaluate expects a WeightVector; time-keyed schedules are for timeline_evaluate")
    state = _WeightedState(snap, model, weights)
    if cfg.mode == "exhaustive":
        return _evaluate_exhaustive(g, snap, state, quality)
    return _evaluate_stochastic(g, snap, state, quality, cfg.draws, cfg.seed)


def constant_score(
    items: Sequence[ItemId],
    dist: ItemDistribution,
    quality: QualityFunction = hit_in_top_k,
) -> float:
    """Score of a fixed recommendation against an item marginal.

    Returns sum_i dist(i) q(items, i); for a constant recommender this
    equals the exhaustive offline score computed from the same marginal.
    """
    return float(sum(dist.probs[i] * quality(items, i) for i in dist.items_sorted()))


def timeline_evaluate(
    g: Recommender,
    log: InteractionLog,
    times: Sequence[int],
    model: ProbabilityModel,
    quality: QualityFunction = hit_in_top_k,
    cfg: EvalConfig = EvalConfig(),
) -> list[tuple[int, EvalResult]]:
    """Evaluate on the snapshot at each time in ``times``.

    ``times`` must be non-empty and strictly increasing. When ``cfg.weights``
    is a mapping time -> WeightVector, the matching weights are applied at
    each time (missing times evaluate unweighted).
    """
    if len(times) == 0:
        raise ValueError("times must be non-empty")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")
    schedule = cfg.weights if isinstance(cfg.weights, Mapping) else None
    results: list[tuple[int, EvalResult]] = []
    for t in times:
        at_t = cfg if schedule is None else replace(cfg, weights=schedule.get(t))
        snap = build_snapshot(log, t)
        results.append((t, evaluate(g, snap, model, quality, at_t)))
    return results
