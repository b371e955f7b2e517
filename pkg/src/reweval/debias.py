"""Bias reduction by per-item reweighting.

Feedback loops drift the item marginal between two evaluation times. To
compare offline scores across time, per-item weights are tuned so that the
weighted marginal at the later time matches a frozen reference marginal.
The objective is the Kullback-Leibler divergence of the reference against
the current weighted marginal, summed over the reference support (a
truncated KL: the current marginal restricted to that support may carry
less than full mass, and is deliberately not renormalized).

Optimization runs on a small active set of items, chosen once as those
whose unweighted marginals drifted most, and uses plain gradient descent in
log-weight space with backtracking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ItemDistribution,
    ItemId,
    ProbabilityModel,
    Snapshot,
    WeightVector,
    _WeightedState,
    item_marginal,
)
from .errors import NoProgressError, SupportMismatchError, UnknownItemError


@dataclass(frozen=True)
class DebiasTarget:
    """Frozen reference marginal the weighted marginal should match.

    ``support`` is the set of items with positive reference probability;
    the objective sums over exactly these items.
    """

    reference: ItemDistribution

    def __post_init__(self):
        if not self.reference.support:
            raise ValueError("target support must be non-empty")

    @property
    def support(self) -> frozenset[ItemId]:
        return self.reference.support


@dataclass(frozen=True)
class ActiveSet:
    """The items whose weights the optimizer is allowed to tune."""

    items: frozenset[ItemId]

    def __post_init__(self):
        object.__setattr__(self, "items", frozenset(self.items))
        if not self.items:
            raise ValueError("active set must be non-empty")

    @property
    def p(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class OptimizerConfig:
    """Gradient-descent settings.

    ``p`` is the active-set size. ``step`` is the initial log-space step,
    halved while the objective fails to decrease (at most 30 halvings per
    iteration) and grown by 1.5x after each accepted step.
    """

    p: int
    step: float = 1.0
    max_iters: int = 500
    grad_tol: float = 1e-7
    kl_tol: float = 1e-9

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        for name in ("step", "max_iters", "grad_tol", "kl_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class OptimizerReport:
    """Trace of one optimization run.

    ``kl_trace`` holds the objective at the start plus each accepted
    iterate, so it is non-increasing and ends at ``final_kl``.
    """

    iterations: int
    kl_trace: tuple[float, ...]
    final_kl: float
    final_weights: WeightVector
    converged: bool
    reason: str


def _reference_arrays(
    target: DebiasTarget, state: _WeightedState
) -> tuple[np.ndarray, np.ndarray]:
    """Reference probabilities and the ratio ref/current per item position.

    Raises SupportMismatchError, naming the offending items, when a support
    item is missing from the snapshot or has zero current marginal.
    """
    idx = state.idx
    ref = np.zeros(len(idx.items))
    missing = []
    for item in sorted(target.support):
        pos = idx.item_pos.get(item)
        if pos is None or state.marginal[pos] <= 0.0:
            missing.append(item)
        else:
            ref[pos] = target.reference.probs[item]
    if missing:
        raise SupportMismatchError(missing)
    ratio = np.zeros(len(idx.items))
    on = ref > 0.0
    ratio[on] = ref[on] / state.marginal[on]
    return ref, ratio


def kl_divergence(
    target: DebiasTarget,
    snap: Snapshot,
    model: ProbabilityModel,
    weights: WeightVector | None = None,
) -> float:
    """Divergence of the reference against the current weighted marginal.

    Returns sum over support items of ref(i) * ln(ref(i) / current(i)),
    natural logarithm; items outside the reference support contribute
    nothing.
    """
    state = _WeightedState(snap, model, weights)
    ref, ratio = _reference_arrays(target, state)
    on = ref > 0.0
    return float(np.dot(ref[on], np.log(ratio[on])))


def select_active_set(
    target: DebiasTarget, current: ItemDistribution, p: int
) -> ActiveSet:
    """The ``p`` items whose marginals drifted most from the reference.

    Gaps are |ref(i) - current(i)| over the current distribution's items,
    with ref(i) = 0 for items absent from the target. Ties break on the
    lexicographically smaller item identifier. When ``p`` exceeds the
    candidate count, all candidates are returned.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    ranked = sorted(
        current.probs,
        key=lambda item: (-abs(target.reference.prob(item) - current.probs[item]), item),
    )
    return ActiveSet(frozenset(ranked[: min(p, len(ranked))]))


def kl_gradient(
    target: DebiasTarget,
    snap: Snapshot,
    model: ProbabilityModel,
    weights: WeightVector | None,
    active: ActiveSet,
) -> dict[ItemId, float]:
    """Analytic gradient of the objective on the active coordinates.

    For an active item k the derivative is

        sum_i ref(i) / (w_k current(i)) * (joint(i, k) - [i == k] current(k))

    where joint(i, k) is the probability that two independent draws from
    the weighted procedure pick i and k. Each coordinate is computed in one
    pass over the pairs of the users holding k and their items, so the full
    gradient costs O(p * nnz).
    """
    idx = snap.index
    state = _WeightedState(snap, model, weights)
    _, ratio = _reference_arrays(target, state)

    rpair = ratio[idx.pair_item]
    seg_value = rpair * state.wc
    grad: dict[ItemId, float] = {}
    for item in sorted(active.items):
        kpos = idx.item_pos.get(item)
        if kpos is None:
            raise UnknownItemError(f"active item {item!r} not in snapshot")
        pos_k = idx.pairs_of_item(kpos)
        users_k = idx.pair_user[pos_k]
        outer = state.wc[pos_k] * state.pu[users_k]
        grad[item] = (
            _cross_mass(idx, seg_value, users_k, outer)
            - float(ratio[kpos] * state.marginal[kpos])
        ) / float(state.w[kpos])
    return grad


# Pair budget per gather block; keeps the temporaries cache-resident so the
# per-coordinate cost stays linear in the number of gathered pairs.
_BLOCK_PAIRS = 16384

# Bounds on log-weights during optimization (weights in [1e-130, 1e130]).
_LOG_WEIGHT_BOUND = (-300.0, 300.0)


def _cross_mass(idx, seg_value: np.ndarray, users_k: np.ndarray, outer: np.ndarray) -> float:
    """sum over users holding k of outer_u * sum_{i in profile} seg_value.

    One pass over the pairs of the given users, in blocks of whole users.
    """
    starts = idx.user_ptr[users_k]
    counts = idx.deg[users_k]
    csum = np.cumsum(counts)
    total = int(csum[-1]) if counts.size else 0
    if total == 0:
        return 0.0
    cuts = np.searchsorted(csum, np.arange(_BLOCK_PAIRS, total, _BLOCK_PAIRS), side="left") + 1
    edges = np.unique(np.concatenate(([0], cuts, [len(users_k)])))
    cross = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        counts_blk = counts[a:b]
        seg_starts = np.concatenate(([0], np.cumsum(counts_blk[:-1])))
        n_blk = int(seg_starts[-1] + counts_blk[-1])
        gather = np.arange(n_blk) + np.repeat(starts[a:b] - seg_starts, counts_blk)
        inner = np.add.reduceat(seg_value[gather], seg_starts)
        cross += float(np.dot(outer[a:b], inner))
    return cross


def optimize_weights(
    target: DebiasTarget,
    snap: Snapshot,
    model: ProbabilityModel,
    cfg: OptimizerConfig,
) -> tuple[WeightVector, OptimizerReport]:
    """Fit per-item weights so the weighted marginal approaches the target.

    Starts from all weights 1, selects the active set once from the
    unweighted marginal of ``snap``, and runs gradient descent on the active
    coordinates only; all other weights stay exactly 1. Positivity is kept
    by stepping in log space (theta = ln w, chain-rule gradient w * dD/dw).
    Stops when the Euclidean norm of the log-space gradient falls below
    ``grad_tol``, when the relative objective improvement falls below
    ``kl_tol``, or after ``max_iters`` accepted steps.

    Raises NoProgressError when the very first iteration cannot find a
    decreasing step.
    """
    active = select_active_set(target, item_marginal(snap, model), cfg.p)
    act_items = sorted(active.items)

    def to_weights(theta: np.ndarray) -> WeightVector:
        return WeightVector({i: float(w) for i, w in zip(act_items, np.exp(theta))})

    theta = np.zeros(len(act_items))
    weights = to_weights(theta)
    current = kl_divergence(target, snap, model, weights)
    trace = [current]
    step = cfg.step
    converged = False
    reason = "max_iters"

    for _ in range(cfg.max_iters):
        grad = kl_gradient(target, snap, model, weights, active)
        g_theta = np.array([grad[i] for i in act_items]) * np.exp(theta)
        if float(np.linalg.norm(g_theta)) <= cfg.grad_tol:
            converged = True
            reason = "grad_tol"
            break
        size = step
        accepted = False
        for _halving in range(31):
            # Clamping the trial point keeps every weight strictly inside
            # the representable positive range; an oversized step then
            # fails the decrease test and is halved instead of overflowing.
            cand_theta = np.clip(
                theta - size * g_theta, _LOG_WEIGHT_BOUND[0], _LOG_WEIGHT_BOUND[1]
            )
            cand_weights = to_weights(cand_theta)
            cand = kl_divergence(target, snap, model, cand_weights)
            if cand < current:
                accepted = True
                break
            size *= 0.5
        if not accepted:
            if len(trace) == 1:
                raise NoProgressError(
                    "no decreasing step found on the first iteration"
                )
            converged = True
            reason = "line_search"
            break
        previous = current
        theta, weights, current = cand_theta, cand_weights, cand
        trace.append(current)
        step = size * 1.5
        if previous > 0.0 and (previous - current) <= cfg.kl_tol * previous:
            converged = True
            reason = "kl_tol"
            break

    report = OptimizerReport(
        iterations=len(trace) - 1,
        kl_trace=tuple(trace),
        final_kl=trace[-1],
        final_weights=weights,
        converged=converged,
        reason=reason,
    )
    return weights, report


def kl_lower_bound(target: DebiasTarget, current: ItemDistribution) -> float:
    """Tight lower bound of the truncated objective given the support mass.

    With q = sum of current probabilities over the target support, the
    objective is at least -ln(q); this equals 0 when the support carries
    full mass.
    """
    q = sum(current.probs.get(i, 0.0) for i in sorted(target.support))
    return -math.log(q) if q > 0.0 else float("inf")
