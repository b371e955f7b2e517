"""KL objective, analytic gradient, active set, weight optimizer."""
from __future__ import annotations

import math

import numpy as np
import pytest

import reweval as rw
from conftest import random_snapshot, random_target, random_weights

FD_STEP = 1e-6


def finite_difference(target, snap, model, weights, item, h=FD_STEP):
    """Central-difference derivative of the objective in one weight."""
    up = dict(weights.weights)
    down = dict(weights.weights)
    base = weights.get(item)
    up[item] = base + h
    down[item] = base - h
    d_up = rw.kl_divergence(target, snap, model, rw.WeightVector(up))
    d_down = rw.kl_divergence(target, snap, model, rw.WeightVector(down))
    return (d_up - d_down) / (2 * h)


# ---------------------------------------------------------------------------
# kl_divergence
# ---------------------------------------------------------------------------


def test_kl_zero_against_itself(fix1, uniform):
    target = rw.DebiasTarget(rw.item_marginal(fix1, uniform))
    assert rw.kl_divergence(target, fix1, uniform) == 0.0


def test_kl_hand_value(fix1, uniform):
    target = rw.DebiasTarget(rw.ItemDistribution({"a": 0.25, "b": 0.5, "c": 0.25}))
    w = rw.WeightVector({"a": 2.0, "b": 1.0, "c": 1.0})
    expected = 0.25 * math.log(0.75) + 0.5 * math.log(1.2)
    assert rw.kl_divergence(target, fix1, uniform, w) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.019240, abs=5e-7)


def test_kl_support_mismatch_names_items(fix1_log, uniform):
    snap300 = rw.build_snapshot(fix1_log, 300)  # c not yet present
    target = rw.DebiasTarget(rw.ItemDistribution({"a": 0.25, "b": 0.5, "c": 0.25}))
    with pytest.raises(rw.SupportMismatchError) as err:
        rw.kl_divergence(target, snap300, uniform)
    assert err.value.items == ("c",)
    assert "c" in str(err.value)


def test_kl_never_below_truncated_mass_bound():
    rng = np.random.default_rng(40)
    model = rw.ProbabilityModel()
    for _ in range(50):
        snap = random_snapshot(rng)
        w = random_weights(rng, snap.items)
        target = random_target(rng, snap)
        current = rw.item_marginal(snap, model, w)
        d = rw.kl_divergence(target, snap, model, w)
        assert d >= rw.kl_lower_bound(target, current) - 1e-12
        if target.support == current.support:
            assert d >= -1e-12


# ---------------------------------------------------------------------------
# select_active_set
# ---------------------------------------------------------------------------


def test_active_set_ranks_gaps():
    target = rw.DebiasTarget(rw.ItemDistribution({"a": 0.25, "b": 0.5, "c": 0.25}))
    current = rw.ItemDistribution({"a": 0.4, "b": 0.4, "c": 0.2})
    assert rw.select_active_set(target, current, 1).items == frozenset({"a"})
    assert rw.select_active_set(target, current, 2).items == frozenset({"a", "b"})
    assert rw.select_active_set(target, current, 99).items == frozenset({"a", "b", "c"})


def test_active_set_ties_break_lexicographically():
    dist = rw.ItemDistribution({"a": 0.25, "b": 0.5, "c": 0.25})
    chosen = rw.select_active_set(rw.DebiasTarget(dist), dist, 2)
    assert chosen.items == frozenset({"a", "b"})
    assert chosen.p == 2


def test_active_set_treats_missing_target_items_as_zero():
    target = rw.DebiasTarget(rw.ItemDistribution({"a": 1.0}))
    current = rw.ItemDistribution({"a": 0.9, "b": 0.06, "c": 0.04})
    assert rw.select_active_set(target, current, 1).items == frozenset({"a"})
    assert rw.select_active_set(target, current, 2).items == frozenset({"a", "b"})


# ---------------------------------------------------------------------------
# kl_gradient
# ---------------------------------------------------------------------------


def test_gradient_vanishes_at_optimum(fix1, uniform):
    target = rw.DebiasTarget(rw.item_marginal(fix1, uniform))
    grad = rw.kl_gradient(target, fix1, uniform, None, rw.ActiveSet(frozenset({"a"})))
    assert abs(grad["a"]) < 1e-12


def test_gradient_hand_value(fix1, uniform):
    target = rw.DebiasTarget(rw.ItemDistribution({"a": 0.3, "b": 0.5, "c": 0.2}))
    grad = rw.kl_gradient(target, fix1, uniform, None, rw.ActiveSet(frozenset({"a"})))
    assert grad["a"] == pytest.approx(-0.025, abs=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(41)
    model = rw.ProbabilityModel()
    checked = 0
    for _ in range(100):
        snap = random_snapshot(rng)
        w = random_weights(rng, snap.items)
        target = random_target(rng, snap)
        n_active = int(rng.integers(1, min(5, len(snap.items)) + 1))
        chosen = rng.choice(len(snap.items), size=n_active, replace=False)
        active = rw.ActiveSet(frozenset(snap.items[j] for j in chosen))
        grad = rw.kl_gradient(target, snap, model, w, active)
        for item in active.items:
            fd = finite_difference(target, snap, model, w, item)
            err = abs(grad[item] - fd)
            assert err <= max(1e-6 * max(abs(grad[item]), abs(fd)), 1e-9), (
                f"item {item}: analytic {grad[item]} vs central difference {fd}"
            )
            checked += 1
    assert checked >= 100


def test_gradient_vanishes_when_target_equals_weighted_marginal():
    rng = np.random.default_rng(42)
    model = rw.ProbabilityModel()
    for _ in range(20):
        snap = random_snapshot(rng)
        w = random_weights(rng, snap.items)
        target = rw.DebiasTarget(rw.item_marginal(snap, model, w))
        active = rw.ActiveSet(frozenset(snap.items))
        grad = rw.kl_gradient(target, snap, model, w, active)
        assert max(abs(v) for v in grad.values()) < 1e-10


def test_gradient_rejects_unknown_active_item(fix1, uniform):
    target = rw.DebiasTarget(rw.item_marginal(fix1, uniform))
    with pytest.raises(rw.UnknownItemError):
        rw.kl_gradient(target, fix1, uniform, None, rw.ActiveSet(frozenset({"zzz"})))


def test_gradient_support_mismatch(fix1_log, uniform):
    snap300 = rw.build_snapshot(fix1_log, 300)
    target = rw.DebiasTarget(rw.ItemDistribution({"c": 1.0}))
    with pytest.raises(rw.SupportMismatchError):
        rw.kl_gradient(target, snap300, uniform, None, rw.ActiveSet(frozenset({"a"})))


# ---------------------------------------------------------------------------
# optimize_weights
# ---------------------------------------------------------------------------


def test_optimizer_trivial_target_stops_immediately(fix1, uniform):
    target = rw.DebiasTarget(rw.item_marginal(fix1, uniform))
    weights, report = rw.optimize_weights(target, fix1, uniform, rw.OptimizerConfig(p=3))
    assert report.iterations == 0
    assert report.final_kl == 0.0
    assert report.converged
    assert all(weights.get(i) == 1.0 for i in fix1.items)


def test_optimizer_reaches_shifted_target(fix1, uniform):
    target = rw.DebiasTarget(rw.ItemDistribution({"a": 0.3, "b": 0.5, "c": 0.2}))
    weights, report = rw.optimize_weights(target, fix1, uniform, rw.OptimizerConfig(p=3))
    assert report.final_kl < 1e-6 * report.kl_trace[0]
    fitted = rw.item_marginal(fix1, uniform, weights)
    for item in "abc":
        assert abs(fitted.prob(item) - target.reference.prob(item)) < 1e-3


def test_optimizer_trace_non_increasing_and_consistent():
    rng = np.random.default_rng(43)
    model = rw.ProbabilityModel()
    for _ in range(10):
        snap = random_snapshot(rng)
        target = random_target(rng, snap)
        p = int(rng.integers(1, len(snap.items) + 1))
        try:
            weights, report = rw.optimize_weights(snap=snap, target=target, model=model, cfg=rw.OptimizerConfig(p=p))
        except rw.NoProgressError:
            continue
        trace = report.kl_trace
        assert all(b <= a for a, b in zip(trace, trace[1:]))
        assert report.final_kl == trace[-1]
        assert report.final_kl <= trace[0]
        assert report.iterations == len(trace) - 1
        # Post-hoc: the reported objective matches a fresh computation.
        assert rw.kl_divergence(target, snap, model, weights) == pytest.approx(
            report.final_kl, abs=1e-15
        )


def test_optimizer_leaves_inactive_weights_at_one():
    rng = np.random.default_rng(44)
    model = rw.ProbabilityModel()
    snap = random_snapshot(rng, max_users=15, max_items=12)
    target = random_target(rng, snap)
    p = 3
    weights, _ = rw.optimize_weights(target, snap, model, rw.OptimizerConfig(p=p))
    active = rw.select_active_set(target, rw.item_marginal(snap, model), p)
    assert set(weights.weights) == set(active.items)
    for item in snap.items:
        if item not in active.items:
            assert weights.get(item) == 1.0


def test_optimizer_tames_simulated_drift(s1_world):
    # On the drifted world, an active set covering every campaign item cuts
    # the divergence to at most a tenth of its starting value.
    target = rw.DebiasTarget(s1_world.marg300)
    gaps = sorted(
        ((abs(s1_world.marg300.prob(i) - s1_world.marg500.prob(i)), i) for i in s1_world.marg500.probs),
        reverse=True,
    )
    ranked = [item for _, item in gaps]
    cover_p = max(ranked.index(item) for item in rw.S1_CAMPAIGN_ITEMS) + 1
    active = rw.select_active_set(target, s1_world.marg500, cover_p)
    assert set(rw.S1_CAMPAIGN_ITEMS) <= active.items
    _, report = rw.optimize_weights(
        target, s1_world.snap500, s1_world.model, rw.OptimizerConfig(p=cover_p)
    )
    assert report.final_kl <= 0.1 * report.kl_trace[0]


def test_optimizer_survives_oversized_initial_step(fix1, uniform):
    # A huge first step must be backtracked, not overflow the weights.
    target = rw.DebiasTarget(rw.ItemDistribution({"a": 0.3, "b": 0.5, "c": 0.2}))
    weights, report = rw.optimize_weights(
        target, fix1, uniform, rw.OptimizerConfig(p=3, step=1e9)
    )
    assert report.final_kl < report.kl_trace[0]
    assert all(np.isfinite(v) and v > 0 for v in weights.weights.values())


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        rw.OptimizerConfig(p=0)
    with pytest.raises(ValueError):
        rw.OptimizerConfig(p=1, step=0.0)
    with pytest.raises(ValueError):
        rw.OptimizerConfig(p=1, max_iters=0)
