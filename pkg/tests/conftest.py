"""Shared fixtures: the four-event FIX1 world, random snapshots, and S1."""
from __future__ import annotations

import numpy as np
import pytest

import reweval as rw

FIX1_EVENTS = (
    rw.InteractionEvent("u1", "a", 10),
    rw.InteractionEvent("u1", "b", 20),
    rw.InteractionEvent("u2", "b", 5),
    rw.InteractionEvent("u2", "c", 400),
)


@pytest.fixture
def fix1_log() -> rw.InteractionLog:
    return rw.InteractionLog(FIX1_EVENTS)


@pytest.fixture
def fix1(fix1_log) -> rw.Snapshot:
    """Profiles u1:{a,b}, u2:{b,c}."""
    return rw.build_snapshot(fix1_log, 400)


@pytest.fixture
def uniform() -> rw.ProbabilityModel:
    return rw.ProbabilityModel()


def random_snapshot(rng: np.random.Generator, max_users: int = 20, max_items: int = 15) -> rw.Snapshot:
    """Random small snapshot; every user holds 1..min(6, n_items) items."""
    n_users = int(rng.integers(2, max_users + 1))
    n_items = int(rng.integers(2, max_items + 1))
    items = [f"i{j:03d}" for j in range(n_items)]
    profiles = {}
    for u in range(n_users):
        size = int(rng.integers(1, min(6, n_items) + 1))
        chosen = rng.choice(n_items, size=size, replace=False)
        profiles[f"u{u:03d}"] = {items[j] for j in chosen}
    return rw.Snapshot(0, profiles)


def random_weights(rng: np.random.Generator, items, lo: float = 0.2, hi: float = 5.0) -> rw.WeightVector:
    return rw.WeightVector({i: float(rng.uniform(lo, hi)) for i in items})


def random_target(rng: np.random.Generator, snap: rw.Snapshot) -> rw.DebiasTarget:
    """Random reference distribution over a random nonempty item subset."""
    n = len(snap.items)
    size = int(rng.integers(1, n + 1))
    chosen = rng.choice(n, size=size, replace=False)
    raw = rng.uniform(0.05, 1.0, size=size)
    raw /= raw.sum()
    return rw.DebiasTarget(
        rw.ItemDistribution({snap.items[j]: float(p) for j, p in zip(chosen, raw)})
    )


class S1World:
    """The pinned drift scenario plus the recommenders derived from it."""

    def __init__(self):
        self.log = rw.build_scenario(rw.scenario_s1())
        self.model = rw.ProbabilityModel()
        self.snap300 = rw.build_snapshot(self.log, 300)
        self.snap500 = rw.build_snapshot(self.log, 500)
        self.marg300 = rw.item_marginal(self.snap300, self.model)
        self.marg500 = rw.item_marginal(self.snap500, self.model)
        self.agreeing = rw.ConstantRecommender(rw.S1_CAMPAIGN_ITEMS)
        popular = sorted(
            (i for i in self.marg300.probs if i not in rw.S1_CAMPAIGN_ITEMS),
            key=lambda i: (-self.marg300.prob(i), i),
        )
        self.disagreeing = rw.ConstantRecommender(tuple(popular[:5]))


@pytest.fixture(scope="session")
def s1_world() -> S1World:
    return S1World()
