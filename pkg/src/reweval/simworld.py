"""Synthetic interaction dynamics with recommendation campaigns.

Generates, at desk scale, the regime that makes offline scores drift: users
hold power-law-sized profiles drawn from a power-law item popularity,
organic additions trickle in daily, and recommendation campaigns push a
fixed item set to a fraction of the users, visibly bending the item
marginals right after each campaign. All randomness flows from configured
seeds, so identical configs produce identical logs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InteractionEvent, InteractionLog, ItemId, UserId
from .errors import InfeasibleConfigError

# Stream tag separating the background-additions generator from the
# population generator when both derive from the same base seed.
_BACKGROUND_STREAM = 0xB6


@dataclass(frozen=True)
class PopulationConfig:
    """Initial population of user profiles.

    Profile sizes follow a discrete power law with exponent ``alpha``
    truncated to [1, n_items], rescaled so that the expected size equals
    ``target_mean``. Items are drawn without replacement from a power-law
    popularity with exponent ``beta`` (item 0 most popular).
    """

    n_users: int
    n_items: int
    alpha: float = 2.0
    target_mean: float = 5.33
    beta: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.n_users < 1 or self.n_items < 1:
            raise ValueError("n_users and n_items must be >= 1")
        if self.target_mean < 1.0:
            raise ValueError("target_mean must be >= 1")
        if self.alpha <= 1.0 or self.beta <= 1.0:
            raise ValueError("alpha and beta must be > 1")


@dataclass(frozen=True)
class CampaignConfig:
    """One recommendation campaign.

    A seed-deterministic sample of ``reach`` of all users is targeted; each
    targeted user adds every campaign item they lack with probability
    ``accept_prob`` per item, timestamped at ``time``.
    """

    time: int
    items: tuple[ItemId, ...]
    reach: float
    accept_prob: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("campaign items must be non-empty")
        if not 0.0 <= self.reach <= 1.0 or not 0.0 <= self.accept_prob <= 1.0:
            raise ValueError("reach and accept_prob must lie in [0, 1]")
        if self.time < 0:
            raise ValueError("campaign time must be >= 0")


@dataclass(frozen=True)
class ScenarioConfig:
    """A full simulated timeline: population, daily noise, campaigns."""

    population: PopulationConfig
    background_rate: float = 0.0
    campaigns: tuple[CampaignConfig, ...] = ()
    horizon: int = 0

    def __post_init__(self):
        object.__setattr__(self, "campaigns", tuple(self.campaigns))
        if not 0.0 <= self.background_rate <= 1.0:
            raise ValueError("background_rate must lie in [0, 1]")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        times = [c.time for c in self.campaigns]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("campaigns must be sorted by time")
        if any(t > self.horizon for t in times):
            raise ValueError("campaign times must not exceed the horizon")


def _item_ids(n_items: int) -> list[ItemId]:
    width = max(3, len(str(n_items - 1)))
    return [f"i{j:0{width}d}" for j in range(n_items)]


def _user_ids(n_users: int) -> list[UserId]:
    width = max(4, len(str(n_users - 1)))
    return [f"u{j:0{width}d}" for j in range(n_users)]


def _popularity(n_items: int, beta: float) -> np.ndarray:
    ranks = np.arange(1, n_items + 1, dtype=float)
    pop = ranks ** (-beta)
    return pop / pop.sum()


def _size_law(cfg: PopulationConfig) -> tuple[np.ndarray, np.ndarray, float]:
    """Support, pmf and scale factor of the profile-size law.

    The raw law is s^(-alpha) on 1..n_items. Sizes are mapped through
    s -> clip(round(c * s), 1, n_items) with c chosen by bisection so the
    expected mapped size hits ``target_mean``.
    """
    support = np.arange(1, cfg.n_items + 1, dtype=np.int64)
    pmf = support.astype(float) ** (-cfg.alpha)
    pmf /= pmf.sum()

    def mean_at(c: float) -> float:
        mapped = np.clip(np.floor(c * support + 0.5), 1, cfg.n_items)
        return float(np.dot(pmf, mapped))

    lo, hi = 1e-9, float(cfg.n_items)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mean_at(mid) < cfg.target_mean:
            lo = mid
        else:
            hi = mid
    return support, pmf, hi


def _scaled_sizes(raw: np.ndarray, c: float, n_items: int) -> np.ndarray:
    return np.clip(np.floor(c * raw + 0.5), 1, n_items).astype(np.int64)


def generate_population(cfg: PopulationConfig) -> InteractionLog:
    """Seed-deterministic initial profiles, all at timestamp 0.

    Every user holds at least one item; the empirical mean profile size
    tracks ``cfg.target_mean`` and the size distribution stays heavy-tailed.

    Raises InfeasibleConfigError when ``target_mean`` exceeds ``n_items``.
    """
    if cfg.target_mean > cfg.n_items:
        raise InfeasibleConfigError(
            f"target_mean {cfg.target_mean} exceeds n_items {cfg.n_items}"
        )
    rng = np.random.default_rng(cfg.seed)
    support, pmf, scale = _size_law(cfg)
    sizes = _scaled_sizes(rng.choice(support, size=cfg.n_users, p=pmf), scale, cfg.n_items)
    pop = _popularity(cfg.n_items, cfg.beta)
    items = _item_ids(cfg.n_items)
    users = _user_ids(cfg.n_users)

    events: list[InteractionEvent] = []
    for upos in range(cfg.n_users):
        picked = rng.choice(cfg.n_items, size=int(sizes[upos]), replace=False, p=pop)
        events.extend(InteractionEvent(users[upos], items[j], 0) for j in picked)
    return InteractionLog(events)


def _profiles_of(log: InteractionLog) -> dict[UserId, set[ItemId]]:
    profiles: dict[UserId, set[ItemId]] = {}
    for ev in log:
        profiles.setdefault(ev.user, set()).add(ev.item)
    return profiles


def _apply_campaign(
    profiles: dict[UserId, set[ItemId]],
    users_sorted: list[UserId],
    cfg: CampaignConfig,
) -> list[InteractionEvent]:
    """Run one campaign against mutable profile state; returns new events."""
    rng = np.random.default_rng(cfg.seed)
    n_target = int(np.floor(cfg.reach * len(users_sorted) + 0.5))
    targeted = np.sort(rng.choice(len(users_sorted), size=n_target, replace=False))
    events: list[InteractionEvent] = []
    for upos in targeted:
        user = users_sorted[int(upos)]
        held = profiles[user]
        for item in cfg.items:
            if item not in held and rng.random() < cfg.accept_prob:
                held.add(item)
                events.append(InteractionEvent(user, item, cfg.time))
    return events


def run_campaign(log: InteractionLog, cfg: CampaignConfig) -> InteractionLog:
    """Apply one campaign to a log; the input log is unchanged.

    ``cfg.time`` must not precede any existing event so the output contains
    the input as a prefix under timestamp order.
    """
    if cfg.time < log.last_timestamp():
        raise ValueError(
            f"campaign time {cfg.time} precedes existing events (last at {log.last_timestamp()})"
        )
    profiles = _profiles_of(log)
    events = _apply_campaign(profiles, sorted(profiles), cfg)
    return log.extended(events)


def build_scenario(cfg: ScenarioConfig) -> InteractionLog:
    """Simulate the full timeline described by ``cfg``.

    The population is generated at t=0; on each later day every user adds
    one popularity-law item they lack with probability ``background_rate``
    (the background stream derives from the population seed); campaigns
    fire at their configured times, after that day's background additions.
    """
    log = generate_population(cfg.population)
    profiles = _profiles_of(log)
    users = sorted(profiles)
    n_users = len(users)
    pop = _popularity(cfg.population.n_items, cfg.population.beta)
    items = _item_ids(cfg.population.n_items)

    by_time: dict[int, list[CampaignConfig]] = {}
    for camp in cfg.campaigns:
        by_time.setdefault(camp.time, []).append(camp)

    bg = np.random.default_rng([cfg.population.seed, _BACKGROUND_STREAM])
    events: list[InteractionEvent] = []
    for day in range(1, cfg.horizon + 1):
        if cfg.background_rate > 0.0:
            triggered = np.nonzero(bg.random(n_users) < cfg.background_rate)[0]
            if triggered.size:
                drawn = bg.choice(cfg.population.n_items, size=triggered.size, p=pop)
                for upos, j in zip(triggered, drawn):
                    user = users[int(upos)]
                    item = items[int(j)]
                    if item not in profiles[user]:
                        profiles[user].add(item)
                        events.append(InteractionEvent(user, item, day))
        for camp in by_time.get(day, []):
            events.extend(_apply_campaign(profiles, users, camp))
    return log.extended(events)


# ---------------------------------------------------------------------------
# The S1 reference scenario
# ---------------------------------------------------------------------------

# Five mid-popularity items pushed by both campaigns; an engineering fixture.
S1_CAMPAIGN_ITEMS: tuple[ItemId, ...] = ("i040", "i055", "i070", "i085", "i100")


def scenario_s1() -> ScenarioConfig:
    """The pinned desk-scale drift scenario used by the acceptance suite.

    2000 users on 300 items, organic additions at 0.002 per user-day, and
    two campaigns (days 330 and 430) pushing the same five items to 60% of
    users with 35% acceptance, over a 500-day horizon.
    """
    return ScenarioConfig(
        population=PopulationConfig(n_users=2000, n_items=300, seed=97),
        background_rate=0.002,
        campaigns=(
            CampaignConfig(time=330, items=S1_CAMPAIGN_ITEMS, reach=0.6, accept_prob=0.35, seed=3301),
            CampaignConfig(time=430, items=S1_CAMPAIGN_ITEMS, reach=0.6, accept_prob=0.35, seed=4301),
        ),
        horizon=500,
    )
