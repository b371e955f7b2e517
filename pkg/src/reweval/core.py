"""Interaction data model, snapshots, and probability computations.

Three layers: raw timestamped events (:class:`InteractionLog`), the frozen
per-user item sets at a chosen time (:class:`Snapshot`), and probability
structure on top of a snapshot (:class:`ProbabilityModel`, optionally
reshaped by a :class:`WeightVector`). Every numeric operation runs over a
compact sparse index of the (user, item) pairs, never a dense user-by-item
array, and uses fixed summation orders so repeated runs agree bitwise.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    EmptySnapshotError,
    ItemNotInProfileError,
    UnknownItemError,
    UnknownUserError,
)

UserId = str
ItemId = str

# Tolerances for probability validation.
USER_LAW_TOL = 1e-12
CONDITIONAL_TOL = 1e-12
DISTRIBUTION_TOL = 1e-9


@dataclass(frozen=True)
class InteractionEvent:
    """One user-item interaction at an integer day timestamp."""

    user: UserId
    item: ItemId
    timestamp: int

    def __post_init__(self):
        if not self.user or not self.item:
            raise ValueError("user and item identifiers must be non-empty")
        if not isinstance(self.timestamp, int) or self.timestamp < 0:
            raise ValueError(f"timestamp must be a non-negative integer, got {self.timestamp!r}")


class InteractionLog:
    """Ordered collection of interaction events.

    Events need not be pre-sorted; duplicate (user, item) pairs are kept here
    and collapsed to the earliest occurrence when a snapshot is built.
    """

    __slots__ = ("_events",)

    def __init__(self, events: Iterable[InteractionEvent] = ()):
        self._events = tuple(events)

    @property
    def events(self) -> tuple[InteractionEvent, ...]:
        return self._events

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[InteractionEvent]:
        return iter(self._events)

    def extended(self, events: Iterable[InteractionEvent]) -> "InteractionLog":
        """Return a new log with ``events`` appended; self is unchanged."""
        return InteractionLog(self._events + tuple(events))

    def last_timestamp(self) -> int:
        """Largest timestamp in the log, or -1 when empty."""
        return max((e.timestamp for e in self._events), default=-1)

    def __repr__(self) -> str:
        return f"InteractionLog({len(self._events)} events)"


class _SnapshotIndex:
    """Sparse (user, item) pair index of a snapshot.

    Users and items are sorted lexicographically and mapped to dense integer
    positions. Pairs are laid out user-major with items sorted inside each
    user segment; ``item_pairs`` re-lists the same pair positions item-major
    (users sorted inside each item segment).
    """

    def __init__(self, profiles: Mapping[UserId, frozenset[ItemId]]):
        self.users: tuple[UserId, ...] = tuple(sorted(profiles))
        item_set: set[ItemId] = set()
        for prof in profiles.values():
            item_set.update(prof)
        self.items: tuple[ItemId, ...] = tuple(sorted(item_set))
        self.user_pos = {u: j for j, u in enumerate(self.users)}
        self.item_pos = {i: j for j, i in enumerate(self.items)}

        n_users = len(self.users)
        deg = np.fromiter(
            (len(profiles[u]) for u in self.users), dtype=np.int64, count=n_users
        )
        self.deg = deg
        self.user_ptr = np.zeros(n_users + 1, dtype=np.int64)
        np.cumsum(deg, out=self.user_ptr[1:])
        nnz = int(self.user_ptr[-1])

        pair_item = np.empty(nnz, dtype=np.int64)
        pos = 0
        for u in self.users:
            for it in sorted(profiles[u]):
                pair_item[pos] = self.item_pos[it]
                pos += 1
        self.pair_item = pair_item
        self.pair_user = np.repeat(np.arange(n_users, dtype=np.int64), deg)

        # Item-major view: pair positions sorted by (item, user). The stable
        # sort keeps the user-major order inside each item segment.
        self.item_pairs = np.argsort(pair_item, kind="stable")
        item_deg = np.bincount(pair_item, minlength=len(self.items))
        self.item_ptr = np.zeros(len(self.items) + 1, dtype=np.int64)
        np.cumsum(item_deg, out=self.item_ptr[1:])

    def pairs_of_item(self, item_idx: int) -> np.ndarray:
        """Pair positions of one item, sorted by user position."""
        return self.item_pairs[self.item_ptr[item_idx] : self.item_ptr[item_idx + 1]]


class Snapshot:
    """Frozen per-user item sets at a time ``t``.

    Membership queries answer in constant expected time; the sparse pair
    index used by the numeric routines is built lazily and cached. Snapshots
    are immutable after construction and safe to share across workers.
    """

    def __init__(self, time: int, profiles: Mapping[UserId, Iterable[ItemId]]):
        if not profiles:
            raise EmptySnapshotError(f"no profiles at time {time}")
        frozen: dict[UserId, frozenset[ItemId]] = {}
        for user, items in profiles.items():
            prof = frozenset(items)
            if not prof:
                raise ValueError(f"user {user!r} has an empty profile")
            frozen[user] = prof
        self._time = int(time)
        self._profiles = frozen

    @property
    def time(self) -> int:
        return self._time

    @property
    def profiles(self) -> Mapping[UserId, frozenset[ItemId]]:
        return self._profiles

    @property
    def n_users(self) -> int:
        return len(self._profiles)

    @property
    def n_items(self) -> int:
        return len(self.index.items)

    @property
    def nnz(self) -> int:
        """Total number of (user, item) profile memberships."""
        return int(self.index.user_ptr[-1])

    @property
    def items(self) -> tuple[ItemId, ...]:
        """All distinct items, sorted."""
        return self.index.items

    @property
    def users(self) -> tuple[UserId, ...]:
        """All users, sorted."""
        return self.index.users

    @cached_property
    def index(self) -> _SnapshotIndex:
        return _SnapshotIndex(self._profiles)

    def contains(self, user: UserId, item: ItemId) -> bool:
        prof = self._profiles.get(user)
        return prof is not None and item in prof

    def profile(self, user: UserId) -> frozenset[ItemId]:
        try:
            return self._profiles[user]
        except KeyError:
            raise UnknownUserError(f"unknown user {user!r}") from None

    def __repr__(self) -> str:
        return (
            f"Snapshot(t={self._time}, users={self.n_users}, "
            f"items={self.n_items}, nnz={self.nnz})"
        )


def build_snapshot(log: InteractionLog, t: int) -> Snapshot:
    """Freeze the state of the system at time ``t``.

    Keeps every (user, item) pair whose earliest event timestamp is <= t;
    users left with no items are excluded.

    Raises
    ------
    EmptySnapshotError
        If no event has timestamp <= t.
    """
    if t < 0:
        raise ValueError(f"snapshot time must be >= 0, got {t}")
    profiles: dict[UserId, set[ItemId]] = {}
    for ev in log:
        if ev.timestamp <= t:
            profiles.setdefault(ev.user, set()).add(ev.item)
    if not profiles:
        raise EmptySnapshotError(f"no event at or before t={t}")
    return Snapshot(t, profiles)


# ---------------------------------------------------------------------------
# Probability structure
# ---------------------------------------------------------------------------

ConditionalLaw = Callable[[UserId, Sequence[ItemId]], Sequence[float]]


class ProbabilityModel:
    """User prior P(u) and per-profile conditional P(i|u).

    Parameters
    ----------
    user_probs : mapping user -> probability, optional
        Prior over users. Must cover every snapshot user and sum to 1 over
        them (within 1e-12). Defaults to the uniform law on the snapshot's
        users.
    conditional : callable (user, sorted profile items) -> probabilities, optional
        Conditional law over a user's profile items. Each returned vector
        must be non-negative and sum to 1 within 1e-12. Defaults to the
        uniform law 1/#profile. Items outside the profile implicitly have
        probability 0.

    The model binds to a snapshot on first use; the aligned probability
    arrays are cached per snapshot (snapshots are immutable).
    """

    def __init__(
        self,
        user_probs: Mapping[UserId, float] | None = None,
        conditional: ConditionalLaw | None = None,
    ):
        self.user_probs = dict(user_probs) if user_probs is not None else None
        self.conditional = conditional
        self._cache: "weakref.WeakKeyDictionary[Snapshot, tuple[np.ndarray, np.ndarray]]" = (
            weakref.WeakKeyDictionary()
        )

    def bind(self, snap: Snapshot) -> tuple[np.ndarray, np.ndarray]:
        """Return (P(u) per user position, P(i|u) per pair position)."""
        cached = self._cache.get(snap)
        if cached is not None:
            return cached
        idx = snap.index
        n_users = len(idx.users)

        if self.user_probs is None:
            pu = np.full(n_users, 1.0 / n_users)
        else:
            try:
                pu = np.array([self.user_probs[u] for u in idx.users], dtype=float)
            except KeyError as exc:
                raise ValueError(f"user law does not cover user {exc.args[0]!r}") from None
            if np.any(pu < 0.0):
                raise ValueError("user probabilities must be non-negative")
        total = float(np.sum(pu))
        if abs(total - 1.0) > USER_LAW_TOL:
            raise ValueError(f"user probabilities sum to {total!r}, expected 1")

        if self.conditional is None:
            pv = np.repeat(1.0 / idx.deg, idx.deg)
        else:
            pv = np.empty(int(idx.user_ptr[-1]), dtype=float)
            for upos, user in enumerate(idx.users):
                lo, hi = int(idx.user_ptr[upos]), int(idx.user_ptr[upos + 1])
                items = [idx.items[j] for j in idx.pair_item[lo:hi]]
                probs = np.asarray(self.conditional(user, items), dtype=float)
                if probs.shape != (hi - lo,):
                    raise ValueError(f"conditional law returned {probs.shape} values for user {user!r}")
                if np.any(probs < 0.0):
                    raise ValueError(f"conditional law returned negative values for user {user!r}")
                s = float(np.sum(probs))
                if abs(s - 1.0) > CONDITIONAL_TOL:
                    raise ValueError(
                        f"conditional law for user {user!r} sums to {s!r}, expected 1"
                    )
                pv[lo:hi] = probs

        self._cache[snap] = (pu, pv)
        return pu, pv

    def user_probability(self, snap: Snapshot, user: UserId) -> float:
        """P(u) for a snapshot user."""
        pu, _ = self.bind(snap)
        try:
            return float(pu[snap.index.user_pos[user]])
        except KeyError:
            raise UnknownUserError(f"unknown user {user!r}") from None

    def conditional_probability(self, snap: Snapshot, user: UserId, item: ItemId) -> float:
        """P(i|u); zero when the item is not on the profile."""
        prof = snap.profile(user)
        if item not in prof:
            return 0.0
        idx = snap.index
        _, pv = self.bind(snap)
        upos = idx.user_pos[user]
        lo, hi = int(idx.user_ptr[upos]), int(idx.user_ptr[upos + 1])
        ipos = idx.item_pos[item]
        offset = int(np.searchsorted(idx.pair_item[lo:hi], ipos))
        return float(pv[lo + offset])


@dataclass(frozen=True)
class WeightVector:
    """Positive per-item multipliers; items absent from the mapping weigh 1."""

    weights: Mapping[ItemId, float] = field(default_factory=dict)

    def __post_init__(self):
        stored = dict(self.weights)
        for item, w in stored.items():
            if not (w > 0.0) or not np.isfinite(w):
                raise ValueError(f"weight for item {item!r} must be positive and finite, got {w!r}")
        object.__setattr__(self, "weights", stored)

    @staticmethod
    def identity() -> "WeightVector":
        return WeightVector({})

    def get(self, item: ItemId) -> float:
        return self.weights.get(item, 1.0)

    def as_array(self, items: Sequence[ItemId]) -> np.ndarray:
        """Weights aligned with ``items``; implicit entries are 1."""
        return np.array([self.weights.get(i, 1.0) for i in items], dtype=float)

    def __repr__(self) -> str:
        return f"WeightVector({len(self.weights)} stored)"


@dataclass(frozen=True)
class ItemDistribution:
    """A probability distribution over items.

    Values must be non-negative and sum to 1 within 1e-9. ``support`` is the
    set of items with strictly positive probability.
    """

    probs: Mapping[ItemId, float]

    def __post_init__(self):
        stored = dict(self.probs)
        if not stored:
            raise ValueError("distribution must have at least one item")
        vals = np.fromiter(stored.values(), dtype=float, count=len(stored))
        if np.any(vals < 0.0) or not np.all(np.isfinite(vals)):
            raise ValueError("item probabilities must be finite and non-negative")
        total = float(np.sum(vals))
        if abs(total - 1.0) > DISTRIBUTION_TOL:
            raise ValueError(f"item probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "probs", stored)

    @property
    def support(self) -> frozenset[ItemId]:
        return frozenset(i for i, p in self.probs.items() if p > 0.0)

    def prob(self, item: ItemId) -> float:
        return self.probs.get(item, 0.0)

    def items_sorted(self) -> list[ItemId]:
        return sorted(self.probs)

    def __repr__(self) -> str:
        return f"ItemDistribution({len(self.probs)} items)"


# ---------------------------------------------------------------------------
# Weighted probability computations
# ---------------------------------------------------------------------------


class _WeightedState:
    """Per-(snapshot, model, weights) arrays shared by the numeric routines.

    ``wc`` holds the weighted conditional w_i P(i|u) / sum_j w_j P(j|u) per
    pair; ``denom`` the per-user normalizers, computed once and reused for
    every item of a user.
    """

    __slots__ = ("idx", "pu", "pv", "w", "wc", "denom", "marginal")

    def __init__(self, snap: Snapshot, model: ProbabilityModel, weights: WeightVector | None):
        idx = snap.index
        pu, pv = model.bind(snap)
        self.idx = idx
        self.pu = pu
        self.pv = pv
        if weights is None:
            self.w = np.ones(len(idx.items))
            wpair = pv
        else:
            # O(stored) fill; weight vectors are typically much sparser
            # than the item set.
            w = np.ones(len(idx.items))
            for item, value in weights.weights.items():
                pos = idx.item_pos.get(item)
                if pos is not None:
                    w[pos] = value
            self.w = w
            wpair = w[idx.pair_item] * pv
        # Left-to-right segment sums keep the order identical between the
        # scalar and vector code paths.
        self.denom = np.add.reduceat(wpair, idx.user_ptr[:-1])
        self.wc = wpair / self.denom[idx.pair_user]
        contrib = self.wc * pu[idx.pair_user]
        self.marginal = np.bincount(idx.pair_item, weights=contrib, minlength=len(idx.items))


def weighted_conditional(
    snap: Snapshot,
    model: ProbabilityModel,
    user: UserId,
    item: ItemId,
    weights: WeightVector | None = None,
) -> float:
    """Weighted conditional probability of picking ``item`` from ``user``.

    Returns w_i P(i|u) / sum_{j in profile} w_j P(j|u). With all weights
    equal to 1 this reduces to the model's P(i|u).

    Raises
    ------
    UnknownUserError
        If the user is not in the snapshot.
    ItemNotInProfileError
        If the item is not on the user's profile.
    """
    prof = snap.profile(user)
    if item not in prof:
        raise ItemNotInProfileError(f"item {item!r} not in profile of user {user!r}")
    idx = snap.index
    _, pv = model.bind(snap)
    upos = idx.user_pos[user]
    lo, hi = int(idx.user_ptr[upos]), int(idx.user_ptr[upos + 1])
    seg_items = idx.pair_item[lo:hi]
    if weights is None or not weights.weights:
        num = pv[lo + int(np.searchsorted(seg_items, idx.item_pos[item]))]
        den = float(np.add.reduce(pv[lo:hi]))
        return float(num / den)
    w_seg = np.array([weights.get(idx.items[j]) for j in seg_items], dtype=float)
    wpair = w_seg * pv[lo:hi]
    num = wpair[int(np.searchsorted(seg_items, idx.item_pos[item]))]
    den = float(np.add.reduce(wpair))
    return float(num / den)


def item_marginal(
    snap: Snapshot,
    model: ProbabilityModel,
    weights: WeightVector | None = None,
) -> ItemDistribution:
    """Item marginal over the snapshot, optionally under item weights.

    Without weights this is sum_u P(i|u) P(u); with weights the conditional
    is reweighted per user first. Computed in one pass over the nnz pairs.
    """
    idx = snap.index
    if weights is None:
        pu, pv = model.bind(snap)
        contrib = pv * pu[idx.pair_user]
        marg = np.bincount(idx.pair_item, weights=contrib, minlength=len(idx.items))
    else:
        marg = _WeightedState(snap, model, weights).marginal
    return ItemDistribution({item: float(p) for item, p in zip(idx.items, marg)})


def pairwise_joint(
    snap: Snapshot,
    model: ProbabilityModel,
    weights: WeightVector | None,
    item_a: ItemId,
    item_b: ItemId,
) -> float:
    """Probability that two independent draws pick ``item_a`` then ``item_b``.

    Returns sum_u P(a|u, w) P(b|u, w) P(u); only users holding both items
    contribute. Exactly symmetric in its item arguments.

    Raises
    ------
    UnknownItemError
        If either item is absent from the snapshot.
    """
    idx = snap.index
    for item in (item_a, item_b):
        if item not in idx.item_pos:
            raise UnknownItemError(f"unknown item {item!r}")
    state = _WeightedState(snap, model, weights)
    pos_a = idx.pairs_of_item(idx.item_pos[item_a])
    pos_b = idx.pairs_of_item(idx.item_pos[item_b])
    users_a = idx.pair_user[pos_a]
    users_b = idx.pair_user[pos_b]
    common, sub_a, sub_b = np.intersect1d(
        users_a, users_b, assume_unique=True, return_indices=True
    )
    if common.size == 0:
        return 0.0
    prod = state.wc[pos_a[sub_a]] * state.wc[pos_b[sub_b]] * state.pu[common]
    return float(np.add.reduce(prod))
