"""Periodicity, tendency and cyclic-behaviour estimation for page pairs.

For a pair ``(i, j)`` every access of ``i`` opens an *episode*: the elapsed
times of the following ``j`` accesses by the same user, up to the next
access of ``i``.  From the episodes we estimate

* periodicity ``P``: median gap between successive ``j`` accesses (the first
  gap measured from the ``i`` access), in whole seconds, at least 1;
* tendency: sign of the within-episode least-squares slope of gap length
  against gap index, with a dead band of ``band * P``;
* cyclic bound ``C``: the longest episode span rounded up to a multiple of
  ``P`` (``C = P`` when no episode repeats).
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import NoTimestamps, PairUnobserved
from .sessionizer import SessionDatabase

DEFAULT_BAND = 0.01


class Tendency(str, enum.Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    FLAT = "Flat"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GapSeries:
    antecedent: int
    consequent: int
    episodes: tuple[tuple[float, ...], ...]

    def intervals(self) -> list[list[float]]:
        out = []
        for ep in self.episodes:
            prev = 0.0
            gaps = []
            for elapsed in ep:
                gaps.append(elapsed - prev)
                prev = elapsed
            out.append(gaps)
        return out


@dataclass(frozen=True)
class PrefetchRule:
    antecedent: int
    consequent: int
    support: int
    periodicity_s: float
    tendency: Tendency
    cyclic_s: float

    @property
    def pair(self) -> tuple[int, int]:
        return (self.antecedent, self.consequent)


def _require_timestamps(db: SessionDatabase) -> None:
    if not getattr(db, "has_timestamps", False):
        raise NoTimestamps("database carries synthetic timestamps; cyclic analysis needs real ones")


def _user_streams(db: SessionDatabase):
    for user in db.users:
        events = user.events()
        events.sort(key=lambda e: e.timestamp)
        yield user.user, events


def extract_gaps(db: SessionDatabase, pair: tuple[int, int]) -> GapSeries:
    """Collect the episodes of ``pair`` across all users of ``db``."""
    _require_timestamps(db)
    i, j = pair
    episodes = []
    for _, events in _user_streams(db):
        for k, ev in enumerate(events):
            if ev.page_id != i:
                continue
            elapsed = []
            for later in events[k + 1 :]:
                if later.page_id == j:
                    dt = later.timestamp - ev.timestamp
                    if dt > 0 and (not elapsed or dt > elapsed[-1]):
                        elapsed.append(dt)
                if later.page_id == i:
                    break
            if elapsed:
                episodes.append(tuple(elapsed))
    if not episodes:
        raise PairUnobserved(f"no episode of {i} followed by {j}")
    return GapSeries(i, j, tuple(episodes))


def _median_interval(gs: GapSeries) -> float:
    return statistics.median(g for gaps in gs.intervals() for g in gaps)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def periodicity(gs: GapSeries) -> int:
    return max(1, _round_half_up(_median_interval(gs)))


def _within_slope(gs: GapSeries) -> float:
    # per-episode intercepts: centre index and gap inside each episode
    num = den = 0.0
    for gaps in gs.intervals():
        if len(gaps) < 2:
            continue
        x = np.arange(len(gaps), dtype=float)
        y = np.asarray(gaps, dtype=float)
        x -= x.mean()
        num += float(x @ (y - y.mean()))
        den += float(x @ x)
    return num / den if den else 0.0


def tendency(gs: GapSeries, band: float = DEFAULT_BAND) -> Tendency:
    """Trend of successive gap lengths within episodes."""
    slope = _within_slope(gs)
    limit = band * _median_interval(gs)
    if slope > limit:
        return Tendency.INCREASING
    if slope < -limit:
        return Tendency.DECREASING
    return Tendency.FLAT


def cyclic_threshold(gs: GapSeries, P: float) -> float:
    if P <= 0:
        raise ValueError("periodicity must be positive")
    if all(len(ep) < 2 for ep in gs.episodes):
        return P
    span = max(ep[-1] for ep in gs.episodes)
    return max(P, math.ceil(span / P - 1e-9) * P)


def analyze_pair(db: SessionDatabase, pair: tuple[int, int], support: int, band: float = DEFAULT_BAND) -> PrefetchRule:
    gs = extract_gaps(db, pair)
    P = periodicity(gs)
    return PrefetchRule(pair[0], pair[1], support, P, tendency(gs, band), cyclic_threshold(gs, P))


@dataclass(frozen=True)
class AnalysisResult:
    rules: list[PrefetchRule]
    skipped: list[tuple[tuple[int, int], str]]


def _pairs_with_support(pairs) -> list[tuple[tuple[int, int], int]]:
    if isinstance(pairs, Mapping):
        items = [(tuple(k), int(v)) for k, v in pairs.items()]
    else:
        items = []
        for p in pairs:
            if len(p) == 3:
                items.append(((p[0], p[1]), int(p[2])))
            else:
                items.append(((p[0], p[1]), 0))
    seen = {}
    for pair, sup in items:
        seen[pair] = sup
    return sorted(seen.items())


def analyze(pairs, db: SessionDatabase, band: float = DEFAULT_BAND) -> AnalysisResult:
    """Turn frequent 2-sequences into prefetching rules.

    ``pairs`` maps ``(antecedent, consequent)`` page ids to support (an
    iterable of ``(i, j, support)`` also works).  Pairs without any episode
    land in ``skipped`` with the reason.
    """
    _require_timestamps(db)
    rules, skipped = [], []
    for pair, sup in _pairs_with_support(pairs):
        try:
            rules.append(analyze_pair(db, pair, sup, band))
        except PairUnobserved as exc:
            skipped.append((pair, str(exc)))
    rules.sort(key=lambda r: r.pair)
    return AnalysisResult(rules, skipped)


class CyclicBehaviourAnalyzer(BaseEstimator):
    """Estimator wrapper around :func:`analyze`.

    ``fit(db, pairs)`` learns one rule per observable pair; ``predict``
    returns the rules triggered by each requested page.
    """

    def __init__(self, band=DEFAULT_BAND):
        self.band = band

    def fit(self, X: SessionDatabase, pairs=None):
        if pairs is None:
            raise ValueError("pairs are required")
        if not 0 <= self.band < 1:
            raise ValueError("band must lie in [0, 1)")
        result = analyze(pairs, X, self.band)
        self.rules_ = result.rules
        self.skipped_ = result.skipped
        return self

    def predict(self, pages: Iterable[int]) -> list[list[PrefetchRule]]:
        check_is_fitted(self, "rules_")
        index: dict = {}
        for rule in self.rules_:
            index.setdefault(rule.antecedent, []).append(rule)
        return [sorted(index.get(p, []), key=lambda r: (r.periodicity_s, r.consequent)) for p in pages]
