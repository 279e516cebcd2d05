"""Trace replay against a rule depository with per-user prefetch caches.

On a request of page ``a`` at time ``t`` the user's cache is consulted
first; a live entry whose ``fetched_at <= t < evict_at`` is a hit.  Then
every rule triggered by ``a`` schedules its consequent to be available at
``t + P - epsilon`` and evicted at ``t + C``.  Caches are unbounded; only
the rules' cyclic bounds evict.
"""

from __future__ import annotations

import io
import csv
from dataclasses import asdict, dataclass, fields
from typing import Iterable, NamedTuple

from .errors import UnsortedStream
from .rules import RuleDepository
from .sessionizer import SessionDatabase


@dataclass
class SimMetrics:
    requests: int = 0
    hits: int = 0
    misses: int = 0
    prefetches_issued: int = 0
    prefetches_useful: int = 0
    prefetches_wasted: int = 0

    @property
    def hit_rate(self) -> float:
        return self.hits / self.requests if self.requests else 0.0

    def __iadd__(self, other: "SimMetrics") -> "SimMetrics":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = [f.name for f in fields(self)]
        if header:
            writer.writerow(names + ["hit_rate"])
        writer.writerow([getattr(self, n) for n in names] + [f"{self.hit_rate:.6f}"])
        return buf.getvalue()

    def summary(self) -> str:
        return (
            f"requests={self.requests} hits={self.hits} misses={self.misses} "
            f"hit_rate={self.hit_rate:.3f} prefetches issued={self.prefetches_issued} "
            f"useful={self.prefetches_useful} wasted={self.prefetches_wasted}"
        )

    def as_dict(self) -> dict:
        return asdict(self)


class CacheEntry:
    __slots__ = ("page", "fetched_at", "evict_at", "used")

    def __init__(self, page: int, fetched_at: float, evict_at: float):
        self.page = page
        self.fetched_at = fetched_at
        self.evict_at = evict_at
        self.used = False


class Outcome(NamedTuple):
    user: str
    page: int
    timestamp: float
    hit: bool


def _replay_user(user, events, dep: RuleDepository, epsilon: float, metrics: SimMetrics, log):
    cache: dict[int, CacheEntry] = {}

    def retire(entry: CacheEntry):
        if entry.used:
            metrics.prefetches_useful += 1
        else:
            metrics.prefetches_wasted += 1

    last_t = None
    for page, t in events:
        if last_t is not None and t < last_t:
            raise UnsortedStream(f"user {user!r}: time {t} after {last_t}")
        last_t = t
        for p in [p for p, e in cache.items() if e.evict_at <= t]:
            retire(cache.pop(p))
        metrics.requests += 1
        entry = cache.get(page)
        hit = entry is not None and entry.fetched_at <= t < entry.evict_at
        if hit:
            entry.used = True
            metrics.hits += 1
        else:
            metrics.misses += 1
        if log is not None:
            log.append(Outcome(user, page, t, hit))
        for rule in dep.match(page):
            ready = t + max(rule.periodicity_s - epsilon, 0.0)
            evict = t + rule.cyclic_s
            current = cache.get(rule.consequent)
            if current is not None:
                current.evict_at = max(current.evict_at, evict)
                current.fetched_at = min(current.fetched_at, ready)
            else:
                cache[rule.consequent] = CacheEntry(rule.consequent, ready, evict)
                metrics.prefetches_issued += 1
    for entry in cache.values():
        retire(entry)


def _group(stream) -> dict:
    users: dict = {}
    for user, page, t in stream:
        users.setdefault(user, []).append((page, float(t)))
    return users


def stream_from_sessions(db: SessionDatabase) -> list[tuple[str, int, float]]:
    """Flatten a timestamped session database into ``(user, page, time)``."""
    out = []
    for user in db.users:
        for ev in user.events():
            out.append((user.user, ev.page_id, ev.timestamp))
    return out


def simulate(stream: Iterable[tuple], dep: RuleDepository, epsilon: float = 1.0, return_outcomes: bool = False):
    """Replay ``(user, page, timestamp)`` events against ``dep``.

    Returns :class:`SimMetrics`, or ``(metrics, outcomes)`` with one
    :class:`Outcome` per request when ``return_outcomes`` is set.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if isinstance(stream, SessionDatabase):
        stream = stream_from_sessions(stream)
    metrics = SimMetrics()
    log = [] if return_outcomes else None
    for user, events in _group(stream).items():
        _replay_user(user, events, dep, epsilon, metrics, log)
    return (metrics, log) if return_outcomes else metrics
