"""Seeded data generators for tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .log_ingest import LogRecord
from .sessionizer import EncodingTable, PageEvent, Session, SessionDatabase, UserSequence


def _as_rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def build_database(sequences: dict, timestamped: bool = False, spacing: float = 1.0) -> SessionDatabase:
    """SessionDatabase from ``{user: [session pages, ...]}``.

    A session is one page id or an iterable of page ids; events are spaced
    ``spacing`` seconds apart within each user.
    """
    users = []
    sid = 0
    for user, sessions in sequences.items():
        out = []
        t = 0.0
        for pages in sessions:
            pages = [pages] if isinstance(pages, int) else list(pages)
            sid += 1
            events = []
            for p in pages:
                events.append(PageEvent(p, t))
                t += spacing
            out.append(Session(sid, tuple(events)))
        users.append(UserSequence(str(user), tuple(out)))
    return SessionDatabase(tuple(users), None, has_timestamps=timestamped)


def random_session_db(
    seed,
    max_tuples: int = 8,
    max_pages: int = 6,
    max_sessions: int = 6,
    max_session_size: int = 3,
    timestamped: bool = False,
) -> SessionDatabase:
    """Small random database within the given size caps."""
    rng = _as_rng(seed)
    n_users = rng.randint(1, max_tuples)
    n_pages = rng.randint(1, max_pages)
    users = []
    sid = 0
    for u in range(n_users):
        sessions = []
        t = float(rng.randint(0, 1000))
        for _ in range(rng.randint(1, max_sessions)):
            size = rng.randint(1, min(max_session_size, n_pages))
            pages = rng.sample(range(1, n_pages + 1), size)
            sid += 1
            events = []
            for p in pages:
                events.append(PageEvent(p, t if timestamped else 0.0))
                t += rng.choice([0.5, 1.0, 2.0, 7.25])
            sessions.append(Session(sid, tuple(events)))
            t += 1000.0
        users.append(UserSequence(f"10.0.0.{u + 1}", tuple(sessions)))
    db = SessionDatabase(tuple(users), None, has_timestamps=timestamped)
    if not timestamped:
        db = _index_times(db)
    return db


def _index_times(db: SessionDatabase) -> SessionDatabase:
    users = []
    for user in db.users:
        k = 0
        sessions = []
        for s in user.sessions:
            events = []
            for e in s.events:
                events.append(PageEvent(e.page_id, float(k)))
                k += 1
            sessions.append(Session(s.session_id, tuple(events)))
        users.append(UserSequence(user.user, tuple(sessions)))
    return SessionDatabase(tuple(users), db.table, db.has_timestamps)


def clickstream_db(n_users: int, seed=0, n_pages: int = 40, n_paths: int = 6) -> SessionDatabase:
    """Browsing-like database: Zipf page popularity plus a few shared paths.

    Each user has 1-8 sessions of 1-3 pages; about a third of users also
    follow one planted navigation path, which produces longer patterns.
    """
    rng = _as_rng(seed)
    pages = list(range(1, n_pages + 1))
    weights = [1.0 / r for r in pages]
    paths = [rng.sample(pages[:20], rng.randint(3, 6)) for _ in range(n_paths)]
    seqs = {}
    for u in range(n_users):
        sessions = []
        for _ in range(min(8, 1 + int(rng.expovariate(1 / 3.0)))):
            size = rng.choices((1, 2, 3), weights=(0.6, 0.3, 0.1))[0]
            sessions.append(sorted(set(rng.choices(pages, weights=weights, k=size))))
        if rng.random() < 0.35:
            path = rng.choice(paths)
            at = rng.randint(0, len(sessions))
            walked = [p for p in path if rng.random() < 0.85]
            sessions[at:at] = [[p] for p in walked]
        seqs[f"u{u + 1}"] = sessions
    return build_database(seqs, timestamped=True, spacing=30.0)


@dataclass(frozen=True)
class PlantedLog:
    records: list
    antecedent_url: str
    consequent_url: str
    period: float
    stop: float


def planted_periodic_log(
    seed=0,
    n_users: int = 50,
    period: float = 10.0,
    jitter: float = 0.5,
    stop: float = 80.0,
    noise: float = 0.3,
    cycles: int = 3,
    cycle_gap: float = 600.0,
    n_noise_pages: int = 20,
) -> PlantedLog:
    """Log records where page ``b`` follows page ``a`` every ``period`` s.

    Every cycle a user requests ``a`` and then ``b`` at ``k * period`` s
    (uniform ``+-jitter``) for ``k * period <= stop``.  A fraction
    ``noise`` of all requests goes to other pages at random times.
    """
    rng = _as_rng(seed)
    base = 1_300_000_000.0
    a_url = "http://shop.example.com/a.html"
    b_url = "http://shop.example.com/b.html"
    noise_urls = [f"http://shop.example.com/n{k}.html" for k in range(n_noise_pages)]
    records = []
    for u in range(n_users):
        ip = f"30.0.{u // 200}.{u % 200 + 1}"
        start = base + u * 7.0
        user_times = []
        for c in range(cycles):
            t0 = start + c * cycle_gap
            user_times.append((t0, a_url))
            k = 1
            while k * period <= stop + 1e-9:
                user_times.append((t0 + k * period + rng.uniform(-jitter, jitter), b_url))
                k += 1
        n_noise = round(len(user_times) * noise / (1 - noise))
        span = cycles * cycle_gap
        for _ in range(n_noise):
            user_times.append((start + rng.uniform(0, span), rng.choice(noise_urls)))
        for t, url in user_times:
            records.append(LogRecord(ip, round(t, 3), "GET", url, 200, 1024, "text/html", ""))
    records.sort(key=lambda r: (r.client_ip, r.timestamp, r.url))
    return PlantedLog(records, a_url, b_url, period, stop)


def worked_example_db() -> SessionDatabase:
    """The five-user example database with pages A..F encoded as 1..6."""
    A, B, C, D, E, F = range(1, 7)
    seqs = {
        "1.0.1.2": [A, (A, C), B, D],
        "1.0.1.3": [A, D, (E, F)],
        "1.0.1.4": [(B, D), C, F],
        "1.0.1.5": [(C, E), (A, B, C, D)],
        "1.0.1.6": [A, B, C, D, E],
    }
    table = EncodingTable("ABCDEF")
    db = build_database(seqs)
    return SessionDatabase(db.users, table, has_timestamps=False)
