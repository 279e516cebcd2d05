import pytest

from webseqmine.miner import transform
from webseqmine.synthetic import worked_example_db

# Short tuple names used in the worked example.
LETTERS = dict(zip(["1.0.1.2", "1.0.1.3", "1.0.1.4", "1.0.1.5", "1.0.1.6"], "pqrst"))
USERS = {v: k for k, v in LETTERS.items()}


def occ(names: str) -> frozenset:
    """``occ("qt")`` -> the occurrence set of tuples q and t."""
    return frozenset(USERS[c] for c in names)


def seq(*elements):
    """``seq(1, (7, 8))`` -> element tuple of frozensets."""
    return tuple(frozenset([e]) if isinstance(e, int) else frozenset(e) for e in elements)


@pytest.fixture
def worked():
    return worked_example_db()


@pytest.fixture
def worked_transformed(worked):
    return transform(worked, 2)


def timed_db(streams: dict):
    """Timestamped database from ``{user: [(page, t), ...]}``, one event per session."""
    from webseqmine.sessionizer import PageEvent, Session, SessionDatabase, UserSequence

    users, sid = [], 0
    for user, events in streams.items():
        sessions = []
        for page, t in sorted(events, key=lambda e: e[1]):
            sid += 1
            sessions.append(Session(sid, (PageEvent(page, float(t)),)))
        users.append(UserSequence(user, tuple(sessions)))
    return SessionDatabase(tuple(users), None, has_timestamps=True)


def example_rules():
    """The six example rules; their tendency column is not given, so Flat."""
    from webseqmine.cyclic import PrefetchRule, Tendency

    rows = [((1, 3), 9, 57), ((1, 6), 5, 93), ((3, 6), 7, 134), ((1, 7), 3, 68), ((6, 7), 8, 74), ((5, 6), 4, 101)]
    support = {(1, 3): 2, (1, 6): 3, (3, 6): 2, (1, 7): 2, (6, 7): 2, (5, 6): 2}
    return [PrefetchRule(i, j, support[(i, j)], p, Tendency.FLAT, c) for (i, j), p, c in rows]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
