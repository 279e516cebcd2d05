"""User identification, session splitting and URL encoding.

The result is a :class:`SessionDatabase`: one :class:`UserSequence` per
client address, each an ordered list of sessions of timestamped page ids.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyFile, MalformedLine, UnknownId, UnsortedInput, UnsupportedFormat
from .log_ingest import LogFormat, LogRecord

DEFAULT_GAP_SECS = 900.0


class EncodingTable:
    """Bijection between URL text and positive page ids.

    Fresh URLs get ``max id + 1``, so a table built from scratch is
    contiguous from 1.  Loaded tables may be sparse.
    """

    def __init__(self, urls: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._urls: dict[int, str] = {}
        self._next = 1
        for url in urls:
            self.encode(url)

    def _bind(self, page_id: int, url: str) -> None:
        self._ids[url] = page_id
        self._urls[page_id] = url
        self._next = max(self._next, page_id + 1)

    def encode(self, url: str) -> int:
        page_id = self._ids.get(url)
        if page_id is None:
            page_id = self._next
            self._bind(page_id, url)
        return page_id

    def decode(self, page_id: int) -> str:
        if isinstance(page_id, bool) or not isinstance(page_id, int) or page_id not in self._urls:
            raise UnknownId(page_id)
        return self._urls[page_id]

    def __contains__(self, url) -> bool:
        return url in self._ids

    def __len__(self) -> int:
        return len(self._urls)

    def __eq__(self, other) -> bool:
        return isinstance(other, EncodingTable) and self._urls == other._urls

    def __repr__(self) -> str:
        return f"EncodingTable(n={len(self)})"

    def items(self):
        return iter(sorted(self._urls.items()))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    def dumps(self) -> str:
        return "".join(f"{i}\t{url}\n" for i, url in self.items())

    @classmethod
    def loads(cls, text: str) -> "EncodingTable":
        table = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                page_id, url = line.split("\t", 1)
                page_id = int(page_id)
            except ValueError:
                raise MalformedLine("expected 'id<TAB>url'", line, lineno) from None
            if page_id < 1 or page_id in table._urls or url in table._ids:
                raise MalformedLine("ids and urls must be unique, ids positive", line, lineno)
            table._bind(page_id, url)
        return table

    @classmethod
    def load(cls, path) -> "EncodingTable":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def encode_url(table: EncodingTable, url: str) -> int:
    return table.encode(url)


def decode_id(table: EncodingTable, page_id: int) -> str:
    return table.decode(page_id)


@dataclass(frozen=True)
class PageEvent:
    page_id: int
    timestamp: float


@dataclass(frozen=True)
class Session:
    session_id: int
    events: tuple[PageEvent, ...]

    def __post_init__(self):
        if not self.events:
            raise ValueError("a session needs at least one event")

    @property
    def pages(self) -> tuple[int, ...]:
        return tuple(e.page_id for e in self.events)

    @property
    def start(self) -> float:
        return self.events[0].timestamp


@dataclass(frozen=True)
class UserSequence:
    user: str
    sessions: tuple[Session, ...]

    def events(self) -> list[PageEvent]:
        return [e for s in self.sessions for e in s.events]


@dataclass(frozen=True)
class SessionDatabase:
    """Per-user session sequences.

    ``has_timestamps`` is False when event times are synthetic indices
    (MSNBC data, SESSIONS files without ``@time`` annotations).
    """

    users: tuple[UserSequence, ...]
    table: EncodingTable | None = field(default=None, compare=False)
    has_timestamps: bool = True

    def __post_init__(self):
        names = [u.user for u in self.users]
        if len(set(names)) != len(names):
            raise ValueError("user identifiers must be unique")

    def __len__(self) -> int:
        return len(self.users)

    def sequences(self) -> list[tuple[str, tuple[frozenset, ...]]]:
        """``(user, (session page set, ...))`` pairs, the miner's input."""
        return [(u.user, tuple(frozenset(s.pages) for s in u.sessions)) for u in self.users]

    def head(self, n: int) -> "SessionDatabase":
        return SessionDatabase(self.users[:n], self.table, self.has_timestamps)


def _record_key(rec: LogRecord):
    return (rec.client_ip, rec.timestamp)


def sessionize(records: Sequence[LogRecord], gap_threshold: float = DEFAULT_GAP_SECS) -> SessionDatabase:
    """Split cleaned, (ip, time)-sorted records into per-user sessions.

    A new session starts at every change of client address and whenever
    the gap to the same user's previous record exceeds ``gap_threshold``.
    """
    if gap_threshold <= 0:
        raise ValueError("gap_threshold must be positive")
    table = EncodingTable()
    users: list[UserSequence] = []
    sessions: list[Session] = []
    events: list[PageEvent] = []
    session_id = 0
    prev = None

    def close_session():
        if events:
            sessions.append(Session(session_id, tuple(events)))
            events.clear()

    def close_user(ip):
        close_session()
        if sessions:
            users.append(UserSequence(ip, tuple(sessions)))
            sessions.clear()

    for rec in records:
        if prev is not None and _record_key(rec) < _record_key(prev):
            raise UnsortedInput(
                f"record ({rec.client_ip}, {rec.timestamp}) precedes ({prev.client_ip}, {prev.timestamp})"
            )
        if prev is None or rec.client_ip != prev.client_ip:
            if prev is not None:
                close_user(prev.client_ip)
            session_id += 1
        elif rec.timestamp - prev.timestamp > gap_threshold:
            close_session()
            session_id += 1
        events.append(PageEvent(table.encode(rec.url), rec.timestamp))
        prev = rec
    if prev is not None:
        close_user(prev.client_ip)
    return SessionDatabase(tuple(users), table, has_timestamps=True)


class Sessionizer(TransformerMixin, BaseEstimator):
    """Transformer from cleaned log records to a :class:`SessionDatabase`."""

    def __init__(self, gap_threshold=DEFAULT_GAP_SECS):
        self.gap_threshold = gap_threshold

    def fit(self, X, y=None):
        self.database_ = sessionize(X, self.gap_threshold)
        self.table_ = self.database_.table
        return self

    def transform(self, X):
        return sessionize(X, self.gap_threshold)

    def fit_transform(self, X, y=None):
        return self.fit(X).database_


def _format_time(ts: float) -> str:
    ts = float(ts)
    return str(int(ts)) if ts.is_integer() else repr(ts)


def serialize_sessions(db: SessionDatabase) -> str:
    """Render ``db`` in the SESSIONS text form.

    One line per user: ``user<TAB>session(;session)*``; events are
    ``page_id`` or ``page_id@epoch_seconds`` when the database is timestamped.
    """
    lines = []
    for user in db.users:
        if not user.user or any(c in user.user for c in "\t\n"):
            raise ValueError(f"user id not serializable: {user.user!r}")
        chunks = []
        for session in user.sessions:
            if db.has_timestamps:
                chunks.append(",".join(f"{e.page_id}@{_format_time(e.timestamp)}" for e in session.events))
            else:
                chunks.append(",".join(str(e.page_id) for e in session.events))
        lines.append(f"{user.user}\t{';'.join(chunks)}\n")
    return "".join(lines)


def _parse_event(text: str, line: str, lineno: int) -> tuple[int, float | None]:
    page, sep, stamp = text.strip().partition("@")
    try:
        page_id = int(page)
        ts = float(stamp) if sep else None
    except ValueError:
        raise MalformedLine(f"bad event {text!r}", line, lineno) from None
    if page_id < 0 or (ts is not None and ts < 0):
        raise MalformedLine(f"negative value in event {text!r}", line, lineno)
    return page_id, ts


def parse_sessions(text: str | Iterable[str], table: EncodingTable | None = None) -> SessionDatabase:
    lines = text.splitlines() if isinstance(text, str) else text
    users = []
    session_id = 0
    timestamped = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        user, sep, body = line.partition("\t")
        if not sep or not user or not body.strip():
            raise MalformedLine("expected 'user<TAB>sessions'", line, lineno)
        sessions = []
        index = 0
        for chunk in body.split(";"):
            parsed = [_parse_event(ev, line, lineno) for ev in chunk.split(",") if ev.strip()]
            if not parsed:
                raise MalformedLine("empty session", line, lineno)
            session_id += 1
            events = []
            for page_id, ts in parsed:
                has = ts is not None
                if timestamped is None:
                    timestamped = has
                elif timestamped != has:
                    raise MalformedLine("timestamps must be given for all events or none", line, lineno)
                events.append(PageEvent(page_id, ts if has else float(index)))
                index += 1
            sessions.append(Session(session_id, tuple(events)))
        users.append(UserSequence(user, tuple(sessions)))
    if not users:
        raise EmptyFile("no sequences found")
    try:
        return SessionDatabase(tuple(users), table, has_timestamps=bool(timestamped))
    except ValueError as exc:
        raise MalformedLine(str(exc)) from None


def parse_msnbc(text: str | Iterable[str]) -> SessionDatabase:
    """Parse MSNBC-style page-view sequences.

    Each sequence line is one user (``u1``, ``u2``, ... in order); every
    integer is a single-page session at a synthetic time equal to its index.
    A header ending in ``% Sequences:`` is skipped; the category-name line
    inside it, if present, becomes the encoding table.
    """
    lines = list(text.splitlines() if isinstance(text, str) else text)
    start = 0
    table = None
    for i, line in enumerate(lines):
        if line.strip().lower().startswith("% sequences"):
            start = i + 1
            names = [ln.split() for ln in lines[:i] if ln.strip() and not ln.lstrip().startswith("%")]
            if names:
                table = EncodingTable(names[0])
            break
    users = []
    session_id = 0
    for lineno, line in enumerate(lines[start:], start + 1):
        if not line.strip() or line.lstrip().startswith("%"):
            continue
        try:
            pages = [int(tok) for tok in line.split()]
        except ValueError:
            raise MalformedLine("MSNBC lines hold integers only", line, lineno) from None
        if any(p < 0 for p in pages):
            raise MalformedLine("negative page id", line, lineno)
        sessions = []
        for index, page in enumerate(pages):
            session_id += 1
            sessions.append(Session(session_id, (PageEvent(page, float(index)),)))
        users.append(UserSequence(f"u{len(users) + 1}", tuple(sessions)))
    if not users:
        raise EmptyFile("no sequences found")
    return SessionDatabase(tuple(users), table, has_timestamps=False)


def load_sequences(path: "str | os.PathLike", format, table: EncodingTable | None = None) -> SessionDatabase:
    fmt = LogFormat.parse(format)
    if fmt.is_line_format:
        raise UnsupportedFormat(f"{fmt.name} is not a sequence format")
    with open(path, encoding="utf-8") as fh:
        content = fh.read()
    if not content.strip():
        raise EmptyFile(f"{path} is empty")
    if fmt is LogFormat.MSNBC:
        return parse_msnbc(content)
    return parse_sessions(content, table)


def save_sessions(db: SessionDatabase, path: "str | os.PathLike") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_sessions(db))
