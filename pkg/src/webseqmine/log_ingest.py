"""Parsing and cleaning of raw web access logs.

Three line formats are understood:

* ``CLF``   -- ``ip base_url [date] method file protocol code bytes``
* ``ECLF``  -- CLF plus a trailing referrer address
* ``PROXY`` -- the squid-like ``web-proxy, debug, packet ...`` debug lines

``SESSIONS`` and ``MSNBC`` are sequence formats handled by
:mod:`webseqmine.sessionizer`; they are listed here so every input format
shares one tag type.
"""

from __future__ import annotations

import enum
import ipaddress
import logging
import os
import posixpath
import re
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Iterable, Iterator
from urllib.parse import urlsplit

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import MalformedLine, UnsupportedFormat

logger = logging.getLogger(__name__)

PAGE_EXTENSIONS = frozenset({"htm", "html", "xhtml", "php", "jsp"})


class LogFormat(str, enum.Enum):
    CLF = "clf"
    ECLF = "eclf"
    PROXY = "proxy"
    SESSIONS = "sessions"
    MSNBC = "msnbc"

    @classmethod
    def parse(cls, value: "str | LogFormat") -> "LogFormat":
        if isinstance(value, LogFormat):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise UnsupportedFormat(f"unknown format {value!r}") from None

    @property
    def is_line_format(self) -> bool:
        return self in (LogFormat.CLF, LogFormat.ECLF, LogFormat.PROXY)


@dataclass(frozen=True)
class LogRecord:
    client_ip: str
    timestamp: float
    method: str
    url: str
    status: int
    bytes: int
    content_type: str = ""
    referrer_ip: str = ""

    def __post_init__(self):
        for name in ("client_ip", "referrer_ip"):
            value = getattr(self, name)
            if value or name == "client_ip":
                ipaddress.IPv4Address(value)  # ValueError on bad text
        if self.timestamp < 0:
            raise ValueError("timestamp must be non-negative")
        if not self.url.startswith(("http://", "https://")):
            raise ValueError(f"url must be absolute http(s): {self.url!r}")
        if self.bytes < 0:
            raise ValueError("bytes must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


_CLF_RE = re.compile(
    r"^(?P<ip>\S+)\s+(?P<base>\S+)\s+\[(?P<date>[^\]]+)\]\s+"
    r"(?P<method>[A-Za-z]+)\s+(?P<file>\S+)\s+(?P<proto>\S+)\s+"
    r"(?P<code>\d{3})\s+(?P<bytes>\d+|-)"
    r"(?:\s+(?P<ref>\S+))?\s*$"
)

# The duration (second numeric field), cache code and peer hierarchy are
# matched but not kept on the record.
_PROXY_RE = re.compile(
    r"^web-proxy,\s*debug,\s*packet\s+"
    r"(?P<epoch>\d+(?:\.\d+)?)\s+(?P<duration>\d+)\s+(?P<ip>\S+)\s+"
    r"(?P<cache>[A-Z_]+)/(?P<status>\d{3})\s+(?P<bytes>\d+)\s+"
    r"(?P<method>[A-Za-z]+)\s+(?P<url>\S+)\s+-\s+"
    r"(?P<hier>[A-Z_]+)/(?P<peer>\S+)\s+(?P<mime>\S+)\s+"
    r"in\s+(?P<date>\S+)\s+(?P<time>\S+)\s+from\s+(?P<ref>\S+)\s*$"
)

_CLF_DATE_FORMATS = ("%d/%b/%Y:%H:%M:%S %z", "%d/%b/%Y:%H:%M:%S")


def _check_ip(text: str, line: str) -> str:
    try:
        ipaddress.IPv4Address(text)
    except ValueError:
        raise MalformedLine(f"not a dotted-quad address: {text!r}", line) from None
    return text


def _parse_clf_date(text: str, line: str) -> float:
    for fmt in _CLF_DATE_FORMATS:
        try:
            dt = datetime.strptime(text, fmt)
        except ValueError:
            continue
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        ts = dt.timestamp()
        if ts < 0:
            break
        return ts
    raise MalformedLine(f"bad date field: {text!r}", line)


def _build(line: str, **fields) -> LogRecord:
    try:
        return LogRecord(**fields)
    except ValueError as exc:
        raise MalformedLine(str(exc), line) from None


def _parse_clf(line: str, with_referrer: bool) -> LogRecord:
    m = _CLF_RE.match(line)
    if m is None:
        raise MalformedLine("line does not match CLF grammar", line)
    ref = m.group("ref")
    if with_referrer and ref is None:
        raise MalformedLine("ECLF line lacks the referrer field", line)
    if not with_referrer and ref is not None:
        raise MalformedLine("unexpected trailing field in CLF line", line)
    base = m.group("base").rstrip("/")
    path = m.group("file")
    if not path.startswith("/"):
        path = "/" + path
    referrer = "" if ref in (None, "-") else _check_ip(ref, line)
    size = m.group("bytes")
    return _build(
        line,
        client_ip=_check_ip(m.group("ip"), line),
        timestamp=_parse_clf_date(m.group("date"), line),
        method=m.group("method").upper(),
        url=base + path,
        status=int(m.group("code")),
        bytes=0 if size == "-" else int(size),
        content_type="",
        referrer_ip=referrer,
    )


def _parse_proxy(line: str) -> LogRecord:
    m = _PROXY_RE.match(line)
    if m is None:
        raise MalformedLine("line does not match proxy log grammar", line)
    mime = m.group("mime")
    return _build(
        line,
        client_ip=_check_ip(m.group("ip"), line),
        timestamp=float(m.group("epoch")),
        method=m.group("method").upper(),
        url=m.group("url"),
        status=int(m.group("status")),
        bytes=int(m.group("bytes")),
        content_type="" if mime == "-" else mime,
        referrer_ip="" if m.group("ref") == "-" else _check_ip(m.group("ref"), line),
    )


def parse_line(line: str, format: "LogFormat | str") -> LogRecord:
    """Parse one complete log line into a :class:`LogRecord`.

    Raises :class:`MalformedLine` when the line does not fit the format and
    :class:`UnsupportedFormat` for the sequence-only formats.
    """
    fmt = LogFormat.parse(format)
    if not fmt.is_line_format:
        raise UnsupportedFormat(f"{fmt.name} is not a log-line format")
    line = " ".join(line.split())
    if not line:
        raise MalformedLine("empty line", line)
    if fmt is LogFormat.PROXY:
        return _parse_proxy(line)
    return _parse_clf(line, with_referrer=fmt is LogFormat.ECLF)


def render_line(record: LogRecord, format: "LogFormat | str") -> str:
    """Render a record back into ``format``'s field order.

    Fields the record does not carry (protocol, proxy duration, cache code,
    peer hierarchy) are filled with neutral placeholders.
    """
    fmt = LogFormat.parse(format)
    if not fmt.is_line_format:
        raise UnsupportedFormat(f"{fmt.name} is not a log-line format")
    dt = datetime.fromtimestamp(record.timestamp, tz=timezone.utc)
    if fmt is LogFormat.PROXY:
        stamp = f"{dt.day:02d}-{dt:%b} {dt.hour}:{dt.minute}:{dt.second}"
        return (
            f"web-proxy, debug, packet {record.timestamp:.3f} 0 {record.client_ip} "
            f"TCP_MISS/{record.status} {record.bytes} {record.method} {record.url} "
            f"- DIRECT/- {record.content_type or '-'} in {stamp} "
            f"from {record.referrer_ip or '-'}"
        )
    parts = urlsplit(record.url)
    base = f"{parts.scheme}://{parts.netloc}"
    path = parts.path or "/"
    if parts.query:
        path += "?" + parts.query
    elif record.url.endswith("?"):
        path += "?"
    fields = [
        record.client_ip,
        base,
        f"[{dt:%d/%b/%Y:%H:%M:%S} +0000]",
        record.method,
        path,
        "HTTP/1.0",
        str(record.status),
        str(record.bytes),
    ]
    if fmt is LogFormat.ECLF:
        fields.append(record.referrer_ip or "-")
    return " ".join(fields)


def _logical_lines(lines: Iterable[str], fmt: LogFormat) -> Iterator[tuple[int, str]]:
    # Proxy debug records are often hard-wrapped; glue continuation lines
    # back onto the record that owns them.
    if fmt is not LogFormat.PROXY:
        for lineno, line in enumerate(lines, 1):
            if line.strip():
                yield lineno, line
        return
    pending, start = None, 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if line.lstrip().startswith("web-proxy"):
            if pending is not None:
                yield start, pending
            pending, start = line.strip(), lineno
        elif pending is None:
            yield lineno, line
        else:
            pending += " " + line.strip()
    if pending is not None:
        yield start, pending


def iter_records(lines: Iterable[str], format, stats: dict | None = None) -> Iterator[LogRecord]:
    """Parse many lines, skipping malformed ones.

    Skipped lines are counted in ``stats["malformed"]`` when ``stats`` is given.
    """
    fmt = LogFormat.parse(format)
    if stats is not None:
        stats.setdefault("malformed", 0)
        stats.setdefault("parsed", 0)
    for lineno, line in _logical_lines(lines, fmt):
        try:
            record = parse_line(line, fmt)
        except MalformedLine as exc:
            logger.debug("skipping line %d: %s", lineno, exc)
            if stats is not None:
                stats["malformed"] += 1
            continue
        if stats is not None:
            stats["parsed"] += 1
        yield record


def read_log(path: "str | os.PathLike", format, stats: dict | None = None) -> list[LogRecord]:
    with open(path, encoding="utf-8", errors="replace") as fh:
        return list(iter_records(fh, format, stats))


def load_denylist(path: "str | os.PathLike | None") -> frozenset[str]:
    """Read a denylist file: one client address per line, ``#`` comments."""
    if path is None:
        return frozenset()
    entries = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            entry = line.split("#", 1)[0].strip()
            if entry:
                entries.add(entry)
    return frozenset(entries)


def is_page_request(record: LogRecord) -> bool:
    """The keep-predicate applied by :func:`clean`."""
    path = urlsplit(record.url).path
    ext = posixpath.splitext(posixpath.basename(path))[1].lstrip(".").lower()
    if ext and ext not in PAGE_EXTENSIONS:
        return False
    ctype = record.content_type.strip().lower()
    return not ctype or ctype.startswith("text/")


def clean(records: Iterable[LogRecord], denylist: Iterable[str] = ()) -> list[LogRecord]:
    """Drop non-page and denylisted records, dedupe, sort by (ip, time)."""
    denied = frozenset(denylist)
    seen = set()
    kept = []
    for rec in records:
        if rec.client_ip in denied or not is_page_request(rec):
            continue
        key = (rec.client_ip, rec.timestamp, rec.url)
        if key in seen:
            continue
        seen.add(key)
        kept.append(rec)
    kept.sort(key=lambda r: (r.client_ip, r.timestamp, r.url))
    return kept


class LogCleaner(TransformerMixin, BaseEstimator):
    """Stateless transformer wrapping :func:`clean`.

    Parameters
    ----------
    denylist : iterable of str, default=()
        Client addresses whose records are discarded.
    """

    def __init__(self, denylist=()):
        self.denylist = denylist

    def fit(self, X=None, y=None):
        self.n_denied_ = len(frozenset(self.denylist))
        return self

    def transform(self, X):
        return clean(X, self.denylist)

    def __sklearn_is_fitted__(self):
        return True
