"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import math
from collections.abc import Mapping
from numbers import Integral, Real


def check_minsup(minsup, n_tuples: int) -> int:
    """Resolve ``minsup`` to an absolute tuple count.

    Integers >= 1 are taken as counts; reals strictly between 0 and 1 are
    fractions of ``n_tuples`` rounded up.
    """
    if isinstance(minsup, bool):
        raise TypeError("minsup must be a number, not bool")
    if isinstance(minsup, Integral):
        if minsup < 1:
            raise ValueError(f"minsup must be >= 1, got {minsup}")
        return int(minsup)
    if isinstance(minsup, Real):
        value = float(minsup)
        if value.is_integer() and value >= 1:
            return int(value)
        if not 0.0 < value < 1.0:
            raise ValueError(f"fractional minsup must lie in (0, 1), got {minsup}")
        return max(1, math.ceil(value * n_tuples - 1e-9))
    if isinstance(minsup, str):
        text = minsup.strip()
        try:
            return check_minsup(int(text), n_tuples)
        except ValueError:
            pass
        try:
            return check_minsup(float(text), n_tuples)
        except ValueError:
            raise ValueError(f"cannot read minsup from {minsup!r}") from None
    raise TypeError(f"unsupported minsup {minsup!r}")


def _as_session(value) -> frozenset:
    if isinstance(value, (str, bytes, Integral)):
        return frozenset([value])
    return frozenset(value)


def check_sequences(X) -> list[tuple[object, tuple[frozenset, ...]]]:
    """Normalise miner input to ``[(tuple_id, (page set, ...)), ...]``.

    Accepts a :class:`~webseqmine.sessionizer.SessionDatabase`, a list of
    encoded sequences, a mapping ``tuple_id -> sessions`` or a plain list
    of sessions-lists (tuple ids become 0, 1, ...).  A session is either a
    single page or an iterable of pages.  Empty sessions are dropped.
    """
    from .sessionizer import SessionDatabase

    if isinstance(X, SessionDatabase):
        rows = X.sequences()
    elif isinstance(X, Mapping):
        rows = list(X.items())
    else:
        rows = []
        for i, item in enumerate(X):
            if hasattr(item, "tuple_id") and hasattr(item, "elements"):
                rows.append((item.tuple_id, item.elements))
            else:
                rows.append((i, item))
    out = []
    seen = set()
    for tid, seq in rows:
        if tid in seen:
            raise ValueError(f"duplicate tuple id {tid!r}")
        seen.add(tid)
        if isinstance(seq, (str, bytes)):
            raise TypeError("a sequence must be an iterable of sessions, not a string")
        elements = tuple(s for s in (_as_session(v) for v in seq) if s)
        out.append((tid, elements))
    return out
