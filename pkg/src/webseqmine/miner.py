"""Bidirectional pattern growth over projected session databases.

Pipeline: frequent session itemsets are mapped to compact ids
(:func:`transform`), the transformed database is projected on each id
(:func:`project`), and every projection is split into the part before and
after the root (:func:`split_pre_suf`).  Patterns are grown on both sides of
a root at once, so the length of the patterns reachable after ``d`` levels of
recursion roughly doubles with every level.

Pattern elements are single transformed ids; a session that exactly equals
a frequent multi-page itemset is absorbed into that itemset's id.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_minsup, check_sequences
from .errors import MalformedLine, TooLarge

Row = tuple  # (tuple_id, tuple[frozenset[int], ...])


@dataclass(frozen=True)
class EncodedSequence:
    tuple_id: object
    elements: tuple[frozenset, ...]


@dataclass(frozen=True, order=False)
class Pattern:
    ids: tuple
    occ: frozenset = field(default=frozenset())

    @property
    def support(self) -> int:
        return len(self.occ)

    def __len__(self) -> int:
        return len(self.ids)

    def sort_key(self):
        return (len(self.ids), self.ids)

    def __str__(self) -> str:
        return "<" + " ".join(map(str, self.ids)) + ">"


class TransformTable:
    """Bijection between frequent page itemsets and transformed ids.

    Ids are assigned from 1 in lexicographic order of the sorted itemsets,
    so ``(A)`` < ``(A, C)`` < ``(B)``.
    """

    def __init__(self, itemsets: Iterable[Iterable] = ()):
        ordered = sorted({tuple(sorted(s)) for s in itemsets})
        self._itemsets = [frozenset(s) for s in ordered]
        self._ids = {s: i for i, s in enumerate(self._itemsets, 1)}
        self._singletons = {next(iter(s)): i for s, i in self._ids.items() if len(s) == 1}

    def __len__(self) -> int:
        return len(self._itemsets)

    def __eq__(self, other) -> bool:
        return isinstance(other, TransformTable) and self._itemsets == other._itemsets

    def __repr__(self) -> str:
        return f"TransformTable(n={len(self)})"

    def id_of(self, itemset) -> int:
        return self._ids[frozenset(itemset)]

    def itemset(self, tid: int) -> frozenset:
        if not 1 <= tid <= len(self._itemsets):
            raise KeyError(tid)
        return self._itemsets[tid - 1]

    def singleton_id(self, page):
        return self._singletons.get(page)

    def page_of(self, tid: int):
        """The page behind a singleton id, or None for a multi-page id."""
        s = self.itemset(tid)
        return next(iter(s)) if len(s) == 1 else None

    def items(self):
        return ((i, s) for i, s in enumerate(self._itemsets, 1))

    def encode_session(self, session: frozenset) -> frozenset:
        exact = self._ids.get(session)
        if exact is not None:
            return frozenset([exact])
        return frozenset(self._singletons[p] for p in session if p in self._singletons)

    def dumps(self) -> str:
        return "".join(f"{i}\t{' '.join(map(str, sorted(s)))}\n" for i, s in self.items())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "TransformTable":
        itemsets = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    tid, pages = line.rstrip("\n").split("\t")
                    itemsets.append((int(tid), frozenset(int(p) for p in pages.split())))
                except ValueError:
                    raise MalformedLine("expected 'id<TAB>page page ...'", line, lineno) from None
        table = cls(s for _, s in itemsets)
        if [i for i, _ in itemsets] != list(range(1, len(itemsets) + 1)) or any(
            table.itemset(i) != s for i, s in itemsets
        ):
            raise MalformedLine(f"{path}: ids are not in canonical order")
        return table


@dataclass(frozen=True)
class ProjectedDatabase:
    root: int
    tuples: tuple[EncodedSequence, ...]

    def __len__(self) -> int:
        return len(self.tuples)

    @property
    def tuple_ids(self) -> frozenset:
        return frozenset(t.tuple_id for t in self.tuples)


@dataclass(eq=False)
class DagNode:
    pattern: Pattern
    up_parents: tuple["DagNode", ...] = ()
    down_parents: tuple["DagNode", ...] = ()

    def __repr__(self) -> str:
        return f"DagNode({self.pattern}, occ={sorted(map(str, self.pattern.occ))})"


@dataclass
class RootDag:
    """Patterns containing one root id, organised as an up/down DAG."""

    root: DagNode | None
    nodes: dict = field(default_factory=dict)

    @property
    def patterns(self) -> list[Pattern]:
        return sorted((n.pattern for n in self.nodes.values()), key=Pattern.sort_key)

    def __getitem__(self, ids) -> DagNode:
        return self.nodes[tuple(ids)]

    def __len__(self) -> int:
        return len(self.nodes)


# --------------------------------------------------------------------------
# containment and support


def _rows(db) -> list[Row]:
    if isinstance(db, ProjectedDatabase):
        db = db.tuples
    out = []
    for item in db:
        if isinstance(item, EncodedSequence):
            out.append((item.tuple_id, item.elements))
        else:
            out.append(tuple(item))
    return out


def contains(elements: Sequence[frozenset], ids: Sequence) -> bool:
    """True iff ``ids`` matches members of ``elements`` at increasing positions."""
    n = len(ids)
    if n == 0:
        return True
    i = 0
    for element in elements:
        if ids[i] in element:
            i += 1
            if i == n:
                return True
    return False


def is_subsequence(small: Sequence, big: Sequence) -> bool:
    it = iter(big)
    return all(any(x == y for y in it) for x in small)


def support(db, pattern: Sequence) -> int:
    """Number of tuples of ``db`` that contain ``pattern``."""
    pattern = tuple(pattern)
    return sum(1 for _, elements in _rows(db) if contains(elements, pattern))


def occurrences(db, pattern: Sequence) -> frozenset:
    pattern = tuple(pattern)
    return frozenset(tid for tid, elements in _rows(db) if contains(elements, pattern))


# --------------------------------------------------------------------------
# database transformation


def frequent_elements(db, minsup: int) -> list[tuple[frozenset, int]]:
    """Frequent single pages plus frequent whole-session itemsets.

    A multi-page session ``S`` observed in the data is frequent when at
    least ``minsup`` users have some session that is a superset of ``S``.
    Results are in lexicographic itemset order.
    """
    rows = check_sequences(db)
    return _frequent_elements(rows, check_minsup(minsup, len(rows)))


def _frequent_elements(rows: list[Row], minsup: int) -> list[tuple[frozenset, int]]:
    page_users: dict = {}
    candidates = set()
    for tid, elements in rows:
        for element in elements:
            for page in element:
                page_users.setdefault(page, set()).add(tid)
            if len(element) > 1:
                candidates.add(element)
    found = {frozenset([p]): len(u) for p, u in page_users.items() if len(u) >= minsup}
    for cand in candidates:
        count = sum(1 for _, elements in rows if any(cand <= e for e in elements))
        if count >= minsup:
            found[cand] = count
    return sorted(found.items(), key=lambda kv: tuple(sorted(kv[0])))


def transform(db, minsup: int) -> tuple[list[EncodedSequence], TransformTable]:
    """Rewrite sessions as sets of transformed ids, dropping infrequent pages.

    A session equal to a frequent itemset becomes that itemset's id;
    otherwise it becomes the ids of its frequent single pages.  Empty
    sessions and then empty tuples are removed.
    """
    rows = check_sequences(db)
    table = TransformTable(s for s, _ in _frequent_elements(rows, check_minsup(minsup, len(rows))))
    out = []
    for tid, elements in rows:
        encoded = tuple(e for e in (table.encode_session(s) for s in elements) if e)
        if encoded:
            out.append(EncodedSequence(tid, encoded))
    return out, table


def project(tdb, root: int) -> ProjectedDatabase:
    """The tuples that contain ``root`` in some element, unmodified."""
    tuples = tdb.tuples if isinstance(tdb, ProjectedDatabase) else tdb
    kept = []
    for t in tuples:
        if not isinstance(t, EncodedSequence):
            t = EncodedSequence(*t)
        if any(root in e for e in t.elements):
            kept.append(t)
    return ProjectedDatabase(root, tuple(kept))


def _split_row(elements: tuple, root) -> tuple[tuple, tuple]:
    first = last = None
    for i, e in enumerate(elements):
        if root in e:
            if first is None:
                first = i
            last = i
    if first is None:
        return (), ()
    return elements[:last], elements[first + 1 :]


def split_pre_suf(pd: ProjectedDatabase) -> tuple[list[EncodedSequence], list[EncodedSequence]]:
    """Prefix and suffix databases of a projection.

    The prefix of a tuple is everything before its last element holding the
    root and the suffix everything after its first such element.  For a
    tuple with a single root occurrence these are simply the parts before
    and after it.  Widening to last/first keeps every embedding of a
    pattern ``x root y`` visible, which matters when the root repeats.
    Empty prefixes and suffixes are omitted.
    """
    pre, suf = [], []
    for t in pd.tuples:
        p, s = _split_row(t.elements, pd.root)
        if p:
            pre.append(EncodedSequence(t.tuple_id, p))
        if s:
            suf.append(EncodedSequence(t.tuple_id, s))
    return pre, suf


# --------------------------------------------------------------------------
# growth engine


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Node:
    """A (sub)database reached by a chain of prefix/suffix splits."""

    __slots__ = ("rows", "depth", "levels", "children", "positions")

    def __init__(self, rows: dict, depth: int):
        self.rows = rows  # bit -> elements
        self.depth = depth
        self.levels: dict[int, dict] = {}
        self.children: dict = {}
        self.positions: dict | None = None


class BidirectionalGrowth:
    """Mine all frequent patterns of a transformed database.

    Patterns are produced length by length.  A pattern of length ``k`` is
    assembled around its middle id ``r``: the ``(k - 1) // 2`` ids before it
    come from the prefix database of ``r`` and the ``k // 2`` ids after it
    from the suffix database, each mined recursively with the same rule.
    Candidates pass an occurrence-set intersection filter and are then
    verified by containment, so occurrence sets are exact.

    Because both halves shrink to at most ``k // 2``, mining length ``k``
    never nests deeper than ``floor(log2 k) + 1`` levels.  ``max_depth``
    records the deepest level actually entered.
    """

    def __init__(self, rows: Sequence[Row], minsup: int):
        if minsup < 1:
            raise ValueError("minsup must be >= 1")
        self.minsup = minsup
        self.tuple_ids = [tid for tid, _ in rows]
        self.root = _Node({i: tuple(el) for i, (_, el) in enumerate(rows)}, 1)
        self.max_depth = 0
        self.checks = 0

    # -- helpers -----------------------------------------------------------

    def _positions(self, node: _Node) -> dict:
        if node.positions is None:
            pos: dict = {}
            for bit, elements in node.rows.items():
                seen = {}
                for i, element in enumerate(elements):
                    for item in element:
                        if item in seen:
                            seen[item][1] = i
                        else:
                            seen[item] = [i, i]
                for item, (first, last) in seen.items():
                    pos.setdefault(item, []).append((bit, first, last))
            node.positions = pos
        return node.positions

    def _child(self, node: _Node, root, side: str) -> _Node:
        key = (root, side)
        child = node.children.get(key)
        if child is None:
            rows = {}
            for bit, first, last in self._positions(node)[root]:
                elements = node.rows[bit]
                part = elements[:last] if side == "pre" else elements[first + 1 :]
                if part:
                    rows[bit] = part
            child = node.children[key] = _Node(rows, node.depth + 1)
        return child

    def _verify(self, node: _Node, pattern: tuple, mask: int) -> int:
        # popcount of the surviving mask must stay >= minsup; bail early
        need = self.minsup
        budget = mask.bit_count()
        out = 0
        for bit in _bits(mask):
            self.checks += 1
            if contains(node.rows[bit], pattern):
                out |= 1 << bit
                need -= 1
            else:
                budget -= 1
                if budget < self.minsup:
                    return 0
        return out if need <= 0 else 0

    # -- level computation -------------------------------------------------

    def level(self, node: _Node, k: int) -> dict:
        """All frequent patterns of exactly length ``k`` in ``node``."""
        cached = node.levels.get(k)
        if cached is not None:
            return cached
        if len(node.rows) < self.minsup:
            node.levels[k] = {}
            return node.levels[k]
        self.max_depth = max(self.max_depth, node.depth)
        if k == 1:
            out = {}
            for item, hits in self._positions(node).items():
                if len(hits) >= self.minsup:
                    mask = 0
                    for bit, _, _ in hits:
                        mask |= 1 << bit
                    out[(item,)] = mask
            node.levels[1] = out
            return out
        left, right = (k - 1) // 2, k // 2
        out = {}
        for (root,), root_mask in self.level(node, 1).items():
            if left:
                xs = self.level(self._child(node, root, "pre"), left)
                if not xs:
                    continue
            else:
                xs = {(): root_mask}
            ys = self.level(self._child(node, root, "suf"), right)
            if not ys:
                continue
            for x, xmask in xs.items():
                for y, ymask in ys.items():
                    mask = xmask & ymask
                    if mask.bit_count() < self.minsup:
                        continue
                    pattern = x + (root,) + y
                    if x:
                        mask = self._verify(node, pattern, mask)
                        if not mask:
                            continue
                    out[pattern] = mask
        node.levels[k] = out
        return out

    def _extends(self, shorter: dict) -> bool:
        """True iff some pattern one longer than ``shorter``'s is frequent."""
        by_head: dict = {}
        for p, mask in shorter.items():
            by_head.setdefault(p[:-1], []).append((p[-1], mask))
        rows = self.root.rows
        for p, pmask in shorter.items():
            for last, qmask in by_head.get(p[1:], ()):
                mask = pmask & qmask
                if mask.bit_count() < self.minsup:
                    continue
                cand = p + (last,)
                hits = 0
                for bit in _bits(mask):
                    if contains(rows[bit], cand):
                        hits += 1
                        if hits >= self.minsup:
                            return True
        return False

    def run(self) -> dict:
        """Mine everything; returns ``{pattern ids: occurrence set}``."""
        found: dict = {}
        k = 1
        previous = None
        while True:
            # Entering length k = 2**j would nest one level deeper than any
            # shorter length; only do so when a length-k pattern exists.
            if k > 1 and k & (k - 1) == 0 and not self._extends(previous):
                break
            current = self.level(self.root, k)
            if not current:
                break
            found.update(current)
            previous = current
            k += 1
        ids = self.tuple_ids
        return {p: frozenset(ids[b] for b in _bits(m)) for p, m in found.items()}


def _to_patterns(found: dict) -> list[Pattern]:
    return sorted((Pattern(p, occ) for p, occ in found.items()), key=Pattern.sort_key)


def _encoded_rows(tdb) -> list[Row]:
    rows = _rows(tdb)
    seen = set()
    for tid, _ in rows:
        if tid in seen:
            raise ValueError(f"duplicate tuple id {tid!r}")
        seen.add(tid)
    return rows


def mine_transformed(tdb, minsup: int, stats: dict | None = None) -> list[Pattern]:
    """Mine an already transformed database."""
    rows = _encoded_rows(tdb)
    minsup = check_minsup(minsup, len(rows))
    engine = BidirectionalGrowth(rows, minsup)
    patterns = _to_patterns(engine.run())
    if stats is not None:
        stats["max_depth"] = engine.max_depth
        stats["longest"] = max((len(p) for p in patterns), default=0)
        stats["verifications"] = engine.checks
        stats["minsup"] = minsup
    return patterns


def mine(db, minsup, stats: dict | None = None) -> list[Pattern]:
    """All web sequential access patterns of ``db`` with support >= minsup.

    ``db`` is a session database (or anything :func:`check_sequences`
    accepts); ``minsup`` is a count or a fraction of the tuples.  Patterns
    come back in (length, ids) order with their occurrence sets.
    """
    rows = check_sequences(db)
    minsup = check_minsup(minsup, len(rows))
    tdb, table = transform(dict(rows), minsup)
    patterns = mine_transformed(tdb, minsup, stats)
    if stats is not None:
        stats["table"] = table
    return patterns


def mine_root(pd: ProjectedDatabase, minsup: int) -> RootDag:
    """All frequent patterns containing ``pd.root``, as an up/down DAG.

    Up-children ``x root`` come from the prefix database and down-children
    ``root y`` from the suffix database; ``x root y`` is kept when the
    occurrence sets of its up- and down-parent intersect in at least
    ``minsup`` tuples and containment holds in that many tuples of ``pd``.
    """
    if len(pd) < minsup:
        return RootDag(None, {})
    root = pd.root
    pre, suf = split_pre_suf(pd)
    xs = BidirectionalGrowth(_rows(pre), minsup).run() if len(pre) >= minsup else {}
    ys = BidirectionalGrowth(_rows(suf), minsup).run() if len(suf) >= minsup else {}
    top = DagNode(Pattern((root,), pd.tuple_ids))
    nodes = {(root,): top}

    def side_parents(ids: tuple, shorter) -> tuple:
        if len(ids) == 1:
            return (top,)
        keys = dict.fromkeys(shorter(ids[:i] + ids[i + 1 :]) for i in range(len(ids)))
        return tuple(nodes[k] for k in keys if k in nodes)

    for x in sorted(xs, key=len):
        ids = x + (root,)
        nodes.setdefault(ids, DagNode(Pattern(ids, xs[x]), up_parents=side_parents(x, lambda s: s + (root,))))
    for y in sorted(ys, key=len):
        ids = (root,) + y
        nodes.setdefault(ids, DagNode(Pattern(ids, ys[y]), down_parents=side_parents(y, lambda s: (root,) + s)))
    by_tid = {t.tuple_id: t.elements for t in pd.tuples}
    for x, xocc in xs.items():
        for y, yocc in ys.items():
            cand = xocc & yocc
            if len(cand) < minsup:
                continue
            ids = x + (root,) + y
            occ = frozenset(t for t in cand if contains(by_tid[t], ids))
            if len(occ) >= minsup and ids not in nodes:
                nodes[ids] = DagNode(
                    Pattern(ids, occ),
                    up_parents=(nodes[x + (root,)],),
                    down_parents=(nodes[(root,) + y],),
                )
    return RootDag(top, nodes)


# --------------------------------------------------------------------------
# brute-force oracle


def _all_subsequences(elements: Sequence[frozenset]) -> set:
    subs = {()}
    for element in elements:
        subs |= {s + (x,) for s in subs for x in element}
    return subs


def oracle_mine(db, minsup, limit: int = 1 << 18, transformed: bool = False) -> list[Pattern]:
    """Frequent patterns by exhaustive enumeration.

    Every single-id subsequence of every tuple is listed explicitly, then
    kept when at least ``minsup`` tuples list it.  Raises :class:`TooLarge`
    when a tuple could have more than ``limit`` subsequences.
    """
    if transformed:
        rows = _encoded_rows(db)
        minsup = check_minsup(minsup, len(rows))
    else:
        raw = check_sequences(db)
        minsup = check_minsup(minsup, len(raw))
        rows = _rows(transform(dict(raw), minsup)[0])
    holders: dict = {}
    for tid, elements in rows:
        bound = math.prod(len(e) + 1 for e in elements)
        if bound > limit:
            raise TooLarge(f"tuple {tid!r} may have {bound} subsequences (limit {limit})")
        for sub in _all_subsequences(elements):
            if sub:
                holders.setdefault(sub, set()).add(tid)
    found = {p: frozenset(t) for p, t in holders.items() if len(t) >= minsup}
    return _to_patterns(found)


# --------------------------------------------------------------------------
# post-processing


def _ids(p) -> tuple:
    return p.ids if isinstance(p, Pattern) else tuple(p)


def maximal(wp: Iterable) -> list:
    """Members of ``wp`` that are not subsequences of another member."""
    items = list(wp)
    unique = list({_ids(p): p for p in items}.values())
    unique.sort(key=lambda p: -len(_ids(p)))
    kept = []
    for p in unique:
        ids = _ids(p)
        if not any(len(_ids(q)) > len(ids) and is_subsequence(ids, _ids(q)) for q in kept):
            kept.append(p)
    return sorted(kept, key=lambda p: (len(_ids(p)), _ids(p)))


def two_sequences(wpmax: Iterable) -> set:
    """Ordered pairs ``(i, j)`` with ``i`` before ``j`` in some pattern."""
    pairs = set()
    for p in wpmax:
        ids = _ids(p)
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                pairs.add((ids[a], ids[b]))
    return pairs


# --------------------------------------------------------------------------
# pattern files


def format_pattern(p: Pattern) -> str:
    occ = ",".join(sorted(map(str, p.occ)))
    return f"{p}\t{p.support}\t{occ}"


def write_patterns(patterns: Iterable[Pattern], out: "str | os.PathLike | TextIO") -> None:
    text = "".join(format_pattern(p) + "\n" for p in patterns)
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def parse_pattern_line(line: str) -> Pattern:
    try:
        ids_text, count, occ_text = line.rstrip("\n").split("\t")
        if not (ids_text.startswith("<") and ids_text.endswith(">")):
            raise ValueError
        ids = tuple(int(x) for x in ids_text[1:-1].split())
        occ = frozenset(o for o in occ_text.split(",") if o)
        if int(count) != len(occ):
            raise ValueError
    except ValueError:
        raise MalformedLine("expected '<ids>\\tsupport\\ttuple,ids'", line) from None
    return Pattern(ids, occ)


def read_patterns(path: "str | os.PathLike") -> list[Pattern]:
    with open(path, encoding="utf-8") as fh:
        return [parse_pattern_line(line) for line in fh if line.strip()]


# --------------------------------------------------------------------------
# estimator


class SequentialPatternMiner(BaseEstimator):
    """Estimator front-end for :func:`mine`.

    Parameters
    ----------
    minsup : int or float, default=2
        Minimum support as a tuple count, or a fraction in (0, 1) of the
        number of tuples (rounded up).

    Attributes
    ----------
    minsup_ : int
        The absolute threshold used.
    transform_table_ : TransformTable
    encoded_ : list of EncodedSequence
    patterns_ : list of Pattern
    maximal_patterns_ : list of Pattern
    pairs_ : dict
        ``(i, j) -> support`` for every frequent 2-sequence, in transformed ids.
    max_depth_ : int
        Deepest prefix/suffix recursion level entered.
    """

    def __init__(self, minsup=2):
        self.minsup = minsup

    def fit(self, X, y=None):
        rows = check_sequences(X)
        self.n_tuples_ = len(rows)
        self.minsup_ = check_minsup(self.minsup, self.n_tuples_)
        self.encoded_, self.transform_table_ = transform(dict(rows), self.minsup_)
        stats: dict = {}
        self.patterns_ = mine_transformed(self.encoded_, self.minsup_, stats)
        self.max_depth_ = stats["max_depth"]
        self.maximal_patterns_ = maximal(self.patterns_)
        supports = {p.ids: p.support for p in self.patterns_ if len(p) == 2}
        self.pairs_ = {pair: supports[pair] for pair in sorted(two_sequences(self.maximal_patterns_))}
        return self

    def transform(self, X) -> list[EncodedSequence]:
        """Encode new sequences with the fitted itemset table."""
        check_is_fitted(self, "transform_table_")
        out = []
        for tid, elements in check_sequences(X):
            encoded = tuple(e for e in (self.transform_table_.encode_session(s) for s in elements) if e)
            if encoded:
                out.append(EncodedSequence(tid, encoded))
        return out

    def page_pairs(self) -> tuple[dict, list]:
        """Frequent 2-sequences mapped back to page ids.

        Pairs touching a multi-page itemset id have no single trigger page;
        they are returned separately.
        """
        check_is_fitted(self, "pairs_")
        pages, composite = {}, []
        for (i, j), count in self.pairs_.items():
            a, b = self.transform_table_.page_of(i), self.transform_table_.page_of(j)
            if a is None or b is None:
                composite.append((i, j))
            else:
                pages[(a, b)] = count
        return pages, composite
