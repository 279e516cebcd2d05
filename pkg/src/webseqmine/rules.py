"""The prefetching rule depository and its CSV form."""

from __future__ import annotations

import csv
import io
import os
from typing import Iterable

from .cyclic import PrefetchRule, Tendency
from .errors import BadHeader, DuplicatePair, NonPositivePeriod, RuleFileError
from .sessionizer import EncodingTable

HEADER = ["antecedent", "consequent", "support", "periodicity_s", "tendency", "cyclic_behaviour_s"]
URL_COLUMNS = ["antecedent_url", "consequent_url"]


def _check_rule(rule: PrefetchRule) -> None:
    if not rule.periodicity_s > 0:
        raise NonPositivePeriod(f"rule {rule.pair}: periodicity {rule.periodicity_s} is not positive")
    if rule.cyclic_s < rule.periodicity_s:
        raise NonPositivePeriod(f"rule {rule.pair}: cyclic bound {rule.cyclic_s} below periodicity {rule.periodicity_s}")
    if rule.support < 0:
        raise RuleFileError(f"rule {rule.pair}: negative support")


class RuleDepository:
    """Immutable set of prefetch rules indexed by antecedent page."""

    def __init__(self, rules: Iterable[PrefetchRule] = ()):
        rules = list(rules)
        index: dict[int, list[PrefetchRule]] = {}
        pairs = set()
        for rule in rules:
            _check_rule(rule)
            if rule.pair in pairs:
                raise DuplicatePair(f"duplicate rule for pair {rule.pair}")
            pairs.add(rule.pair)
            index.setdefault(rule.antecedent, []).append(rule)
        for bucket in index.values():
            bucket.sort(key=lambda r: (r.periodicity_s, r.consequent))
        self._rules = tuple(rules)
        self._index = {k: tuple(v) for k, v in index.items()}

    @property
    def rules(self) -> tuple[PrefetchRule, ...]:
        return self._rules

    def __len__(self) -> int:
        return len(self._rules)

    def __iter__(self):
        return iter(self._rules)

    def __eq__(self, other) -> bool:
        return isinstance(other, RuleDepository) and self._rules == other._rules

    def __repr__(self) -> str:
        return f"RuleDepository(n={len(self)})"

    def match(self, page: int) -> list[PrefetchRule]:
        return list(self._index.get(page, ()))


def match_rules(dep: RuleDepository, page: int) -> list[PrefetchRule]:
    """Rules triggered by ``page``, most urgent (smallest periodicity) first."""
    return dep.match(page)


def _fmt(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def _num(text: str):
    value = float(text)
    return int(value) if value.is_integer() else value


def dumps_rules(dep: RuleDepository, table: EncodingTable | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER + (URL_COLUMNS if table is not None else []))
    for r in dep.rules:
        row = [r.antecedent, r.consequent, r.support, _fmt(r.periodicity_s), str(r.tendency), _fmt(r.cyclic_s)]
        if table is not None:
            row += [table.decode(r.antecedent), table.decode(r.consequent)]
        writer.writerow(row)
    return buf.getvalue()


def save_rules(dep: RuleDepository, path: "str | os.PathLike", table: EncodingTable | None = None) -> None:
    """Write the rule CSV; with ``table`` the decoded URL columns are added."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_rules(dep, table))


def loads_rules(text: str) -> RuleDepository:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header not in (HEADER, HEADER + URL_COLUMNS):
        raise BadHeader(f"unexpected header {header!r}")
    rules = []
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) != len(header):
            raise RuleFileError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            rules.append(
                PrefetchRule(
                    antecedent=int(row[0]),
                    consequent=int(row[1]),
                    support=int(row[2]),
                    periodicity_s=_num(row[3]),
                    tendency=Tendency(row[4]),
                    cyclic_s=_num(row[5]),
                )
            )
        except ValueError as exc:
            raise RuleFileError(f"line {lineno}: {exc}") from None
    return RuleDepository(rules)


def load_rules(path: "str | os.PathLike") -> RuleDepository:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_rules(fh.read())
