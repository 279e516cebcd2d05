"""Runtime / pattern-count benchmarks over prefix-truncated databases."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import astuple, dataclass, fields
from typing import Iterable

from ._validation import check_minsup
from .miner import mine
from .sessionizer import SessionDatabase


@dataclass(frozen=True)
class BenchRow:
    data_size: int
    minsup: int
    runtime_ms: float
    pattern_count: int
    max_recursion_depth: int


def bench(db: SessionDatabase, sizes: Iterable[int], minsups: Iterable, repeats: int = 1) -> list[BenchRow]:
    """Mine the first ``size`` users of ``db`` for every (size, minsup).

    Fractional minsups are resolved against each truncated size.  The
    reported runtime is the best of ``repeats`` runs.
    """
    rows = []
    minsups = list(minsups)
    for size in sizes:
        if size < 0:
            raise ValueError("sizes must be non-negative")
        sub = db.head(size)
        for ms in minsups:
            count = check_minsup(ms, len(sub))
            best = float("inf")
            for _ in range(max(1, repeats)):
                stats: dict = {}
                t0 = time.perf_counter()
                patterns = mine(sub, count, stats)
                best = min(best, (time.perf_counter() - t0) * 1000.0)
            rows.append(BenchRow(len(sub), count, round(best, 3), len(patterns), stats["max_depth"]))
    return rows


def bench_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f.name for f in fields(BenchRow)])
    for row in rows:
        writer.writerow(astuple(row))
    return buf.getvalue()
