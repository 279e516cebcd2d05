"""End-to-end batch run: logs -> sessions -> patterns -> rules -> metrics."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from ._validation import check_minsup
from .cyclic import analyze
from .errors import WebSeqMineError
from .log_ingest import LogFormat, LogRecord, clean, load_denylist, read_log
from .miner import SequentialPatternMiner, write_patterns
from .prefetch_sim import simulate, stream_from_sessions
from .rules import RuleDepository, save_rules
from .sessionizer import DEFAULT_GAP_SECS, load_sequences, save_sessions, sessionize

logger = logging.getLogger(__name__)


class StageError(WebSeqMineError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


class _stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, (WebSeqMineError, OSError, ValueError, KeyError)):
            raise StageError(self.name, exc) from exc
        return False


@dataclass
class PipelineConfig:
    input: str
    format: str
    out_dir: str
    minsup: object = 2
    gap_threshold: float = DEFAULT_GAP_SECS
    denylist: str | None = None
    band: float = 0.01


@dataclass
class PipelineResult:
    artifacts: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    notices: list = field(default_factory=list)


def write_records(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")


def read_records(path) -> list[LogRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(LogRecord(**json.loads(line)))
    return out


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Run every stage, persisting each stage's output under ``out_dir``."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = PipelineResult()
    fmt = LogFormat.parse(config.format)
    table = None

    if fmt.is_line_format:
        with _stage("ingest"):
            stats: dict = {}
            raw = read_log(config.input, fmt, stats)
            records = clean(raw, load_denylist(config.denylist))
            write_records(records, out / "records.jsonl")
            result.artifacts["records"] = out / "records.jsonl"
            result.counts.update(parsed=stats["parsed"], malformed=stats["malformed"], kept=len(records))
        with _stage("sessionize"):
            db = sessionize(records, config.gap_threshold)
            table = db.table
            table.save(out / "urls.tsv")
            result.artifacts["urls"] = out / "urls.tsv"
    else:
        with _stage("load"):
            db = load_sequences(config.input, fmt)
    with _stage("sessionize"):
        save_sessions(db, out / "sessions.txt")
        result.artifacts["sessions"] = out / "sessions.txt"
        result.counts["users"] = len(db)

    with _stage("mine"):
        minsup = check_minsup(config.minsup, len(db))
        miner = SequentialPatternMiner(minsup=minsup).fit(db)
        write_patterns(miner.patterns_, out / "patterns.txt")
        write_patterns(miner.maximal_patterns_, out / "maximal.txt")
        pair_patterns = [p for p in miner.patterns_ if len(p) == 2 and p.ids in miner.pairs_]
        write_patterns(pair_patterns, out / "pairs.txt")
        miner.transform_table_.save(out / "transform.tsv")
        for name in ("patterns", "maximal", "pairs", "transform"):
            result.artifacts[name] = out / (name + (".tsv" if name == "transform" else ".txt"))
        result.counts.update(
            minsup=minsup,
            patterns=len(miner.patterns_),
            maximal=len(miner.maximal_patterns_),
            pairs=len(miner.pairs_),
            max_depth=miner.max_depth_,
        )

    if not db.has_timestamps:
        result.notices.append("analyze skipped: input has no real timestamps")
        return result

    with _stage("analyze"):
        page_pairs, composite = miner.page_pairs()
        for pair in composite:
            result.notices.append(f"pair {pair} involves a multi-page itemset; no rule")
        analysis = analyze(page_pairs, db, config.band)
        for pair, reason in analysis.skipped:
            result.notices.append(f"pair {pair} skipped: {reason}")
        dep = RuleDepository(analysis.rules)
        save_rules(dep, out / "rules.csv")
        result.artifacts["rules"] = out / "rules.csv"
        if table is not None:
            save_rules(dep, out / "rules_decoded.csv", table)
            result.artifacts["rules_decoded"] = out / "rules_decoded.csv"
        result.counts["rules"] = len(dep)

    with _stage("simulate"):
        metrics = simulate(stream_from_sessions(db), dep)
        (out / "metrics.csv").write_text(metrics.to_csv(), encoding="utf-8")
        result.artifacts["metrics"] = out / "metrics.csv"
        result.counts["hits"] = metrics.hits
    return result


def default_sidecar(path: "str | os.PathLike", suffix: str) -> Path:
    return Path(str(path) + suffix)
