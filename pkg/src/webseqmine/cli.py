"""Command line interface.

Subcommands mirror the pipeline stages::

    webseqmine ingest access.log --format clf --out records.jsonl
    webseqmine sessionize records.jsonl --out sessions.txt
    webseqmine mine sessions.txt --minsup 0.02 --out patterns.txt
    webseqmine analyze sessions.txt --patterns patterns.txt --rules rules.csv
    webseqmine simulate sessions.txt --rules rules.csv
    webseqmine bench sessions.txt --sizes 500,1000,2000 --minsups 2,4,8
    webseqmine pipeline access.log --format proxy --minsup 2 --out run/
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import bench, bench_csv
from .cyclic import analyze
from .errors import WebSeqMineError
from .log_ingest import LogFormat, clean, load_denylist, read_log
from .miner import SequentialPatternMiner, TransformTable, maximal, read_patterns, two_sequences, write_patterns
from .pipeline import PipelineConfig, StageError, default_sidecar, read_records, run_pipeline, write_records
from .prefetch_sim import simulate, stream_from_sessions
from .rules import RuleDepository, load_rules, save_rules
from .sessionizer import DEFAULT_GAP_SECS, EncodingTable, load_sequences, save_sessions, sessionize
from .synthetic import clickstream_db

FORMATS = [f.value for f in LogFormat]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _minsup_list(text: str) -> list:
    out = []
    for x in text.split(","):
        x = x.strip()
        if x:
            out.append(float(x) if "." in x else int(x))
    return out


def _load_db(path, fmt):
    fmt = LogFormat.parse(fmt or "sessions")
    if fmt.is_line_format:
        return sessionize(clean(read_log(path, fmt)))
    return load_sequences(path, fmt)


def cmd_ingest(args) -> int:
    stats: dict = {}
    records = []
    for path in args.inputs:
        records.extend(read_log(path, args.format, stats))
    kept = clean(records, load_denylist(args.denylist))
    write_records(kept, args.out)
    print(f"parsed={stats.get('parsed', 0)} malformed={stats.get('malformed', 0)} kept={len(kept)}", file=sys.stderr)
    return 0


def cmd_sessionize(args) -> int:
    if args.format:
        records = clean(read_log(args.input, args.format), load_denylist(args.denylist))
    else:
        records = read_records(args.input)
    db = sessionize(records, args.session_gap_secs)
    save_sessions(db, args.out)
    db.table.save(args.urls or default_sidecar(args.out, ".urls.tsv"))
    print(f"users={len(db)} sessions={sum(len(u.sessions) for u in db.users)} pages={len(db.table)}", file=sys.stderr)
    return 0


def cmd_mine(args) -> int:
    db = _load_db(args.input, args.format)
    miner = SequentialPatternMiner(minsup=args.minsup).fit(db)
    write_patterns(miner.patterns_, args.out)
    miner.transform_table_.save(args.transform_out or default_sidecar(args.out, ".transform.tsv"))
    if args.maximal_out:
        write_patterns(miner.maximal_patterns_, args.maximal_out)
    print(
        f"minsup={miner.minsup_} patterns={len(miner.patterns_)} maximal={len(miner.maximal_patterns_)} "
        f"pairs={len(miner.pairs_)} max_depth={miner.max_depth_}",
        file=sys.stderr,
    )
    return 0


def cmd_analyze(args) -> int:
    db = _load_db(args.input, args.format)
    patterns = read_patterns(args.patterns)
    table = TransformTable.load(args.transform or default_sidecar(args.patterns, ".transform.tsv"))
    supports = {p.ids: p.support for p in patterns if len(p) == 2}
    pairs = {}
    for i, j in sorted(two_sequences(maximal(patterns))):
        a, b = table.page_of(i), table.page_of(j)
        if a is None or b is None:
            print(f"notice: pair ({i}, {j}) involves a multi-page itemset; no rule", file=sys.stderr)
            continue
        pairs[(a, b)] = supports.get((i, j), 0)
    result = analyze(pairs, db, args.band)
    for pair, reason in result.skipped:
        print(f"notice: pair {pair} skipped: {reason}", file=sys.stderr)
    urls = EncodingTable.load(args.urls) if args.urls else None
    save_rules(RuleDepository(result.rules), args.rules, urls)
    print(f"rules={len(result.rules)} skipped={len(result.skipped)}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    db = _load_db(args.input, args.format)
    if not db.has_timestamps:
        raise WebSeqMineError("simulation needs a timestamped SESSIONS stream")
    metrics = simulate(stream_from_sessions(db), load_rules(args.rules), epsilon=args.epsilon)
    if args.out:
        Path(args.out).write_text(metrics.to_csv(), encoding="utf-8")
    else:
        sys.stdout.write(metrics.to_csv())
    print(metrics.summary(), file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    if args.input:
        db = _load_db(args.input, args.format)
    else:
        db = clickstream_db(max(args.sizes), seed=args.seed)
    rows = bench(db, args.sizes, args.minsups, repeats=args.repeats)
    text = bench_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_pipeline(args) -> int:
    config = PipelineConfig(
        input=args.input,
        format=args.format,
        out_dir=args.out,
        minsup=args.minsup,
        gap_threshold=args.session_gap_secs,
        denylist=args.denylist,
        band=args.band,
    )
    result = run_pipeline(config)
    for notice in result.notices:
        print(f"notice: {notice}", file=sys.stderr)
    print(" ".join(f"{k}={v}" for k, v in result.counts.items()), file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="webseqmine", description="Mine prefetching rules from web access logs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and clean raw log files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", required=True, choices=["clf", "eclf", "proxy"])
    p.add_argument("--denylist")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest, stage="ingest")

    p = sub.add_parser("sessionize", help="split cleaned records into sessions")
    p.add_argument("input", help="ingest output (JSON lines) or a raw log with --format")
    p.add_argument("--format", choices=["clf", "eclf", "proxy"])
    p.add_argument("--denylist")
    p.add_argument("--session-gap-secs", type=float, default=DEFAULT_GAP_SECS)
    p.add_argument("--out", required=True)
    p.add_argument("--urls", help="URL table path (default: <out>.urls.tsv)")
    p.set_defaults(func=cmd_sessionize, stage="sessionize")

    p = sub.add_parser("mine", help="mine sequential access patterns")
    p.add_argument("input")
    p.add_argument("--format", default="sessions", choices=FORMATS)
    p.add_argument("--minsup", default="2")
    p.add_argument("--out", required=True)
    p.add_argument("--transform-out")
    p.add_argument("--maximal-out")
    p.set_defaults(func=cmd_mine, stage="mine")

    p = sub.add_parser("analyze", help="derive prefetching rules from mined pairs")
    p.add_argument("input", help="timestamped SESSIONS file")
    p.add_argument("--format", default="sessions", choices=FORMATS)
    p.add_argument("--patterns", required=True)
    p.add_argument("--transform")
    p.add_argument("--urls", help="URL table for the decoded rule variant")
    p.add_argument("--band", type=float, default=0.01)
    p.add_argument("--rules", required=True)
    p.set_defaults(func=cmd_analyze, stage="analyze")

    p = sub.add_parser("simulate", help="replay a stream against a rule file")
    p.add_argument("input", help="timestamped SESSIONS file")
    p.add_argument("--format", default="sessions", choices=FORMATS)
    p.add_argument("--rules", required=True)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate, stage="simulate")

    p = sub.add_parser("bench", help="runtime and pattern counts by size and minsup")
    p.add_argument("input", nargs="?")
    p.add_argument("--format", default="sessions", choices=FORMATS)
    p.add_argument("--sizes", type=_int_list, default=[500, 1000, 2000])
    p.add_argument("--minsups", type=_minsup_list, default=[0.02])
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench, stage="bench")

    p = sub.add_parser("pipeline", help="run every stage")
    p.add_argument("input")
    p.add_argument("--format", required=True, choices=FORMATS)
    p.add_argument("--minsup", default="2")
    p.add_argument("--session-gap-secs", type=float, default=DEFAULT_GAP_SECS)
    p.add_argument("--denylist")
    p.add_argument("--band", type=float, default=0.01)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_pipeline, stage="pipeline")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"webseqmine: error in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return 2
    except (WebSeqMineError, OSError, ValueError, KeyError) as exc:
        print(f"webseqmine: error in stage '{args.stage}': {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
