"""Web usage mining: access logs to sessions, sequential patterns and prefetch rules."""

__version__ = "0.1.0"

from .cyclic import CyclicBehaviourAnalyzer, PrefetchRule, Tendency, analyze
from .log_ingest import LogCleaner, LogFormat, LogRecord, clean, parse_line
from .miner import Pattern, SequentialPatternMiner, maximal, mine, oracle_mine, two_sequences
from .prefetch_sim import SimMetrics, simulate
from .rules import RuleDepository, load_rules, match_rules, save_rules
from .sessionizer import SessionDatabase, Sessionizer, load_sequences, serialize_sessions, sessionize

__all__ = [
    "CyclicBehaviourAnalyzer",
    "LogCleaner",
    "LogFormat",
    "LogRecord",
    "Pattern",
    "PrefetchRule",
    "RuleDepository",
    "SequentialPatternMiner",
    "SessionDatabase",
    "Sessionizer",
    "SimMetrics",
    "Tendency",
    "analyze",
    "clean",
    "load_rules",
    "load_sequences",
    "match_rules",
    "maximal",
    "mine",
    "oracle_mine",
    "parse_line",
    "save_rules",
    "serialize_sessions",
    "sessionize",
    "simulate",
    "two_sequences",
]
