import json
from pathlib import Path

import pytest

from webseqmine.cli import main
from webseqmine.log_ingest import LogFormat, render_line
from webseqmine.miner import read_patterns
from webseqmine.pipeline import PipelineConfig, run_pipeline
from webseqmine.rules import load_rules
from webseqmine.sessionizer import save_sessions
from webseqmine.synthetic import planted_periodic_log

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def planted_clf(tmp_path):
    log = planted_periodic_log(seed=5, n_users=12)
    path = tmp_path / "planted.log"
    path.write_text("".join(render_line(r, LogFormat.CLF) + "\n" for r in log.records))
    return path


@pytest.fixture
def worked_file(tmp_path, worked):
    path = tmp_path / "worked.txt"
    save_sessions(worked, path)
    return path


def test_pipeline_worked_example(tmp_path, worked_file, capsys):
    out = tmp_path / "run"
    assert main(["pipeline", str(worked_file), "--format", "sessions", "--minsup", "2", "--out", str(out)]) == 0
    assert len(read_patterns(out / "patterns.txt")) == 14
    assert len(read_patterns(out / "maximal.txt")) == 4
    assert {p.ids for p in read_patterns(out / "pairs.txt")} == {(1, 3), (1, 6), (3, 6), (1, 7), (6, 7), (5, 6)}
    assert not (out / "rules.csv").exists()
    assert "analyze skipped" in capsys.readouterr().err


def test_pipeline_msnbc(tmp_path, capsys):
    src = tmp_path / "msnbc.seq"
    src.write_text("1 2 3\n1 2\n2 3 1 2\n")
    out = tmp_path / "run"
    assert main(["pipeline", str(src), "--format", "msnbc", "--minsup", "2", "--out", str(out)]) == 0
    assert (1, 2) in {p.ids for p in read_patterns(out / "pairs.txt")}
    assert "analyze skipped" in capsys.readouterr().err


def test_pipeline_planted_and_reproducible(tmp_path, planted_clf):
    args = ["pipeline", str(planted_clf), "--format", "clf", "--minsup", "12", "--session-gap-secs", "5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(
        ["records.jsonl", "sessions.txt", "urls.tsv", "patterns.txt", "maximal.txt", "pairs.txt",
         "transform.tsv", "rules.csv", "rules_decoded.csv", "metrics.csv"]
    )
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rules = {r.pair: r for r in load_rules(tmp_path / "a" / "rules.csv")}
    assert rules[(1, 2)].periodicity_s == 10


def test_stagewise_commands(tmp_path, planted_clf):
    rec = tmp_path / "records.jsonl"
    sess = tmp_path / "sessions.txt"
    pats = tmp_path / "patterns.txt"
    rules = tmp_path / "rules.csv"
    assert main(["ingest", str(planted_clf), "--format", "clf", "--out", str(rec)]) == 0
    assert json.loads(rec.read_text().splitlines()[0])["client_ip"].startswith("30.0.")
    assert main(["sessionize", str(rec), "--session-gap-secs", "5", "--out", str(sess)]) == 0
    assert Path(str(sess) + ".urls.tsv").exists()
    assert main(["mine", str(sess), "--minsup", "12", "--out", str(pats), "--maximal-out", str(tmp_path / "max.txt")]) == 0
    assert main(["analyze", str(sess), "--patterns", str(pats), "--urls", str(sess) + ".urls.tsv", "--rules", str(rules)]) == 0
    assert rules.read_text().splitlines()[0].endswith("antecedent_url,consequent_url")
    assert main(["simulate", str(sess), "--rules", str(rules), "--out", str(tmp_path / "m.csv")]) == 0
    header, row = (tmp_path / "m.csv").read_text().splitlines()
    assert header.startswith("requests,hits")


def test_bench_synthetic(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--sizes", "50,100", "--minsups", "0.1,0.2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "data_size,minsup,runtime_ms,pattern_count,max_recursion_depth"
    assert len(lines) == 5


def test_errors_are_stage_tagged(tmp_path, capsys, worked_file):
    assert main(["mine", str(tmp_path / "missing.txt"), "--out", str(tmp_path / "p.txt")]) != 0
    assert "stage 'mine'" in capsys.readouterr().err
    bad = tmp_path / "bad.txt"
    bad.write_text("user\tnot,numbers\n")
    assert main(["pipeline", str(bad), "--format", "sessions", "--out", str(tmp_path / "r")]) != 0
    assert "stage 'load'" in capsys.readouterr().err
    assert main(["simulate", str(worked_file), "--rules", str(tmp_path / "none.csv")]) != 0
    assert "stage 'simulate'" in capsys.readouterr().err


def test_library_pipeline_counts(tmp_path, worked_file):
    result = run_pipeline(PipelineConfig(str(worked_file), "sessions", str(tmp_path / "o"), minsup=2))
    assert (result.counts["patterns"], result.counts["maximal"], result.counts["pairs"]) == (14, 4, 6)


def test_proxy_fixture_ingest(tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["ingest", str(FIXTURES / "proxy_sample.log"), "--format", "proxy", "--out", str(out)]) == 0
    (kept,) = [json.loads(line) for line in out.read_text().splitlines()]
    assert kept["url"] == "http://channel.tvunetworks.com/list/all"
