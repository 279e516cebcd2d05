from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from webseqmine.errors import MalformedLine, UnsupportedFormat
from webseqmine.log_ingest import (
    LogCleaner,
    LogFormat,
    LogRecord,
    clean,
    is_page_request,
    iter_records,
    load_denylist,
    parse_line,
    read_log,
    render_line,
)

FIXTURES = Path(__file__).parent / "fixtures"

LINE1 = (
    "web-proxy, debug, packet 1307775248.816 363 30.0.1.2 TCP_MISS/200 960 GET "
    "http://www.facebook.com/ajax/typeahead/search.php? - DIRECT/66.220.146.32 "
    "application/x-javascript in 11-Jun 12:25:6.76 from 30.0.7.254"
)
LINE2 = (
    "web-proxy, debug, packet 1307775249.609 586 30.0.0.223 TCP_MISS/200 397 POST "
    "http://channel.tvunetworks.com/list/all - DIRECT/38.103.62.170 text/html in 11-Jun "
    "12:25:7.69 from 30.0.7.254"
)

REC1 = LogRecord(
    client_ip="30.0.1.2",
    timestamp=1307775248.816,
    method="GET",
    url="http://www.facebook.com/ajax/typeahead/search.php?",
    status=200,
    bytes=960,
    content_type="application/x-javascript",
    referrer_ip="30.0.7.254",
)
REC2 = LogRecord(
    client_ip="30.0.0.223",
    timestamp=1307775249.609,
    method="POST",
    url="http://channel.tvunetworks.com/list/all",
    status=200,
    bytes=397,
    content_type="text/html",
    referrer_ip="30.0.7.254",
)


def test_proxy_lines_parse_exactly():
    assert parse_line(LINE1, "proxy") == REC1
    assert parse_line(LINE2, LogFormat.PROXY) == REC2


def test_wrapped_proxy_file():
    stats = {}
    records = read_log(FIXTURES / "proxy_sample.log", "proxy", stats)
    assert records == [REC1, REC2]
    assert stats == {"parsed": 2, "malformed": 0}


def test_clean_drops_script_keeps_page():
    assert clean([REC1, REC2]) == [REC2]
    assert not is_page_request(REC1) and is_page_request(REC2)
    assert clean([]) == []


@pytest.mark.parametrize("line", ["", "   ", "web-proxy, debug, packet nonsense"])
def test_malformed(line):
    with pytest.raises(MalformedLine):
        parse_line(line, "proxy")


@pytest.mark.parametrize("fmt", ["sessions", "msnbc"])
def test_non_line_formats_rejected(fmt):
    with pytest.raises(UnsupportedFormat):
        parse_line(LINE1, fmt)


def test_clf_fixture_counts_malformed():
    stats = {}
    records = read_log(FIXTURES / "clf_sample.log", "clf", stats)
    assert stats == {"parsed": 4, "malformed": 1}
    first = records[0]
    assert first.client_ip == "192.168.1.20"
    assert first.url == "http://www.example.org/index.html"
    assert first.timestamp == 1318254936.0
    assert (first.method, first.status, first.bytes) == ("GET", 200, 2326)
    assert records[-1].bytes == 0
    kept = clean(records)
    assert [r.url.rsplit("/", 1)[1] for r in kept] == ["index.html", "products", "add.php"]


def test_eclf_fixture_referrer():
    records = read_log(FIXTURES / "eclf_sample.log", "eclf")
    assert [r.referrer_ip for r in records] == ["10.1.1.254"] * 3
    assert [r.url.rsplit("/", 1)[1] for r in clean(records)] == ["story.jsp", ""]


@pytest.mark.parametrize("name,fmt", [("clf_sample.log", "clf"), ("eclf_sample.log", "eclf"), ("proxy_sample.log", "proxy")])
def test_fixture_round_trip(name, fmt):
    for rec in read_log(FIXTURES / name, fmt):
        assert parse_line(render_line(rec, fmt), fmt) == rec


def test_clf_line_round_trip_semantic():
    line = "192.168.1.20  http://www.example.org [10/Oct/2011:13:55:36 +0000]  GET /index.html HTTP/1.0 200 2326"
    rendered = render_line(parse_line(line, "clf"), "clf")
    assert rendered == " ".join(line.split())


def test_denylist(tmp_path):
    path = tmp_path / "deny.txt"
    path.write_text("# crawlers\n30.0.0.223  # bot\n\n")
    assert load_denylist(path) == {"30.0.0.223"}
    assert clean([REC2], load_denylist(path)) == []
    assert LogCleaner(denylist=["30.0.0.223"]).fit_transform([REC2]) == []


def test_record_validation():
    with pytest.raises(ValueError):
        LogRecord("not-an-ip", 0.0, "GET", "http://x/", 200, 1)


ips = st.sampled_from(["10.0.0.1", "10.0.0.2", "192.168.0.9"])
urls = st.sampled_from([
    "http://h/a.html", "http://h/b.php", "http://h/c", "http://h/d.js", "http://h/e.css", "http://h/f.png", "http://h/g.JSP",
])
ctypes = st.sampled_from(["", "text/html", "text/plain", "application/javascript", "image/png"])
records = st.builds(
    LogRecord,
    client_ip=ips,
    timestamp=st.integers(0, 50).map(float),
    method=st.sampled_from(["GET", "POST"]),
    url=urls,
    status=st.just(200),
    bytes=st.integers(0, 1000),
    content_type=ctypes,
)


@settings(max_examples=200, deadline=None)
@given(st.lists(records, max_size=30))
def test_clean_properties(rs):
    once = clean(rs)
    assert clean(once) == once
    keys = [(r.client_ip, r.timestamp) for r in once]
    assert keys == sorted(keys)
    assert all(is_page_request(r) for r in once)
    assert len({(r.client_ip, r.timestamp, r.url) for r in once}) == len(once)
    assert {(r.client_ip, r.timestamp, r.url) for r in once} == {
        (r.client_ip, r.timestamp, r.url) for r in rs if is_page_request(r)
    }


@settings(max_examples=200, deadline=None)
@given(records, st.sampled_from(["clf", "eclf", "proxy"]))
def test_render_parse_round_trip(rec, fmt):
    back = parse_line(render_line(rec, fmt), fmt)
    assert (back.client_ip, back.timestamp, back.method, back.url, back.status, back.bytes) == (
        rec.client_ip, rec.timestamp, rec.method, rec.url, rec.status, rec.bytes,
    )


def test_iter_records_without_stats():
    assert list(iter_records(["garbage"], "clf")) == []
