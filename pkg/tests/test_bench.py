from webseqmine.bench import BenchRow, bench, bench_csv
from webseqmine.synthetic import build_database, clickstream_db


def test_rows_per_combination_and_monotone_counts():
    db = clickstream_db(300, seed=4)
    rows = bench(db, [100, 300], [2, 4, 8])
    assert [(r.data_size, r.minsup) for r in rows] == [(s, m) for s in (100, 300) for m in (2, 4, 8)]
    for size in (100, 300):
        counts = [r.pattern_count for r in rows if r.data_size == size]
        assert counts == sorted(counts, reverse=True)
    assert all(r.runtime_ms >= 0 and r.max_recursion_depth >= 0 for r in rows)


def test_empty_db_gives_zero_patterns():
    rows = bench(build_database({}), [0, 10], [1, 2])
    assert all(r.pattern_count == 0 for r in rows)
    assert all(r.data_size == 0 for r in rows)


def test_csv():
    text = bench_csv([BenchRow(10, 2, 1.5, 7, 2)])
    assert text == "data_size,minsup,runtime_ms,pattern_count,max_recursion_depth\n10,2,1.5,7,2\n"
