"""Repository loading, sampling determinism, and column statistics."""

import math
import random

import pytest

from qjoin.corpus import (
    Column,
    LoadOptions,
    column_stats,
    load_repository,
    sample_column,
    stable_seed,
)

from conftest import FIXTURES


def _write(path, text):
    path.write_text(text, encoding="utf-8")


def test_load_two_wellformed_csvs(tmp_path):
    _write(tmp_path / "one.csv", "a,b\n1,x\n2,y\n")
    _write(tmp_path / "two.csv", "c\nfoo\nbar\nbaz\n")
    repo = load_repository(tmp_path)
    assert set(repo.tables) == {"one", "two"}
    assert repo.tables["one"].row_count == 2
    assert repo.tables["two"].column("c").values == ["foo", "bar", "baz"]


def test_ragged_rows_padded_with_warning(tmp_path, caplog):
    _write(tmp_path / "ragged.csv", "a,b,c\n1,2\n4,5,6\n")
    with caplog.at_level("WARNING"):
        repo = load_repository(tmp_path)
    assert repo.tables["ragged"].column("c").values == ["", "6"]
    assert any("padding" in r.message for r in caplog.records)


def test_nyc_fixture_shape():
    repo = load_repository(FIXTURES / "nyc_names")
    repo.tables.pop("ground_truth")
    assert len(repo.tables) == 2
    exp = repo.tables["campaign_expenditures"]
    assert exp.column_names == ["CANDLAST", "CANDFIRST", "CANDMI"]
    assert exp.row_count == 7
    pay = repo.tables["funds_payments"]
    assert pay.row_count == 7
    assert pay.column("CANDNAME").values[0] == "de Blasio, Bill"


def test_unreadable_file_skipped(tmp_path, caplog):
    _write(tmp_path / "good.csv", "a\n1\n")
    bad = tmp_path / "bad.csv"
    bad.write_bytes(b"\xff\xfe\x00ugly not utf8 \xba\xad")
    with caplog.at_level("WARNING"):
        repo = load_repository(tmp_path)
    assert set(repo.tables) == {"good"}


def test_empty_repository_is_hard_error(tmp_path):
    with pytest.raises(ValueError):
        load_repository(tmp_path)
    with pytest.raises(FileNotFoundError):
        load_repository(tmp_path / "nope")


def test_numeric_detection(tmp_path):
    _write(tmp_path / "t.csv", "num,mixed,text\n1,1,x\n2.5,y,z\n-3,3,w\n")
    repo = load_repository(tmp_path)
    t = repo.tables["t"]
    assert t.column("num").is_numeric
    assert not t.column("mixed").is_numeric  # 2/3 below the 0.95 default
    assert not t.column("text").is_numeric


def test_max_rows_and_delimiter_options(tmp_path):
    _write(tmp_path / "t.csv", "a;b\n1;2\n3;4\n5;6\n")
    repo = load_repository(tmp_path, LoadOptions(delimiter=";", max_rows=2))
    assert repo.tables["t"].column("a").values == ["1", "3"]


def test_duplicate_headers_renamed(tmp_path, caplog):
    _write(tmp_path / "t.csv", "a,a\n1,2\n")
    with caplog.at_level("WARNING"):
        repo = load_repository(tmp_path)
    assert repo.tables["t"].column_names == ["a", "a.1"]


def _col(values, name="c", table="t"):
    return Column(table, name, list(values))


def test_sample_full_proportion_returns_all_nonempty():
    col = _col(["x1", "x2", "", "x3", "x4", "x5", "x6", "x7"])
    s = sample_column(col, 1.0, seed=5)
    assert list(s.values) == ["x1", "x2", "x3", "x4", "x5", "x6", "x7"]
    assert list(s.indices) == [0, 1, 3, 4, 5, 6, 7]


def test_sample_deterministic():
    col = _col([f"v{i}" for i in range(200)])
    a = sample_column(col, 0.5, seed=11)
    b = sample_column(col, 0.5, seed=11)
    assert a == b
    c = sample_column(col, 0.5, seed=12)
    assert a.values != c.values


def test_sample_size_and_membership():
    col = _col([f"v{i}" for i in range(100)])
    s = sample_column(col, 0.5, seed=3)
    assert len(s.values) == 50
    assert set(s.values) <= set(col.values)


def test_sample_membership_property_random_columns():
    rng = random.Random(8)
    for trial in range(50):
        values = [
            rng.choice(["", f"a{rng.randrange(30)}", f"b{rng.randrange(30)}"])
            for _ in range(rng.randrange(1, 60))
        ]
        col = _col(values)
        p = rng.choice([0.1, 0.3, 0.7, 1.0])
        s = sample_column(col, p, seed=trial)
        assert set(s.values) <= {v for v in values if v}
        for idx, val in zip(s.indices, s.values):
            assert values[idx] == val


def test_sample_floor_lifts_tiny_proportions():
    col = _col([f"v{i}" for i in range(50)])
    s = sample_column(col, 0.01, seed=1)
    assert len(s.values) == 20  # min(20, rows) floor


def test_sample_all_empty_column():
    s = sample_column(_col(["", "", ""]), 0.5, seed=0)
    assert s.values == ()


def test_sample_rejects_bad_proportion():
    with pytest.raises(ValueError):
        sample_column(_col(["a"]), 0.0, seed=0)
    with pytest.raises(ValueError):
        sample_column(_col(["a"]), 1.5, seed=0)


def test_stats_hand_counted():
    st = column_stats(_col(["a", "a", "a"]))
    assert st.distinct_ratio == pytest.approx(1 / 3)
    assert st.avg_len == 1.0
    assert st.token_entropy == 0.0
    assert st.null_ratio == 0.0


def test_stats_all_distinct():
    st = column_stats(_col(["a", "b", "c"]))
    assert st.distinct_ratio == 1.0
    assert st.token_entropy == pytest.approx(math.log2(3))


def test_stats_empty_column():
    st = column_stats(_col([]))
    assert (st.avg_len, st.distinct_ratio, st.token_entropy, st.null_ratio) == (0, 0, 0, 0)
    st2 = column_stats(_col(["", ""]))
    assert st2.null_ratio == 1.0
    assert st2.avg_len == 0.0


def test_stats_ranges_random():
    rng = random.Random(77)
    for _ in range(50):
        values = [rng.choice(["", "a b", "c", "dd ee ff"]) for _ in range(rng.randrange(1, 40))]
        st = column_stats(_col(values))
        assert 0.0 <= st.distinct_ratio <= 1.0
        assert 0.0 <= st.null_ratio <= 1.0
        assert st.token_entropy >= 0.0


def test_stable_seed_is_stable():
    assert stable_seed(1, "x", "y") == stable_seed(1, "x", "y")
    assert stable_seed(1, "x", "y") != stable_seed(2, "x", "y")
    assert stable_seed(1, "x", "y") != stable_seed(1, "y", "x")


def test_load_is_deterministic():
    first = load_repository(FIXTURES / "nyc_names")
    second = load_repository(FIXTURES / "nyc_names")
    assert set(first.tables) == set(second.tables)
    for table_id, table in first.tables.items():
        other = second.tables[table_id]
        assert [(c.name, c.values, c.is_numeric) for c in table.columns] == [
            (c.name, c.values, c.is_numeric) for c in other.columns
        ]
    a = sample_column(first.tables["funds_payments"].column("CANDNAME"), 0.5, seed=4)
    b = sample_column(second.tables["funds_payments"].column("CANDNAME"), 0.5, seed=4)
    assert a == b
