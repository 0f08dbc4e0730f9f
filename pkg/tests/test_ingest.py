import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoarima.errors import CsvParseError, InputError, SchemaError, TableValidationError
from holoarima.ingest import (
    EnsembleTable,
    parse_column_map,
    parse_percentiles_csv,
    reference_window,
    series_ages,
    serialize_table,
    to_series,
)

GOOD = b"""ages,global_5,global_median,global_95
200,-0.3,0.1,0.4
100,-0.2,0.2,0.5
0,-0.1,0.3,0.6
"""


def test_three_row_fixture():
    t = parse_percentiles_csv(GOOD)
    assert len(t) == 3
    assert t.ages.tolist() == [200.0, 100.0, 0.0]
    assert t.p5.tolist() == [-0.3, -0.2, -0.1]
    assert t.median.tolist() == [0.1, 0.2, 0.3]
    assert t.p95.tolist() == [0.4, 0.5, 0.6]


def test_series_is_ascending_in_time():
    t = parse_percentiles_csv(GOOD)
    s = to_series(t, "median")
    assert s.values.tolist() == [0.1, 0.2, 0.3]
    assert s.step == 100.0
    assert to_series(t, "p5").values.tolist() == t.p5.tolist()


def test_missing_median_column():
    bad = b"ages,global_5,global_95\n0,1,2\n"
    with pytest.raises(SchemaError) as exc:
        parse_percentiles_csv(bad)
    assert exc.value.column == "global_median"


def test_comments_blank_lines_and_bom():
    text = "﻿# comment\n\n" + GOOD.decode() + "\n# trailing\n"
    t = parse_percentiles_csv(text.encode("utf-8"))
    assert len(t) == 3


def test_stream_input():
    assert len(parse_percentiles_csv(io.StringIO(GOOD.decode()))) == 3


def test_parse_error_has_line_number():
    bad = b"ages,global_5,global_median,global_95\n100,0,x,1\n"
    with pytest.raises(CsvParseError) as exc:
        parse_percentiles_csv(bad)
    assert exc.value.line == 2


def test_percentile_order_violation():
    bad = b"ages,global_5,global_median,global_95\n100,0,2,1\n0,0,0.5,1\n"
    with pytest.raises(TableValidationError) as exc:
        parse_percentiles_csv(bad)
    assert exc.value.line == 2


def test_spacing_violation():
    bad = b"ages,global_5,global_median,global_95\n300,0,0,0\n200,0,0,0\n50,0,0,0\n"
    with pytest.raises(TableValidationError):
        parse_percentiles_csv(bad)


def test_non_monotonic_ages():
    bad = b"ages,global_5,global_median,global_95\n100,0,0,0\n200,0,0,0\n100,0,0,0\n"
    with pytest.raises(TableValidationError):
        parse_percentiles_csv(bad)


def test_missing_file():
    with pytest.raises(InputError):
        parse_percentiles_csv("/nonexistent/file.csv")


def test_column_override():
    text = b"age_bp,lo,mid,hi\n100,0,1,2\n0,0,1,2\n"
    cmap = parse_column_map("age=age_bp,p5=lo,median=mid,p95=hi")
    t = parse_percentiles_csv(text, cmap)
    assert t.median.tolist() == [1.0, 1.0]
    with pytest.raises(InputError):
        parse_column_map("bogus=x")


def test_bundled_fixture(fixture_table):
    assert len(fixture_table) == 121
    assert fixture_table.ages[0] == 12000.0 and fixture_table.ages[-1] == 0.0
    assert len(to_series(fixture_table, "median")) == 121


def test_reference_bin_by_age(fixture_table):
    ref = reference_window(fixture_table)
    assert ref.ages == (200.0,)
    assert series_ages(fixture_table)[ref.start] == 200.0


def test_reference_bin_fallback():
    t = parse_percentiles_csv(b"ages,global_5,global_median,global_95\n1000,0,0,0\n500,0,0,0\n0,0,0,0\n")
    ref = reference_window(t)
    assert ref.ages == (0.0,)
    assert "nearest" in ref.rule


def _tables():
    @st.composite
    def build(draw):
        n = draw(st.integers(1, 30))
        step = draw(st.sampled_from([1.0, 50.0, 100.0]))
        start = draw(st.integers(0, 5)) * step
        ages = start + step * np.arange(n)[::-1]
        vals = draw(st.lists(st.tuples(*[st.floats(-5, 5, allow_nan=False)] * 3), min_size=n, max_size=n))
        srt = np.sort(np.array(vals), axis=1)
        return EnsembleTable(ages=ages.astype(float), p5=srt[:, 0], median=srt[:, 1], p95=srt[:, 2])
    return build()


@settings(max_examples=50, deadline=None)
@given(_tables())
def test_serialize_parse_round_trip(table):
    back = parse_percentiles_csv(serialize_table(table).encode())
    for key in ("ages", "p5", "median", "p95"):
        assert np.array_equal(getattr(back, key), getattr(table, key))


@settings(max_examples=50, deadline=None)
@given(_tables())
def test_to_series_preserves_multiset(table):
    s = to_series(table, "median")
    assert sorted(s.values.tolist()) == sorted(table.median.tolist())
