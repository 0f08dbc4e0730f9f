import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holoarima.errors import InputError, OrderTooLargeError
from holoarima.series import (
    DifferencedSeries,
    TimeSeries,
    difference,
    integrate,
    median,
    rebase_anomaly,
    summary,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def test_constant_series_differences_to_zero():
    assert difference(TimeSeries([5, 5, 5]), 1).values.tolist() == [0.0, 0.0]


def test_difference_forced_arithmetic():
    s = TimeSeries([1, 3, 6, 10])
    assert difference(s, 1).values.tolist() == [2.0, 3.0, 4.0]
    assert difference(s, 2).values.tolist() == [1.0, 1.0]


def test_difference_d0_is_identity():
    s = TimeSeries([0.1, -2.0, 7.5])
    assert np.array_equal(difference(s, 0).values, s.values)
    assert np.array_equal(integrate(difference(s, 0)).values, s.values)


def test_integrate_round_trip_small():
    s = TimeSeries([1, 3, 6, 10])
    assert integrate(difference(s, 1)).values.tolist() == [1.0, 3.0, 6.0, 10.0]


def test_integrate_from_initials():
    d = DifferencedSeries(values=[2, 3, 4], d=1, initials=[1])
    assert integrate(d).values.tolist() == [1.0, 3.0, 6.0, 10.0]


def test_order_too_large():
    with pytest.raises(OrderTooLargeError):
        difference(TimeSeries([1.0, 2.0]), 2)


def test_timeseries_rejects_bad_input():
    with pytest.raises(InputError):
        TimeSeries([])
    with pytest.raises(InputError):
        TimeSeries([1.0, float("nan")])
    with pytest.raises(InputError):
        TimeSeries([1.0], step=0)


def test_rebase_forced_arithmetic():
    out = rebase_anomaly(TimeSeries([1, 2, 3]), (0, 2))
    assert out.values.tolist() == [-0.5, 0.5, 1.5]


def test_rebase_whole_window_mean_zero():
    s = TimeSeries(np.arange(10.0) ** 2)
    assert abs(rebase_anomaly(s, (0, 10)).values.mean()) < 1e-12


def test_summary_examples():
    st_ = summary(TimeSeries([1, 2, 3]))
    assert st_["mean"] == 2.0 and st_["median"] == 2.0
    single = summary(TimeSeries([4.25]))
    assert single["mean"] == single["median"] == 4.25
    assert all(v == 4.25 for v in single["percentiles"].values())
    assert single["variance"] == 0.0


def test_median_of_six_estimates():
    vals = [0.932, -0.266, 0.999, -0.700, 0.996, -0.382]
    # oracle: midpoint of the 3rd and 4th order statistics, by hand
    assert median(vals) == pytest.approx((-0.266 + 0.932) / 2, abs=1e-15)
    assert round(median(vals), 3) == 0.333


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(4, 10_000), elements=finite), st.integers(0, 3))
def test_round_trip_exact(values, d):
    s = TimeSeries(values)
    back = integrate(difference(s, d)).values
    assert np.max(np.abs(back - s.values)) <= 1e-12


def test_round_trip_long_random():
    rng = np.random.default_rng(7)
    s = TimeSeries(np.cumsum(rng.normal(size=10_000)) * 1e3)
    for d in range(4):
        assert np.array_equal(integrate(difference(s, d)).values, s.values)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(2, 200), elements=finite), st.data())
def test_rebase_idempotent(values, data):
    n = values.size
    start = data.draw(st.integers(0, n - 1))
    stop = data.draw(st.integers(start + 1, n))
    s = TimeSeries(values)
    once = rebase_anomaly(s, (start, stop))
    twice = rebase_anomaly(once, (start, stop))
    assert np.max(np.abs(twice.values - once.values)) <= 1e-12 * max(1.0, np.max(np.abs(values)))


@given(st.lists(finite, min_size=2, max_size=40).filter(lambda v: len(v) % 2 == 0))
def test_even_median_is_midpoint(values):
    srt = sorted(values)
    k = len(srt) // 2
    assert median(values) == pytest.approx((srt[k - 1] + srt[k]) / 2, rel=1e-12, abs=1e-9)
