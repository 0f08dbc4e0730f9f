import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import toeplitz

from holoarima.errors import DegenerateSeriesError
from holoarima.identification import (
    acf,
    assess_stationarity,
    correlogram,
    default_max_lag,
    durbin_levinson,
    ljung_box,
    pacf,
    white_noise_se,
)
from holoarima.simulate import SimSpec, simulate_arma, white_noise


def direct_acf(y, K):
    y = np.asarray(y, float)
    n = y.size
    d = y - y.mean()
    c0 = sum(v * v for v in d) / n
    return np.array([sum(d[t] * d[t + k] for t in range(n - k)) / n / c0 for k in range(1, K + 1)])


def yule_walker_pacf(rho):
    """phi_kk from solving each k x k Yule-Walker system directly."""
    r = np.r_[1.0, rho]
    out = []
    for k in range(1, rho.size + 1):
        R = toeplitz(r[:k])
        out.append(np.linalg.solve(R, r[1:k + 1])[-1])
    return np.array(out)


def test_alternating_series():
    rho = acf([1, -1] * 4, 1)
    assert rho[0] == pytest.approx(-0.875, abs=1e-15)
    assert rho[0] == pytest.approx(direct_acf([1, -1] * 4, 1)[0], abs=1e-15)


def test_constant_series_errors():
    with pytest.raises(DegenerateSeriesError):
        acf([2.0] * 10, 3)


def test_acf_matches_direct_summation():
    y = white_noise(300, seed=3).values
    assert np.max(np.abs(acf(y, 20) - direct_acf(y, 20))) < 1e-12


def test_white_noise_se_values():
    assert white_noise_se(121, 1) == pytest.approx(0.0898, abs=5e-5)
    assert white_noise_se(121, 2) == pytest.approx(0.0894, abs=5e-5)
    assert white_noise_se(121, 16) == pytest.approx(0.0840, abs=5e-5)


def test_default_max_lag():
    assert default_max_lag(121) == 20
    assert default_max_lag(40) == 10


def test_phi11_equals_rho1():
    y = simulate_arma(SimSpec(ar=(0.6,), n=400, seed=11)).values
    rho = acf(y, 5)
    assert pacf(y, 5)[0] == rho[0]


def test_ar1_pacf_cuts_off():
    y = simulate_arma(SimSpec(ar=(0.8,), n=5000, seed=5)).values
    ph = pacf(y, 2)
    assert abs(ph[1]) <= 2 / math.sqrt(5000)


def test_ma1_pacf_alternates_and_decays():
    y = simulate_arma(SimSpec(ma=(0.6,), n=20_000, seed=9)).values
    ph = pacf(y, 4)
    signs = np.sign(ph)
    assert signs.tolist() == [1.0, -1.0, 1.0, -1.0]
    assert np.all(np.diff(np.abs(ph)) < 0)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(30, 300), elements=st.floats(-100, 100, allow_nan=False)))
def test_durbin_levinson_matches_yule_walker(y):
    if np.ptp(y) < 1e-6:
        return
    rho = acf(y, 20)
    phikk, _, clamped = durbin_levinson(rho)
    if clamped:
        return
    assert np.max(np.abs(phikk - yule_walker_pacf(rho))) <= 1e-8
    assert np.all(np.abs(rho) <= 1 + 1e-12)
    assert np.all(np.abs(phikk) <= 1 + 1e-12)


def test_ljung_box_zero_correlations():
    rows = ljung_box(np.zeros(5), 100)
    assert rows[0].q_stat == 0.0 and rows[0].p_value == 1.0


def test_ljung_box_df_and_formula():
    y = white_noise(200, seed=1).values
    rho = acf(y, 10)
    rows = ljung_box(rho, 200)
    n = 200
    q = n * (n + 2) * sum(rho[k] ** 2 / (n - k - 1) for k in range(10))
    assert rows[-1].q_stat == pytest.approx(q, rel=1e-12)
    assert [r.df for r in rows] == list(range(1, 11))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(10, 200), elements=st.floats(-10, 10, allow_nan=False)))
def test_ljung_box_monotone(y):
    if np.ptp(y) < 1e-6:
        return
    rows = ljung_box(acf(y, 8), y.size)
    q = [r.q_stat for r in rows]
    assert all(b >= a for a, b in zip(q, q[1:]))


def test_white_noise_band_coverage():
    inside = total = 0
    for seed in range(20):
        rep = correlogram(white_noise(1000, seed=seed).values, 20)
        inside += int(np.sum(np.abs(rep.acf) <= 1.96 * rep.se))
        total += 20
    assert inside / total >= 0.93


def test_ljung_box_rejection_rate_on_white_noise():
    hits = sum(
        ljung_box(acf(white_noise(200, seed=s).values, 10), 200)[-1].p_value < 0.05 for s in range(200)
    )
    assert 2 <= hits <= 25


def test_stationarity_white_noise():
    a = assess_stationarity(white_noise(300, seed=2))
    assert a.stationary and a.suggested_d == 0


def test_stationarity_random_walk():
    walk = np.cumsum(white_noise(300, seed=4).values)
    a = assess_stationarity(walk)
    assert not a.stationary and a.suggested_d == 1
    assert a.dominant_lag == 1


def test_correlogram_report_shape(fixture_table):
    from holoarima.ingest import to_series
    rep = correlogram(to_series(fixture_table, "median"))
    assert rep.n == 121 and len(rep.rows) == 20
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("Lag,Autocorrelation,Standard Error,Box-Ljung Value,df,Sig.")
    assert len(lines) == 21
