import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoarima.distributions import chi2_cdf, chi2_sf, normal_quantile, t_two_sided, two_sided_z


def mp_t_two_sided(t, df):
    """Oracle: numerically integrate the Student-t density."""
    df = mpmath.mpf(df)
    c = mpmath.gamma((df + 1) / 2) / (mpmath.sqrt(df * mpmath.pi) * mpmath.gamma(df / 2))
    tail = mpmath.quad(lambda x: c * (1 + x * x / df) ** (-(df + 1) / 2), [abs(t), mpmath.inf])
    return float(2 * tail)


def mp_chi2_cdf(x, k):
    return float(mpmath.gammainc(mpmath.mpf(k) / 2, 0, mpmath.mpf(x) / 2, regularized=True))


def test_chi2_known_quantile():
    assert chi2_cdf(3.841458820694124, 1) == pytest.approx(0.95, abs=1e-12)
    assert chi2_cdf(3.841, 1) == pytest.approx(0.95, abs=1e-4)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 200.0), st.integers(1, 60))
def test_chi2_against_mpmath(x, k):
    assert chi2_cdf(x, k) == pytest.approx(mp_chi2_cdf(x, k), abs=1e-10)
    assert chi2_sf(x, k) == pytest.approx(1 - mp_chi2_cdf(x, k), abs=1e-10)


def test_t_p_values():
    assert t_two_sided(1.489, 118) == pytest.approx(mp_t_two_sided(1.489, 118), abs=1e-10)
    assert t_two_sided(1.489, 118) == pytest.approx(0.139, abs=0.002)
    assert t_two_sided(-2.695, 118) == pytest.approx(0.008, abs=0.001)
    assert t_two_sided(28.799, 118) < 1e-10
    assert t_two_sided(0.0, 118) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.floats(-8, 8), st.integers(1, 300))
def test_t_against_quadrature(t, df):
    assert t_two_sided(t, df) == pytest.approx(mp_t_two_sided(t, df), abs=1e-9)


def test_normal_quantile():
    assert two_sided_z(0.95) == pytest.approx(1.959963984540054, abs=1e-12)
    for p in (1e-8, 0.01, 0.3, 0.5, 0.9, 0.999999):
        assert normal_quantile(p) == pytest.approx(float(mpmath.sqrt(2) * mpmath.erfinv(2 * p - 1)), abs=1e-9)
    assert math.isclose(normal_quantile(0.5), 0.0, abs_tol=1e-15)
