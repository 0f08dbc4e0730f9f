"""Tail probabilities and quantiles used by the tests and reports."""

from __future__ import annotations

import math

from scipy import special


def chi2_cdf(x: float, df: float) -> float:
    """P(X <= x) for X ~ chi-square(df), via the regularized lower incomplete gamma."""
    if df <= 0:
        raise ValueError("df must be positive")
    if x <= 0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def chi2_sf(x: float, df: float) -> float:
    """Upper tail 1 - chi2_cdf, computed directly so small p-values keep precision."""
    if df <= 0:
        raise ValueError("df must be positive")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def t_two_sided(t: float, df: float) -> float:
    """Two-sided Student-t p-value, ``P(|T| >= |t|)``.

    Uses the identity ``P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)`` with the
    regularized incomplete beta function. For small ``|t|`` the complement
    ``1 - I_{t^2/(df+t^2)}(1/2, df/2)`` avoids cancellation near ``x = 1``.
    """
    if df < 1:
        raise ValueError("df must be >= 1")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    t2 = t * t
    if t2 < df:
        return float(1.0 - special.betainc(0.5, df / 2.0, t2 / (df + t2)))
    return float(special.betainc(df / 2.0, 0.5, df / (df + t2)))


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return float(special.ndtri(p))


def two_sided_z(confidence: float) -> float:
    """Critical value ``z`` with ``P(|Z| <= z) = confidence``."""
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    return normal_quantile(0.5 * (1.0 + confidence))
