"""Model identification: correlograms, Ljung-Box statistics, stationarity heuristic.

Conventions follow the usual correlogram software output:

* the sample ACF uses the biased (1/n) autocovariance,
* the ACF standard error at lag k under a white-noise null is
  ``sqrt((n - k) / (n (n + 2)))``,
* the PACF standard error is ``1 / sqrt(n)``,
* ``Q_K = n (n + 2) sum_{k<=K} rho_k^2 / (n - k)`` against chi-square(K - m),
  where ``m`` is the number of fitted ARMA coefficients (0 for raw data).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import chi2_sf
from .errors import DegenerateSeriesError, InputError, InsufficientDataError
from .series import TimeSeries, difference


def _as_array(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=np.float64).reshape(-1)


def default_max_lag(n: int) -> int:
    return max(1, min(20, n // 4))


def acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations ``rho_1 .. rho_max_lag``."""
    y = _as_array(series)
    n = y.size
    if max_lag < 1:
        raise InputError("max_lag must be >= 1")
    if n < max_lag + 2:
        raise InsufficientDataError(f"need at least {max_lag + 2} observations for {max_lag} lags, got {n}")
    if np.ptp(y) == 0.0:
        raise DegenerateSeriesError("series has zero variance")
    dev = y - y.mean()
    denom = float(np.dot(dev, dev))
    return np.array([np.dot(dev[:-k], dev[k:]) / denom for k in range(1, max_lag + 1)])


def durbin_levinson(rho) -> tuple[np.ndarray, np.ndarray, bool]:
    """Durbin-Levinson recursion on autocorrelations ``rho_1 .. rho_K``.

    Returns
    -------
    pacf : ndarray, shape (K,)
        Partial autocorrelations ``phi_kk``.
    phi : ndarray, shape (K,)
        AR(K) coefficients ``phi_K1 .. phi_KK`` from the final step.
    clamped : bool
        True when some ``|phi_kk|`` came out above 1 through rounding and was
        clipped back to +-1.
    """
    rho = np.asarray(rho, dtype=np.float64)
    K = rho.size
    pacf = np.zeros(K)
    phi = np.zeros(0)
    v = 1.0
    clamped = False
    for k in range(1, K + 1):
        if v <= 0.0:
            # Perfectly predictable from lower lags; nothing partial remains.
            phikk = 0.0
        else:
            phikk = (rho[k - 1] - np.dot(phi, rho[: k - 1][::-1])) / v
        if abs(phikk) > 1.0:
            phikk = math.copysign(1.0, phikk)
            clamped = True
        phi = np.r_[phi - phikk * phi[::-1], phikk]
        v *= 1.0 - phikk * phikk
        pacf[k - 1] = phikk
    return pacf, phi, clamped


def pacf(series, max_lag: int) -> np.ndarray:
    """Partial autocorrelations ``phi_11 .. phi_KK`` from the sample ACF."""
    return durbin_levinson(acf(series, max_lag))[0]


def white_noise_se(n: int, k: int) -> float:
    """Standard error of ``rho_k`` when the series is white noise."""
    if not 1 <= k < n:
        raise InputError(f"lag {k} must satisfy 1 <= k < n = {n}")
    return math.sqrt((n - k) / (n * (n + 2.0)))


@dataclass(frozen=True)
class LjungBoxRow:
    lag: int
    q_stat: float
    df: int
    p_value: float


def ljung_box(acf_values, n: int, max_lag: int | None = None, fitted_params: int = 0) -> list[LjungBoxRow]:
    """Cumulative Ljung-Box statistics for lags ``1 .. max_lag``.

    ``df = k - fitted_params``; rows where that is below 1 carry ``p_value = nan``.
    """
    rho = np.asarray(acf_values, dtype=np.float64)
    K = rho.size if max_lag is None else int(max_lag)
    if K > rho.size:
        raise InputError(f"only {rho.size} autocorrelations supplied, {K} lags requested")
    if K >= n:
        raise InputError(f"max lag {K} must be below n = {n}")
    rows = []
    q = 0.0
    for k in range(1, K + 1):
        q += rho[k - 1] ** 2 / (n - k)
        stat = n * (n + 2.0) * q
        df = k - fitted_params
        p = chi2_sf(stat, df) if df >= 1 else math.nan
        rows.append(LjungBoxRow(lag=k, q_stat=stat, df=df, p_value=p))
    return rows


@dataclass(frozen=True)
class CorrelogramRow:
    lag: int
    acf: float
    pacf: float
    se_white_noise: float
    pacf_se: float
    q_stat: float
    df: int
    p_value: float


CSV_HEADER = (
    "Lag",
    "Autocorrelation",
    "Standard Error",
    "Box-Ljung Value",
    "df",
    "Sig.",
    "Partial Autocorrelation",
    "Partial Standard Error",
)


@dataclass(frozen=True)
class CorrelogramReport:
    """ACF/PACF table with Ljung-Box columns, one row per lag."""

    n: int
    rows: tuple[CorrelogramRow, ...]
    pacf_clamped: bool = False
    fitted_params: int = 0
    series_name: str = ""

    @property
    def lags(self) -> np.ndarray:
        return np.array([r.lag for r in self.rows])

    @property
    def acf(self) -> np.ndarray:
        return np.array([r.acf for r in self.rows])

    @property
    def pacf(self) -> np.ndarray:
        return np.array([r.pacf for r in self.rows])

    @property
    def se(self) -> np.ndarray:
        return np.array([r.se_white_noise for r in self.rows])

    def row(self, lag: int) -> CorrelogramRow:
        return self.rows[lag - 1]

    def to_dict(self) -> dict:
        return {
            "series": self.series_name,
            "n": self.n,
            "fitted_params": self.fitted_params,
            "pacf_clamped": self.pacf_clamped,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.lag, _fmt(r.acf), _fmt(r.se_white_noise), _fmt(r.q_stat), r.df,
                        _fmt(r.p_value), _fmt(r.pacf), _fmt(r.pacf_se)])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def correlogram(series, max_lag: int | None = None, fitted_params: int = 0, name: str = "") -> CorrelogramReport:
    """Full identification table for ``series``."""
    y = _as_array(series)
    n = y.size
    K = default_max_lag(n) if max_lag is None else int(max_lag)
    rho = acf(y, K)
    phikk, _, clamped = durbin_levinson(rho)
    lb = ljung_box(rho, n, K, fitted_params=fitted_params)
    pse = 1.0 / math.sqrt(n)
    rows = tuple(
        CorrelogramRow(
            lag=k,
            acf=float(rho[k - 1]),
            pacf=float(phikk[k - 1]),
            se_white_noise=white_noise_se(n, k),
            pacf_se=pse,
            q_stat=lb[k - 1].q_stat,
            df=lb[k - 1].df,
            p_value=lb[k - 1].p_value,
        )
        for k in range(1, K + 1)
    )
    return CorrelogramReport(n=n, rows=rows, pacf_clamped=clamped, fitted_params=fitted_params, series_name=name)


# -- stationarity -----------------------------------------------------------

DECAY_RULE = (
    "heuristic: non-stationary if rho_5 > 0.5, or if |rho_k| stays outside "
    "+-band*SE_k for every lag k up to max(10, K/2)"
)


def acf_decays(report: CorrelogramReport, band: float = 1.96) -> bool:
    """The decay test of :data:`DECAY_RULE`; True means "looks stationary"."""
    rho, se = report.acf, report.se
    K = rho.size
    if K >= 5 and rho[4] > 0.5:
        return False
    horizon = min(K, max(10, K // 2))
    outside = np.abs(rho[:horizon]) > band * se[:horizon]
    return not bool(np.all(outside))


@dataclass(frozen=True)
class StationarityAssessment:
    stationary: bool
    suggested_d: int
    dominant_lag: int | None
    band: float
    verdict_by_d: dict = field(default_factory=dict)
    rule: str = DECAY_RULE

    def to_dict(self) -> dict:
        out = asdict(self)
        out["verdict_by_d"] = {str(k): v for k, v in self.verdict_by_d.items()}
        return out


def dominant_lag(report: CorrelogramReport, band: float = 1.96) -> int | None:
    """Lag with the largest ``|rho_k| / SE_k`` among lags outside the band."""
    ratio = np.abs(report.acf) / report.se
    outside = ratio > band
    if not np.any(outside):
        return None
    masked = np.where(outside, ratio, -np.inf)
    return int(report.lags[int(np.argmax(masked))])


def assess_stationarity(series, band: float = 1.96, max_lag: int | None = None, d_max: int = 2) -> StationarityAssessment:
    """Apply the decay heuristic to ``series`` and to its differences up to ``d_max``.

    ``suggested_d`` is the smallest order whose differenced series passes; if
    none does, it is ``d_max``.
    """
    ts = series if isinstance(series, TimeSeries) else TimeSeries(series)
    base = correlogram(ts, max_lag)
    verdicts = {}
    suggested = None
    for d in range(d_max + 1):
        if d == 0:
            ok = acf_decays(base, band)
        else:
            if len(ts) - d < 4:
                break
            diffed = difference(ts, d).values
            try:
                ok = acf_decays(correlogram(diffed, None if max_lag is None else min(max_lag, default_max_lag(diffed.size))), band)
            except DegenerateSeriesError:
                ok = True  # a constant is trivially stationary
        verdicts[d] = ok
        if ok and suggested is None:
            suggested = d
            break
    return StationarityAssessment(
        stationary=verdicts[0],
        suggested_d=d_max if suggested is None else suggested,
        dominant_lag=dominant_lag(base, band),
        band=band,
        verdict_by_d=verdicts,
    )
