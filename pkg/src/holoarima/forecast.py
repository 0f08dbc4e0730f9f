"""Forecasts, forecast-error variances and in-sample fitted values."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .distributions import two_sided_z
from .errors import InputError
from .estimation import ArimaFit, is_stationary


def arma_psi(ar, ma, count: int, d: int = 0) -> np.ndarray:
    """MA(infinity) weights ``psi_0 .. psi_{count-1}`` of ``ma(B) / (ar(B) (1 - B)^d)``.

    MA enters with a plus sign: ``ma(B) = 1 + ma_1 B + ...``.
    """
    ar = np.asarray(ar, dtype=np.float64)
    ma = np.asarray(ma, dtype=np.float64)
    # AR side including differencing: 1 - sum phi*_i B^i = (1 - sum ar_i B^i)(1 - B)^d
    poly = np.r_[1.0, -ar]
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    phi = -poly[1:]
    psi = np.zeros(count)
    for j in range(count):
        val = 1.0 if j == 0 else (ma[j - 1] if j <= ma.size else 0.0)
        for i in range(1, min(j, phi.size) + 1):
            val += phi[i - 1] * psi[j - i]
        psi[j] = val
    return psi


def psi_weights(fit: ArimaFit, count: int, include_differencing: bool = True) -> np.ndarray:
    return arma_psi(fit.ar, fit.ma, count, fit.spec.d if include_differencing else 0)


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    points: np.ndarray
    lcl: np.ndarray
    ucl: np.ndarray
    variances: np.ndarray
    confidence: float
    psi_weights: np.ndarray
    step_years: float = 1.0
    reliable: bool = True

    @property
    def half_width(self) -> np.ndarray:
        return two_sided_z(self.confidence) * np.sqrt(self.variances)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "year_offset", "point", "lcl", "ucl"])
        for h in range(self.horizon):
            w.writerow([h + 1, repr(float((h + 1) * self.step_years)), repr(float(self.points[h])),
                        repr(float(self.lcl[h])), repr(float(self.ucl[h]))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "confidence": self.confidence,
            "step_years": self.step_years,
            "points": [float(v) for v in self.points],
            "lcl": [float(v) for v in self.lcl],
            "ucl": [float(v) for v in self.ucl],
            "variances": [float(v) for v in self.variances],
            "psi_weights": [float(v) for v in self.psi_weights],
            "reliable": self.reliable,
        }


def _forecast_differenced(fit: ArimaFit, horizon: int) -> np.ndarray:
    w = fit.differenced
    u = fit.residuals
    mu = fit.mean if fit.mean is not None else 0.0
    p, q = fit.spec.p, fit.spec.q
    n = w.size
    dev = np.r_[w - mu, np.zeros(horizon)]
    shocks = np.r_[u, np.zeros(horizon)]  # future innovations have mean zero
    for h in range(horizon):
        t = n + h
        val = 0.0
        for i in range(1, p + 1):
            if t - i >= 0:
                val += fit.ar[i - 1] * dev[t - i]
        for j in range(1, q + 1):
            if t - j >= 0:
                val += fit.ma[j - 1] * shocks[t - j]
        dev[t] = val
    return mu + dev[n:]


def integrate_forecast(history, future_diffs, d: int) -> np.ndarray:
    """Undo ``d`` differences of ``future_diffs`` given the observed ``history``."""
    history = np.asarray(history, dtype=np.float64)
    levels = [history]
    for _ in range(d - 1):
        levels.append(np.diff(levels[-1]))
    out = np.asarray(future_diffs, dtype=np.float64)
    for k in reversed(range(d)):
        out = levels[k][-1] + np.cumsum(out)
    return out


def forecast(fit: ArimaFit, horizon: int = 1, confidence: float = 0.95) -> ForecastResult:
    """Point forecasts with normal limits ``point +- z sqrt(sigma2 * sum psi_j^2)``.

    Parameter uncertainty is not included in the limits.
    """
    if horizon < 1:
        raise InputError("horizon must be >= 1")
    z = two_sided_z(confidence)
    pts = _forecast_differenced(fit, horizon)
    if fit.spec.d:
        pts = integrate_forecast(fit.series.values, pts, fit.spec.d)
    psi = psi_weights(fit, horizon)
    var = fit.sigma2 * np.cumsum(psi ** 2)
    hw = z * np.sqrt(var)
    return ForecastResult(
        horizon=horizon,
        points=pts,
        lcl=pts - hw,
        ucl=pts + hw,
        variances=var,
        confidence=confidence,
        psi_weights=psi,
        step_years=fit.series.step,
        reliable=is_stationary(fit.ar) and bool(np.all(np.isfinite(psi))),
    )


@dataclass(frozen=True)
class FittedValues:
    index: np.ndarray
    observed: np.ndarray
    fitted: np.ndarray
    lcl: np.ndarray
    ucl: np.ndarray
    confidence: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "observed", "fitted", "lcl", "ucl"])
        for row in zip(self.index, self.observed, self.fitted, self.lcl, self.ucl):
            w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])
        return buf.getvalue()


def fitted_values(fit: ArimaFit, confidence: float = 0.95) -> FittedValues:
    """One-step in-sample predictions on the original scale: observation minus residual.

    With ``d > 0`` the first ``d`` observations have no prediction and are omitted.
    """
    d = fit.spec.d
    obs = fit.series.values[d:]
    fitted = obs - fit.residuals
    hw = two_sided_z(confidence) * math.sqrt(fit.sigma2)
    return FittedValues(
        index=np.arange(d, d + obs.size),
        observed=obs,
        fitted=fitted,
        lcl=fitted - hw,
        ucl=fitted + hw,
        confidence=confidence,
    )
