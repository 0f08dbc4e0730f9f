"""Residual checks and (p, d, q) grid search."""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import HoloArimaError, InputError, InsufficientDataError
from .estimation import ArimaFit, ArimaSpec, FitOptions, MAX_ORDER
from .estimation import fit as fit_arima
from .estimation import information_criteria as _ic
from .identification import CorrelogramReport, correlogram, default_max_lag
from .series import TimeSeries

CHECK_LAGS = (6, 12, 18)
P_THRESHOLD = 0.05


@dataclass(frozen=True)
class DiagnosticReport:
    residual_correlogram: CorrelogramReport
    white_noise_pass: bool
    lb_p_at: dict
    aic: float
    bic: float
    residual_mean: float
    mean_bound: float
    threshold: float = P_THRESHOLD
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "white_noise_pass": self.white_noise_pass,
            "threshold": self.threshold,
            "ljung_box_p": {str(k): (None if math.isnan(v) else v) for k, v in self.lb_p_at.items()},
            "residual_mean": self.residual_mean,
            "residual_mean_bound": self.mean_bound,
            "aic": self.aic,
            "bic": self.bic,
            "notes": list(self.notes),
            "residual_correlogram": self.residual_correlogram.to_dict(),
        }


def information_criteria(fit: ArimaFit) -> dict:
    """AIC and BIC of a CSS fit (Gaussian likelihood at the CSS variance)."""
    _, aic, bic = _ic(fit.css, fit.n_terms, fit.spec.n_params)
    return {"aic": aic, "bic": bic}


def white_noise_verdict(report: CorrelogramReport, residual_mean: float, mean_bound: float,
                        lags=CHECK_LAGS, threshold: float = P_THRESHOLD) -> tuple[bool, dict]:
    """Apply the whiteness rule to a residual correlogram."""
    p_at = {}
    for k in lags:
        row = report.row(k)
        p_at[k] = row.p_value
    usable = [p for p in p_at.values() if not math.isnan(p)]
    ok = bool(usable) and all(p >= threshold for p in usable) and abs(residual_mean) <= mean_bound
    return ok, p_at


def diagnose(fit: ArimaFit, threshold: float = P_THRESHOLD, lags=CHECK_LAGS) -> DiagnosticReport:
    """Correlogram of the innovations plus the pass/fail whiteness rule.

    Passing requires Ljung-Box ``p >= threshold`` at each checked lag (df reduced
    by ``p + q``) and a residual mean within ``2 sigma / sqrt(n)`` of zero.
    """
    u = fit.innovations
    n = u.size
    max_lag = max(max(lags), default_max_lag(n))
    if n < max_lag + 2:
        raise InsufficientDataError(f"{n} residuals are too few for a {max_lag}-lag correlogram")
    m = fit.spec.p + fit.spec.q
    report = correlogram(u, max_lag, fitted_params=m, name=f"residuals {fit.spec.label}")
    mean = float(u.mean())
    bound = 2.0 * math.sqrt(fit.sigma2) / math.sqrt(n)
    ok, p_at = white_noise_verdict(report, mean, bound, lags, threshold)
    notes = tuple(f"lag {k}: df = {k - m} < 1, not tested" for k in lags if k - m < 1)
    ic = information_criteria(fit)
    return DiagnosticReport(
        residual_correlogram=report,
        white_noise_pass=ok,
        lb_p_at=p_at,
        aic=ic["aic"],
        bic=ic["bic"],
        residual_mean=mean,
        mean_bound=bound,
        threshold=threshold,
        notes=notes,
    )


# -- grid search ----------------------------------------------------------------


@dataclass(frozen=True)
class GridRow:
    spec: ArimaSpec
    fit: ArimaFit | None
    diagnostics: DiagnosticReport | None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.fit is not None and self.fit.converged

    @property
    def white_noise_pass(self) -> bool:
        return self.diagnostics is not None and self.diagnostics.white_noise_pass

    @property
    def bic(self) -> float:
        return self.fit.bic if self.fit is not None else math.inf

    @property
    def aic(self) -> float:
        return self.fit.aic if self.fit is not None else math.inf

    def rank_key(self):
        return (self.fit is None, not self.converged, not self.white_noise_pass, self.bic, self.spec.sort_key())


def grid_specs(p_max: int, d_max: int, q_max: int, constant_options=(True, False)) -> list[ArimaSpec]:
    for bound in (p_max, d_max, q_max):
        if not 0 <= bound <= MAX_ORDER:
            raise InputError(f"grid bounds must lie in [0, {MAX_ORDER}]")
    specs = []
    for p, d, q, c in itertools.product(range(p_max + 1), range(d_max + 1), range(q_max + 1), constant_options):
        if p + q + int(c) >= 1:
            specs.append(ArimaSpec(p, d, q, bool(c)))
    return specs


def _evaluate(series: TimeSeries, spec: ArimaSpec, options: FitOptions) -> GridRow:
    try:
        f = fit_arima(series, spec, options)
    except HoloArimaError as exc:
        return GridRow(spec, None, None, f"{type(exc).__name__}: {exc}")
    try:
        diag = diagnose(f)
    except HoloArimaError as exc:
        return GridRow(spec, f, None, f"{type(exc).__name__}: {exc}")
    return GridRow(spec, f, diag)


def grid_search(series: TimeSeries, p_max: int = 2, d_max: int = 1, q_max: int = 2,
                constant_options=(True, False), options: FitOptions | None = None,
                workers: int | None = None) -> list[GridRow]:
    """Fit every valid (p, d, q, constant) combination and rank the results.

    Order: fitted before failed, converged before not, white-noise passers first,
    then ascending BIC, ties broken by ``(p, d, q, constant first)``. The result
    does not depend on ``workers``.
    """
    options = options or FitOptions()
    specs = grid_specs(p_max, d_max, q_max, constant_options)
    if workers == 1 or len(specs) == 1:
        rows = [_evaluate(series, s, options) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda s: _evaluate(series, s, options), specs))
    return sorted(rows, key=GridRow.rank_key)


GRID_HEADER = ("rank", "model", "p", "d", "q", "constant", "converged", "white_noise_pass",
               "aic", "bic", "sigma2", "mean", "ar", "ma_reported", "error")


def grid_to_csv(rows: list[GridRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GRID_HEADER)
    for rank, r in enumerate(rows, start=1):
        f = r.fit
        w.writerow([
            rank, r.spec.label, r.spec.p, r.spec.d, r.spec.q, int(r.spec.include_constant),
            int(r.converged), int(r.white_noise_pass),
            repr(f.aic) if f else "", repr(f.bic) if f else "", repr(f.sigma2) if f else "",
            repr(f.mean) if f and f.mean is not None else "",
            " ".join(repr(float(v)) for v in f.ar) if f else "",
            " ".join(repr(float(v)) for v in f.ma_reported) if f else "",
            r.error or "",
        ])
    return buf.getvalue()


def grid_to_dict(rows: list[GridRow]) -> list[dict]:
    out = []
    for rank, r in enumerate(rows, start=1):
        out.append({
            "rank": rank,
            "model": r.spec.label,
            "converged": r.converged,
            "white_noise_pass": r.white_noise_pass,
            "aic": r.fit.aic if r.fit else None,
            "bic": r.fit.bic if r.fit else None,
            "fit": r.fit.to_dict() if r.fit else None,
            "error": r.error,
        })
    return out


def residual_summary(fit: ArimaFit) -> dict:
    u = fit.innovations
    return {"mean": float(u.mean()), "mean_abs": float(np.abs(u).mean()), "n": int(u.size)}
