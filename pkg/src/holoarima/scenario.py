"""End-to-end Temp12k experiment: three percentile fits, six-coefficient median, next-bin forecasts."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ConvergenceError, HoloArimaError, InputError
from .estimation import ArimaFit, ArimaSpec, FitOptions
from .estimation import fit as fit_arima
from .forecast import ForecastResult, forecast
from .ingest import EnsembleTable, ReferenceBin, reference_window, to_series
from .series import median, rebase_anomaly

IPCC_THRESHOLD = 1.5
SERIES_ORDER = ("median", "p5", "p95")
DEFAULT_SPEC = ArimaSpec(1, 0, 1, True)
COEFFICIENT_MEDIAN_LABEL = "coefficient-median (median of the six AR/MA estimates, read as degC)"
FORECAST_LABEL = "next-bin temperature forecast (degC anomaly)"


def median_of_estimates(values) -> float:
    """Median of the estimate set (linear interpolation, so the midpoint for even counts)."""
    return median(list(values))


def threshold_status(value: float, threshold: float = IPCC_THRESHOLD) -> str:
    """``"below threshold"`` only when strictly below; equality counts as ``"at threshold"``."""
    if value < threshold:
        return "below threshold"
    if value == threshold:
        return "at threshold"
    return "above threshold"


def compare_ipcc(estimates_median: float, forecasts: dict | None = None, threshold: float = IPCC_THRESHOLD) -> str:
    """One deterministic line per quantity stating its position relative to ``threshold``."""
    items = [("coefficient-median", estimates_median)]
    for name, value in (forecasts or {}).items():
        items.append((f"forecast {name}", value))
    parts = []
    for name, value in items:
        if not math.isfinite(value):
            raise InputError(f"{name} is not finite")
        parts.append(f"{name} {value:.3f} degC: {threshold_status(value, threshold)} ({threshold:g} degC)")
    return "; ".join(parts)


@dataclass(frozen=True)
class SeriesOutcome:
    name: str
    fit: ArimaFit | None
    forecast: ForecastResult | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.fit is not None and self.fit.converged


@dataclass(frozen=True)
class ScenarioReport:
    spec: ArimaSpec
    confidence: float
    reference: ReferenceBin
    outcomes: tuple[SeriesOutcome, ...]
    six_estimates: tuple[tuple[str, str, float], ...]
    estimates_median: float
    verdict: str
    ipcc_threshold: float = IPCC_THRESHOLD
    median_complete: bool = True
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def fits(self) -> dict:
        return {o.name: o.fit for o in self.outcomes}

    @property
    def forecasts(self) -> dict:
        return {o.name: o.forecast for o in self.outcomes}

    @property
    def estimate_values(self) -> list[float]:
        return [v for _, _, v in self.six_estimates]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.label,
            "confidence": self.confidence,
            "reference_bin": self.reference.to_dict(),
            "six_estimates": [{"series": s, "term": t, "estimate": v} for s, t, v in self.six_estimates],
            "estimates_median": {"label": COEFFICIENT_MEDIAN_LABEL, "value": self.estimates_median,
                                 "complete": self.median_complete},
            "forecast_next_bin": {
                o.name: (o.forecast.to_dict() if o.forecast else None) for o in self.outcomes
            },
            "forecast_label": FORECAST_LABEL,
            "ipcc_threshold": self.ipcc_threshold,
            "verdict": self.verdict,
            "series": {
                o.name: {"converged": o.ok, "error": o.error, "fit": o.fit.to_dict() if o.fit else None}
                for o in self.outcomes
            },
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def six_estimates_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "term", "estimate"])
        for s, t, v in self.six_estimates:
            w.writerow([s, t, repr(float(v))])
        w.writerow(["all", "median", repr(float(self.estimates_median))])
        return buf.getvalue()


def _run_one(name: str, table: EnsembleTable, ref: ReferenceBin, spec: ArimaSpec,
             options: FitOptions, confidence: float) -> SeriesOutcome:
    series = rebase_anomaly(to_series(table, name), ref.window)
    try:
        f = fit_arima(series, spec, options)
    except HoloArimaError as exc:
        return SeriesOutcome(name, None, None, f"{type(exc).__name__}: {exc}")
    return SeriesOutcome(name, f, forecast(f, 1, confidence))


def run_scenario(table: EnsembleTable, spec: ArimaSpec = DEFAULT_SPEC, confidence: float = 0.95,
                 options: FitOptions | None = None, workers: int | None = 3,
                 reference: ReferenceBin | None = None) -> ScenarioReport:
    """Rebase, fit and forecast the three percentile series; take the median of the six estimates.

    Estimates are the first AR and first MA coefficient of each fit in the
    reporting sign convention, ordered median, p5, p95. Non-converged fits are
    left out of the median and flagged.
    """
    if spec.p < 1 or spec.q < 1:
        raise InputError("the six-estimate scenario needs a model with at least one AR and one MA term")
    options = options or FitOptions()
    ref = reference or reference_window(table)
    if workers == 1:
        outcomes = [_run_one(n, table, ref, spec, options, confidence) for n in SERIES_ORDER]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda n: _run_one(n, table, ref, spec, options, confidence), SERIES_ORDER))

    six = []
    notes = []
    for o in outcomes:
        if not o.ok:
            notes.append(f"{o.name}: fit failed or did not converge; excluded from the median")
            continue
        six.append((o.name, "AR Lag 1", float(o.fit.ar[0])))
        six.append((o.name, "MA Lag 1", float(o.fit.ma_reported[0])))
    if not six:
        raise ConvergenceError("no series could be fitted")
    est_median = median_of_estimates(v for _, _, v in six)
    fc_points = {o.name: float(o.forecast.points[0]) for o in outcomes if o.forecast is not None}
    return ScenarioReport(
        spec=spec,
        confidence=confidence,
        reference=ref,
        outcomes=tuple(outcomes),
        six_estimates=tuple(six),
        estimates_median=est_median,
        verdict=compare_ipcc(est_median, fc_points),
        median_complete=len(six) == 6,
        notes=tuple(notes),
    )
