"""Box-Jenkins ARIMA engine and pipeline for the Temp12k GMST percentile series."""

__version__ = "0.1.0"

from .diagnostics import DiagnosticReport, diagnose, grid_search, information_criteria
from .errors import HoloArimaError, InputError
from .estimation import ArimaFit, ArimaSpec, FitOptions, fit, initial_params
from .forecast import ForecastResult, fitted_values, forecast, psi_weights
from .identification import acf, assess_stationarity, correlogram, ljung_box, pacf, white_noise_se
from .ingest import EnsembleTable, parse_percentiles_csv, to_series
from .scenario import ScenarioReport, compare_ipcc, run_scenario
from .series import DifferencedSeries, TimeSeries, difference, integrate, rebase_anomaly, summary
from .simulate import SimSpec, simulate_arma, white_noise

__all__ = [
    "ArimaFit", "ArimaSpec", "DiagnosticReport", "DifferencedSeries", "EnsembleTable", "FitOptions",
    "ForecastResult", "HoloArimaError", "InputError", "ScenarioReport", "SimSpec", "TimeSeries",
    "acf", "assess_stationarity", "compare_ipcc", "correlogram", "diagnose", "difference", "fit",
    "fitted_values", "forecast", "grid_search", "information_criteria", "initial_params", "integrate",
    "ljung_box", "pacf", "parse_percentiles_csv", "psi_weights", "rebase_anomaly", "run_scenario",
    "simulate_arma", "summary", "to_series", "white_noise", "white_noise_se",
]
