"""Command-line pipeline: identify, fit, diagnose, forecast, scenario, simulate.

Exit codes: 0 success, 2 bad input or usage, 3 a fit did not converge,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import diagnose, grid_search, grid_to_csv, grid_to_dict
from .errors import ConvergenceError, HoloArimaError, InputError
from .estimation import ArimaSpec, FitOptions, fit
from .forecast import fitted_values, forecast
from .identification import assess_stationarity, correlogram
from .ingest import ReferenceBin, parse_column_map, parse_percentiles_csv, reference_window, to_series
from .scenario import run_scenario
from .series import rebase_anomaly
from .simulate import SimSpec, simulate_arma

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_INTERNAL = 0, 2, 3, 4

DEFAULTS = {
    "input": None,
    "columns": None,
    "series": "median",
    "order": "1,0,1",
    "no_constant": False,
    "d": None,
    "max_lag": None,
    "confidence": 0.95,
    "grid": None,
    "ma_sign": "spss",
    "out": "out",
    "seed": 20200530,
    "horizon": 1,
    "no_rebase": False,
    "no_enforce": False,
    "workers": None,
    "ar": "",
    "ma": "",
    "constant": 0.0,
    "sigma": 1.0,
    "n": 121,
    "burn_in": None,
    "step": 100.0,
}
BOOL_KEYS = {"no_constant", "no_rebase", "no_enforce"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    input_path: str | None
    column_map: dict
    series: str
    spec: ArimaSpec
    max_lag: int | None
    confidence: float
    grid: tuple[int, int, int] | None
    ma_sign: str
    output_dir: Path
    seed: int
    horizon: int
    rebase: bool
    enforce: bool
    workers: int | None
    sim: dict = field(default_factory=dict)

    @property
    def fit_options(self) -> FitOptions:
        return FitOptions(enforce_stationarity=self.enforce, enforce_invertibility=self.enforce,
                          ma_sign=self.ma_sign)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; keys use flag names."""
    cfg = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        if not sep or key not in DEFAULTS:
            raise InputError(f"{path}:{lineno}: unknown or malformed setting {raw.strip()!r}")
        value = value.strip()
        if key in BOOL_KEYS:
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise InputError(f"{path}:{lineno}: {key} must be true or false")
            cfg[key] = value.lower() in ("true", "1", "yes")
        else:
            cfg[key] = value
    return cfg


def _int_triple(text: str, what: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(x) for x in str(text).split(","))
    except ValueError:
        raise InputError(f"{what} must look like p,d,q, got {text!r}") from None
    if len(parts) != 3 or min(parts) < 0:
        raise InputError(f"{what} must be three non-negative integers, got {text!r}")
    return parts


def _floats(text: str) -> tuple[float, ...]:
    text = str(text).strip()
    if not text:
        return ()
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = read_config_file(args.config) if getattr(args, "config", None) else {}

    def get(key):
        val = getattr(args, key, None)
        if val is not None:
            return val
        return file_cfg.get(key, DEFAULTS[key])

    def typed(key, conv):
        val = get(key)
        if val is None:
            return None
        try:
            return conv(val)
        except (TypeError, ValueError):
            raise InputError(f"invalid value for {key}: {val!r}") from None

    p, d, q = _int_triple(get("order"), "--order")
    d_override = typed("d", int)
    if d_override is not None:
        d = d_override
    spec = ArimaSpec(p, d, q, not bool(get("no_constant")))
    confidence = typed("confidence", float)
    if not 0.0 < confidence < 1.0:
        raise InputError("--confidence must lie in (0, 1)")
    grid = get("grid")
    ma_sign = get("ma_sign")
    if ma_sign not in ("spss", "boxjenkins"):
        raise InputError("--ma-sign must be spss or boxjenkins")
    series = get("series")
    if series not in ("median", "p5", "p95"):
        raise InputError("--series must be median, p5 or p95")
    out = get("out")
    if not str(out).strip():
        raise InputError("--out must be a non-empty path")
    horizon = typed("horizon", int)
    if horizon < 1:
        raise InputError("--horizon must be >= 1")
    max_lag = typed("max_lag", int)
    if max_lag is not None and max_lag < 1:
        raise InputError("--max-lag must be >= 1")
    return RunConfig(
        command=args.command,
        input_path=get("input"),
        column_map=parse_column_map(get("columns")),
        series=series,
        spec=spec,
        max_lag=max_lag,
        confidence=confidence,
        grid=_int_triple(grid, "--grid") if grid else None,
        ma_sign=ma_sign,
        output_dir=Path(out),
        seed=typed("seed", int),
        horizon=horizon,
        rebase=not bool(get("no_rebase")),
        enforce=not bool(get("no_enforce")),
        workers=typed("workers", int),
        sim={
            "ar": _floats(get("ar")),
            "ma": _floats(get("ma")),
            "constant": typed("constant", float),
            "sigma": typed("sigma", float),
            "n": typed("n", int),
            "burn_in": typed("burn_in", int),
            "step": typed("step", float),
        },
    )


# -- output helpers ---------------------------------------------------------------


def _write(outdir: Path, name: str, text: str) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _clean(obj):
    """Replace NaN/inf by None so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _load_series(cfg: RunConfig):
    if not cfg.input_path:
        raise InputError("--input is required")
    table = parse_percentiles_csv(cfg.input_path, cfg.column_map)
    series = to_series(table, cfg.series)
    ref: ReferenceBin | None = None
    if cfg.rebase:
        ref = reference_window(table)
        series = rebase_anomaly(series, ref.window)
    return table, series, ref


def _acf_plot_csv(report) -> str:
    lines = ["lag,acf,pacf,acf_band,pacf_band"]
    for r in report.rows:
        lines.append(f"{r.lag},{r.acf!r},{r.pacf!r},{1.96 * r.se_white_noise!r},{1.96 * r.pacf_se!r}")
    return "\n".join(lines) + "\n"


def _residuals_csv(f) -> str:
    lines = ["index,residual,conditioning"]
    for i, u in enumerate(f.residuals):
        lines.append(f"{i + f.spec.d},{float(u)!r},{int(i < f.n_cond)}")
    return "\n".join(lines) + "\n"


# -- commands -----------------------------------------------------------------------


def cmd_identify(cfg: RunConfig) -> int:
    _, series, ref = _load_series(cfg)
    report = correlogram(series, cfg.max_lag, name=cfg.series)
    assessment = assess_stationarity(series, max_lag=cfg.max_lag)
    out = cfg.output_dir
    _write(out, "fig9_correlogram.csv", report.to_csv())
    _write(out, "fig9_correlogram.json", _dump(_clean(report.to_dict())))
    _write(out, "fig8_10_acf_pacf_plot.csv", _acf_plot_csv(report))
    _write(out, "stationarity.json", _dump({
        "series": cfg.series,
        "n": report.n,
        "reference_bin": ref.to_dict() if ref else None,
        "assessment": assessment.to_dict(),
    }))
    r1 = report.row(1)
    print(f"{cfg.series}: n={report.n} acf1={r1.acf:.3f} Q1={r1.q_stat:.3f} "
          f"stationary={assessment.stationary} suggested_d={assessment.suggested_d} "
          f"dominant_lag={assessment.dominant_lag}")
    return EXIT_OK


def _fit_and_report(cfg: RunConfig, series, ref, with_table: bool = True):
    f = fit(series, cfg.spec, cfg.fit_options)
    out = cfg.output_dir
    diag = diagnose(f)
    if with_table:
        _write(out, "fig3_params.csv", f.table_csv())
        _write(out, "fit.json", _dump(_clean({"series": cfg.series,
                                              "reference_bin": ref.to_dict() if ref else None,
                                              "fit": f.to_dict()})))
        _write(out, "residuals.csv", _residuals_csv(f))
    _write(out, "fig4_residual_correlogram.csv", diag.residual_correlogram.to_csv())
    _write(out, "diagnostics.json", _dump(_clean(diag.to_dict())))
    return f, diag


def cmd_fit(cfg: RunConfig) -> int:
    _, series, ref = _load_series(cfg)
    f, diag = _fit_and_report(cfg, series, ref)
    for r in f.coefficient_table():
        print(f"{r.name:<10} {r.estimate: .3f}  SE {r.se:.3f}  t {r.t: .3f}  Sig. {r.p_value:.3f}")
    print(f"sigma2={f.sigma2:.6g} BIC={f.bic:.3f} white_noise_pass={diag.white_noise_pass} converged={f.converged}")
    if cfg.grid:
        rows = grid_search(series, *cfg.grid, options=cfg.fit_options, workers=cfg.workers)
        _write(cfg.output_dir, "grid.csv", grid_to_csv(rows))
        _write(cfg.output_dir, "grid.json", _dump(_clean(grid_to_dict(rows))))
        print(f"grid: {len(rows)} models, best {rows[0].spec.label}")
    return EXIT_OK if f.converged else EXIT_CONVERGENCE


def cmd_diagnose(cfg: RunConfig) -> int:
    _, series, ref = _load_series(cfg)
    f, diag = _fit_and_report(cfg, series, ref, with_table=False)
    ps = ", ".join(f"Q({k}) p={v:.3f}" for k, v in diag.lb_p_at.items())
    print(f"{f.spec.label}: {ps}; white_noise_pass={diag.white_noise_pass}")
    return EXIT_OK if f.converged else EXIT_CONVERGENCE


def cmd_forecast(cfg: RunConfig) -> int:
    _, series, ref = _load_series(cfg)
    f = fit(series, cfg.spec, cfg.fit_options)
    fc = forecast(f, cfg.horizon, cfg.confidence)
    fv = fitted_values(f, cfg.confidence)
    _write(cfg.output_dir, "forecast.csv", fc.to_csv())
    _write(cfg.output_dir, "forecast.json", _dump(_clean({"series": cfg.series, "model": f.spec.label,
                                                          "converged": f.converged, **fc.to_dict()})))
    _write(cfg.output_dir, "fig5_fit_chart.csv", fv.to_csv())
    for h in range(fc.horizon):
        print(f"step {h + 1} (+{(h + 1) * fc.step_years:g} y): {fc.points[h]:.3f} "
              f"[{fc.lcl[h]:.3f}, {fc.ucl[h]:.3f}]")
    return EXIT_OK if f.converged else EXIT_CONVERGENCE


def cmd_scenario(cfg: RunConfig) -> int:
    if not cfg.input_path:
        raise InputError("--input is required")
    table = parse_percentiles_csv(cfg.input_path, cfg.column_map)
    report = run_scenario(table, cfg.spec, cfg.confidence, cfg.fit_options, workers=cfg.workers)
    out = cfg.output_dir
    _write(out, "scenario.json", report.to_json())
    _write(out, "six_estimates.csv", report.six_estimates_csv())
    for o in report.outcomes:
        if o.fit is not None:
            name = "fig3_params.csv" if o.name == "median" else f"fig6_params_{o.name}.csv"
            _write(out, name, o.fit.table_csv())
        if o.forecast is not None:
            _write(out, f"forecast_{o.name}.csv", o.forecast.to_csv())
    print(f"six estimates: {', '.join(f'{v:.3f}' for v in report.estimate_values)}")
    print(f"median of estimates: {report.estimates_median:.3f}")
    print(report.verdict)
    return EXIT_OK if report.median_complete else EXIT_CONVERGENCE


def cmd_simulate(cfg: RunConfig) -> int:
    s = cfg.sim
    spec = SimSpec(ar=s["ar"], ma=s["ma"], constant=s["constant"], sigma=s["sigma"], n=s["n"],
                   burn_in=s["burn_in"], seed=cfg.seed, step=s["step"])
    ts = simulate_arma(spec)
    lines = ["index,value"] + [f"{i},{float(v)!r}" for i, v in enumerate(ts.values)]
    _write(cfg.output_dir, "simulated.csv", "\n".join(lines) + "\n")
    print(f"wrote {len(ts)} values (seed {cfg.seed}) to {cfg.output_dir / 'simulated.csv'}")
    return EXIT_OK


COMMANDS = {
    "identify": (cmd_identify, "correlogram, Ljung-Box table and stationarity heuristic"),
    "fit": (cmd_fit, "CSS estimation with coefficient table, residuals and diagnostics"),
    "diagnose": (cmd_diagnose, "residual white-noise check for a fitted model"),
    "forecast": (cmd_forecast, "h-step forecasts with confidence limits and fit-chart data"),
    "scenario": (cmd_scenario, "three percentile fits, six-estimate median, next-bin forecasts"),
    "simulate": (cmd_simulate, "seeded ARMA simulation to CSV"),
}


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("data and model")
    g.add_argument("--config", help="flat key=value settings file (flags take precedence)")
    g.add_argument("--input", help="percentile CSV file")
    g.add_argument("--columns", help="column map, e.g. age=ages,p5=global_5,median=global_median,p95=global_95")
    g.add_argument("--series", choices=("median", "p5", "p95"), help="which percentile series to analyse (default median)")
    g.add_argument("--order", help="model order p,d,q (default 1,0,1)")
    g.add_argument("--no-constant", dest="no_constant", action="store_const", const=True, help="omit the constant")
    g.add_argument("--d", type=int, help="override the differencing order of --order")
    g.add_argument("--max-lag", dest="max_lag", type=int, help="correlogram lags (default min(20, n/4))")
    g.add_argument("--confidence", type=float, help="interval level (default 0.95)")
    g.add_argument("--grid", help="also fit every model up to pmax,dmax,qmax")
    g.add_argument("--ma-sign", dest="ma_sign", choices=("spss", "boxjenkins"),
                   help="MA reporting convention (default spss: coefficients negated)")
    g.add_argument("--out", help="output directory (default ./out)")
    g.add_argument("--seed", type=int, help="random seed for simulate")
    g.add_argument("--horizon", type=int, help="forecast steps (default 1)")
    g.add_argument("--no-rebase", dest="no_rebase", action="store_const", const=True,
                   help="skip rebasing on the 1800-1900 reference bin")
    g.add_argument("--no-enforce", dest="no_enforce", action="store_const", const=True,
                   help="do not constrain to stationary/invertible parameters")
    g.add_argument("--workers", type=int, help="threads for grid search and scenario")
    s = p.add_argument_group("simulate")
    s.add_argument("--ar", help="AR coefficients, comma separated")
    s.add_argument("--ma", help="MA coefficients (plus-sign convention), comma separated")
    s.add_argument("--constant", type=float, help="process mean")
    s.add_argument("--sigma", type=float, help="innovation standard deviation")
    s.add_argument("--n", type=int, help="number of observations")
    s.add_argument("--burn-in", dest="burn_in", type=int, help="discarded start-up values")
    s.add_argument("--step", type=float, help="years per observation")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="holoarima", description="Box-Jenkins ARIMA pipeline for Temp12k percentile series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        _add_common(sub.add_parser(name, help=help_text, description=help_text))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command][0](cfg)
    except InputError as exc:
        print(f"holoarima: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"holoarima: error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except HoloArimaError as exc:
        print(f"holoarima: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
