"""Time-series container, differencing/integration, summary statistics and rebasing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CannotInvertError, InputError, OrderTooLargeError


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Equally spaced observations, oldest first.

    Parameters
    ----------
    values : array_like
        Observations (for the Temp12k data: degC anomalies).
    step : float
        Years between consecutive observations.
    origin_label : str
        Free-text label of the first observation, e.g. ``"12000 BP"``.
    order_note : str
        Always ``"ascending"``: index ``i + 1`` is ``step`` years after ``i``.
    """

    values: np.ndarray
    step: float = 1.0
    origin_label: str = ""
    order_note: str = "ascending"

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.size < 1:
            raise InputError("a time series needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise InputError("time series values must be finite")
        if not (self.step > 0):
            raise InputError(f"step must be positive, got {self.step}")
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def with_values(self, values) -> TimeSeries:
        return replace(self, values=values)


@dataclass(frozen=True, eq=False)
class DifferencedSeries:
    """Result of :func:`difference`.

    ``initials`` are the ``d`` leading observations of the source series.
    ``residue`` holds, per differencing level, the exact rounding error of each
    float subtraction; :func:`integrate` uses it to undo the differencing
    bit-for-bit. It is ``None`` for hand-built instances, in which case
    integration is ordinary cumulative summation.
    """

    values: np.ndarray
    d: int
    initials: np.ndarray | None
    step: float = 1.0
    origin_label: str = ""
    residue: tuple[np.ndarray, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.initials is not None:
            object.__setattr__(self, "initials", _frozen_array(self.initials))
        if self.d < 0:
            raise InputError("differencing order must be non-negative")

    def __len__(self):
        return self.values.size


def _two_diff(b: np.ndarray, a: np.ndarray):
    """``b - a`` and its exact rounding error (Knuth TwoSum on ``b + (-a)``)."""
    s = b - a
    bb = s - b
    err = (b - (s - bb)) + (-a - bb)
    return s, err


def difference(series: TimeSeries, d: int) -> DifferencedSeries:
    """Apply ``d`` first differences.

    >>> difference(TimeSeries([1, 3, 6, 10]), 1).values
    array([2., 3., 4.])
    """
    d = int(d)
    if d < 0:
        raise InputError("differencing order must be non-negative")
    y = series.values
    if d >= y.size:
        raise OrderTooLargeError(f"cannot difference {d} times a series of length {y.size}")
    cur = np.array(y)
    residue = []
    for _ in range(d):
        cur, err = _two_diff(cur[1:], cur[:-1])
        residue.append(err)
    return DifferencedSeries(
        values=cur,
        d=d,
        initials=y[:d].copy(),
        step=series.step,
        origin_label=series.origin_label,
        residue=tuple(residue),
    )


def _level_heads(initials: np.ndarray, d: int) -> list[float]:
    """First value of each differencing level 0..d-1, from the leading observations."""
    # Same float operations as difference(), so the heads match the forward pass.
    heads = []
    cur = np.array(initials, dtype=np.float64)
    for _ in range(d):
        heads.append(float(cur[0]))
        cur = cur[1:] - cur[:-1]
    return heads


def integrate(diffed: DifferencedSeries) -> TimeSeries:
    """Invert :func:`difference`."""
    d = diffed.d
    if d == 0:
        return TimeSeries(diffed.values, step=diffed.step, origin_label=diffed.origin_label)
    if diffed.initials is None or diffed.initials.size != d:
        raise CannotInvertError(f"integration of order {d} needs {d} initial values")

    residue = diffed.residue
    exact = residue is not None and len(residue) == d
    heads = _level_heads(diffed.initials, d)
    out = diffed.values
    if exact:
        # fsum of (previous, rounded difference, rounding error) restores each level exactly.
        for k in reversed(range(d)):
            err = residue[k]
            rebuilt = np.empty(out.size + 1)
            acc = heads[k]
            rebuilt[0] = acc
            for j in range(out.size):
                acc = math.fsum((acc, float(out[j]), float(err[j])))
                rebuilt[j + 1] = acc
            out = rebuilt
    else:
        for k in reversed(range(d)):
            out = np.cumsum(np.concatenate(([heads[k]], out)))
    return TimeSeries(out, step=diffed.step, origin_label=diffed.origin_label)


def _window_slice(n: int, window) -> slice:
    if isinstance(window, slice):
        start, stop, stride = window.indices(n)
        if stride != 1:
            raise InputError("reference window must be contiguous")
    elif isinstance(window, range):
        if window.step != 1:
            raise InputError("reference window must be contiguous")
        start, stop = window.start, window.stop
    else:
        start, stop = window
    if not (0 <= start < stop <= n):
        raise InputError(f"reference window [{start}, {stop}) is empty or outside [0, {n})")
    return slice(start, stop)


def rebase_anomaly(series: TimeSeries, window) -> TimeSeries:
    """Subtract the mean over ``window`` (a slice, ``range`` or ``(start, stop)`` pair).

    The result has zero mean over the window.
    """
    sl = _window_slice(len(series), window)
    ref = series.values[sl].mean()
    return series.with_values(series.values - ref)


def percentile(values, q: float) -> float:
    """Percentile with linear interpolation between closest ranks (inclusive)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise InputError("percentile of an empty sequence")
    return float(np.percentile(arr, q, method="linear"))


def median(values) -> float:
    return percentile(values, 50.0)


def summary(series: TimeSeries | np.ndarray, percentiles=(5.0, 95.0)) -> dict:
    """Mean, variance (population, 1/n), median and the requested percentiles."""
    y = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=np.float64)
    if y.size == 0:
        raise InputError("summary of an empty series")
    return {
        "n": int(y.size),
        "mean": float(y.mean()),
        "variance": float(y.var()),
        "median": median(y),
        "percentiles": {float(q): percentile(y, q) for q in percentiles},
    }
