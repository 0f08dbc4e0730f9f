"""Read the Temp12k multi-method percentile CSV.

The file holds one row per 100-year bin with the age in years before present
and the 5th/50th/95th percentiles of the GMST ensemble. Header names are taken
from a column map; :data:`DEFAULT_COLUMNS` can be overridden key by key.

Source of the real data (not fetched by this package):
https://www.ncei.noaa.gov/access/paleo-search/study/29712
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple

import numpy as np

from .errors import CsvParseError, InputError, SchemaError, TableValidationError
from .series import TimeSeries

DEFAULT_COLUMNS = {
    "age": "ages",
    "p5": "global_5",
    "median": "global_median",
    "p95": "global_95",
}
SERIES_KEYS = ("p5", "median", "p95")

# 1800-1900 CE expressed in years before 2019, the "0" of the series.
REFERENCE_AGE_RANGE = (119.0, 219.0)

SPACING_RTOL = 1e-6


class EnsembleRow(NamedTuple):
    age_bp: float
    p5: float
    median: float
    p95: float


@dataclass(frozen=True, eq=False)
class EnsembleTable:
    ages: np.ndarray
    p5: np.ndarray
    median: np.ndarray
    p95: np.ndarray
    lines: tuple[int, ...] = ()

    def __len__(self):
        return self.ages.size

    @property
    def rows(self) -> list[EnsembleRow]:
        return [EnsembleRow(*map(float, r)) for r in zip(self.ages, self.p5, self.median, self.p95)]

    @property
    def spacing(self) -> float:
        if self.ages.size < 2:
            return 100.0
        return float(abs(self.ages[1] - self.ages[0]))

    def column(self, key: str) -> np.ndarray:
        if key not in SERIES_KEYS:
            raise InputError(f"series must be one of {SERIES_KEYS}, got {key!r}")
        return getattr(self, key)


def parse_column_map(text: str | None) -> dict:
    """``"median=global_median,p5=global_5"`` -> default map with those keys replaced."""
    cmap = dict(DEFAULT_COLUMNS)
    if not text:
        return cmap
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in DEFAULT_COLUMNS or not value:
            raise InputError(f"bad column mapping {item!r}; expected KEY=NAME with KEY in {sorted(DEFAULT_COLUMNS)}")
        cmap[key] = value
    return cmap


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc.strerror or exc}") from exc
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = source.read()
        if isinstance(raw, str):
            return raw
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InputError(f"input is not UTF-8: {exc}") from exc


def _number(cell: str, line: int, column: str) -> float:
    try:
        value = float(cell.strip())
    except ValueError:
        raise CsvParseError(line, column, cell) from None
    if not math.isfinite(value):
        raise CsvParseError(line, column, cell)
    return value


def parse_percentiles_csv(source, column_map: dict | None = None) -> EnsembleTable:
    """Parse and validate a percentile CSV.

    ``source`` is a path, ``bytes`` or a binary/text stream. Blank lines and
    lines starting with ``#`` are skipped. Rows keep file order.
    """
    cmap = dict(DEFAULT_COLUMNS)
    cmap.update(column_map or {})
    text = _read_text(source)

    header = None
    index = {}
    records = []
    reader = csv.reader(io.StringIO(text))
    for cells in reader:
        line = reader.line_num
        if not cells or all(not c.strip() for c in cells) or cells[0].lstrip().startswith("#"):
            continue
        if header is None:
            header = [c.strip() for c in cells]
            for key in ("age", "p5", "median", "p95"):
                name = cmap[key]
                if name not in header:
                    raise SchemaError(name, header)
                index[key] = header.index(name)
            continue
        values = []
        for key in ("age", "p5", "median", "p95"):
            pos = index[key]
            cell = cells[pos] if pos < len(cells) else ""
            values.append(_number(cell, line, cmap[key]))
        records.append((line, values))

    if header is None:
        raise InputError("input has no header row")
    if not records:
        raise InputError("input has a header but no data rows")

    lines = tuple(r[0] for r in records)
    data = np.array([r[1] for r in records], dtype=np.float64)
    table = EnsembleTable(ages=data[:, 0], p5=data[:, 1], median=data[:, 2], p95=data[:, 3], lines=lines)
    validate_table(table)
    return table


def validate_table(table: EnsembleTable) -> None:
    lines = table.lines or tuple(range(1, len(table) + 1))
    for i in range(len(table)):
        if not (table.p5[i] <= table.median[i] <= table.p95[i]):
            raise TableValidationError(
                f"percentiles out of order (p5={table.p5[i]}, median={table.median[i]}, p95={table.p95[i]})",
                lines[i],
            )
    if len(table) < 2:
        return
    steps = np.diff(table.ages)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        bad = int(np.argmax((steps <= 0) if steps[0] > 0 else (steps >= 0))) + 1
        raise TableValidationError("ages are not strictly monotonic", lines[bad])
    ref = abs(steps[0])
    off = np.abs(np.abs(steps) - ref) > SPACING_RTOL * ref
    if np.any(off):
        bad = int(np.argmax(off)) + 1
        raise TableValidationError(f"age spacing {abs(steps[bad - 1])} differs from {ref}", lines[bad])


def serialize_table(table: EnsembleTable, column_map: dict | None = None) -> str:
    cmap = dict(DEFAULT_COLUMNS)
    cmap.update(column_map or {})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([cmap["age"], cmap["p5"], cmap["median"], cmap["p95"]])
    for r in table.rows:
        w.writerow([repr(v) for v in r])
    return buf.getvalue()


def _ascending_order(table: EnsembleTable) -> np.ndarray:
    # Oldest (largest age BP) first.
    return np.argsort(-table.ages, kind="stable")


def to_series(table: EnsembleTable, column: str) -> TimeSeries:
    """Chronologically ascending series for ``column`` in {"p5", "median", "p95"}."""
    order = _ascending_order(table)
    values = table.column(column)[order]
    return TimeSeries(values, step=table.spacing, origin_label=f"{table.ages[order[0]]:g} BP")


def series_ages(table: EnsembleTable) -> np.ndarray:
    """Ages BP aligned with :func:`to_series` output."""
    return table.ages[_ascending_order(table)]


@dataclass(frozen=True)
class ReferenceBin:
    start: int
    stop: int
    ages: tuple[float, ...]
    age_range: tuple[float, float]
    rule: str

    @property
    def window(self) -> tuple[int, int]:
        return (self.start, self.stop)

    def to_dict(self) -> dict:
        return {"series_index": [self.start, self.stop], "ages_bp": list(self.ages),
                "age_range_bp": list(self.age_range), "rule": self.rule}


def reference_window(table: EnsembleTable, age_range=REFERENCE_AGE_RANGE) -> ReferenceBin:
    """Series indices of the pre-industrial reference bin(s).

    Bins whose age label falls inside ``age_range`` are used; if none does,
    the bin nearest the middle of the range.
    """
    ages = series_ages(table)
    lo, hi = sorted(age_range)
    inside = np.flatnonzero((ages >= lo) & (ages <= hi))
    if inside.size:
        start, stop = int(inside.min()), int(inside.max()) + 1
        rule = f"bins with age in [{lo:g}, {hi:g}] BP"
    else:
        mid = 0.5 * (lo + hi)
        start = int(np.argmin(np.abs(ages - mid)))
        stop = start + 1
        rule = f"bin nearest {mid:g} BP"
    return ReferenceBin(start, stop, tuple(float(a) for a in ages[start:stop]), (lo, hi), rule)


def bundled_fixture_path() -> str:
    """Path of the synthetic 121-row fixture shipped with the package."""
    return str(resources.files("holoarima") / "data" / "synthetic_percentiles.csv")
