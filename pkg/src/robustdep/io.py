"""Returns files: ingestion, validation and 17-significant-digit output.

A returns file is a CSV with a header row; the first column is ``date``
(ISO-8601, strictly increasing) and every other column is one instrument
holding either daily closing prices or daily percentage returns.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

Mode = Literal["prices", "returns"]


@dataclass
class ReturnsData:
    """Aligned percentage returns, one array per instrument."""

    dates: list[dt.date]
    series: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def instruments(self) -> list[str]:
        return list(self.series)

    def lengths(self) -> dict[str, int]:
        return {k: int(v.size) for k, v in self.series.items()}


def prices_to_returns(prices) -> np.ndarray:
    """``100 (P_t / P_{t-1} - 1)``."""
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DataError("need at least two prices")
    if np.any(p <= 0.0):
        raise DataError("prices must be positive")
    return 100.0 * (p[1:] / p[:-1] - 1.0)


def _parse_date(text: str, line: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"line {line}, column 'date': {text!r} is not an ISO-8601 date") from None


def read_returns_csv(path, mode: Mode = "returns") -> ReturnsData:
    """Load a returns or prices file; errors name the offending line and column."""
    if mode not in ("prices", "returns"):
        raise ConfigError(f"mode must be 'prices' or 'returns', got {mode!r}")
    try:
        fh = open(path, newline="")
    except OSError as err:
        raise DataError(f"cannot open {path}: {err}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if not header or header[0].lower() != "date":
            raise DataError(f"{path}: first column must be 'date', got {header[:1]}")
        names = header[1:]
        if len(set(names)) != len(names) or any(not n for n in names):
            raise DataError(f"{path}: instrument names must be non-empty and unique")
        dates: list[dt.date] = []
        cols: list[list[float]] = [[] for _ in names]
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"line {line}: expected {len(header)} fields, got {len(row)}")
            d = _parse_date(row[0], line)
            if dates and d <= dates[-1]:
                raise DataError(f"line {line}, column 'date': {d} does not follow {dates[-1]}")
            dates.append(d)
            for j, (name, cell) in enumerate(zip(names, row[1:])):
                text = cell.strip()
                if not text:
                    raise DataError(f"line {line}, column {name!r}: missing value")
                try:
                    v = float(text)
                except ValueError:
                    raise DataError(f"line {line}, column {name!r}: {text!r} is not a number") from None
                if not math.isfinite(v):
                    raise DataError(f"line {line}, column {name!r}: non-finite value {text!r}")
                cols[j].append(v)
    data = ReturnsData(dates=dates)
    if mode == "returns":
        for name, c in zip(names, cols):
            data.series[name] = np.asarray(c, dtype=float)
        return data
    data.dates = dates[1:]
    for name, c in zip(names, cols):
        try:
            data.series[name] = prices_to_returns(c)
        except DataError as err:
            raise DataError(f"column {name!r}: {err}") from None
    return data


def format_float(v: float) -> str:
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return f"{v:.17g}"


def write_returns_csv(path, dates: Sequence[dt.date], series: Mapping[str, np.ndarray]) -> None:
    """Write aligned series with 17 significant digits (exact round trip)."""
    names = list(series)
    n = len(dates)
    for name in names:
        if len(series[name]) != n:
            raise DataError(f"column {name!r} has {len(series[name])} values for {n} dates")
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *names])
        for i, d in enumerate(dates):
            w.writerow([d.isoformat(), *(format_float(float(series[k][i])) for k in names)])


def synthetic_dates(n: int, start: dt.date = dt.date(2000, 1, 1)) -> list[dt.date]:
    """Consecutive calendar days, for simulated series."""
    return [start + dt.timedelta(days=i) for i in range(n)]
