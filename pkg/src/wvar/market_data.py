"""Price CSV ingestion, simple returns, and rolling/expanding windows.

Expected CSV layout: one date column (ISO-8601, first column by default) and
one close-price column per asset, header row carrying the asset ids.  A row
with a blank, unparseable or nonpositive cell is dropped for all assets so
that the surviving rows stay date-aligned across assets.
"""

import csv
import datetime as dt
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "WindowSpec",
    "CsvSchema",
    "Window",
    "load_price_csv",
    "compute_returns",
    "windows",
]


def _check_dates(dates: Sequence[dt.date], what: str):
    for prev, cur in zip(dates, dates[1:]):
        if cur == prev:
            raise DataError(f"{what} has a duplicate date: {prev.isoformat()}")
        if cur < prev:
            raise DataError(f"{what} dates are not increasing at {cur.isoformat()}")


@dataclass(frozen=True)
class PriceSeries:
    """Dated close prices for one asset; dates strictly increasing, closes > 0."""

    asset_id: str
    dates: tuple
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        if len(self.dates) != closes.size or closes.size == 0:
            raise DataError(f"{self.asset_id}: dates and closes must align and be nonempty")
        if np.any(closes <= 0.0) or not np.isfinite(closes).all():
            raise DataError(f"{self.asset_id}: closes must be positive and finite")
        _check_dates(self.dates, f"price series {self.asset_id}")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", closes)

    def __len__(self) -> int:
        return self.closes.size


@dataclass(frozen=True)
class ReturnSeries:
    """Dated simple returns for one asset, each dated at the later of its two days."""

    asset_id: str
    dates: tuple
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        if len(self.dates) != returns.size or returns.size == 0:
            raise DataError(f"{self.asset_id}: dates and returns must align and be nonempty")
        if not np.isfinite(returns).all():
            raise DataError(f"{self.asset_id}: returns must be finite")
        _check_dates(self.dates, f"return series {self.asset_id}")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "returns", returns)

    def __len__(self) -> int:
        return self.returns.size

    def slice(self, start: int, stop: int) -> "ReturnSeries":
        return ReturnSeries(self.asset_id, self.dates[start:stop], self.returns[start:stop])


@dataclass(frozen=True)
class WindowSpec:
    """Window layout for walking a return series.

    ``rolling`` keeps a fixed in-sample length; ``expanding`` grows from a
    minimum of ``length`` observations.  ``step`` advances the emission point.
    """

    mode: str = "rolling"
    length: int = 250
    step: int = 1

    def __post_init__(self):
        if self.mode not in ("rolling", "expanding"):
            raise ValueError(f"window mode must be 'rolling' or 'expanding', got {self.mode!r}")
        if self.step < 1:
            raise ValueError(f"window step must be >= 1, got {self.step}")
        minimum = 2 if self.mode == "rolling" else 1
        if self.length < minimum:
            raise ValueError(f"{self.mode} window length must be >= {minimum}, got {self.length}")


class Window(NamedTuple):
    in_sample: ReturnSeries
    next_date: dt.date
    next_return: float


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for ``load_price_csv``.

    ``date_column`` None means the first column; ``asset_columns`` None means
    every remaining column.
    """

    date_column: Optional[str] = None
    asset_columns: Optional[tuple] = None


def _parse_price(cell: str) -> Optional[float]:
    try:
        value = float(cell)
    except (TypeError, ValueError):
        return None
    if not np.isfinite(value) or value <= 0.0:
        return None
    return value


def load_price_csv(path, schema: Optional[CsvSchema] = None) -> list:
    """Read a wide price CSV into one PriceSeries per asset column.

    Rows are sorted by date; any row with an unusable cell (blank, unparseable
    date or price, nonpositive price) is dropped entirely.  A duplicate date
    after sorting is an error naming the date.
    """
    schema = schema or CsvSchema()
    try:
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise DataError(f"cannot read price CSV {path!r}: {exc}") from exc
    if not rows or len(rows[0]) < 2:
        raise DataError(f"{path!r}: header must name a date column and at least one asset")
    header = [cell.strip() for cell in rows[0]]

    date_col = schema.date_column if schema.date_column is not None else header[0]
    if date_col not in header:
        raise DataError(f"{path!r}: date column {date_col!r} not in header {header}")
    date_idx = header.index(date_col)
    if schema.asset_columns is not None:
        missing = [c for c in schema.asset_columns if c not in header]
        if missing:
            raise DataError(f"{path!r}: asset columns {missing} not in header {header}")
        asset_cols = list(schema.asset_columns)
    else:
        asset_cols = [c for c in header if c != date_col]
    if not asset_cols:
        raise DataError(f"{path!r}: no asset columns found")
    asset_idx = [header.index(c) for c in asset_cols]

    parsed = []
    for row in rows[1:]:
        if len(row) != len(header):
            continue
        try:
            day = dt.date.fromisoformat(row[date_idx].strip())
        except ValueError:
            continue
        prices = [_parse_price(row[i]) for i in asset_idx]
        if any(p is None for p in prices):
            continue
        parsed.append((day, prices))
    if not parsed:
        raise DataError(f"{path!r}: no usable rows")

    parsed.sort(key=lambda item: item[0])
    dates = [day for day, _ in parsed]
    for prev, cur in zip(dates, dates[1:]):
        if cur == prev:
            raise DataError(f"{path!r}: duplicate date {cur.isoformat()}")

    closes = np.asarray([prices for _, prices in parsed], dtype=float)
    return [
        PriceSeries(asset_id=asset_cols[j], dates=tuple(dates), closes=closes[:, j])
        for j in range(len(asset_cols))
    ]


def compute_returns(prices: PriceSeries) -> ReturnSeries:
    """Per-period simple returns (P_t - P_{t-1}) / P_{t-1}, dated at t."""
    if len(prices) < 2:
        raise DataError(f"{prices.asset_id}: need at least 2 observations to form returns")
    closes = prices.closes
    returns = (closes[1:] - closes[:-1]) / closes[:-1]
    return ReturnSeries(prices.asset_id, prices.dates[1:], returns)


def windows(series: ReturnSeries, spec: WindowSpec) -> list:
    """Walk ``series`` per ``spec``, pairing each in-sample slice with the next
    observation after it.  Emitted slices never include or pass the paired
    observation's date."""
    n = len(series)
    if n < spec.length + 1:
        raise DataError(
            f"{series.asset_id}: {n} observations cannot support a single "
            f"{spec.mode} window of length {spec.length} plus a test point"
        )
    out = []
    if spec.mode == "rolling":
        for start in range(0, n - spec.length, spec.step):
            stop = start + spec.length
            out.append(Window(series.slice(start, stop), series.dates[stop], float(series.returns[stop])))
    else:
        for stop in range(spec.length, n, spec.step):
            out.append(Window(series.slice(0, stop), series.dates[stop], float(series.returns[stop])))
    return out
