"""Daily-return panel: the aligned (dates x tickers) matrix every stage consumes.

CSV layout is ``date,TICKER1,TICKER2,...`` with ISO-8601 dates and simple
(not log) returns. Ingestion is strict: duplicate or non-increasing dates and
blank/malformed cells are rejected instead of silently filled.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ReturnsPanel:
    """Dense matrix of daily simple returns; rows = dates, columns = tickers."""

    dates: tuple[dt.date, ...]
    tickers: tuple[str, ...]
    values: np.ndarray  # shape (len(dates), len(tickers)), float64

    def __post_init__(self):
        if self.values.shape != (len(self.dates), len(self.tickers)):
            raise DataError(
                f"panel shape {self.values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("panel contains non-finite returns")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise DataError(f"dates not strictly increasing at {b.isoformat()}")

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)

    def row_index(self, date: dt.date) -> int:
        """Index of an exact date; DataError if the date is absent."""
        lo = int(np.searchsorted([d.toordinal() for d in self.dates], date.toordinal()))
        if lo >= len(self.dates) or self.dates[lo] != date:
            raise DataError(f"date {date.isoformat()} not present in panel")
        return lo

    def years(self) -> list[int]:
        """Calendar years present, ascending."""
        return sorted({d.year for d in self.dates})

    def year_slice(self, year: int) -> slice:
        """Row slice of all trading days in a calendar year."""
        idx = [i for i, d in enumerate(self.dates) if d.year == year]
        if not idx:
            raise DataError(f"panel has no rows in year {year}")
        return slice(idx[0], idx[-1] + 1)

    def last_index_of_year(self, year: int) -> int:
        return self.year_slice(year).stop - 1

    def select(self, tickers) -> "ReturnsPanel":
        """Column subset in the given ticker order."""
        pos = []
        for t in tickers:
            if t not in self.tickers:
                raise DataError(f"ticker {t} not present in panel")
            pos.append(self.tickers.index(t))
        return ReturnsPanel(self.dates, tuple(tickers), self.values[:, pos].copy())

    def rows(self, sl: slice) -> "ReturnsPanel":
        return ReturnsPanel(self.dates[sl], self.tickers, self.values[sl].copy())

    def fingerprint(self) -> str:
        """Content hash of dates, tickers and values (checkpoint key material)."""
        h = hashlib.sha256()
        h.update("|".join(d.isoformat() for d in self.dates).encode())
        h.update("|".join(self.tickers).encode())
        h.update(np.ascontiguousarray(self.values, dtype=np.float64).tobytes())
        return h.hexdigest()


def _parse_date(text: str, line_no: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"line {line_no}: bad date {text!r} (expected YYYY-MM-DD)")


def load_returns_csv(path) -> ReturnsPanel:
    """Parse a returns CSV; strict about dates, duplicates and blank cells."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file")
        if len(header) < 2 or header[0].strip().lower() != "date":
            raise DataError(f"{path}: header must be 'date,TICKER1,...', got {header[:3]}")
        tickers = tuple(t.strip() for t in header[1:])
        if len(set(tickers)) != len(tickers):
            raise DataError(f"{path}: duplicate ticker in header")

        dates: list[dt.date] = []
        rows: list[list[float]] = []
        seen: set[dt.date] = set()
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(tickers) + 1:
                raise DataError(
                    f"{path}: line {line_no}: expected {len(tickers) + 1} fields, got {len(row)}"
                )
            date = _parse_date(row[0], line_no)
            if date in seen:
                raise DataError(f"{path}: duplicate date {date.isoformat()} at line {line_no}")
            if dates and date <= dates[-1]:
                raise DataError(
                    f"{path}: dates not strictly increasing at line {line_no} ({date.isoformat()})"
                )
            seen.add(date)
            vals = []
            for col, cell in enumerate(row[1:], start=1):
                cell = cell.strip()
                if cell == "":
                    raise DataError(
                        f"{path}: line {line_no}: blank cell for ticker {tickers[col - 1]}"
                    )
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: line {line_no}: bad number {cell!r} "
                        f"for ticker {tickers[col - 1]}"
                    )
            dates.append(date)
            rows.append(vals)

    if not rows:
        raise DataError(f"{path}: no data rows")
    return ReturnsPanel(tuple(dates), tickers, np.array(rows, dtype=np.float64))


def write_returns_csv(panel: ReturnsPanel, path) -> None:
    """Write a panel back out; floats use repr so a reload is bit-exact."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *panel.tickers])
        for i, d in enumerate(panel.dates):
            writer.writerow([d.isoformat(), *[repr(float(v)) for v in panel.values[i]]])


def load_rate_csv(path) -> dict[dt.date, float]:
    """Parse a two-column 'date,value' CSV (risk-free or benchmark rates)."""
    path = Path(path)
    out: dict[dt.date, float] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DataError(f"{path}: expected 'date,value' header")
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise DataError(f"{path}: line {line_no}: expected 2 fields")
            date = _parse_date(row[0], line_no)
            if date in out:
                raise DataError(f"{path}: duplicate date {date.isoformat()} at line {line_no}")
            try:
                out[date] = float(row[1])
            except ValueError:
                raise DataError(f"{path}: line {line_no}: bad number {row[1]!r}")
    return out


def prices_to_returns(prices: ReturnsPanel) -> ReturnsPanel:
    """Convert an adjusted-close price panel to simple returns (drops first row)."""
    if prices.n_dates < 2:
        raise DataError("need at least two price rows to form returns")
    p = prices.values
    if np.any(p <= 0):
        raise DataError("prices must be strictly positive")
    rets = p[1:] / p[:-1] - 1.0
    return ReturnsPanel(prices.dates[1:], prices.tickers, rets)
