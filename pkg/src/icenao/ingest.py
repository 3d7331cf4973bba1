"""Parsers and calendar repair for the two input products.

Sea-ice extent arrives as the NSIDC daily v3.0 CSV (two header lines, then
``Year, Month, Day, Extent, Missing, Source`` rows, missing sentinel -9999).
The oscillation index arrives as the NOAA daily ASCII file (whitespace rows
``year month day value``). Both parsers emit a :class:`DailySeries` covering
every calendar day between the first and last accepted row, masking days the
file does not report, plus an :class:`IngestReport` of what was read.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import EmptyInputError, ParseError, RangeError
from .series import DailySeries

SIE_UNITS = "10^6 sq km"
NAO_UNITS = "index"
SIE_MISSING_SENTINEL = -9999.0


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    rows_rejected: int
    gaps_filled: int
    date_range: tuple[date, date]


def _parse_date(year_s: str, month_s: str, day_s: str, line_no: int) -> date:
    try:
        y, m, d = int(year_s), int(month_s), int(day_s)
    except ValueError as exc:
        raise ParseError(f"non-numeric date field: {exc}", line_no) from None
    try:
        return date(y, m, d)
    except ValueError:
        raise ParseError(f"invalid calendar date {y}-{m}-{d}", line_no) from None


def _series_from_rows(rows: dict[date, float], units: str) -> DailySeries:
    first, last = min(rows), max(rows)
    n = (last - first).days + 1
    values = np.full(n, np.nan)
    mask = np.zeros(n, dtype=bool)
    for d, v in rows.items():
        i = (d - first).days
        values[i] = v
        mask[i] = True
    return DailySeries(first, values, mask, units)


def parse_sie(file_content: str) -> tuple[DailySeries, IngestReport]:
    """Parse the NSIDC daily extent CSV.

    The first two non-blank lines are headers. Rows must be in strictly
    increasing date order; violations are rejected and counted. An extent
    equal to the -9999 sentinel masks the day out.
    """
    rows: dict[date, float] = {}
    rows_read = rows_rejected = 0
    headers_left = 2
    last_accepted: date | None = None
    for line_no, raw in enumerate(file_content.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if headers_left > 0:
            headers_left -= 1
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) < 5:
            raise ParseError(f"expected at least 5 comma-separated fields, got {len(fields)}", line_no)
        rows_read += 1
        day = _parse_date(fields[0], fields[1], fields[2], line_no)
        try:
            extent = float(fields[3])
        except ValueError:
            raise ParseError(f"non-numeric extent {fields[3]!r}", line_no) from None
        if last_accepted is not None and day <= last_accepted:
            rows_rejected += 1
            continue
        last_accepted = day
        if extent != SIE_MISSING_SENTINEL:
            rows[day] = extent
    if not rows:
        raise EmptyInputError("no data rows in extent file")
    series = _series_from_rows(rows, SIE_UNITS)
    report = IngestReport(rows_read, rows_rejected, 0, (series.start, series.end))
    return series, report


def parse_nao(file_content: str) -> tuple[DailySeries, IngestReport]:
    """Parse the NOAA daily index ASCII file.

    Rows are whitespace-delimited ``year month day value``. Duplicate dates
    keep the last value and count the overwritten row as rejected. Calendar
    days absent from the file are masked out.
    """
    rows: dict[date, float] = {}
    rows_read = rows_rejected = 0
    for line_no, raw in enumerate(file_content.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(f"expected 4 whitespace-separated fields, got {len(fields)}", line_no)
        rows_read += 1
        day = _parse_date(fields[0], fields[1], fields[2], line_no)
        try:
            value = float(fields[3])
        except ValueError:
            raise ParseError(f"non-numeric index value {fields[3]!r}", line_no) from None
        if day in rows:
            rows_rejected += 1
        rows[day] = value
    if not rows:
        raise EmptyInputError("no data rows in index file")
    series = _series_from_rows(rows, NAO_UNITS)
    report = IngestReport(rows_read, rows_rejected, 0, (series.start, series.end))
    return series, report


def serialize_sie(s: DailySeries) -> str:
    """Render a series back to the NSIDC CSV format (observed days only)."""
    lines = [
        "Year, Month, Day, Extent, Missing, Source Data",
        "YYYY,    MM,  DD, 10^6 sq km, 10^6 sq km, Source data product",
    ]
    for i in np.flatnonzero(s.mask):
        d = s.date_at(i)
        lines.append(f"{d.year}, {d.month:2d}, {d.day:2d}, {float(s.values[i])!r}, 0.0, generated")
    return "\n".join(lines) + "\n"


def serialize_nao(s: DailySeries) -> str:
    """Render a series back to the NOAA ASCII format (observed days only)."""
    lines = []
    for i in np.flatnonzero(s.mask):
        d = s.date_at(i)
        lines.append(f"{d.year} {d.month} {d.day} {float(s.values[i])!r}")
    return "\n".join(lines) + "\n"


def align(
    a: DailySeries, b: DailySeries, from_date: date, to_date: date
) -> tuple[DailySeries, DailySeries]:
    """Reindex both series onto the common calendar [from_date, to_date].

    Days a source does not cover (or did not observe) are masked out in its
    output. Both outputs share ``start == from_date`` and identical length.
    """
    if from_date > to_date:
        raise RangeError(f"empty range {from_date}..{to_date}")
    for name, s in (("first", a), ("second", b)):
        if s.end < from_date or s.start > to_date:
            raise RangeError(f"{name} series {s.start}..{s.end} does not overlap {from_date}..{to_date}")
    return _reindex(a, from_date, to_date), _reindex(b, from_date, to_date)


def _reindex(s: DailySeries, from_date: date, to_date: date) -> DailySeries:
    n = (to_date - from_date).days + 1
    values = np.full(n, np.nan)
    mask = np.zeros(n, dtype=bool)
    offset = (s.start - from_date).days
    src_lo = max(0, -offset)
    src_hi = min(len(s), n - offset)
    if src_lo < src_hi:
        dst = slice(src_lo + offset, src_hi + offset)
        values[dst] = s.values[src_lo:src_hi]
        mask[dst] = s.mask[src_lo:src_hi]
    values[~mask] = np.nan
    return DailySeries(from_date, values, mask, s.units)


def fill_alternate_days(s: DailySeries, until: date) -> tuple[DailySeries, IngestReport]:
    """Interpolate isolated one-day gaps in the alternate-day era.

    A masked day strictly before ``until`` whose two calendar neighbours are
    both observed gets their arithmetic mean and is marked observed. Longer
    gaps, and anything on or after ``until``, are left untouched. Neighbour
    status is judged against the original mask, so consecutive gaps never
    chain-fill.
    """
    values = s.values.copy()
    mask = s.mask.copy()
    filled = 0
    limit = min(len(s) - 1, (until - s.start).days)  # indices < limit are before `until`
    for i in range(1, limit):
        if not s.mask[i] and s.mask[i - 1] and s.mask[i + 1]:
            values[i] = 0.5 * (s.values[i - 1] + s.values[i + 1])
            mask[i] = True
            filled += 1
    out = DailySeries(s.start, values, mask, s.units)
    report = IngestReport(len(s), 0, filled, (s.start, s.end))
    return out, report
