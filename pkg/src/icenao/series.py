"""Calendar-indexed daily series with an explicit observation mask.

Index ``i`` of a series corresponds to ``start + i`` days. Missing days are
kept in place with ``mask[i] == False`` so that every downstream statistic can
skip them without losing calendar alignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import RangeError


def _frozen_array(a, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DailySeries:
    """A daily scalar series starting at ``start``.

    Parameters
    ----------
    start : date
        Calendar date of index 0.
    values : array of float
        One entry per day. Entries with ``mask == False`` are ignored by all
        statistics; by convention they are stored as NaN.
    mask : array of bool
        True where the day was observed.
    units : str
        Unit label, e.g. "10^6 sq km" for sea-ice extent.
    """

    start: date
    values: np.ndarray
    mask: np.ndarray
    units: str = ""

    def __post_init__(self):
        values = _frozen_array(self.values, float)
        mask = _frozen_array(self.mask, bool)
        if values.ndim != 1 or mask.ndim != 1:
            raise ValueError("values and mask must be one-dimensional")
        if len(values) != len(mask):
            raise ValueError("values and mask must have equal length")
        if len(values) == 0:
            raise ValueError("series must contain at least one day")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> date:
        """Date of the last index."""
        return self.start + timedelta(days=len(self) - 1)

    def date_at(self, i: int) -> date:
        return self.start + timedelta(days=int(i))

    def index_of(self, d: date) -> int:
        """Index of calendar day ``d``; raises RangeError outside the span."""
        i = (d - self.start).days
        if not 0 <= i < len(self):
            raise RangeError(f"{d} outside series span {self.start}..{self.end}")
        return i

    def observed(self) -> np.ndarray:
        """Observed values in calendar order."""
        return self.values[self.mask]

    @property
    def n_observed(self) -> int:
        return int(self.mask.sum())

    def slice(self, from_date: date, to_date: date) -> DailySeries:
        """Sub-series covering [from_date, to_date], which must lie inside the span."""
        if from_date > to_date:
            raise RangeError(f"empty range {from_date}..{to_date}")
        i = self.index_of(from_date)
        j = self.index_of(to_date)
        return DailySeries(from_date, self.values[i : j + 1], self.mask[i : j + 1], self.units)

    def longest_observed_run(self) -> np.ndarray:
        """Values of the longest stretch of consecutive observed days."""
        best_start = best_len = 0
        run_start = run_len = 0
        for i, ok in enumerate(self.mask):
            if ok:
                if run_len == 0:
                    run_start = i
                run_len += 1
                if run_len > best_len:
                    best_start, best_len = run_start, run_len
            else:
                run_len = 0
        return self.values[best_start : best_start + best_len]


def full_series(start: date, values, units: str = "") -> DailySeries:
    """Series with every day observed."""
    values = np.asarray(values, dtype=float)
    return DailySeries(start, values, np.ones(len(values), dtype=bool), units)
