"""Quadratic trend plus harmonic seasonal model for daily series.

The mean model is

    x(t) = b0 + b1 t + b2 t^2
         + sum_j sum_{i=1..K} [ s_ji sin(i w_j t) + c_ji cos(i w_j t) ]

with t in days since the first day of the fitted series and w_j = 2 pi / P_j
for each seasonal period P_j. Fitting is ordinary least squares on the
observed days only; the trend columns are centered before solving (the raw
powers of a forty-year day count are badly scaled) and mapped back, so the
stored coefficients apply to raw t.

Differentiating d/dt sin(i w t) = i w cos(i w t) pulls down the full factor
i w per term, so velocity and acceleration have closed forms evaluable at
any t, observed or not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import ContractError, RangeError
from .regress import OlsFit, ols
from .series import DailySeries, full_series

PHASE_KINDS = ("position-velocity", "velocity-acceleration")


@dataclass(frozen=True)
class HarmonicSpec:
    periods: tuple[float, ...] = (365.25,)
    harmonics: int = 4

    def __post_init__(self):
        if len(self.periods) == 0:
            raise ContractError("need at least one seasonal period")
        if any(p <= 0 for p in self.periods):
            raise ContractError(f"periods must be positive, got {self.periods}")
        if self.harmonics < 0:
            raise ContractError(f"harmonics must be nonnegative, got {self.harmonics}")

    @property
    def n_columns(self) -> int:
        return 3 + 2 * len(self.periods) * self.harmonics

    def angular_frequencies(self) -> np.ndarray:
        """i * (2 pi / P_j), flattened over periods then harmonic order."""
        return np.concatenate(
            [2.0 * np.pi / p * np.arange(1, self.harmonics + 1) for p in self.periods]
        ) if self.harmonics > 0 else np.empty(0)


@dataclass(frozen=True)
class HarmonicFit:
    spec: HarmonicSpec
    t0: date
    trend: np.ndarray       # (3,) coefficients of 1, t, t^2 in raw days
    sin_coef: np.ndarray    # (n_periods, harmonics)
    cos_coef: np.ndarray    # (n_periods, harmonics)
    rss: float
    sigma2: float
    df_resid: int
    n_observed: int
    t_observed: np.ndarray  # day offsets of the rows that entered the fit
    residuals: np.ndarray
    units: str = ""
    labels: tuple[str, ...] = field(default=())

    def _flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            self.spec.angular_frequencies(),
            self.sin_coef.ravel(),
            self.cos_coef.ravel(),
        )

    def offsets(self, days: date | np.ndarray) -> np.ndarray:
        if isinstance(days, date):
            return np.array([(days - self.t0).days], dtype=float)
        return np.asarray(days, dtype=float)

    def position(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        b0, b1, b2 = self.trend
        out = b0 + b1 * t + b2 * t * t
        w, sc, cc = self._flat()
        if len(w):
            tw = np.outer(t, w)
            out = out + np.sin(tw) @ sc + np.cos(tw) @ cc
        return out

    def velocity(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        _, b1, b2 = self.trend
        out = b1 + 2.0 * b2 * t
        w, sc, cc = self._flat()
        if len(w):
            tw = np.outer(t, w)
            out = out + np.cos(tw) @ (w * sc) - np.sin(tw) @ (w * cc)
        return out

    def acceleration(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, 2.0 * self.trend[2])
        w, sc, cc = self._flat()
        if len(w):
            tw = np.outer(t, w)
            out = out - np.sin(tw) @ (w * w * sc) - np.cos(tw) @ (w * w * cc)
        return out


@dataclass(frozen=True)
class PhaseTrajectory:
    year: int
    kind: str
    points: np.ndarray  # (n_days, 2), one row per calendar day
    area: float


def design_columns(spec: HarmonicSpec, t: np.ndarray, center: float = 0.0) -> tuple[np.ndarray, list[str]]:
    """Design matrix [1, u, u^2, sin/cos pairs] with u = t - center.

    Seasonal columns always use raw t so their coefficients are phase-true;
    only the polynomial part is centered.
    """
    t = np.asarray(t, dtype=float)
    u = t - center
    cols = [np.ones_like(u), u, u * u]
    labels = ["const", "t", "t^2"]
    for p in spec.periods:
        base = 2.0 * np.pi / p
        for i in range(1, spec.harmonics + 1):
            cols.append(np.sin(i * base * t))
            cols.append(np.cos(i * base * t))
            labels.append(f"sin{i}_P{p:g}")
            labels.append(f"cos{i}_P{p:g}")
    return np.column_stack(cols), labels


def fit_harmonic(series: DailySeries, spec: HarmonicSpec = HarmonicSpec()) -> HarmonicFit:
    """Least-squares fit of the trend + seasonal model on observed days."""
    t_obs = np.flatnonzero(series.mask).astype(float)
    y = series.observed()
    m = float(t_obs.mean()) if len(t_obs) else 0.0
    X, labels = design_columns(spec, t_obs, center=m)
    fit: OlsFit = ols(X, y, labels)

    a0, a1, a2 = fit.coef[:3]
    trend = np.array([a0 - a1 * m + a2 * m * m, a1 - 2.0 * a2 * m, a2])
    rest = fit.coef[3:]
    nper, k = len(spec.periods), spec.harmonics
    sin_coef = rest[0::2].reshape(nper, k) if k > 0 else np.zeros((nper, 0))
    cos_coef = rest[1::2].reshape(nper, k) if k > 0 else np.zeros((nper, 0))
    for a in (trend, sin_coef, cos_coef):
        a.setflags(write=False)
    return HarmonicFit(
        spec=spec,
        t0=series.start,
        trend=trend,
        sin_coef=sin_coef,
        cos_coef=cos_coef,
        rss=fit.rss,
        sigma2=fit.sigma2,
        df_resid=fit.df_resid,
        n_observed=len(y),
        t_observed=t_obs,
        residuals=fit.residuals,
        units=series.units,
        labels=tuple(labels),
    )


def eval_fit(fit: HarmonicFit, t: np.ndarray) -> np.ndarray:
    return fit.position(t)


def derivative_series(fit: HarmonicFit, from_date: date, to_date: date) -> tuple[DailySeries, DailySeries]:
    """Daily velocity and acceleration series over [from_date, to_date]."""
    if from_date > to_date:
        raise RangeError(f"empty range {from_date}..{to_date}")
    n = (to_date - from_date).days + 1
    t = (from_date - fit.t0).days + np.arange(n, dtype=float)
    per_day = f"{fit.units}/day" if fit.units else ""
    per_day2 = f"{fit.units}/day^2" if fit.units else ""
    vel = full_series(from_date, fit.velocity(t), units=per_day)
    acc = full_series(from_date, fit.acceleration(t), units=per_day2)
    return vel, acc


def shoelace_area(points: np.ndarray) -> float:
    """Unsigned polygon area of the closed loop through the rows in order."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 3:
        raise ContractError(f"need an (n>=3, 2) point array, got shape {points.shape}")
    x, y = points[:, 0], points[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(0.5 * abs(np.sum(x * yn - xn * y)))


def phase_trajectory(fit: HarmonicFit, year: int, kind: str = "position-velocity") -> PhaseTrajectory:
    """One calendar year of the fitted model's orbit in a phase plane.

    Sampled once per day; the enclosed area is the shoelace area of that
    polygon, closing the loop from Dec 31 back to Jan 1.
    """
    if kind not in PHASE_KINDS:
        raise ContractError(f"kind must be one of {PHASE_KINDS}, got {kind!r}")
    start = date(year, 1, 1)
    n = (date(year, 12, 31) - start).days + 1
    t = (start - fit.t0).days + np.arange(n, dtype=float)
    if kind == "position-velocity":
        u, v = fit.position(t), fit.velocity(t)
    else:
        u, v = fit.velocity(t), fit.acceleration(t)
    points = np.column_stack([u, v])
    area = shoelace_area(points)
    points.setflags(write=False)
    return PhaseTrajectory(year=year, kind=kind, points=points, area=area)


def trajectory_to_csv(traj: PhaseTrajectory) -> str:
    """CSV with one row per day of year and a trailing area footer line."""
    lines = ["year,t,u,v"]
    for i, (u, v) in enumerate(traj.points, start=1):
        lines.append(f"{traj.year},{i},{float(u)!r},{float(v)!r}")
    lines.append(f"# area={float(traj.area)!r}")
    return "\n".join(lines) + "\n"
