"""Serial-dependence and long-memory diagnostics for daily series.

Conventions, fixed once here so every caller agrees:

* Autocorrelation uses the biased divide-by-n estimator with pairwise
  deletion on masked days: the numerator sums over pairs where both days
  are observed, the denominator is the full sum of squared deviations over
  observed days. Cauchy-Schwarz then keeps every value in [-1, 1] and
  r(0) == 1 exactly.
* Cross-correlation at lag k pairs a(t) with b(t+k): a positive peak at
  k > 0 means b echoes a k days later.
* Rescaled-range analysis runs on the longest contiguous observed stretch.
  Five Hurst readings come from two block grids (dyadic, and geometric with
  ratio 1.25) with and without the Anis-Lloyd/Peters small-sample
  correction, plus the correction curve's own slope as a white-noise
  reference point.
* The unit-root test is the augmented Dickey-Fuller regression with a
  constant, lag order chosen by AIC over a common sample, critical values
  from the usual response-surface coefficients for the constant-only case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ContractError, InsufficientDataError, ZeroVarianceError
from .regress import ols
from .series import DailySeries

MIN_HURST_OBS = 256
HURST_MIN_BLOCK = 8
HURST_DENSE_RATIO = 1.25
ANIS_LLOYD_GAMMA_CUTOFF = 340

# response-surface coefficients for the constant-only case: crit = b0 + b1/T + b2/T^2 + b3/T^3
ADF_CRIT_COEF = {
    0.01: (-3.43035, -6.5393, -16.786, -79.433),
    0.05: (-2.86154, -2.8903, -4.234, -40.04),
    0.10: (-2.56677, -1.5384, -2.809, 0.0),
}
ADF_BRACKETS = ((0.0, 0.01), (0.01, 0.05), (0.05, 0.10), (0.10, 1.0))


@dataclass(frozen=True)
class Correlogram:
    lags: np.ndarray
    values: np.ndarray
    band: float     # two-sided 95% white-noise band: +-band
    n: int


@dataclass(frozen=True)
class HurstReport:
    simple_rs: float
    corrected_rs: float
    empirical: float
    corrected_empirical: float
    theoretical: float
    n: int
    reliable: bool


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    crit_1pct: float
    crit_5pct: float
    crit_10pct: float
    p_bracket: tuple[float, float]
    lags_used: int
    n_used: int
    reject_5pct: bool


@dataclass(frozen=True)
class SkewBucket:
    key: str
    n: int
    mean: float
    median: float

    @property
    def median_minus_mean(self) -> float:
        return self.median - self.mean


@dataclass(frozen=True)
class SkewSummary:
    bucket: str
    rows: tuple[SkewBucket, ...]
    skipped: tuple[str, ...]
    n_median_above_mean: int


def _as_masked(x) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, DailySeries):
        return x.values, x.mask
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ContractError(f"need a 1-D array or a daily series, got shape {v.shape}")
    return v, np.isfinite(v)


def _longest_run(x) -> np.ndarray:
    if isinstance(x, DailySeries):
        return x.longest_observed_run()
    v, mask = _as_masked(x)
    best_len = best_lo = run_lo = 0
    run = 0
    for i, ok in enumerate(mask):
        if ok:
            if run == 0:
                run_lo = i
            run += 1
            if run > best_len:
                best_len, best_lo = run, run_lo
        else:
            run = 0
    return v[best_lo : best_lo + best_len]


# ---------------------------------------------------------------- correlograms


def acf(x, max_lag: int) -> Correlogram:
    """Autocorrelation at lags 0..max_lag."""
    v, mask = _as_masked(x)
    n_obs = int(mask.sum())
    if n_obs < 2:
        raise InsufficientDataError(f"need at least 2 observed values, got {n_obs}")
    if not 0 < max_lag < len(v):
        raise ContractError(f"max_lag must be in (0, {len(v)}), got {max_lag}")
    mean = v[mask].mean()
    d = np.where(mask, v - mean, 0.0)
    denom = float(np.sum(d[mask] ** 2))
    if denom == 0.0:
        raise ZeroVarianceError("series is constant on its observed days")
    values = np.empty(max_lag + 1)
    values[0] = 1.0
    for k in range(1, max_lag + 1):
        pair = mask[:-k] & mask[k:]
        values[k] = float(np.sum(d[:-k][pair] * d[k:][pair])) / denom
    lags = np.arange(max_lag + 1)
    for a in (lags, values):
        a.setflags(write=False)
    return Correlogram(lags, values, 1.96 / np.sqrt(n_obs), n_obs)


def ccf(a: DailySeries, b: DailySeries, max_lag: int) -> Correlogram:
    """Cross-correlation of a(t) with b(t+k) for k in -max_lag..max_lag.

    Both series must live on the same calendar grid (same start, same
    length); align them first. Deviations are taken from each series' own
    observed mean and scaled by the product of observed standard
    deviations, averaging over the valid pairs at each lag.
    """
    if a.start != b.start or len(a) != len(b):
        raise ContractError("series must be aligned to the same calendar grid")
    if not 0 < max_lag < len(a):
        raise ContractError(f"max_lag must be in (0, {len(a)}), got {max_lag}")
    va, ma = a.values, a.mask
    vb, mb = b.values, b.mask
    n_a, n_b = int(ma.sum()), int(mb.sum())
    if min(n_a, n_b) < 2:
        raise InsufficientDataError("need at least 2 observed values in each series")
    sa = va[ma].std()
    sb = vb[mb].std()
    if sa == 0.0 or sb == 0.0:
        raise ZeroVarianceError("a series is constant on its observed days")
    da = np.where(ma, va - va[ma].mean(), 0.0)
    db = np.where(mb, vb - vb[mb].mean(), 0.0)
    lags = np.arange(-max_lag, max_lag + 1)
    values = np.empty(len(lags))
    for i, k in enumerate(lags):
        if k >= 0:
            pair = ma[: len(ma) - k if k else None] & mb[k:]
            num = da[: len(da) - k if k else None][pair] * db[k:][pair]
        else:
            pair = ma[-k:] & mb[:k]
            num = da[-k:][pair] * db[:k][pair]
        npairs = int(pair.sum())
        values[i] = float(num.sum()) / (npairs * sa * sb) if npairs else 0.0
    for arr in (lags, values):
        arr.setflags(write=False)
    return Correlogram(lags, values, 1.96 / np.sqrt(min(n_a, n_b)), min(n_a, n_b))


def correlogram_to_csv(c: Correlogram) -> str:
    band = float(c.band)
    lines = ["lag,value,band"]
    for lag, r in zip(c.lags, c.values):
        lines.append(f"{int(lag)},{float(r)!r},{band!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- rescaled range


def expected_rescaled_range(m: int) -> float:
    """Small-sample expectation of R/S for white noise at block size m."""
    if m < 2:
        raise ContractError(f"block size must be >= 2, got {m}")
    i = np.arange(1, m)
    tail = float(np.sum(np.sqrt((m - i) / i)))
    if m <= ANIS_LLOYD_GAMMA_CUTOFF:
        front = float(np.exp(gammaln((m - 1) / 2.0) - gammaln(m / 2.0))) / np.sqrt(np.pi)
    else:
        front = 1.0 / np.sqrt(m * np.pi / 2.0)
    return (m - 0.5) / m * front * tail


def _mean_rescaled_range(x: np.ndarray, m: int) -> float:
    nb = len(x) // m
    blocks = x[: nb * m].reshape(nb, m)
    z = blocks - blocks.mean(axis=1, keepdims=True)
    y = np.cumsum(z, axis=1)
    r = y.max(axis=1) - y.min(axis=1)
    s = blocks.std(axis=1)
    ok = s > 0
    if not ok.any():
        return np.nan
    return float(np.mean(r[ok] / s[ok]))


def _dyadic_grid(n: int) -> np.ndarray:
    sizes = []
    m = HURST_MIN_BLOCK
    while m <= n // 2:
        sizes.append(m)
        m *= 2
    return np.array(sizes, dtype=int)


def _dense_grid(n: int) -> np.ndarray:
    sizes = []
    m = float(HURST_MIN_BLOCK)
    while int(m) <= n // 2:
        sizes.append(int(m))
        m *= HURST_DENSE_RATIO
    return np.unique(np.array(sizes, dtype=int))


def _slope(logx: np.ndarray, logy: np.ndarray) -> float:
    return float(np.polyfit(logx, logy, 1)[0])


def hurst(x) -> HurstReport:
    """Five rescaled-range readings of long memory.

    simple_rs / empirical: raw log-log slope on the dyadic / dense grid.
    corrected_rs / corrected_empirical: 0.5 plus the slope of the deviation
    from the white-noise expectation on the same grids. theoretical: slope
    of the white-noise expectation itself, i.e. what an uncorrected
    estimator would report on memoryless data of this length.
    """
    v = _longest_run(x)
    n = len(v)
    if n < MIN_HURST_OBS:
        raise InsufficientDataError(
            f"need a contiguous run of at least {MIN_HURST_OBS} observed days, got {n}"
        )

    def grid_stats(sizes: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rs = np.array([_mean_rescaled_range(v, m) for m in sizes])
        ok = np.isfinite(rs)
        sizes, rs = sizes[ok], rs[ok]
        ers = np.array([expected_rescaled_range(m) for m in sizes])
        return sizes, rs, ers

    md, rsd, ersd = grid_stats(_dyadic_grid(n))
    me, rse, erse = grid_stats(_dense_grid(n))
    if len(md) < 2 or len(me) < 2:
        raise InsufficientDataError("too few usable block sizes for a log-log slope")

    simple_rs = _slope(np.log2(md), np.log2(rsd))
    corrected_rs = 0.5 + _slope(np.log2(md), np.log2(rsd) - np.log2(ersd))
    empirical = _slope(np.log2(me), np.log2(rse))
    corrected_empirical = 0.5 + _slope(np.log2(me), np.log2(rse) - np.log2(erse))
    theoretical = _slope(np.log2(me), np.log2(erse))
    estimates = (simple_rs, corrected_rs, empirical, corrected_empirical, theoretical)
    reliable = all(0.0 < e < 1.5 for e in estimates)
    return HurstReport(*estimates, n=n, reliable=reliable)


# ---------------------------------------------------------------- unit root


def _adf_design(y: np.ndarray, p: int, t_start: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows Δy_t ~ [1, y_{t-1}, Δy_{t-1..t-p}] for t = t_start..n-1."""
    dy = np.diff(y)
    t = np.arange(t_start, len(y))
    cols = [np.ones(len(t)), y[t - 1]]
    for i in range(1, p + 1):
        cols.append(dy[t - 1 - i])
    return np.column_stack(cols), dy[t - 1]


def adf_test(x, max_lag: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant term.

    Lag order 0..max_lag is picked by AIC with every candidate fit on the
    same rows, then the chosen order is refit on its own maximal sample.
    The default max_lag is the common 12*(T/100)^(1/4) rule.
    """
    v = _longest_run(x)
    n = len(v)
    if max_lag is None:
        max_lag = int(12 * (n / 100.0) ** 0.25)
    if max_lag < 0:
        raise ContractError(f"max_lag must be nonnegative, got {max_lag}")
    if n < max_lag + 20:
        raise InsufficientDataError(f"{n} observations is too few for max_lag={max_lag}")

    common_start = max_lag + 1
    best_p, best_aic = 0, np.inf
    for p in range(max_lag + 1):
        X, dy = _adf_design(v, p, common_start)
        fit = ols(X, dy)
        nc = len(dy)
        aic = nc * np.log(fit.rss / nc) + 2 * (p + 2)
        if aic < best_aic:
            best_p, best_aic = p, aic

    X, dy = _adf_design(v, best_p, best_p + 1)
    fit = ols(X, dy)
    stat = float(fit.coef[1] / fit.se[1])
    t_eff = len(dy)
    crits = {
        a: b[0] + b[1] / t_eff + b[2] / t_eff**2 + b[3] / t_eff**3
        for a, b in ADF_CRIT_COEF.items()
    }
    bracket = ADF_BRACKETS[-1]
    for (lo, hi), alpha in zip(ADF_BRACKETS, (0.01, 0.05, 0.10)):
        if stat < crits[alpha]:
            bracket = (lo, hi)
            break
    return AdfResult(
        statistic=stat,
        crit_1pct=crits[0.01],
        crit_5pct=crits[0.05],
        crit_10pct=crits[0.10],
        p_bracket=bracket,
        lags_used=best_p,
        n_used=t_eff,
        reject_5pct=stat < crits[0.05],
    )


# ---------------------------------------------------------------- skew summaries


def skew_summary(series: DailySeries, bucket: str = "year", min_obs: int = 5) -> SkewSummary:
    """Mean vs median per calendar year or month on observed days."""
    if bucket not in ("year", "month"):
        raise ContractError(f"bucket must be 'year' or 'month', got {bucket!r}")
    groups: dict[str, list[float]] = {}
    for i in np.flatnonzero(series.mask):
        d = series.date_at(int(i))
        key = f"{d.year:04d}" if bucket == "year" else f"{d.year:04d}-{d.month:02d}"
        groups.setdefault(key, []).append(float(series.values[i]))
    rows = []
    skipped = []
    for key in sorted(groups):
        vals = np.array(groups[key])
        if len(vals) < min_obs:
            skipped.append(key)
            continue
        rows.append(SkewBucket(key, len(vals), float(vals.mean()), float(np.median(vals))))
    if not rows:
        raise InsufficientDataError("no bucket has enough observed days")
    above = sum(1 for r in rows if r.median > r.mean)
    return SkewSummary(bucket, tuple(rows), tuple(skipped), above)
