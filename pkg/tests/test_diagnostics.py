from datetime import date

import numpy as np
import pytest

from icenao import (
    ContractError,
    DailySeries,
    InsufficientDataError,
    ZeroVarianceError,
    full_series,
)
from icenao.diagnostics import (
    acf,
    adf_test,
    ccf,
    correlogram_to_csv,
    expected_rescaled_range,
    hurst,
    skew_summary,
)
from icenao.fgn import generate_fgn
from icenao.regress import ols

D0 = date(2000, 1, 1)


def ar1(phi, n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n) * scale
    x = np.empty(n)
    x[0] = e[0]
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x


# ---------------------------------------------------------------- acf


def test_acf_lag0_is_one_and_band():
    c = acf(full_series(D0, ar1(0.3, 400, 0)), max_lag=10)
    assert c.values[0] == 1.0
    assert c.band == pytest.approx(1.96 / np.sqrt(400))
    assert c.n == 400
    assert list(c.lags) == list(range(11))


def test_acf_matches_ar1_theory():
    x = ar1(0.6, 20_000, 1)
    c = acf(full_series(D0, x), max_lag=5)
    for k in range(1, 6):
        assert c.values[k] == pytest.approx(0.6**k, abs=0.03)


def test_acf_bounded_under_masking():
    rng = np.random.default_rng(2)
    for seed in range(10):
        v = ar1(0.8, 300, seed)
        mask = rng.random(300) > 0.4
        s = DailySeries(D0, np.where(mask, v, np.nan), mask)
        c = acf(s, max_lag=40)
        assert np.all(np.abs(c.values) <= 1.0 + 1e-12)


def test_acf_pairwise_deletion_preserves_decay_rate():
    # masking deflates every lag by roughly the same pair-coverage factor,
    # so the geometric decay of an AR(1) survives even if levels shrink
    x = ar1(0.7, 10_000, 3)
    rng = np.random.default_rng(4)
    mask = rng.random(10_000) > 0.2
    part = acf(DailySeries(D0, np.where(mask, x, np.nan), mask), max_lag=5)
    ratios = part.values[2:6] / part.values[1:5]
    assert np.allclose(ratios, 0.7, atol=0.08)


def test_acf_affine_invariance():
    x = ar1(0.5, 500, 5)
    a = acf(full_series(D0, x), 8)
    b = acf(full_series(D0, 3.7 * x - 11.0), 8)
    assert np.allclose(a.values, b.values, atol=1e-12)


def test_acf_errors():
    with pytest.raises(ZeroVarianceError):
        acf(full_series(D0, np.full(50, 2.5)), 5)
    with pytest.raises(ContractError):
        acf(full_series(D0, np.arange(10.0)), 10)
    with pytest.raises(InsufficientDataError):
        acf(DailySeries(D0, np.array([1.0, np.nan]), np.array([True, False])), 1)


# ---------------------------------------------------------------- ccf


def test_ccf_peak_at_lead():
    # b echoes a five days later: peak must sit at k = +5
    rng = np.random.default_rng(6)
    n, shift = 4000, 5
    a = rng.standard_normal(n)
    b = np.roll(a, shift) + 0.05 * rng.standard_normal(n)
    b[:shift] = rng.standard_normal(shift)
    c = ccf(full_series(D0, a), full_series(D0, b), max_lag=20)
    assert c.lags[np.argmax(c.values)] == shift
    assert c.values[np.argmax(c.values)] > 0.9


def test_ccf_lag_reversal_swaps_roles():
    rng = np.random.default_rng(7)
    a = full_series(D0, rng.standard_normal(500))
    b = full_series(D0, rng.standard_normal(500))
    ab = ccf(a, b, 10)
    ba = ccf(b, a, 10)
    assert np.allclose(ab.values, ba.values[::-1], atol=1e-12)


def test_ccf_shape_and_alignment_checks():
    a = full_series(D0, np.random.default_rng(8).standard_normal(100))
    c = ccf(a, a, 7)
    assert len(c.lags) == 15
    assert c.values[7] == pytest.approx(1.0)  # lag 0 of a with itself
    b = full_series(date(2001, 1, 1), np.zeros(100))
    with pytest.raises(ContractError):
        ccf(a, b, 5)


def test_correlogram_csv_format():
    c = acf(full_series(D0, ar1(0.4, 100, 9)), 6)
    lines = correlogram_to_csv(c).strip().split("\n")
    assert lines[0] == "lag,value,band"
    assert len(lines) == 1 + 7
    assert lines[1] == f"0,1.0,{float(c.band)!r}"
    # one band, repeated on every row so each line stands alone
    assert len({ln.split(",")[2] for ln in lines[1:]}) == 1


def test_ccf_csv_row_count():
    a = full_series(D0, np.random.default_rng(10).standard_normal(200))
    c = ccf(a, a, 30)
    lines = correlogram_to_csv(c).strip().split("\n")
    assert len(lines) == 1 + (2 * 30 + 1)


# ---------------------------------------------------------------- hurst


def test_expected_rescaled_range_continuity_at_cutoff():
    # gamma-ratio and asymptotic branches should agree near the switch
    lo = expected_rescaled_range(340)
    hi = expected_rescaled_range(341)
    assert abs(hi - lo) / lo < 0.01


def test_expected_rescaled_range_growth():
    ms = np.array([16, 64, 256, 1024])
    ers = np.array([expected_rescaled_range(m) for m in ms])
    slopes = np.diff(np.log2(ers)) / np.diff(np.log2(ms))
    assert np.all(slopes > 0.5)
    assert np.all(slopes < 0.65)


def test_hurst_white_noise_centers_on_half():
    rep_mean = np.mean(
        [hurst(generate_fgn(0.5, 10_000, s)).corrected_empirical for s in range(5)]
    )
    assert rep_mean == pytest.approx(0.5, abs=0.07)


def test_hurst_orders_with_memory():
    strong = hurst(generate_fgn(0.85, 8192, 0))
    weak = hurst(generate_fgn(0.55, 8192, 0))
    assert strong.corrected_empirical > weak.corrected_empirical + 0.1
    assert strong.simple_rs > weak.simple_rs + 0.1
    assert strong.reliable


def test_hurst_theoretical_ignores_the_data():
    a = hurst(generate_fgn(0.5, 4096, 1))
    b = hurst(generate_fgn(0.9, 4096, 2))
    assert a.theoretical == pytest.approx(b.theoretical, abs=1e-12)


def test_hurst_uses_longest_contiguous_run():
    x = generate_fgn(0.7, 2000, 3)
    values = np.concatenate([x[:300], [np.nan], x[300:]])
    mask = np.isfinite(values)
    s = DailySeries(D0, values, mask)
    direct = hurst(x[300:])
    via_series = hurst(s)
    assert via_series.n == 1700
    assert via_series.simple_rs == pytest.approx(direct.simple_rs, abs=1e-12)


def test_hurst_needs_256_contiguous():
    with pytest.raises(InsufficientDataError):
        hurst(np.random.default_rng(4).standard_normal(255))


# ---------------------------------------------------------------- adf


def test_adf_statistic_matches_hand_regression():
    v = ar1(0.4, 200, 11)
    res = adf_test(v, max_lag=0)
    dy = np.diff(v)
    X = np.column_stack([np.ones(199), v[:-1]])
    fit = ols(X, dy)
    assert res.statistic == pytest.approx(fit.coef[1] / fit.se[1], abs=1e-12)
    assert res.lags_used == 0
    assert res.n_used == 199


def test_adf_critical_values_match_response_surface():
    res = adf_test(ar1(0.4, 500, 12), max_lag=2)
    t = res.n_used
    want5 = -2.86154 - 2.8903 / t - 4.234 / t**2 - 40.04 / t**3
    assert res.crit_5pct == pytest.approx(want5, abs=1e-12)
    assert res.crit_1pct < res.crit_5pct < res.crit_10pct


def test_adf_rejects_stationary_ar1():
    res = adf_test(ar1(0.5, 500, 13))
    assert res.reject_5pct
    assert res.statistic < res.crit_1pct
    assert res.p_bracket == (0.0, 0.01)


def test_adf_keeps_random_walk():
    rng = np.random.default_rng(14)
    rw = np.cumsum(rng.standard_normal(500))
    res = adf_test(rw)
    assert not res.reject_5pct
    assert res.p_bracket[0] >= 0.05


def test_adf_size_and_power_small_batch():
    rej_rw = rej_ar = 0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        if adf_test(np.cumsum(rng.standard_normal(400))).reject_5pct:
            rej_rw += 1
        if adf_test(ar1(0.5, 400, 2000 + seed)).reject_5pct:
            rej_ar += 1
    assert rej_rw <= 3
    assert rej_ar >= 18


def test_adf_affine_invariance():
    v = ar1(0.6, 300, 15)
    a = adf_test(v, max_lag=3)
    b = adf_test(5.0 * v + 100.0, max_lag=3)
    assert a.statistic == pytest.approx(b.statistic, abs=1e-8)
    assert a.lags_used == b.lags_used


def test_adf_too_short():
    with pytest.raises(InsufficientDataError):
        adf_test(np.arange(10.0), max_lag=4)


# ---------------------------------------------------------------- skew


def test_skew_summary_yearly():
    n = (date(2001, 12, 31) - date(2000, 1, 1)).days + 1
    values = np.zeros(n)
    # year 2000: symmetric around 1.0; year 2001: one huge outlier above
    values[:366] = np.tile([0.0, 2.0], 183)
    values[366:] = 1.0
    values[400] = 1000.0
    s = full_series(date(2000, 1, 1), values)
    rep = skew_summary(s, "year")
    assert [r.key for r in rep.rows] == ["2000", "2001"]
    r2000, r2001 = rep.rows
    assert r2000.mean == pytest.approx(r2000.median)
    assert r2001.mean > r2001.median  # outlier drags the mean up
    assert r2001.median_minus_mean < 0
    assert rep.n_median_above_mean == 0


def test_skew_summary_monthly_keys_and_skip():
    values = np.ones(40)
    mask = np.ones(40, dtype=bool)
    mask[31 + 3 :] = False  # February keeps only 3 observed days
    s = DailySeries(date(2000, 1, 1), np.where(mask, values, np.nan), mask)
    rep = skew_summary(s, "month")
    assert [r.key for r in rep.rows] == ["2000-01"]
    assert rep.skipped == ("2000-02",)


def test_skew_summary_median_above_mean_count():
    # week of mostly high values with a low outlier: median > mean
    vals = np.array([10.0, 10.0, 10.0, 10.0, -50.0, 10.0, 10.0])
    s = full_series(date(2000, 1, 1), vals)
    rep = skew_summary(s, "year")
    assert rep.n_median_above_mean == 1


def test_skew_summary_bad_bucket():
    with pytest.raises(ContractError):
        skew_summary(full_series(D0, np.ones(10)), "week")


def test_skew_summary_nothing_usable():
    with pytest.raises(InsufficientDataError):
        skew_summary(full_series(D0, np.ones(3)), "year")
