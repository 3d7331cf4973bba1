import numpy as np
import pytest
from scipy.stats import kstest

from icenao import ContractError, InsufficientDataError, SingularDesignError
from icenao.regress import (
    FTestResult,
    f_tail_prob,
    f_test_nested,
    lambda_max,
    lasso,
    lasso_path_cv,
    ols,
    predict,
    soft_threshold,
)

# Frozen from an independent quadrature of the F density (log-space density,
# adaptive quadrature on the inverted tail u = 1/x). Cross-checked to <5e-15.
F_TAIL_ORACLE = [
    (100.0, 1, 100, 9.9016889845940775e-17),
    (0.5, 3, 40, 6.8441377661913749e-01),
    (2.0, 5, 120, 8.3450015538066649e-02),
    (9.3, 2, 17, 1.8684903057308822e-03),
    (1.0, 1, 1, 5.0000000000000033e-01),
    (4.2, 10, 2000, 8.6607913983193802e-06),
    (0.05, 7, 9, 9.9965902984296018e-01),
    (25.0, 3, 50, 5.0570380937738491e-10),
]


# ---------------------------------------------------------------- OLS


def test_ols_recovers_exact_data():
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(50), rng.normal(size=(50, 3))])
    beta = np.array([1.0, -2.0, 0.5, 3.0])
    fit = ols(X, X @ beta)
    assert fit.rss < 1e-12 * 50
    assert np.allclose(fit.coef, beta, atol=1e-8)


def test_ols_residuals_orthogonal_to_design():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(80), rng.normal(size=(80, 4))])
    y = rng.normal(size=80)
    fit = ols(X, y)
    assert np.max(np.abs(X.T @ fit.residuals)) < 1e-9 * len(y)


def test_ols_slope_within_3_se():
    rng = np.random.default_rng(2)
    t = np.arange(200.0)
    y = 2.0 + 3.0 * t + rng.normal(scale=5.0, size=200)
    fit = ols(np.column_stack([np.ones(200), t]), y)
    assert abs(fit.coef[1] - 3.0) < 3.0 * fit.se[1]


def test_ols_se_matches_gramian_formula():
    rng = np.random.default_rng(3)
    X = np.column_stack([np.ones(60), rng.normal(size=(60, 2))])
    y = rng.normal(size=60)
    fit = ols(X, y)
    cov = fit.sigma2 * np.linalg.inv(X.T @ X)
    assert np.allclose(fit.se, np.sqrt(np.diag(cov)), rtol=1e-9)


def test_ols_duplicate_column_names_culprit():
    rng = np.random.default_rng(4)
    a = rng.normal(size=30)
    X = np.column_stack([np.ones(30), a, a])
    with pytest.raises(SingularDesignError) as exc:
        ols(X, rng.normal(size=30), labels=["const", "b", "c"])
    assert exc.value.column in ("b", "c")
    assert exc.value.column in str(exc.value)


def test_ols_too_few_rows():
    with pytest.raises(InsufficientDataError):
        ols(np.eye(3), np.ones(3))


def test_ols_rejects_nan():
    X = np.ones((10, 1))
    y = np.ones(10)
    y[3] = np.nan
    with pytest.raises(ContractError):
        ols(X, y)


# ---------------------------------------------------------------- F test


@pytest.mark.parametrize("f,d1,d2,expected", F_TAIL_ORACLE)
def test_f_tail_against_quadrature_oracle(f, d1, d2, expected):
    got = f_tail_prob(f, d1, d2)
    assert abs(got - expected) < 1e-10
    if expected > 1e-8:
        assert abs(got - expected) / expected < 1e-9


def test_f_tail_limits():
    assert f_tail_prob(0.0, 3, 10) == 1.0
    assert f_tail_prob(float("inf"), 3, 10) == 0.0
    assert f_tail_prob(-1.0, 3, 10) == 1.0


def test_f_tail_monotone_in_f():
    ps = [f_tail_prob(f, 4, 22) for f in np.linspace(0.01, 20, 50)]
    assert all(a > b for a, b in zip(ps, ps[1:]))


def test_f_tail_bad_df():
    with pytest.raises(ContractError):
        f_tail_prob(1.0, 0, 5)
    with pytest.raises(ContractError):
        f_tail_prob(1.0, 5, -1)


def test_f_test_nested_basic():
    r = f_test_nested(120.0, 100.0, 2, 50)
    assert r.f == pytest.approx(((20.0) / 2) / (100.0 / 50))
    assert r.p_value == pytest.approx(f_tail_prob(r.f, 2, 50))


def test_f_test_nested_clamps_negative():
    r = f_test_nested(99.9, 100.0, 2, 50)
    assert r.f == 0.0
    assert r.p_value == 1.0


def test_f_test_nested_zero_rss_edges():
    assert f_test_nested(0.0, 0.0, 2, 50) == FTestResult(0.0, 1.0, 2, 50)
    r = f_test_nested(5.0, 0.0, 2, 50)
    assert np.isinf(r.f)
    assert r.p_value == 0.0


def test_f_test_nested_bad_df():
    with pytest.raises(ContractError):
        f_test_nested(2.0, 1.0, 0, 50)


def test_f_pvalues_uniform_under_null():
    rng = np.random.default_rng(5)
    n = 40
    ps = []
    for _ in range(1000):
        X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
        y = rng.normal(size=n)
        full = ols(X, y)
        null = ols(X[:, :1], y)
        ps.append(f_test_nested(null.rss, full.rss, 2, n - 3).p_value)
    assert kstest(ps, "uniform").pvalue > 1e-3


# ---------------------------------------------------------------- LASSO


def orthostd_design(rng, n, p):
    """Mean-zero, mutually orthogonal columns with squared norm n.

    Standardizing such a design is the identity, so the solver's answer has
    the closed form b_j = soft_threshold(x_j . y / n, lambda).
    """
    M = np.column_stack([np.ones(n), rng.normal(size=(n, p))])
    Q, _ = np.linalg.qr(M)
    return Q[:, 1 : p + 1] * np.sqrt(n)


def test_lasso_orthonormal_closed_form():
    rng = np.random.default_rng(6)
    n, p = 64, 4
    X = orthostd_design(rng, n, p)
    y = rng.normal(size=n) + X @ np.array([1.5, -0.3, 0.0, 0.05])
    for lam in (0.0, 0.02, 0.3, 1.0):
        fit = lasso(X, y, lam)
        yc = y - y.mean()
        want = np.array([soft_threshold(float(X[:, j] @ yc) / n, lam) for j in range(p)])
        assert np.allclose(fit.coef, want, atol=1e-8)


def test_lasso_zero_penalty_matches_ols():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(100, 5))
    y = X @ np.array([1.0, 0.0, -2.0, 0.5, 3.0]) + rng.normal(size=100)
    fit = lasso(X, y, 0.0)
    ref = ols(np.column_stack([np.ones(100), X]), y)
    assert abs(fit.intercept - ref.coef[0]) < 1e-6
    assert np.allclose(fit.coef, ref.coef[1:], atol=1e-6)


def test_lasso_lambda_max_kills_everything():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(50, 6))
    y = rng.normal(size=50)
    lam = lambda_max(X, y)
    fit = lasso(X, y, lam * (1 + 1e-12))
    assert fit.active_set == ()
    assert np.all(fit.coef == 0.0)
    assert fit.intercept == pytest.approx(y.mean())
    # just under the threshold something must move
    fit2 = lasso(X, y, lam * 0.95)
    assert len(fit2.active_set) >= 1


def test_lasso_objective_never_increases_with_more_sweeps():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(80, 8))
    X[:, 3] = X[:, 2] * 0.9 + rng.normal(scale=0.1, size=80)  # correlated pair
    y = X @ np.array([2, 0, 1, -1, 0, 0, 0.5, 0]) + rng.normal(size=80)
    objs = [lasso(X, y, 0.05, max_sweeps=k).objective for k in range(1, 9)]
    assert all(a >= b - 1e-12 for a, b in zip(objs, objs[1:]))


def test_lasso_reports_nonconvergence():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(60, 5))
    X[:, 1] = X[:, 0] + rng.normal(scale=1e-3, size=60)
    y = rng.normal(size=60)
    fit = lasso(X, y, 1e-6, max_sweeps=1)
    assert not fit.converged
    assert fit.sweeps == 1


def test_lasso_scaling_invariance():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(70, 4))
    y = X @ np.array([1.0, -1.0, 0.5, 0.0]) + rng.normal(size=70)
    fit = lasso(X, y, 0.1)
    X2 = X.copy()
    X2[:, 2] *= 13.7
    fit2 = lasso(X2, y, 0.1)
    assert fit2.coef[2] == pytest.approx(fit.coef[2] / 13.7, abs=1e-9)
    assert np.allclose(predict(fit2, X2), predict(fit, X), atol=1e-7)


def test_lasso_zero_variance_column_stays_out():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(50, 3))
    X[:, 1] = 4.0
    y = rng.normal(size=50)
    fit = lasso(X, y, 0.05)
    assert fit.coef[1] == 0.0
    assert 1 not in fit.active_set
    ref = lasso(X[:, [0, 2]], y, 0.05)
    assert np.allclose(predict(fit, X), predict(ref, X[:, [0, 2]]), atol=1e-9)


def test_lasso_negative_penalty_rejected():
    with pytest.raises(ContractError):
        lasso(np.ones((10, 1)), np.ones(10), -0.1)


# ---------------------------------------------------------------- CV


def geometric_grid(lmax, n=20, floor=1e-3):
    return lmax * np.geomspace(1.0, floor, n)


def test_cv_rejects_bad_grids_and_folds():
    X = np.random.default_rng(0).normal(size=(40, 3))
    y = X[:, 0]
    with pytest.raises(ContractError):
        lasso_path_cv(X, y, np.array([0.1, 0.2]), folds=5)
    with pytest.raises(ContractError):
        lasso_path_cv(X, y, np.array([0.2, 0.1]), folds=1)


def test_cv_ties_resolve_to_larger_penalty():
    # a grid entirely above lambda_max: every model is empty, MSE identical
    rng = np.random.default_rng(13)
    X = rng.normal(size=(60, 4))
    y = rng.normal(size=60)
    lmax = lambda_max(X, y)
    grid = np.array([lmax * 8, lmax * 4, lmax * 2])
    res = lasso_path_cv(X, y, grid, folds=3)
    assert res.lambda_ == grid[0]


def test_cv_pure_noise_selects_near_empty_model():
    hits = 0
    seeds = 20
    for seed in range(seeds):
        rng = np.random.default_rng(100 + seed)
        X = rng.normal(size=(200, 10))
        y = rng.normal(size=200)
        grid = geometric_grid(lambda_max(X, y))
        res = lasso_path_cv(X, y, grid, folds=5)
        if len(res.fit.active_set) <= 2:
            hits += 1
    assert hits >= int(0.9 * seeds)


def test_cv_recovers_sparse_support():
    hits = 0
    seeds = 20
    for seed in range(seeds):
        rng = np.random.default_rng(200 + seed)
        X = rng.normal(size=(300, 12))
        y = 3.0 * X[:, 3] - 2.0 * X[:, 7] + rng.normal(scale=0.5, size=300)
        grid = geometric_grid(lambda_max(X, y))
        res = lasso_path_cv(X, y, grid, folds=5)
        if {3, 7} <= set(res.fit.active_set):
            hits += 1
    assert hits >= int(0.9 * seeds)


def test_cv_mse_shape_and_refit_consistency():
    rng = np.random.default_rng(14)
    X = rng.normal(size=(90, 5))
    y = X[:, 0] + rng.normal(size=90)
    grid = geometric_grid(lambda_max(X, y), n=7)
    res = lasso_path_cv(X, y, grid, folds=3)
    assert len(res.cv_mse) == 7
    assert res.fit.lambda_ == res.lambda_
    direct = lasso(X, y, res.lambda_)
    assert np.allclose(res.fit.coef, direct.coef, atol=1e-6)
