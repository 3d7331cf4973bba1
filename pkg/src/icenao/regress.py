"""Least squares, nested-model F tests, and L1-penalized regression.

Everything operates on plain 2-D design matrices. OLS goes through the SVD
so near-singular designs are detected by singular-value ratio rather than
by gramian conditioning; the offending column is identified with a pivoted
QR purely for the error message. The LASSO solver is cyclic coordinate
descent on a standardized copy of the design (population standard
deviation, so each standardized column has squared norm n), with a
glmnet-style active-set strategy: full sweep, then sweeps over the current
active set until stable, then a full verification sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.linalg import qr as _qr
from scipy.special import betainc as _betainc

from .errors import ContractError, InsufficientDataError, SingularDesignError

RANK_RTOL = 1e-10
LASSO_TOL = 1e-8
LASSO_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class OlsFit:
    coef: np.ndarray
    se: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    rss: float
    sigma2: float
    df_resid: int
    labels: tuple[str, ...]


@dataclass(frozen=True)
class FTestResult:
    f: float
    p_value: float
    df_num: int
    df_den: int


@dataclass(frozen=True)
class LassoFit:
    coef: np.ndarray
    intercept: float
    lambda_: float
    active_set: tuple[int, ...]
    objective: float
    sweeps: int
    converged: bool


@dataclass(frozen=True)
class LassoCvResult:
    lambda_: float
    fit: LassoFit
    lambdas: tuple[float, ...]
    cv_mse: np.ndarray


def _check_design(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ContractError(f"design must be 2-D, got shape {X.shape}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ContractError(f"response shape {y.shape} does not match design {X.shape}")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise ContractError("design and response must be finite")
    return X, y


def ols(X: np.ndarray, y: np.ndarray, labels: list[str] | None = None) -> OlsFit:
    """Fit y = X b by least squares.

    Raises InsufficientDataError when there are no residual degrees of
    freedom and SingularDesignError (naming a redundant column) when the
    design is rank-deficient at relative tolerance RANK_RTOL.
    """
    X, y = _check_design(X, y)
    n, p = X.shape
    if labels is None:
        labels = [f"x{j}" for j in range(p)]
    if len(labels) != p:
        raise ContractError(f"{len(labels)} labels for {p} columns")
    if n <= p:
        raise InsufficientDataError(f"{n} rows cannot identify {p} coefficients with residual variance")

    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
    if rank < p:
        # pivoted QR orders columns by contribution; the first pivot past
        # the numerical rank is one that adds nothing new
        _, _, piv = _qr(X, mode="economic", pivoting=True)
        bad = int(piv[rank])
        raise SingularDesignError("design is rank deficient", column=labels[bad])

    uty = U.T @ y
    coef = Vt.T @ (uty / s)
    fitted = X @ coef
    residuals = y - fitted
    rss = float(residuals @ residuals)
    sigma2 = rss / (n - p)
    # Var(b) = sigma2 * V diag(s^-2) V'
    se = np.sqrt(sigma2 * np.sum((Vt.T / s) ** 2, axis=1))
    return OlsFit(coef, se, fitted, residuals, rss, sigma2, n - p, tuple(labels))


def f_tail_prob(f: float, df_num: int, df_den: int) -> float:
    """P(F >= f) for an F(df_num, df_den) variable."""
    if df_num <= 0 or df_den <= 0:
        raise ContractError(f"degrees of freedom must be positive, got ({df_num}, {df_den})")
    if np.isnan(f):
        raise ContractError("F statistic is NaN")
    if f <= 0:
        return 1.0
    if np.isinf(f):
        return 0.0
    x = df_den / (df_den + df_num * f)
    return float(_betainc(df_den / 2.0, df_num / 2.0, x))


def f_test_nested(rss_null: float, rss_full: float, df_num: int, df_den: int) -> FTestResult:
    """F test of a null model against a full model it is nested in.

    df_num is the number of restrictions, df_den the full model's residual
    degrees of freedom. The statistic is clamped at zero: rounding can make
    the full model's RSS come out a hair above the null's.
    """
    if df_num <= 0 or df_den <= 0:
        raise ContractError(f"degrees of freedom must be positive, got ({df_num}, {df_den})")
    if rss_null < 0 or rss_full < 0:
        raise ContractError("residual sums of squares must be nonnegative")
    if rss_full == 0.0:
        if rss_null == 0.0:
            return FTestResult(0.0, 1.0, df_num, df_den)
        return FTestResult(float("inf"), 0.0, df_num, df_den)
    f = max(0.0, ((rss_null - rss_full) / df_num) / (rss_full / df_den))
    return FTestResult(f, f_tail_prob(f, df_num, df_den), df_num, df_den)


def soft_threshold(z: float, t: float) -> float:
    """Shrink z toward zero by t, clipping to zero inside [-t, t]."""
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def _cd_solve(Z, yc, lam, beta, tol, max_sweeps):  # pragma: no cover - compiled
    """Cyclic coordinate descent with an active-set strategy.

    Z has unit population variance columns (column squared norm == n).
    Mutates beta in place; returns (sweeps_used, converged).
    """
    n, p = Z.shape
    r = yc - Z @ beta
    sweeps = 0
    while sweeps < max_sweeps:
        # full sweep; doubles as the verification pass
        delta = 0.0
        sweeps += 1
        for j in range(p):
            old = beta[j]
            rho = old + np.dot(Z[:, j], r) / n
            new = 0.0
            if rho > lam:
                new = rho - lam
            elif rho < -lam:
                new = rho + lam
            if new != old:
                step = new - old
                for i in range(n):
                    r[i] -= step * Z[i, j]
                beta[j] = new
                if abs(step) > delta:
                    delta = abs(step)
        if delta < tol:
            return sweeps, True
        # iterate on the active set until it stabilizes
        while sweeps < max_sweeps:
            delta = 0.0
            sweeps += 1
            for j in range(p):
                if beta[j] == 0.0:
                    continue
                old = beta[j]
                rho = old + np.dot(Z[:, j], r) / n
                new = 0.0
                if rho > lam:
                    new = rho - lam
                elif rho < -lam:
                    new = rho + lam
                if new != old:
                    step = new - old
                    for i in range(n):
                        r[i] -= step * Z[i, j]
                    beta[j] = new
                    if abs(step) > delta:
                        delta = abs(step)
            if delta < tol:
                break
    return sweeps, False


class _Standardized:
    """Centered response and population-standardized nonconstant columns."""

    __slots__ = ("Z", "yc", "keep", "x_mean", "x_sd", "y_mean", "p_total")

    def __init__(self, X: np.ndarray, y: np.ndarray):
        n, p = X.shape
        self.p_total = p
        self.x_mean = X.mean(axis=0)
        sd = X.std(axis=0)  # population sd: standardized columns get norm^2 == n
        self.keep = np.flatnonzero(sd > 0)
        self.x_sd = sd[self.keep]
        self.Z = (X[:, self.keep] - self.x_mean[self.keep]) / self.x_sd
        self.y_mean = float(y.mean())
        self.yc = y - self.y_mean


def _finish(
    std: _Standardized, b: np.ndarray, lam: float, sweeps: int, converged: bool
) -> LassoFit:
    resid = std.yc - std.Z @ b
    n = len(std.yc)
    objective = float(0.5 * (resid @ resid) / n + lam * np.abs(b).sum())
    coef = np.zeros(std.p_total)
    coef[std.keep] = b / std.x_sd
    intercept = std.y_mean - float(coef @ std.x_mean)
    active = tuple(int(j) for j in std.keep[np.flatnonzero(b)])
    coef.setflags(write=False)
    return LassoFit(coef, intercept, lam, active, objective, sweeps, converged)


def lasso(
    X: np.ndarray,
    y: np.ndarray,
    lambda_: float,
    tol: float = LASSO_TOL,
    max_sweeps: int = LASSO_MAX_SWEEPS,
) -> LassoFit:
    """Solve min_b  (2n)^-1 ||y - a - X b||^2 + lambda ||b'||_1.

    The intercept a is unpenalized and handled by centering; the penalty
    applies to coefficients of the standardized columns (b' above), and the
    returned coefficients are mapped back to the original scale.
    Zero-variance columns take coefficient zero and are never active.
    """
    X, y = _check_design(X, y)
    if lambda_ < 0:
        raise ContractError(f"penalty must be nonnegative, got {lambda_}")
    if len(y) < 2:
        raise InsufficientDataError("need at least 2 rows")
    std = _Standardized(X, y)
    b = np.zeros(len(std.keep))
    if len(std.keep) == 0:
        return _finish(std, b, lambda_, 0, True)
    sweeps, converged = _cd_solve(std.Z, std.yc, lambda_, b, tol, max_sweeps)
    return _finish(std, b, lambda_, int(sweeps), bool(converged))


def lambda_max(X: np.ndarray, y: np.ndarray) -> float:
    """Smallest penalty at which every coefficient is exactly zero."""
    X, y = _check_design(X, y)
    std = _Standardized(X, y)
    if len(std.keep) == 0:
        return 0.0
    return float(np.max(np.abs(std.Z.T @ std.yc)) / len(y))


def predict(fit: LassoFit, X: np.ndarray) -> np.ndarray:
    return fit.intercept + np.asarray(X, dtype=float) @ fit.coef


def lasso_path_cv(
    X: np.ndarray,
    y: np.ndarray,
    lambdas: np.ndarray,
    folds: int = 5,
    tol: float = LASSO_TOL,
    max_sweeps: int = LASSO_MAX_SWEEPS,
) -> LassoCvResult:
    """Pick a penalty by K-fold cross-validation over a descending grid.

    Folds are contiguous blocks of rows, in keeping with serially dependent
    data: shuffling lag rows across folds would leak the very structure the
    model is trying to capture. Ties in mean out-of-fold MSE resolve to the
    larger penalty. The winning penalty is refit on all rows.
    """
    X, y = _check_design(X, y)
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or len(lambdas) == 0:
        raise ContractError("need a nonempty 1-D penalty grid")
    if np.any(np.diff(lambdas) >= 0):
        raise ContractError("penalty grid must be strictly decreasing")
    if lambdas[-1] < 0:
        raise ContractError("penalties must be nonnegative")
    if folds < 2:
        raise ContractError(f"need at least 2 folds, got {folds}")
    n = len(y)
    if n < 2 * folds:
        raise InsufficientDataError(f"{n} rows is too few for {folds} folds")

    bounds = np.linspace(0, n, folds + 1).astype(int)
    sse = np.zeros(len(lambdas))
    for k in range(folds):
        lo, hi = bounds[k], bounds[k + 1]
        val = np.zeros(n, dtype=bool)
        val[lo:hi] = True
        Xt, yt = X[~val], y[~val]
        Xv, yv = X[val], y[val]
        std = _Standardized(Xt, yt)
        b = np.zeros(len(std.keep))
        for i, lam in enumerate(lambdas):
            if len(std.keep) > 0:
                _cd_solve(std.Z, std.yc, lam, b, tol, max_sweeps)
            fit = _finish(std, b, lam, 0, True)
            err = yv - predict(fit, Xv)
            sse[i] += float(err @ err)
    cv_mse = sse / n
    best = int(np.argmin(cv_mse))  # first minimum == largest penalty on a descending grid

    # refit on everything, warm-starting down the path to the winner
    std = _Standardized(X, y)
    b = np.zeros(len(std.keep))
    sweeps = 0
    converged = True
    for lam in lambdas[: best + 1]:
        if len(std.keep) > 0:
            sw, converged = _cd_solve(std.Z, std.yc, lam, b, tol, max_sweeps)
            sweeps += int(sw)
    fit = _finish(std, b, float(lambdas[best]), sweeps, bool(converged))
    cv_mse.setflags(write=False)
    return LassoCvResult(float(lambdas[best]), fit, tuple(float(v) for v in lambdas), cv_mse)
