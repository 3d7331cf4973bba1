"""Lagged-predictor causality tests and time-varying coefficient filtering.

The central object is a lag design built from aligned daily series: rows are
days t where the response and every lag 1..k of the response and of each
cross predictor are all observed. A cross predictor "Granger-causes" the
response when adding its lags to an autoregression of the response reduces
residual variance by more than chance, judged two ways:

* analytically, by the nested-model F test, optionally after an L1
  pre-selection step that keeps only cross lags with nonzero coefficients
  (own lags always stay in, selected or not);
* by a moving-block residual bootstrap under the null: refit the pure
  autoregression, resample its residuals in blocks, regenerate the response
  recursively, and push each replicate through the same selection + F
  machinery. The add-one rule (1 + exceedances) / (1 + replicates) keeps
  the p-value honest at finite replicate counts.

Responses that are themselves smooth model outputs (the extent velocity and
acceleration series are closed-form curves) make their own lag matrices
exactly collinear once the lag count exceeds the dimension of the underlying
function space. The fits therefore drop aliased columns first — keeping the
earliest independent subset, the way R's lm marks later duplicates NA — and
record the reduction in the report note rather than failing. Columns that
are merely ill-conditioned, not aliased, still reach the strict solver.

dlm_filter runs a conjugate dynamic linear model over the same rows with an
identity state evolution, a single discount factor controlling how fast
coefficients may drift, and online learning of the observation variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np
from numba import njit

from .errors import ContractError, FilterError, InsufficientDataError
from .regress import lambda_max, lasso_path_cv, ols, f_test_nested
from .series import DailySeries

MIN_BOOTSTRAP_REPS = 199
AUTO_GRID_POINTS = 20
AUTO_GRID_FLOOR = 1e-3
# De-aliasing threshold: a column is dropped when its part orthogonal to the
# columns kept so far is below this fraction of its own norm. Deliberately
# three orders of magnitude looser than the solver's rank tolerance, so a
# reduced design is always comfortably full rank for the strict fit.
DEALIAS_RTOL = 1e-7
# Relative residual below which the own-lag fit is treated as numerically
# exact, making the nested comparison a ratio of rounding errors.
DEGENERATE_RSS_RTOL = 1e-12


@dataclass(frozen=True)
class LagDesign:
    response: np.ndarray      # (m,)
    own_lags: np.ndarray      # (m, k), lag 1 first
    cross_lags: np.ndarray    # (m, k * n_cross), grouped by predictor
    k: int
    labels: tuple[str, ...]   # cross column labels
    day_offsets: np.ndarray   # (m,) day index of each response row
    start: date
    response_label: str

    @property
    def m(self) -> int:
        return len(self.response)

    @property
    def n_cross_columns(self) -> int:
        return self.cross_lags.shape[1]

    def own_labels(self) -> tuple[str, ...]:
        return tuple(f"{self.response_label}[t-{i}]" for i in range(1, self.k + 1))


@dataclass(frozen=True)
class LassoSelection:
    folds: int = 5
    lambdas: tuple[float, ...] | None = None   # None: geometric auto grid

    def grid_for(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.lambdas is not None:
            return np.asarray(self.lambdas, dtype=float)
        top = lambda_max(X, y)
        if top <= 0:
            return np.array([0.0])
        return top * np.geomspace(1.0, AUTO_GRID_FLOOR, AUTO_GRID_POINTS)


@dataclass(frozen=True)
class BootstrapConfig:
    reps: int
    block_len: int
    seed: int

    def __post_init__(self):
        if self.reps < MIN_BOOTSTRAP_REPS:
            raise ContractError(
                f"need at least {MIN_BOOTSTRAP_REPS} bootstrap replicates, got {self.reps}"
            )
        if self.block_len < 1:
            raise ContractError(f"block length must be positive, got {self.block_len}")


@dataclass(frozen=True)
class GrangerReport:
    hypothesis: int
    response_label: str
    f: float | None
    p_value: float
    df_num: int | None
    df_den: int | None
    selected: tuple[str, ...]
    lambda_: float | None
    bootstrap_p: float | None
    bootstrap_reps: int | None
    note: str = ""


@dataclass(frozen=True)
class DlmTrace:
    times: tuple[date, ...]
    coefficient_paths: np.ndarray   # (m, p)
    state_variances: np.ndarray     # (m, p) diagonal of the state covariance
    discount: float
    labels: tuple[str, ...]


def build_lag_design(
    response: DailySeries,
    cross: list[tuple[str, DailySeries]],
    k: int,
    response_label: str = "y",
) -> LagDesign:
    """Assemble rows y(t) ~ own lags 1..k and cross lags 1..k.

    All series must already sit on one calendar grid. A row enters only if
    the response at t and every constituent lag value is observed.
    """
    if k < 1:
        raise ContractError(f"need at least one lag, got k={k}")
    n = len(response)
    for label, s in cross:
        if s.start != response.start or len(s) != n:
            raise ContractError(f"series {label!r} is not aligned with the response")
    if k >= n:
        raise InsufficientDataError(f"k={k} lags with only {n} days")

    all_series = [response] + [s for _, s in cross]
    valid = response.mask[k:].copy()
    for s in all_series:
        for lag in range(1, k + 1):
            valid &= s.mask[k - lag : n - lag]
    rows = np.flatnonzero(valid) + k

    m = len(rows)
    p_full = 1 + k + k * len(cross)
    if m <= p_full:
        raise InsufficientDataError(
            f"{m} usable rows cannot support {p_full} coefficients; "
            "shorten the lag window or fill more days"
        )

    def lag_block(s: DailySeries) -> np.ndarray:
        cols = [s.values[rows - lag] for lag in range(1, k + 1)]
        return np.column_stack(cols)

    own = lag_block(response)
    blocks = [lag_block(s) for _, s in cross]
    cross_mat = np.hstack(blocks) if blocks else np.empty((m, 0))
    labels = tuple(
        f"{label}[t-{lag}]" for label, _ in cross for lag in range(1, k + 1)
    )
    y = response.values[rows]
    offs = rows.astype(int)
    for a in (y, own, cross_mat, offs):
        a.setflags(write=False)
    return LagDesign(y, own, cross_mat, k, labels, offs, response.start, response_label)


def select_cross(d: LagDesign, cross_indices: list[int]) -> LagDesign:
    """The same design restricted to a subset of cross columns."""
    idx = list(cross_indices)
    if any(not 0 <= j < d.n_cross_columns for j in idx):
        raise ContractError(f"cross column index out of range 0..{d.n_cross_columns - 1}")
    sub = d.cross_lags[:, idx].copy()
    sub.setflags(write=False)
    return LagDesign(
        d.response, d.own_lags, sub, d.k,
        tuple(d.labels[j] for j in idx),
        d.day_offsets, d.start, d.response_label,
    )


@njit(cache=True)
def _simulate_null_rows(alpha, phi, first_lags, resid_star, out_y, out_lags):  # pragma: no cover
    """Regenerate the response row by row from the null autoregression.

    The lag buffer starts from the first row's observed lags and then rolls
    forward on simulated values, treating the rows as consecutive steps.
    """
    m, k = out_lags.shape
    buf = first_lags.copy()
    for r in range(m):
        acc = alpha + resid_star[r]
        for j in range(k):
            out_lags[r, j] = buf[j]
            acc += phi[j] * buf[j]
        out_y[r] = acc
        for j in range(k - 1, 0, -1):
            buf[j] = buf[j - 1]
        buf[0] = acc


def _block_resample(resid: np.ndarray, block_len: int, rng: np.random.Generator) -> np.ndarray:
    m = len(resid)
    L = min(block_len, m)
    n_blocks = -(-m // L)
    starts = rng.integers(0, m - L + 1, size=n_blocks)
    idx = (starts[:, None] + np.arange(L)[None, :]).ravel()[:m]
    return resid[idx]


def _independent_columns(X: np.ndarray, rtol: float = DEALIAS_RTOL) -> list[int]:
    """Indices of the earliest maximal linearly independent column subset.

    Modified Gram-Schmidt with one re-orthogonalization pass; a column
    survives when its component orthogonal to the span of the survivors so
    far exceeds ``rtol`` times its own norm. Earlier columns win, so a
    design keeps its intercept and low-order lags and sheds later aliases.
    A fast full-rank check (non-pivoted QR diagonal) skips the sweep for
    the common well-conditioned case.
    """
    m, p = X.shape
    if p == 0:
        return []
    norms = np.linalg.norm(X, axis=0)
    if p <= m:
        diag = np.abs(np.diag(np.linalg.qr(X, mode="r")))
        if len(diag) == p and np.all(diag > rtol * norms):
            return list(range(p))
    basis = np.empty((m, 0))
    kept: list[int] = []
    for j in range(p):
        x = X[:, j]
        if norms[j] == 0.0:
            continue
        v = x - basis @ (basis.T @ x)
        v = v - basis @ (basis.T @ v)
        vnorm = np.linalg.norm(v)
        if vnorm > rtol * norms[j]:
            basis = np.column_stack([basis, v / vnorm])
            kept.append(j)
    return kept


@dataclass
class _NestedFit:
    f: float | None
    p: float
    df_num: int | None
    df_den: int | None
    chosen: list[int]        # cross columns present in the alternative fit
    lam: float | None
    null_fit: object         # OlsFit of the reduced own-lag design
    keep_own: list[int]      # surviving columns of [1 | own lags]
    note: str


def _fit_and_f(d: LagDesign, selection: LassoSelection | None) -> _NestedFit:
    """Selection + de-aliasing + nested F on one design."""
    m, k = d.m, d.k
    X_own_all = np.column_stack([np.ones(m), d.own_lags])
    keep_own = _independent_columns(X_own_all)
    X_own = X_own_all[:, keep_own]
    null_fit = ols(X_own, d.response)

    notes = []
    n_own_dropped = X_own_all.shape[1] - len(keep_own)
    if n_own_dropped:
        s = "s" if n_own_dropped != 1 else ""
        notes.append(f"dropped {n_own_dropped} aliased own-lag column{s}")
    tss = float(np.sum((d.response - d.response.mean()) ** 2))
    if null_fit.rss <= DEGENERATE_RSS_RTOL * max(tss, np.finfo(float).tiny):
        notes.append(
            "own lags explain the response to rounding error; "
            "the nested comparison is numerically degenerate"
        )

    if selection is not None and d.n_cross_columns > 0:
        pred = np.hstack([d.own_lags, d.cross_lags])
        grid = selection.grid_for(pred, d.response)
        cv = lasso_path_cv(pred, d.response, grid, folds=selection.folds)
        active = sorted(j - k for j in cv.fit.active_set if j >= k)
        lam = cv.lambda_
        if not active:
            notes.insert(0, "selection kept no cross lags; test degenerates to the null model")
    else:
        active = list(range(d.n_cross_columns))
        lam = None

    chosen: list[int] = []
    if active:
        n_own = X_own.shape[1]
        keep_full = _independent_columns(
            np.hstack([X_own, d.cross_lags[:, active]])
        )
        chosen = [active[j - n_own] for j in keep_full if j >= n_own]
        if len(chosen) < len(active):
            n_cut = len(active) - len(chosen)
            s = "s" if n_cut != 1 else ""
            notes.append(
                f"dropped {n_cut} selected cross column{s} aliased with the retained design"
            )

    note = "; ".join(notes)
    if not chosen:
        return _NestedFit(None, 1.0, None, None, [], lam, null_fit, keep_own, note)

    X_full = np.hstack([X_own, d.cross_lags[:, chosen]])
    full_fit = ols(X_full, d.response)
    df_num = len(chosen)
    df_den = m - X_full.shape[1]
    res = f_test_nested(null_fit.rss, full_fit.rss, df_num, df_den)
    return _NestedFit(
        res.f, res.p_value, df_num, df_den, chosen, lam, null_fit, keep_own, note
    )


def granger_test(
    d: LagDesign,
    selection: LassoSelection | None = None,
    bootstrap: BootstrapConfig | None = None,
    hypothesis: int = 0,
) -> GrangerReport:
    """Does the cross predictor improve on the response's own history?

    With `selection`, cross lags are first screened by cross-validated L1
    regression over the combined predictor set; own lags are kept whether
    or not the screen retains them. An empty screen is itself an answer:
    no evidence, reported as p = 1 with no F statistic.

    With `bootstrap`, the same decision pipeline (screening included) runs
    on each block-bootstrap replicate generated under the null model.
    """
    fit = _fit_and_f(d, selection)
    selected_labels = tuple(d.labels[j] for j in fit.chosen)

    if fit.f is None:
        return GrangerReport(
            hypothesis, d.response_label, None, 1.0, None, None,
            (), fit.lam, 1.0 if bootstrap is not None else None,
            bootstrap.reps if bootstrap is not None else None,
            note=fit.note,
        )

    boot_p = None
    if bootstrap is not None:
        if bootstrap.block_len > d.m:
            raise ContractError(
                f"block length {bootstrap.block_len} exceeds {d.m} design rows"
            )
        # Scatter the reduced null coefficients back onto the full lag
        # vector (aliased lags simulate with weight zero); column 0 is the
        # intercept and always survives de-aliasing.
        coef = fit.null_fit.coef
        alpha = float(coef[0])
        phi = np.zeros(d.k)
        for pos, col in enumerate(fit.keep_own):
            if col >= 1:
                phi[col - 1] = coef[pos]
        resid = fit.null_fit.residuals
        first_lags = np.ascontiguousarray(d.own_lags[0])
        count = 0
        for child in np.random.SeedSequence(bootstrap.seed).spawn(bootstrap.reps):
            rng = np.random.default_rng(child)
            e_star = _block_resample(resid, bootstrap.block_len, rng)
            y_star = np.empty(d.m)
            own_star = np.empty_like(d.own_lags)
            _simulate_null_rows(alpha, phi, first_lags, e_star, y_star, own_star)
            d_star = LagDesign(
                y_star, own_star, d.cross_lags, d.k, d.labels,
                d.day_offsets, d.start, d.response_label,
            )
            rep = _fit_and_f(d_star, selection)
            f_star = 0.0 if rep.f is None else rep.f
            if f_star >= fit.f:
                count += 1
        boot_p = (1 + count) / (1 + bootstrap.reps)

    return GrangerReport(
        hypothesis, d.response_label, fit.f, fit.p, fit.df_num, fit.df_den,
        selected_labels, fit.lam, boot_p,
        bootstrap.reps if bootstrap is not None else None,
        note=fit.note,
    )


def granger_report_text(g: GrangerReport) -> str:
    """One hypothesis test as stable key: value lines."""
    lines = [
        f"hypothesis: {g.hypothesis}",
        f"response: {g.response_label}",
        "f: none" if g.f is None else f"f: {g.f:.6g}",
        f"p_value: {g.p_value:.6g}",
        "df: none" if g.df_num is None else f"df: {g.df_num}, {g.df_den}",
        f"selected: {', '.join(g.selected) if g.selected else 'none'}",
        "lambda: none" if g.lambda_ is None else f"lambda: {g.lambda_:.6g}",
        "bootstrap_p: skipped" if g.bootstrap_p is None else f"bootstrap_p: {g.bootstrap_p:.6g}",
        "bootstrap_reps: skipped" if g.bootstrap_reps is None else f"bootstrap_reps: {g.bootstrap_reps}",
    ]
    if g.note:
        lines.append(f"note: {g.note}")
    return "\n".join(lines) + "\n"


def hypothesis_design(
    hypothesis: int,
    nao: DailySeries,
    velocity: DailySeries,
    acceleration: DailySeries,
    k: int,
) -> LagDesign:
    """The lag design for one of the three standing questions.

    1: do extent velocity and acceleration lags inform the oscillation index?
    2: do oscillation lags inform extent velocity?
    3: do oscillation lags inform extent acceleration?
    """
    if hypothesis == 1:
        return build_lag_design(
            nao, [("SIE_vel", velocity), ("SIE_acc", acceleration)], k, "NAO"
        )
    if hypothesis == 2:
        return build_lag_design(velocity, [("NAO", nao)], k, "SIE_vel")
    if hypothesis == 3:
        return build_lag_design(acceleration, [("NAO", nao)], k, "SIE_acc")
    raise ContractError(f"hypothesis must be 1, 2, or 3, got {hypothesis}")


def run_hypothesis(
    hypothesis: int,
    nao: DailySeries,
    velocity: DailySeries,
    acceleration: DailySeries,
    k: int,
    selection: LassoSelection | None = None,
    bootstrap: BootstrapConfig | None = None,
) -> GrangerReport:
    d = hypothesis_design(hypothesis, nao, velocity, acceleration, k)
    return granger_test(d, selection=selection, bootstrap=bootstrap, hypothesis=hypothesis)


def dlm_filter(
    d: LagDesign,
    discount: float,
    include_intercept: bool = True,
    prior_scale: float = 1e4,
    prior_df: float = 1.0,
    prior_obs_var: float = 1.0,
) -> DlmTrace:
    """Online time-varying regression over the design rows.

    Identity state evolution; each step inflates state uncertainty by the
    discount factor (R = C/delta) and updates the observation variance
    estimate from the standardized one-step forecast error.
    """
    if not 0.0 < discount <= 1.0:
        raise ContractError(f"discount must be in (0, 1], got {discount}")
    m_rows = d.m
    F_mat = np.hstack([d.own_lags, d.cross_lags])
    labels = d.own_labels() + d.labels
    if include_intercept:
        F_mat = np.column_stack([np.ones(m_rows), F_mat])
        labels = ("const",) + labels
    p = F_mat.shape[1]

    mean = np.zeros(p)
    C = np.eye(p) * prior_scale
    n_df = prior_df
    S = prior_obs_var
    paths = np.empty((m_rows, p))
    variances = np.empty((m_rows, p))
    for t in range(m_rows):
        F = F_mat[t]
        R = C / discount
        RF = R @ F
        Q = float(F @ RF + S)
        if Q <= 0.0:
            raise FilterError("forecast variance collapsed", step=t)
        A = RF / Q
        e = float(d.response[t] - F @ mean)
        n_df += 1.0
        S_new = S + (S / n_df) * (e * e / Q - 1.0)
        mean = mean + A * e
        C = (S_new / S) * (R - np.outer(A, A) * Q)
        S = S_new
        paths[t] = mean
        # Mathematically positive (Q > F'RF whenever S > 0); clamp the
        # cancellation dust that ill-conditioned designs can leave behind.
        variances[t] = np.maximum(np.diag(C), 0.0)
    times = tuple(d.start + timedelta(days=int(o)) for o in d.day_offsets)
    for a in (paths, variances):
        a.setflags(write=False)
    return DlmTrace(times, paths, variances, discount, labels)
