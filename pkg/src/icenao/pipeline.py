"""End-to-end orchestration: files in, analysis out.

Stages run in a fixed order (ingest, fit, diagnose, granger); a failure
anywhere surfaces as a StageError naming the stage, and any output files
written before the failure are removed so a broken run leaves nothing
half-baked behind.

Everything machine-readable (report.json, the CSVs, the SVGs) is a pure
function of the inputs and the seed, byte for byte. Wall-clock timings go
only into the human-readable report.txt, which is exempt from that
guarantee.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path

import numpy as np

from .causality import (
    BootstrapConfig,
    DlmTrace,
    GrangerReport,
    LassoSelection,
    dlm_filter,
    granger_report_text,
    granger_test,
    hypothesis_design,
    select_cross,
)
from .diagnostics import (
    AdfResult,
    Correlogram,
    HurstReport,
    SkewSummary,
    acf,
    adf_test,
    ccf,
    correlogram_to_csv,
    hurst,
    skew_summary,
)
from .errors import ContractError, StageError
from .harmonic import (
    HarmonicFit,
    HarmonicSpec,
    PhaseTrajectory,
    derivative_series,
    fit_harmonic,
    phase_trajectory,
    trajectory_to_csv,
)
from .ingest import IngestReport, align, fill_alternate_days, parse_nao, parse_sie
from .series import DailySeries
from .svgplot import line_chart, stem_chart, trajectory_chart

STAGES = ("ingest", "fit", "diagnose", "granger")
PHASE_KINDS = ("position-velocity", "velocity-acceleration")
MAX_DLM_PATHS = 6  # charts stay legible; the CSV always has every column


@dataclass(frozen=True)
class PipelineConfig:
    sie_path: str
    nao_path: str
    output_dir: str
    seed: int
    start: date = date(1979, 1, 1)
    end: date = date(2019, 9, 30)
    alternate_until: date = date(1987, 8, 21)
    periods: tuple[float, ...] = (365.25,)
    harmonics: int = 4
    k_h1: int = 365
    k_h2: int = 30
    k_h3: int = 30
    lasso_folds: int = 5
    lambdas: tuple[float, ...] | None = None
    bootstrap_reps: int = 199       # 0 disables the bootstrap
    block_len: int = 30
    acf_max_lag: int = 50
    ccf_max_lag: int = 365
    phase_years: tuple[int, ...] | None = None
    dlm_discount: float = 0.98

    def __post_init__(self):
        if not isinstance(self.seed, int):
            raise ContractError("seed must be an explicit integer")
        if self.bootstrap_reps < 0:
            raise ContractError(f"bootstrap_reps must be >= 0, got {self.bootstrap_reps}")


@dataclass
class PipelineReport:
    config: PipelineConfig
    through: str
    timings: dict[str, float] = field(default_factory=dict)
    sie_report: IngestReport | None = None
    nao_report: IngestReport | None = None
    sie: DailySeries | None = None
    nao: DailySeries | None = None
    harmonic: HarmonicFit | None = None
    velocity: DailySeries | None = None
    acceleration: DailySeries | None = None
    trajectories: dict[tuple[int, str], PhaseTrajectory] = field(default_factory=dict)
    acf_nao: Correlogram | None = None
    ccf_nao_velocity: Correlogram | None = None
    hurst_nao: HurstReport | None = None
    adf_nao: AdfResult | None = None
    skew_year: SkewSummary | None = None
    skew_month: SkewSummary | None = None
    granger: tuple[GrangerReport, ...] = ()
    dlm: dict[int, DlmTrace] = field(default_factory=dict)


def _full_years(start: date, end: date) -> tuple[int, int]:
    first = start.year if start == date(start.year, 1, 1) else start.year + 1
    last = end.year if end == date(end.year, 12, 31) else end.year - 1
    if first > last:
        raise ContractError(f"no complete calendar year inside {start}..{end}")
    return first, last


def run_pipeline(config: PipelineConfig, through: str = "granger") -> PipelineReport:
    if through not in STAGES:
        raise ContractError(f"unknown stage {through!r}; expected one of {STAGES}")
    limit = STAGES.index(through)
    rep = PipelineReport(config=config, through=through)

    def staged(name: str, fn):
        t0 = time.perf_counter()
        try:
            fn()
        except Exception as exc:
            raise StageError(name, exc) from exc
        rep.timings[name] = time.perf_counter() - t0

    def do_ingest():
        sie_raw, sie_rep = parse_sie(Path(config.sie_path).read_text())
        nao_raw, nao_rep = parse_nao(Path(config.nao_path).read_text())
        sie_al, nao_al = align(sie_raw, nao_raw, config.start, config.end)
        sie_filled, fill_rep = fill_alternate_days(sie_al, config.alternate_until)
        rep.sie = sie_filled
        rep.nao = nao_al
        rep.sie_report = replace(sie_rep, gaps_filled=fill_rep.gaps_filled)
        rep.nao_report = nao_rep

    def do_fit():
        spec = HarmonicSpec(periods=config.periods, harmonics=config.harmonics)
        hfit = fit_harmonic(rep.sie, spec)
        rep.harmonic = hfit
        rep.velocity, rep.acceleration = derivative_series(hfit, config.start, config.end)
        if config.phase_years is not None:
            years = config.phase_years
        else:
            first, last = _full_years(config.start, config.end)
            years = range(first, last + 1)
        for year in years:
            for kind in PHASE_KINDS:
                rep.trajectories[(year, kind)] = phase_trajectory(hfit, year, kind)

    def do_diagnose():
        rep.acf_nao = acf(rep.nao, config.acf_max_lag)
        rep.ccf_nao_velocity = ccf(rep.nao, rep.velocity, config.ccf_max_lag)
        rep.hurst_nao = hurst(rep.nao)
        rep.adf_nao = adf_test(rep.nao)
        rep.skew_year = skew_summary(rep.nao, "year")
        rep.skew_month = skew_summary(rep.nao, "month")

    def do_granger():
        selection = LassoSelection(folds=config.lasso_folds, lambdas=config.lambdas)
        bootstrap = (
            BootstrapConfig(config.bootstrap_reps, config.block_len, config.seed)
            if config.bootstrap_reps > 0
            else None
        )
        reports = []
        for h, k in ((1, config.k_h1), (2, config.k_h2), (3, config.k_h3)):
            d = hypothesis_design(h, rep.nao, rep.velocity, rep.acceleration, k)
            g = granger_test(d, selection=selection, bootstrap=bootstrap, hypothesis=h)
            reports.append(g)
            kept = [d.labels.index(lbl) for lbl in g.selected]
            rep.dlm[h] = dlm_filter(select_cross(d, kept), config.dlm_discount)
        rep.granger = tuple(reports)

    stage_fns = {
        "ingest": do_ingest,
        "fit": do_fit,
        "diagnose": do_diagnose,
        "granger": do_granger,
    }
    for name in STAGES[: limit + 1]:
        staged(name, stage_fns[name])
    return rep


# ---------------------------------------------------------------- output


def _py(obj):
    """Recursively convert results into JSON-encodable primitives."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, date):
        return obj.isoformat()
    if isinstance(obj, np.ndarray):
        return [_py(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _py(v) for k, v in obj.items()}
    raise TypeError(f"cannot make {type(obj).__name__} JSON-safe")


def _json_payload(rep: PipelineReport) -> dict:
    out: dict = {
        "config": {
            "start": rep.config.start,
            "end": rep.config.end,
            "alternate_until": rep.config.alternate_until,
            "periods": rep.config.periods,
            "harmonics": rep.config.harmonics,
            "k": {"h1": rep.config.k_h1, "h2": rep.config.k_h2, "h3": rep.config.k_h3},
            "lasso_folds": rep.config.lasso_folds,
            "bootstrap_reps": rep.config.bootstrap_reps,
            "block_len": rep.config.block_len,
            "seed": rep.config.seed,
            "dlm_discount": rep.config.dlm_discount,
        },
        "through": rep.through,
    }
    if rep.sie_report is not None:
        out["ingest"] = {
            "sie": {
                "rows_read": rep.sie_report.rows_read,
                "rows_rejected": rep.sie_report.rows_rejected,
                "gaps_filled": rep.sie_report.gaps_filled,
                "date_range": list(rep.sie_report.date_range),
            },
            "nao": {
                "rows_read": rep.nao_report.rows_read,
                "rows_rejected": rep.nao_report.rows_rejected,
                "gaps_filled": rep.nao_report.gaps_filled,
                "date_range": list(rep.nao_report.date_range),
            },
            "sie_observed_days": rep.sie.n_observed,
            "nao_observed_days": rep.nao.n_observed,
        }
    if rep.harmonic is not None:
        h = rep.harmonic
        out["fit"] = {
            "t0": h.t0,
            "trend": h.trend,
            "sin_coef": h.sin_coef,
            "cos_coef": h.cos_coef,
            "rss": h.rss,
            "sigma2": h.sigma2,
            "df_resid": h.df_resid,
            "n_observed": h.n_observed,
            "phase_areas": {
                f"{year}:{kind}": t.area for (year, kind), t in sorted(rep.trajectories.items())
            },
        }
    if rep.hurst_nao is not None:
        out["diagnose"] = {
            "hurst": {
                "simple_rs": rep.hurst_nao.simple_rs,
                "corrected_rs": rep.hurst_nao.corrected_rs,
                "empirical": rep.hurst_nao.empirical,
                "corrected_empirical": rep.hurst_nao.corrected_empirical,
                "theoretical": rep.hurst_nao.theoretical,
                "n": rep.hurst_nao.n,
                "reliable": rep.hurst_nao.reliable,
            },
            "adf": {
                "statistic": rep.adf_nao.statistic,
                "crit_1pct": rep.adf_nao.crit_1pct,
                "crit_5pct": rep.adf_nao.crit_5pct,
                "crit_10pct": rep.adf_nao.crit_10pct,
                "p_bracket": list(rep.adf_nao.p_bracket),
                "lags_used": rep.adf_nao.lags_used,
                "n_used": rep.adf_nao.n_used,
                "reject_5pct": rep.adf_nao.reject_5pct,
            },
            "acf_band": rep.acf_nao.band,
            "ccf_max_abs": float(np.max(np.abs(rep.ccf_nao_velocity.values))),
            "skew_year_median_above_mean": rep.skew_year.n_median_above_mean,
            "skew_year_buckets": len(rep.skew_year.rows),
            "skew_month_median_above_mean": rep.skew_month.n_median_above_mean,
            "skew_month_buckets": len(rep.skew_month.rows),
        }
    if rep.granger:
        out["granger"] = [
            {
                "hypothesis": g.hypothesis,
                "response": g.response_label,
                "f": g.f,
                "p_value": g.p_value,
                "df_num": g.df_num,
                "df_den": g.df_den,
                "selected": list(g.selected),
                "lambda": g.lambda_,
                "bootstrap_p": g.bootstrap_p,
                "bootstrap_reps": g.bootstrap_reps,
                "note": g.note,
            }
            for g in rep.granger
        ]
        out["dlm"] = {
            f"h{h}": {
                "labels": list(t.labels),
                "final_coefficients": t.coefficient_paths[-1],
                "discount": t.discount,
            }
            for h, t in sorted(rep.dlm.items())
        }
    return _py(out)


def _skew_csv(s: SkewSummary) -> str:
    lines = ["bucket,n,mean,median"]
    for r in s.rows:
        lines.append(f"{r.key},{r.n},{float(r.mean)!r},{float(r.median)!r}")
    lines.append(f"# median_above_mean={s.n_median_above_mean}")
    return "\n".join(lines) + "\n"


def _dlm_csv(t: DlmTrace) -> str:
    lines = ["date," + ",".join(t.labels)]
    for when, row in zip(t.times, t.coefficient_paths):
        lines.append(when.isoformat() + "," + ",".join(f"{float(v)!r}" for v in row))
    return "\n".join(lines) + "\n"


def _report_text(rep: PipelineReport) -> str:
    lines = ["daily extent / oscillation index analysis", ""]
    if rep.sie_report is not None:
        lines += [
            f"extent rows read {rep.sie_report.rows_read}, rejected {rep.sie_report.rows_rejected}, "
            f"gaps filled {rep.sie_report.gaps_filled}",
            f"index rows read {rep.nao_report.rows_read}, rejected {rep.nao_report.rows_rejected}",
            f"window {rep.config.start} .. {rep.config.end}",
            "",
        ]
    if rep.harmonic is not None:
        b0, b1, b2 = rep.harmonic.trend
        lines += [
            f"trend: {b0:.6g} {b1:+.6g} t {b2:+.6g} t^2   (t in days)",
            f"residual sd {np.sqrt(rep.harmonic.sigma2):.4g} over {rep.harmonic.n_observed} days",
        ]
        for (year, kind), t in sorted(rep.trajectories.items()):
            lines.append(f"phase area {year} {kind}: {t.area:.6g}")
        lines.append("")
    if rep.hurst_nao is not None:
        h = rep.hurst_nao
        lines += [
            f"hurst: simple {h.simple_rs:.4f}, corrected {h.corrected_rs:.4f}, "
            f"empirical {h.empirical:.4f}, corrected empirical {h.corrected_empirical:.4f}, "
            f"white-noise reference {h.theoretical:.4f} (n={h.n})",
            f"adf: stat {rep.adf_nao.statistic:.4f}, 5% crit {rep.adf_nao.crit_5pct:.4f}, "
            f"p in {rep.adf_nao.p_bracket}, lags {rep.adf_nao.lags_used}",
            f"ccf |max| {np.max(np.abs(rep.ccf_nao_velocity.values)):.4f}",
            f"median > mean in {rep.skew_year.n_median_above_mean} of "
            f"{len(rep.skew_year.rows)} years",
            "",
        ]
    for g in rep.granger:
        lines.extend(granger_report_text(g).splitlines())
        lines.append("")
    lines.append("timings (s): " + ", ".join(f"{k}={v:.2f}" for k, v in rep.timings.items()))
    return "\n".join(lines) + "\n"


def emit_outputs(rep: PipelineReport, out_dir: str | Path | None = None) -> list[Path]:
    """Write every artifact for the completed stages; all-or-nothing."""
    base = Path(out_dir if out_dir is not None else rep.config.output_dir)
    base.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def put(name: str, text: str):
        p = base / name
        p.write_text(text)
        written.append(p)

    try:
        put("report.json", json.dumps(_json_payload(rep), sort_keys=True, indent=2) + "\n")
        for (year, kind), traj in sorted(rep.trajectories.items()):
            stem = f"trajectory_{year}_{kind}"
            put(stem + ".csv", trajectory_to_csv(traj))
            xlabel, ylabel = kind.split("-")
            put(stem + ".svg", trajectory_chart(traj.points, f"{year} {kind}", xlabel, ylabel))
        if rep.acf_nao is not None:
            put("acf_nao.csv", correlogram_to_csv(rep.acf_nao))
            put(
                "acf_nao.svg",
                stem_chart(rep.acf_nao.lags, rep.acf_nao.values, rep.acf_nao.band, "index autocorrelation"),
            )
        if rep.ccf_nao_velocity is not None:
            c = rep.ccf_nao_velocity
            put("ccf_nao_vel.csv", correlogram_to_csv(c))
            put("ccf_nao_vel.svg", stem_chart(c.lags, c.values, c.band, "index vs extent velocity"))
        if rep.skew_year is not None:
            put("skew_year.csv", _skew_csv(rep.skew_year))
            put("skew_month.csv", _skew_csv(rep.skew_month))
            pts_mean = np.column_stack(
                [np.arange(len(rep.skew_year.rows)), [r.mean for r in rep.skew_year.rows]]
            )
            pts_med = np.column_stack(
                [np.arange(len(rep.skew_year.rows)), [r.median for r in rep.skew_year.rows]]
            )
            put(
                "skew_year.svg",
                line_chart(
                    [("mean", pts_mean), ("median", pts_med)],
                    "yearly mean vs median",
                    xlabel="year index",
                ),
            )
        for h, trace in sorted(rep.dlm.items()):
            put(f"dlm_h{h}.csv", _dlm_csv(trace))
            days = np.array([(d - trace.times[0]).days for d in trace.times], dtype=float)
            series = [
                (lbl, np.column_stack([days, trace.coefficient_paths[:, j]]))
                for j, lbl in enumerate(trace.labels[:MAX_DLM_PATHS])
            ]
            put(f"dlm_h{h}.svg", line_chart(series, f"hypothesis {h} coefficient paths", xlabel="days"))
        put("report.txt", _report_text(rep))
    except Exception as exc:
        for p in written:
            try:
                p.unlink()
            except OSError:
                pass
        raise StageError("emit", exc) from exc
    return written


def run_and_emit(config: PipelineConfig, through: str = "granger") -> tuple[PipelineReport, list[Path]]:
    rep = run_pipeline(config, through)
    return rep, emit_outputs(rep)
