"""Daily sea-ice extent and North Atlantic Oscillation analysis toolkit."""

from .causality import (
    BootstrapConfig,
    GrangerReport,
    LassoSelection,
    build_lag_design,
    dlm_filter,
    granger_report_text,
    granger_test,
    run_hypothesis,
)
from .diagnostics import acf, adf_test, ccf, hurst, skew_summary
from .errors import (
    ContractError,
    EmptyInputError,
    FilterError,
    InsufficientDataError,
    ParseError,
    RangeError,
    SingularDesignError,
    StageError,
    ZeroVarianceError,
)
from .fgn import generate_fgn
from .harmonic import (
    HarmonicFit,
    HarmonicSpec,
    derivative_series,
    fit_harmonic,
    phase_trajectory,
)
from .ingest import align, fill_alternate_days, parse_nao, parse_sie
from .pipeline import PipelineConfig, run_and_emit, run_pipeline
from .series import DailySeries, full_series

__all__ = [
    "BootstrapConfig",
    "ContractError",
    "DailySeries",
    "EmptyInputError",
    "FilterError",
    "GrangerReport",
    "HarmonicFit",
    "HarmonicSpec",
    "InsufficientDataError",
    "LassoSelection",
    "ParseError",
    "PipelineConfig",
    "RangeError",
    "SingularDesignError",
    "StageError",
    "ZeroVarianceError",
    "acf",
    "adf_test",
    "align",
    "build_lag_design",
    "ccf",
    "derivative_series",
    "dlm_filter",
    "fill_alternate_days",
    "fit_harmonic",
    "full_series",
    "generate_fgn",
    "granger_report_text",
    "granger_test",
    "hurst",
    "parse_nao",
    "parse_sie",
    "phase_trajectory",
    "run_and_emit",
    "run_hypothesis",
    "run_pipeline",
    "skew_summary",
]
