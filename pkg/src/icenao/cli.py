"""Command-line front end.

Verbs mirror the pipeline stages: `ingest` stops after parsing and
alignment, `fit` adds the harmonic model, `diagnose` the memory and skew
diagnostics, and `granger` (alias `all`) runs everything. Settings come
from an optional key=value config file with individual flags overriding
file entries. The seed has no default: deciding it is part of the run.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from datetime import date
from pathlib import Path

from .errors import StageError
from .pipeline import PipelineConfig, run_and_emit

VERB_TO_STAGE = {
    "ingest": "ingest",
    "fit": "fit",
    "diagnose": "diagnose",
    "granger": "granger",
    "all": "granger",
}

_NONE_WORDS = {"none", "auto", ""}


def _parse_date(text: str) -> date:
    return date.fromisoformat(text)


def _parse_float_tuple(text: str) -> tuple[float, ...] | None:
    if text.strip().lower() in _NONE_WORDS:
        return None
    return tuple(float(v) for v in text.split(",") if v.strip())

def _parse_int_tuple(text: str) -> tuple[int, ...] | None:
    if text.strip().lower() in _NONE_WORDS:
        return None
    return tuple(int(v) for v in text.split(",") if v.strip())


_FIELD_PARSERS = {
    "sie_path": str,
    "nao_path": str,
    "output_dir": str,
    "seed": int,
    "start": _parse_date,
    "end": _parse_date,
    "alternate_until": _parse_date,
    "periods": _parse_float_tuple,
    "harmonics": int,
    "k_h1": int,
    "k_h2": int,
    "k_h3": int,
    "lasso_folds": int,
    "lambdas": _parse_float_tuple,
    "bootstrap_reps": int,
    "block_len": int,
    "acf_max_lag": int,
    "ccf_max_lag": int,
    "phase_years": _parse_int_tuple,
    "dlm_discount": float,
}


def read_config_file(path: str) -> dict:
    """key=value lines; blank lines and #-comments ignored."""
    values: dict = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_PARSERS:
            raise ValueError(f"{path}:{line_no}: unknown setting {key!r}")
        values[key] = _FIELD_PARSERS[key](value.strip())
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--sie", dest="sie_path", help="extent CSV path")
    common.add_argument("--nao", dest="nao_path", help="index ASCII path")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--seed", type=int, help="integer seed for anything randomized")
    common.add_argument("--start", type=_parse_date, help="analysis window start (ISO)")
    common.add_argument("--end", type=_parse_date, help="analysis window end (ISO)")
    common.add_argument("--harmonics", type=int, help="seasonal harmonics per period")
    common.add_argument("--reps", dest="bootstrap_reps", type=int, help="bootstrap replicates (0 = off)")
    common.add_argument("--block-len", dest="block_len", type=int, help="bootstrap block length")
    common.add_argument("--discount", dest="dlm_discount", type=float, help="DLM discount factor")
    common.add_argument(
        "--phase-years", dest="phase_years", type=_parse_int_tuple,
        help="comma-separated years for phase planes (default: first,last full year)",
    )

    parser = argparse.ArgumentParser(
        prog="icenao",
        description="harmonic trend, long-memory, and lagged-causality analysis of daily series",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (
        ("ingest", "parse, align, and gap-fill the input files"),
        ("fit", "ingest plus the trend/seasonal fit and phase planes"),
        ("diagnose", "fit plus autocorrelation, long-memory, and skew diagnostics"),
        ("granger", "the full pipeline including causality tests"),
        ("all", "synonym for granger"),
    ):
        sub.add_parser(verb, parents=[common], help=help_text)
    return parser


def make_config(args: argparse.Namespace) -> PipelineConfig:
    settings: dict = {}
    if args.config:
        settings.update(read_config_file(args.config))
    for f in fields(PipelineConfig):
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            settings[f.name] = flag_value
    missing = [k for k in ("sie_path", "nao_path", "output_dir", "seed") if k not in settings]
    if missing:
        raise ValueError(f"missing required settings: {', '.join(missing)}")
    return PipelineConfig(**settings)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args)
    except (ValueError, OSError) as exc:
        print(f"icenao: {exc}", file=sys.stderr)
        return 2
    try:
        rep, written = run_and_emit(config, through=VERB_TO_STAGE[args.verb])
    except StageError as exc:
        print(f"icenao: {exc}", file=sys.stderr)
        return 2
    for p in written:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
