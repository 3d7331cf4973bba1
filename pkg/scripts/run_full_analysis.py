"""Run the complete analysis on the real data products.

Thin wrapper over the CLI's `all` verb with the full-scale defaults
(window 1979-01-01..2019-09-30, four harmonics, k = 365/30/30 lags).
Expects the NSIDC daily extent CSV and the NOAA daily index file:

    python3 scripts/run_full_analysis.py N_seaice_extent_daily_v3.0.csv \
        norm.daily.nao.index.b500101.current.ascii --out results/

Pass --reps 0 to skip the bootstrap (analytic p-values only), or leave the
default 199 replicates for the full run.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from icenao.cli import main as cli_main  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("sie", help="daily extent CSV")
    parser.add_argument("nao", help="daily index ASCII file")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=20240501)
    parser.add_argument("--reps", type=int, default=199, help="bootstrap replicates (0 = off)")
    args = parser.parse_args()
    return cli_main([
        "all",
        "--sie", args.sie,
        "--nao", args.nao,
        "--out", args.out,
        "--seed", str(args.seed),
        "--reps", str(args.reps),
    ])


if __name__ == "__main__":
    sys.exit(main())
