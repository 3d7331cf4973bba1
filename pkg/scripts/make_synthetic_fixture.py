"""Regenerate the bundled synthetic input files under tests/data/.

The extent file follows a known trend + two-harmonic seasonal model so
tests can check coefficient recovery against the constants below; the
index file is a short-memory AR(1). Both are written in the same formats
the real products use, including a missing-value sentinel, one absent day,
and one duplicated date, so the ingest counters have something to count.

Values are rounded the way the real files are (3 decimals for extent,
2 for the index), which adds bounded quantization noise well inside the
recovery tolerances the tests use.
"""

from __future__ import annotations

import argparse
from datetime import date, timedelta
from pathlib import Path

import numpy as np

START = date(1990, 1, 1)
END = date(1992, 12, 31)
SEED = 20240501

TREND = (8.0, -0.001, 2e-7)          # level, per day, per day^2
SIN_COEF = (1.2, -0.3)               # harmonics 1, 2 of period 365.25
COS_COEF = (-2.0, 0.45)
PERIOD = 365.25
NOISE_SD = 0.005

NAO_PHI = 0.2
NAO_SD = 0.3

SENTINEL_DAYS = (date(1990, 3, 15), date(1991, 7, 7))
ABSENT_DAY = date(1992, 2, 29)
DUPLICATED_DAY = date(1990, 6, 1)


def extent_value(t: float) -> float:
    w = 2.0 * np.pi / PERIOD
    x = TREND[0] + TREND[1] * t + TREND[2] * t * t
    for i, (s, c) in enumerate(zip(SIN_COEF, COS_COEF), start=1):
        x += s * np.sin(i * w * t) + c * np.cos(i * w * t)
    return x


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "data"),
        help="directory for the two fixture files",
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(SEED)
    n = (END - START).days + 1

    sie_lines = [
        "Year, Month, Day, Extent, Missing, Source Data",
        "YYYY,    MM,  DD, 10^6 sq km, 10^6 sq km, Source data product",
    ]
    for i in range(n):
        d = START + timedelta(days=i)
        if d == ABSENT_DAY:
            continue
        if d in SENTINEL_DAYS:
            value = "-9999"
        else:
            value = f"{extent_value(float(i)) + rng.normal(scale=NOISE_SD):.3f}"
        row = f"{d.year}, {d.month:2d}, {d.day:2d}, {value}, 0.000, generated"
        sie_lines.append(row)
        if d == DUPLICATED_DAY:
            sie_lines.append(row)  # out-of-order duplicate the parser must reject
    (out / "synthetic_sie.csv").write_text("\n".join(sie_lines) + "\n")

    nao_lines = []
    x = 0.0
    for i in range(n):
        d = START + timedelta(days=i)
        x = NAO_PHI * x + rng.normal(scale=NAO_SD)
        nao_lines.append(f"{d.year} {d.month} {d.day} {x:.2f}")
    (out / "synthetic_nao.txt").write_text("\n".join(nao_lines) + "\n")

    print(f"wrote {out / 'synthetic_sie.csv'} and {out / 'synthetic_nao.txt'}")


if __name__ == "__main__":
    main()
