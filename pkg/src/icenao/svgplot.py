"""Minimal deterministic SVG charts.

Byte-identical output for identical input is a hard requirement for the
pipeline (runs are compared by file hash), which rules out plotting
libraries that embed timestamps, random element ids, or version strings.
The charts here are plain text assembled from the data alone: line charts,
stem charts for correlograms, and closed orbit traces for phase planes.

Pixel coordinates are fixed-point with two decimals so formatting cannot
wobble across platforms.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError

WIDTH = 640
HEIGHT = 480
MARGIN = 54
PLOT_BOX = (MARGIN, MARGIN, WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN)
PALETTE = ("#1b6ca8", "#c0392b", "#27854c", "#8e5fa8", "#b07d2b", "#4a4a4a")
BG = "#ffffff"
FG = "#222222"
GRID = "#cccccc"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def scale_to_viewport(points: np.ndarray, box: tuple[float, float, float, float] = PLOT_BOX) -> np.ndarray:
    """Affine-map data points into a pixel box, flipping y.

    The data bounding box maps exactly onto the pixel box, so a unit circle
    fills the full plot area edge to edge. Degenerate extents (constant x
    or y) are centered.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or len(points) == 0:
        raise ContractError(f"need an (n, 2) point array, got shape {points.shape}")
    x0, y0, w, h = box
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    span = hi - lo
    out = np.empty_like(points)
    for j, (p0, extent) in enumerate(((x0, w), (y0, h))):
        if span[j] == 0.0:
            out[:, j] = p0 + extent / 2.0
        else:
            frac = (points[:, j] - lo[j]) / span[j]
            if j == 1:
                frac = 1.0 - frac
            out[:, j] = p0 + frac * extent
    return out


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="{BG}"/>',
        f'<text x="{WIDTH // 2}" y="24" font-family="sans-serif" font-size="15" '
        f'text-anchor="middle" fill="{FG}">{title}</text>',
    ]


def _frame(xlo: float, xhi: float, ylo: float, yhi: float, xlabel: str, ylabel: str) -> list[str]:
    x0, y0, w, h = PLOT_BOX
    parts = [
        f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="{GRID}"/>',
        f'<text x="{x0}" y="{y0 + h + 18}" font-family="sans-serif" font-size="11" fill="{FG}">{_fmt(xlo)}</text>',
        f'<text x="{x0 + w}" y="{y0 + h + 18}" font-family="sans-serif" font-size="11" '
        f'text-anchor="end" fill="{FG}">{_fmt(xhi)}</text>',
        f'<text x="{x0 - 6}" y="{y0 + h}" font-family="sans-serif" font-size="11" '
        f'text-anchor="end" fill="{FG}">{_fmt(ylo)}</text>',
        f'<text x="{x0 - 6}" y="{y0 + 10}" font-family="sans-serif" font-size="11" '
        f'text-anchor="end" fill="{FG}">{_fmt(yhi)}</text>',
        f'<text x="{x0 + w // 2}" y="{y0 + h + 34}" font-family="sans-serif" font-size="12" '
        f'text-anchor="middle" fill="{FG}">{xlabel}</text>',
        f'<text x="16" y="{y0 + h // 2}" font-family="sans-serif" font-size="12" '
        f'text-anchor="middle" fill="{FG}" transform="rotate(-90 16 {y0 + h // 2})">{ylabel}</text>',
    ]
    return parts


def _poly(pix: np.ndarray, color: str, close: bool = False, width: float = 1.5) -> str:
    pts = pix if not close else np.vstack([pix, pix[:1]])
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
    return (
        f'<polyline points="{coords}" fill="none" stroke="{color}" '
        f'stroke-width="{width}" stroke-linejoin="round"/>'
    )


def line_chart(
    series: list[tuple[str, np.ndarray]],
    title: str,
    xlabel: str = "",
    ylabel: str = "",
) -> str:
    """One or more (label, (n,2) points) series over shared axes."""
    if not series:
        raise ContractError("need at least one series")
    stacked = np.vstack([np.asarray(p, dtype=float) for _, p in series])
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    parts = _header(title) + _frame(lo[0], hi[0], lo[1], hi[1], xlabel, ylabel)
    for i, (label, pts) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        # embed in the common bbox so all series share one transform
        anchored = np.vstack([np.asarray(pts, dtype=float), [lo], [hi]])
        pix = scale_to_viewport(anchored)[: len(pts)]
        parts.append(_poly(pix, color))
        parts.append(
            f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 14 + 16 * i}" font-family="sans-serif" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def trajectory_chart(points: np.ndarray, title: str, xlabel: str, ylabel: str) -> str:
    """A closed orbit: the loop is completed back to the first point."""
    points = np.asarray(points, dtype=float)
    lo, hi = points.min(axis=0), points.max(axis=0)
    parts = _header(title) + _frame(lo[0], hi[0], lo[1], hi[1], xlabel, ylabel)
    parts.append(_poly(scale_to_viewport(points), PALETTE[0], close=True))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def stem_chart(
    lags: np.ndarray,
    values: np.ndarray,
    band: float,
    title: str,
    xlabel: str = "lag (days)",
    ylabel: str = "correlation",
) -> str:
    """Correlogram: one vertical stem per lag plus a dashed +-band."""
    lags = np.asarray(lags, dtype=float)
    values = np.asarray(values, dtype=float)
    if lags.shape != values.shape or lags.ndim != 1 or len(lags) == 0:
        raise ContractError("lags and values must be matching nonempty 1-D arrays")
    ylo = min(float(values.min()), -band, 0.0)
    yhi = max(float(values.max()), band, 0.0)
    xlo, xhi = float(lags.min()), float(lags.max())
    corners = np.array([[xlo, ylo], [xhi, yhi]])

    def to_pix(data: np.ndarray) -> np.ndarray:
        anchored = np.vstack([data, corners])
        return scale_to_viewport(anchored)[: len(data)]

    parts = _header(title) + _frame(xlo, xhi, ylo, yhi, xlabel, ylabel)
    zero = to_pix(np.array([[xlo, 0.0], [xhi, 0.0]]))
    parts.append(_poly(zero, FG, width=0.8))
    for level in (band, -band):
        ln = to_pix(np.array([[xlo, level], [xhi, level]]))
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in ln)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{PALETTE[1]}" '
            f'stroke-width="1" stroke-dasharray="5,4"/>'
        )
    base = to_pix(np.column_stack([lags, np.zeros_like(lags)]))
    tips = to_pix(np.column_stack([lags, values]))
    for (bx, by), (tx, ty) in zip(base, tips):
        parts.append(
            f'<line x1="{_fmt(bx)}" y1="{_fmt(by)}" x2="{_fmt(tx)}" y2="{_fmt(ty)}" '
            f'stroke="{PALETTE[0]}" stroke-width="1.2"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
