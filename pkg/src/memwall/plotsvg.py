"""Tiny dependency-free SVG line charts.

Deliberately minimal: fixed canvas, straight polylines, a legend, and
optional log axes. Output contains no timestamps or random ids, so the
same data always yields byte-identical SVG. The CSV written next to every
chart remains the machine-readable artifact; this is for eyeballs.
"""

from __future__ import annotations

import math
from typing import Sequence

_WIDTH, _HEIGHT = 720, 440
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 160, 36, 48

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        first = math.floor(math.log10(lo))
        last = math.ceil(math.log10(hi))
        return [10.0 ** e for e in range(first, last + 1)]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / 4)) if span > 0 else 1.0
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * max(1.0, abs(hi)):
        ticks.append(v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1000 or abs(v) < 0.01:
        return f"{v:.0e}"
    return f"{v:g}"


def line_chart(
    curves: Sequence[tuple[str, Sequence[tuple[float, float]]]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> str:
    """Render labeled (x, y) polylines into an SVG document string."""
    xs = [x for _, pts in curves for x, _ in pts]
    ys = [y for _, pts in curves for _, y in pts]
    if not xs:
        raise ValueError("no points to plot")
    if log_x and min(xs) <= 0:
        raise ValueError("log x-axis requires positive x values")
    if log_y and min(ys) <= 0:
        raise ValueError("log y-axis requires positive y values")

    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def tx(v: float) -> float:
        a, b = (math.log10(x_lo), math.log10(x_hi)) if log_x else (x_lo, x_hi)
        u = (math.log10(v) if log_x else v)
        return _MARGIN_L + (u - a) / (b - a) * (_WIDTH - _MARGIN_L - _MARGIN_R)

    def ty(v: float) -> float:
        a, b = (math.log10(y_lo), math.log10(y_hi)) if log_y else (y_lo, y_hi)
        u = (math.log10(v) if log_y else v)
        return _HEIGHT - _MARGIN_B - (u - a) / (b - a) * (_HEIGHT - _MARGIN_T - _MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>'
        )

    plot_r = _WIDTH - _MARGIN_R
    plot_b = _HEIGHT - _MARGIN_B
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_r - _MARGIN_L}" '
        f'height="{plot_b - _MARGIN_T}" fill="none" stroke="#333"/>'
    )

    for v in _ticks(x_lo, x_hi, log_x):
        if not x_lo <= v <= x_hi:
            continue
        x = tx(v)
        parts.append(f'<line x1="{x:.1f}" y1="{plot_b}" x2="{x:.1f}" y2="{plot_b + 5}" stroke="#333"/>')
        parts.append(f'<text x="{x:.1f}" y="{plot_b + 18}" text-anchor="middle">{_fmt(v)}</text>')
    for v in _ticks(y_lo, y_hi, log_y):
        if not y_lo <= v <= y_hi:
            continue
        y = ty(v)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{y:.1f}" x2="{_MARGIN_L}" y2="{y:.1f}" stroke="#333"/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{y + 4:.1f}" text-anchor="end">{_fmt(v)}</text>')

    if x_label:
        parts.append(
            f'<text x="{(_MARGIN_L + plot_r) / 2:.1f}" y="{_HEIGHT - 10}" text-anchor="middle">{x_label}</text>'
        )
    if y_label:
        cy = (_MARGIN_T + plot_b) / 2
        parts.append(
            f'<text x="16" y="{cy:.1f}" text-anchor="middle" transform="rotate(-90 16 {cy:.1f})">{y_label}</text>'
        )

    for i, (label, pts) in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{tx(x):.2f},{ty(y):.2f}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MARGIN_T + 14 + 16 * i
        parts.append(
            f'<line x1="{plot_r + 8}" y1="{ly - 4}" x2="{plot_r + 28}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{plot_r + 33}" y="{ly}" font-size="10">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
