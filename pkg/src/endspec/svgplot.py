"""Minimal static SVG log-log plots (no plotting dependency).

One plot per file: axes with decade ticks, one polyline per series, a small
legend.  Output is deterministic: coordinates are formatted with a fixed
precision and series are drawn in the order given.
"""

from __future__ import annotations

import math
from pathlib import Path

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 50
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _decades(lo: float, hi: float):
    a = math.floor(math.log10(lo))
    b = math.ceil(math.log10(hi))
    return [10.0**e for e in range(a, b + 1)]


def write_loglog_svg(path, title: str, series, xlabel: str = "", ylabel: str = "",
                     meta: dict | None = None):
    """series: list of (label, xs, ys); non-positive points are dropped.

    ``meta`` entries are embedded as an XML comment (run provenance).
    """
    cleaned = []
    for label, xs, ys in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if pts:
            cleaned.append((label, pts))
    if not cleaned:
        cleaned = [("empty", [(1.0, 1.0)])]
    all_x = [p[0] for _, pts in cleaned for p in pts]
    all_y = [p[1] for _, pts in cleaned for p in pts]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo / 2.0, x_hi * 2.0
    if y_lo == y_hi:
        y_lo, y_hi = y_lo / 2.0, y_hi * 2.0

    def sx(x):
        t = (math.log10(x) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        return _ML + t * (_W - _ML - _MR)

    def sy(y):
        t = (math.log10(y) - math.log10(y_lo)) / (math.log10(y_hi) - math.log10(y_lo))
        return _H - _MB - t * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
    ]
    if meta:
        note = " ".join(f"{k}={v}" for k, v in meta.items())
        parts.append(f"<!-- {note} -->")
    parts += [
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="24" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="#333"/>',
    ]
    for t in _decades(x_lo, x_hi):
        if x_lo <= t <= x_hi:
            x = sx(t)
            parts.append(f'<line x1="{_fmt(x)}" y1="{_MT}" x2="{_fmt(x)}" '
                         f'y2="{_H - _MB}" stroke="#ddd"/>')
            parts.append(f'<text x="{_fmt(x)}" y="{_H - _MB + 16}" text-anchor="middle" '
                         f'font-size="11" font-family="sans-serif">1e{int(math.log10(t))}</text>')
    for t in _decades(y_lo, y_hi):
        if y_lo <= t <= y_hi:
            y = sy(t)
            parts.append(f'<line x1="{_ML}" y1="{_fmt(y)}" x2="{_W - _MR}" '
                         f'y2="{_fmt(y)}" stroke="#ddd"/>')
            parts.append(f'<text x="{_ML - 6}" y="{_fmt(y + 4)}" text-anchor="end" '
                         f'font-size="11" font-family="sans-serif">1e{int(math.log10(t))}</text>')
    if xlabel:
        parts.append(f'<text x="{_W // 2}" y="{_H - 12}" text-anchor="middle" '
                     f'font-size="12" font-family="sans-serif">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{_H // 2}" text-anchor="middle" font-size="12" '
                     f'font-family="sans-serif" transform="rotate(-90 16 {_H // 2})">{ylabel}</text>')
    for j, (label, pts) in enumerate(cleaned):
        color = _COLORS[j % len(_COLORS)]
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.5" '
                         f'fill="{color}"/>')
        ly = _MT + 16 + 14 * j
        parts.append(f'<line x1="{_W - _MR - 130}" y1="{ly - 4}" x2="{_W - _MR - 110}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_W - _MR - 104}" y="{ly}" font-size="11" '
                     f'font-family="sans-serif">{label}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts), encoding="utf-8")
