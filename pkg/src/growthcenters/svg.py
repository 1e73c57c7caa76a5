"""Minimal SVG line charts (axes, polylines, tick labels, legend)."""
from __future__ import annotations

import math
from html import escape

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 130, 40, 50


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step) + 1)]


def _label(v: float) -> str:
    return f"{v:.4g}"


def line_chart(series, title: str = "", xlabel: str = "t", ylabel: str = "",
               max_legend: int = 10) -> str:
    """``series`` is a sequence of (label, xs, ys); non-finite points are dropped."""
    clean = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        ok = np.isfinite(xs) & np.isfinite(ys)
        clean.append((str(label), xs[ok], ys[ok]))
    pts = [(xs, ys) for _, xs, ys in clean if xs.size]
    if pts:
        x_lo = min(xs.min() for xs, _ in pts)
        x_hi = max(xs.max() for xs, _ in pts)
        y_lo = min(ys.min() for _, ys in pts)
        y_hi = max(ys.max() for _, ys in pts)
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for x in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(x):.2f}" y1="{TOP + ph}" x2="{sx(x):.2f}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(x):.2f}" y="{TOP + ph + 16}" text-anchor="middle">{_label(x)}</text>')
    for y in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{LEFT - 4}" y1="{sy(y):.2f}" x2="{LEFT}" y2="{sy(y):.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 6}" y="{sy(y) + 4:.2f}" text-anchor="end">{_label(y)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (label, xs, ys) in enumerate(clean):
        color = PALETTE[k % len(PALETTE)]
        if xs.size:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        if k < max_legend:
            ly = TOP + 14 * k + 6
            out.append(f'<line x1="{LEFT + pw + 10}" y1="{ly}" x2="{LEFT + pw + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{LEFT + pw + 34}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
