"""Minimal SVG line charts (polylines, axes, ticks) without a plotting library."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def line_chart(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "n",
    ylabel: str = "",
    log_x: bool = False,
    width: int = 800,
    height: int = 480,
) -> str:
    """Render ``(label, xs, ys)`` series as one SVG document.

    Series sharing a label share a colour, so replicas of the same vertex
    read as one family.  With ``log_x`` nonpositive x values are dropped.
    """
    margin_l, margin_r, margin_t, margin_b = 70, 140, 40, 50
    prepared = []
    for label, xs, ys in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(float(y))]
        if log_x:
            pts = [(math.log10(x), y) for x, y in pts if x > 0]
        if pts:
            prepared.append((label, pts))
    if not prepared:
        raise ValueError("nothing to plot")
    x_lo = min(p[0] for _, pts in prepared for p in pts)
    x_hi = max(p[0] for _, pts in prepared for p in pts)
    y_lo = min(p[1] for _, pts in prepared for p in pts)
    y_hi = max(p[1] for _, pts in prepared for p in pts)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pw = width - margin_l - margin_r
    ph = height - margin_t - margin_b

    def sx(x):
        return margin_l + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return margin_t + (1 - (y - y_lo) / (y_hi - y_lo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{margin_l}" y1="{margin_t + ph}" x2="{margin_l + pw}" y2="{margin_t + ph}" stroke="black"/>',
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + ph}" stroke="black"/>',
    ]
    for t in _nice_ticks(x_lo, x_hi):
        X = sx(t)
        text = f"1e{t:g}" if log_x else f"{t:g}"
        out.append(f'<line x1="{X:.2f}" y1="{margin_t + ph}" x2="{X:.2f}" y2="{margin_t + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{margin_t + ph + 18}" text-anchor="middle">{text}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        Y = sy(t)
        out.append(f'<line x1="{margin_l - 5}" y1="{Y:.2f}" x2="{margin_l}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{margin_l - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(
        f'<text x="{margin_l + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">'
        f'{escape(xlabel + (" (log scale)" if log_x else ""))}</text>'
    )
    out.append(
        f'<text x="16" y="{margin_t + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {margin_t + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    labels = list(dict.fromkeys(label for label, _ in prepared))
    colour = {label: PALETTE[i % len(PALETTE)] for i, label in enumerate(labels)}
    for label, pts in prepared:
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(
            f'<polyline fill="none" stroke="{colour[label]}" stroke-width="1.2" points="{coords}">'
            f"<title>{escape(label)}</title></polyline>"
        )
    for i, label in enumerate(labels):
        Y = margin_t + 10 + 16 * i
        X = margin_l + pw + 15
        out.append(f'<line x1="{X}" y1="{Y}" x2="{X + 20}" y2="{Y}" stroke="{colour[label]}" stroke-width="2"/>')
        out.append(f'<text x="{X + 26}" y="{Y + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
