"""A tiny SVG line-plot writer."""

from __future__ import annotations

import csv
import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def line_plot(xs, series: dict[str, list[float]], title: str = "", xlabel: str = "", ylabel: str = "",
              hline: float | None = None, logx: bool = False, width: int = 640, height: int = 400) -> str:
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom
    fx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    xv = [fx(x) for x in xs]
    ys = [y for vals in series.values() for y in vals if math.isfinite(y)]
    if hline is not None:
        ys.append(hline)
    if not ys:
        ys = [0.0, 1.0]
    x_lo, x_hi = min(xv), max(xv)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return top + (y_hi - v) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" '
           f'font-size="12">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for i in range(5):
        yv = y_lo + (y_hi - y_lo) * i / 4
        out.append(f'<text x="{left - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    for x, v in zip(xs, xv):
        out.append(f'<text x="{px(v):.1f}" y="{top + ph + 16}" text-anchor="middle">{x:g}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{top + ph / 2:.1f}" transform="rotate(-90 16 {top + ph / 2:.1f})" '
                   f'text-anchor="middle">{escape(ylabel)}</text>')
    if hline is not None and y_lo <= hline <= y_hi:
        out.append(f'<line x1="{left}" x2="{left + pw}" y1="{py(hline):.1f}" y2="{py(hline):.1f}" '
                   f'stroke="#999" stroke-dasharray="4 3"/>')
    for k, (name, vals) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(xv, vals) if math.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for a, b in zip(xv, vals):
            if math.isfinite(b):
                out.append(f'<circle cx="{px(a):.1f}" cy="{py(b):.1f}" r="3" fill="{color}"/>')
        ly = top + 16 * (k + 1)
        out.append(f'<line x1="{left + pw + 10}" x2="{left + pw + 30}" y1="{ly}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_from_csv(csv_path, svg_path, title: str = "") -> None:
    """Plot every ``ratio_*`` column against ``n``."""
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{csv_path} has no data rows")
    xs = [float(r["n"]) for r in rows]
    series = {k[len("ratio_"):]: [float(r[k]) for r in rows] for k in rows[0] if k.startswith("ratio_")}
    with open(svg_path, "w") as fh:
        fh.write(line_plot(xs, series, title=title, xlabel="n", ylabel="p_hat / (n F(x))", hline=1.0, logx=True))
