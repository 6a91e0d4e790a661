"""Self-contained SVG 1.1 log-log scatter plots.

One figure per CSV: data series as colored points, fitted power laws as
lines, base-10 decade ticks.  Output is plain deterministic text with no
plotting dependency, sized for quick inspection rather than publication.
"""

from __future__ import annotations

import math
from pathlib import Path

WIDTH, HEIGHT = 640, 480
MARGIN = {"left": 72, "right": 24, "top": 42, "bottom": 54}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2")


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _ticks(lo: float, hi: float) -> list[float]:
    """Base-10 tick positions (log10 values) between lo and hi."""
    first, last = math.ceil(lo - 1e-9), math.floor(hi + 1e-9)
    if last >= first:
        ticks = list(range(first, last + 1))
        if len(ticks) >= 2:
            return [float(t) for t in ticks]
    span = hi - lo
    return [lo + span * k / 4 for k in range(5)]


class _Mapper:
    def __init__(self, lo_x, hi_x, lo_y, hi_y):
        pad_x = 0.05 * (hi_x - lo_x) or 0.5
        pad_y = 0.05 * (hi_y - lo_y) or 0.5
        self.lo_x, self.hi_x = lo_x - pad_x, hi_x + pad_x
        self.lo_y, self.hi_y = lo_y - pad_y, hi_y + pad_y
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def x(self, lx: float) -> float:
        t = (lx - self.lo_x) / (self.hi_x - self.lo_x)
        return self.x0 + t * (self.x1 - self.x0)

    def y(self, ly: float) -> float:
        t = (ly - self.lo_y) / (self.hi_y - self.lo_y)
        return self.y0 + t * (self.y1 - self.y0)


def svg_scatter(path, series, fits=(), title="", xlabel="", ylabel="") -> None:
    """Write a log-log scatter figure.

    series: iterable of (label, xs, ys) with positive values (others are
    dropped); fits: iterable of (label, slope, intercept) for lines
    ln y = slope ln x + intercept, drawn across the data range.
    """
    pts = []
    clean = []
    for label, xs, ys in series:
        pair = [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys)
                if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)]
        clean.append((label, pair))
        pts.extend(pair)
    if pts:
        lo_x, hi_x = min(p[0] for p in pts), max(p[0] for p in pts)
        lo_y, hi_y = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        lo_x = lo_y = 0.0
        hi_x = hi_y = 1.0
    m = _Mapper(lo_x, hi_x, lo_y, hi_y)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" font-family="sans-serif" font-size="15" '
        f'text-anchor="middle">{_esc(title)}</text>',
    ]
    # axes box and ticks
    out.append(f'<rect x="{m.x0}" y="{m.y1}" width="{m.x1 - m.x0}" '
               f'height="{m.y0 - m.y1}" fill="none" stroke="black" stroke-width="1"/>')
    for t in _ticks(m.lo_x, m.hi_x):
        px = m.x(t)
        if not m.x0 <= px <= m.x1:
            continue
        out.append(f'<line x1="{px:.1f}" y1="{m.y1}" x2="{px:.1f}" y2="{m.y0}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{px:.1f}" y="{m.y0 + 18}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="middle">{10.0 ** t:.3g}</text>')
    for t in _ticks(m.lo_y, m.hi_y):
        py = m.y(t)
        if not m.y1 <= py <= m.y0:
            continue
        out.append(f'<line x1="{m.x0}" y1="{py:.1f}" x2="{m.x1}" y2="{py:.1f}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{m.x0 - 6}" y="{py + 4:.1f}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="end">{10.0 ** t:.3g}</text>')
    out.append(f'<text x="{(m.x0 + m.x1) / 2:.1f}" y="{HEIGHT - 14}" '
               f'font-family="sans-serif" font-size="13" text-anchor="middle">'
               f'{_esc(xlabel)}</text>')
    out.append(f'<text x="18" y="{(m.y0 + m.y1) / 2:.1f}" font-family="sans-serif" '
               f'font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 18 {(m.y0 + m.y1) / 2:.1f})">{_esc(ylabel)}</text>')

    ln10 = math.log(10.0)
    for k, (label, slope, intercept) in enumerate(fits):
        color = PALETTE[(len(clean) + k) % len(PALETTE)]
        ly0 = (slope * m.lo_x * ln10 + intercept) / ln10
        ly1 = (slope * m.hi_x * ln10 + intercept) / ln10
        out.append(f'<line x1="{m.x(m.lo_x):.1f}" y1="{m.y(ly0):.1f}" '
                   f'x2="{m.x(m.hi_x):.1f}" y2="{m.y(ly1):.1f}" '
                   f'stroke="{color}" stroke-width="1.5" stroke-dasharray="6 3"/>')
    for k, (label, pair) in enumerate(clean):
        color = PALETTE[k % len(PALETTE)]
        for lx, ly in pair:
            out.append(f'<circle cx="{m.x(lx):.1f}" cy="{m.y(ly):.1f}" r="3.2" '
                       f'fill="{color}" fill-opacity="0.85"/>')
    # legend
    entries = [(label, PALETTE[k % len(PALETTE)], "point")
               for k, (label, _) in enumerate(clean)]
    entries += [(f"{label} (slope {slope:.3f})",
                 PALETTE[(len(clean) + k) % len(PALETTE)], "line")
                for k, (label, slope, _) in enumerate(fits)]
    ly_pos = m.y1 + 14
    for label, color, style in entries:
        if style == "point":
            out.append(f'<circle cx="{m.x1 - 150}" cy="{ly_pos - 4:.1f}" r="3.2" fill="{color}"/>')
        else:
            out.append(f'<line x1="{m.x1 - 156}" y1="{ly_pos - 4:.1f}" x2="{m.x1 - 144}" '
                       f'y2="{ly_pos - 4:.1f}" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{m.x1 - 138}" y="{ly_pos:.1f}" font-family="sans-serif" '
                   f'font-size="11">{_esc(label)}</text>')
        ly_pos += 16
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
