"""Tiny standalone SVG plots: polylines, scatter points and bars on one panel."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = 56
PALETTE = ("#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555")


def _finite(vals):
    return [v for v in vals if v is not None and math.isfinite(v)]


def _range(vals):
    vals = _finite(vals)
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if lo == hi:
        pad = 0.5 if lo == 0 else 0.1 * abs(lo)
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo, hi, k=5):
    step = (hi - lo) / k
    mag = 10 ** math.floor(math.log10(step))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= step), default=step)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(hi):
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


class Figure:
    """Collects layers, then renders them on shared axes."""

    def __init__(self, title="", xlabel="", ylabel=""):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.layers = []

    def line(self, xs, ys, color=None, label=None):
        self.layers.append(("line", list(map(float, xs)), list(map(float, ys)), color, label))
        return self

    def points(self, xs, ys, color=None, label=None):
        self.layers.append(("points", list(map(float, xs)), list(map(float, ys)), color, label))
        return self

    def bars(self, xs, heights, color=None, label=None):
        self.layers.append(("bars", list(map(float, xs)), list(map(float, heights)), color, label))
        return self

    def hline(self, y, color="#999999", label=None):
        self.layers.append(("hline", [], [float(y)], color, label))
        return self

    def render(self):
        xs = [x for kind, lx, _, _, _ in self.layers if kind != "hline" for x in lx]
        ys = [y for _, _, ly, _, _ in self.layers for y in ly]
        if any(kind == "bars" for kind, *_ in self.layers):
            ys.append(0.0)
        x0, x1 = _range(xs)
        y0, y1 = _range(ys)
        pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

        def px(x):
            return MARGIN + (x - x0) / (x1 - x0) * pw

        def py(y):
            return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        ]
        for t in _ticks(x0, x1):
            out.append(f'<line x1="{px(t):.2f}" y1="{HEIGHT - MARGIN}" x2="{px(t):.2f}" y2="{HEIGHT - MARGIN + 4}" stroke="black"/>')
            out.append(f'<text x="{px(t):.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{t:g}</text>')
        for t in _ticks(y0, y1):
            out.append(f'<line x1="{MARGIN - 4}" y1="{py(t):.2f}" x2="{MARGIN}" y2="{py(t):.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN - 6}" y="{py(t) + 4:.2f}" text-anchor="end">{t:g}</text>')

        legend = []
        for i, (kind, lx, ly, color, label) in enumerate(self.layers):
            color = color or PALETTE[i % len(PALETTE)]
            if kind == "line":
                pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(lx, ly) if math.isfinite(x) and math.isfinite(y))
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            elif kind == "points":
                for x, y in zip(lx, ly):
                    if math.isfinite(x) and math.isfinite(y):
                        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')
            elif kind == "bars":
                gaps = [b - a for a, b in zip(lx, lx[1:])]
                bw = 0.8 * (min(gaps) if gaps else (x1 - x0) / 4) / (x1 - x0) * pw
                for x, h in zip(lx, ly):
                    if not math.isfinite(h):
                        continue
                    top, bottom = sorted((py(h), py(0.0)))
                    out.append(
                        f'<rect x="{px(x) - bw / 2:.2f}" y="{top:.2f}" width="{bw:.2f}" '
                        f'height="{bottom - top:.2f}" fill="{color}"/>'
                    )
            else:
                y = ly[0]
                if y0 <= y <= y1:
                    out.append(
                        f'<line x1="{MARGIN}" y1="{py(y):.2f}" x2="{WIDTH - MARGIN}" y2="{py(y):.2f}" '
                        f'stroke="{color}" stroke-dasharray="4 3"/>'
                    )
            if label:
                legend.append((color, label))
        for k, (color, label) in enumerate(legend):
            y = MARGIN + 14 + 14 * k
            out.append(f'<rect x="{WIDTH - MARGIN - 150}" y="{y - 8}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{WIDTH - MARGIN - 135}" y="{y + 1}">{escape(label)}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{escape(self.title)}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(
            f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 14 {HEIGHT / 2})">'
            f"{escape(self.ylabel)}</text>"
        )
        out.append("</svg>")
        return "\n".join(out) + "\n"
