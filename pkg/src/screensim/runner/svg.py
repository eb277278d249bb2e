"""A very small static SVG writer: axes, polylines, circles and triangles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 40, 60

PALETTE = ("#1f77b4", "#222222", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf")

# viridis anchors, interpolated linearly
_VIRIDIS = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))


def colormap(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_VIRIDIS) - 1)
    i = min(int(t), len(_VIRIDIS) - 2)
    f = t - i
    rgb = [round(a + (b - a) * f) for a, b in zip(_VIRIDIS[i], _VIRIDIS[i + 1])]
    return "#%02x%02x%02x" % tuple(rgb)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(v: float) -> str:
    if abs(v) >= 1000 or (v != 0 and abs(v) < 0.01):
        return f"{v:.3g}"
    return f"{v:g}"


@dataclass
class Series:
    label: str
    xs: Sequence[float]
    ys: Sequence[float]
    color: str = PALETTE[0]
    dashed: bool = False
    markers: bool = True


@dataclass
class Point:
    x: float
    y: float
    color: str
    triangle: bool = False
    size: float = 5.0


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    points: list[Point] = field(default_factory=list)
    legend_note: Optional[str] = None
    diagonal: bool = False
    log_x: bool = False

    def _tx(self, x: float) -> float:
        return math.log10(x) if self.log_x else x

    def _bounds(self):
        xs = [self._tx(x) for s in self.series for x in s.xs] + [self._tx(p.x) for p in self.points]
        ys = [y for s in self.series for y in s.ys] + [p.y for p in self.points]
        if not xs:
            return 0.0, 1.0, 0.0, 1.0
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        if self.diagonal:
            x0 = y0 = min(x0, y0)
            x1 = y1 = max(x1, y1)
        padx = (x1 - x0) * 0.05 or 0.5
        pady = (y1 - y0) * 0.05 or 0.5
        return x0 - padx, x1 + padx, y0 - pady, y1 + pady

    def render(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        pw = WIDTH - MARGIN_L - MARGIN_R
        ph = HEIGHT - MARGIN_T - MARGIN_B

        def px(x):
            return MARGIN_L + (self._tx(x) - x0) / (x1 - x0) * pw

        def py(y):
            return MARGIN_T + (1 - (y - y0) / (y1 - y0)) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2 - MARGIN_R / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        ]
        for t in _nice_ticks(x0, x1):
            X = MARGIN_L + (t - x0) / (x1 - x0) * pw
            label = _tick_label(10**t if self.log_x else t)
            out.append(f'<line x1="{_fmt(X)}" y1="{MARGIN_T + ph}" x2="{_fmt(X)}" y2="{MARGIN_T + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(X)}" y="{MARGIN_T + ph + 18}" text-anchor="middle">{label}</text>')
        for t in _nice_ticks(y0, y1):
            Y = py(t)
            out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(Y)}" x2="{MARGIN_L}" y2="{_fmt(Y)}" stroke="black"/>')
            out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{_tick_label(t)}</text>')
        out.append(
            f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(self.xlabel)}</text>'
        )
        out.append(
            f'<text x="18" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {MARGIN_T + ph / 2:.1f})">{escape(self.ylabel)}</text>'
        )
        if self.diagonal:
            lo, hi = max(x0, y0), min(x1, y1)
            out.append(
                f'<line x1="{_fmt(px(lo))}" y1="{_fmt(py(lo))}" x2="{_fmt(px(hi))}" y2="{_fmt(py(hi))}" '
                'stroke="gray" stroke-dasharray="6,4"/>'
            )
        for s in self.series:
            pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s.xs, s.ys))
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" stroke-width="2"{dash}/>')
            if s.markers:
                for x, y in zip(s.xs, s.ys):
                    out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{s.color}"/>')
        for p in self.points:
            cx, cy, r = px(p.x), py(p.y), p.size
            if p.triangle:
                # inverted triangle
                tri = f"{_fmt(cx - r)},{_fmt(cy - r)} {_fmt(cx + r)},{_fmt(cy - r)} {_fmt(cx)},{_fmt(cy + r)}"
                out.append(f'<polygon class="worse" points="{tri}" fill="{p.color}" stroke="black" stroke-width="0.5"/>')
            else:
                out.append(
                    f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{p.color}" stroke="black" stroke-width="0.5"/>'
                )
        ly = MARGIN_T + 10
        lx = WIDTH - MARGIN_R + 12
        for s in self.series:
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{s.color}" stroke-width="2"{dash}/>')
            out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(s.label)}</text>')
            ly += 18
        if self.legend_note:
            for line in self.legend_note.split("\n"):
                out.append(f'<text x="{lx}" y="{ly + 4}" font-size="11">{escape(line)}</text>')
                ly += 15
        out.append("</svg>")
        return "\n".join(out) + "\n"
