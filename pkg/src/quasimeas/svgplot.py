"""Minimal dependency-free SVG line plots.

Polylines, axes with tick labels, optional logarithmic abscissa, and
horizontal reference lines.  Axes cover the data range with a 5% margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

WIDTH = 860
HEIGHT = 520
MARGIN_L = 70
MARGIN_R = 20
MARGIN_T = 40
MARGIN_B = 50
PALETTE = ["#c0392b", "#27ae60", "#2980b9", "#000000", "#8e44ad", "#d35400", "#16a085"]


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    color: str | None = None
    dashed: bool = False


@dataclass
class RefLine:
    y: float
    color: str = "#888888"
    label: str = ""


@dataclass
class LinePlot:
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    log_x: bool = False
    series: list = field(default_factory=list)
    ref_lines: list = field(default_factory=list)

    def add(self, label, x, y, color=None, dashed=False):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ConfigError("series x and y must be equal-length 1-d arrays")
        self.series.append(Series(label, x, y, color, dashed))

    def _x_transform(self, x):
        if self.log_x:
            with np.errstate(divide="ignore"):
                return np.log10(x)
        return x

    def render(self) -> str:
        if not self.series:
            raise ConfigError("plot has no series")
        xs, ys = [], []
        for s in self.series:
            tx = self._x_transform(s.x)
            keep = np.isfinite(tx) & np.isfinite(s.y)
            if not np.any(keep):
                raise ConfigError(f"series {s.label!r} has no finite points")
            xs.append(tx[keep])
            ys.append(s.y[keep])
        for r in self.ref_lines:
            ys.append(np.array([r.y]))
        x_lo = min(float(a.min()) for a in xs)
        x_hi = max(float(a.max()) for a in xs)
        y_lo = min(float(a.min()) for a in ys)
        y_hi = max(float(a.max()) for a in ys)
        # 5% margins; degenerate ranges widen to a unit box.
        def pad(lo, hi):
            span = hi - lo
            if span == 0.0:
                return lo - 0.5, hi + 0.5
            return lo - 0.05 * span, hi + 0.05 * span

        x_lo, x_hi = pad(x_lo, x_hi)
        y_lo, y_hi = pad(y_lo, y_hi)
        pw = WIDTH - MARGIN_L - MARGIN_R
        ph = HEIGHT - MARGIN_T - MARGIN_B

        def px(x):
            return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw

        def py(y):
            return MARGIN_T + (y_hi - y) / (y_hi - y_lo) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        ]
        if self.title:
            out.append(
                f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" '
                f'font-family="sans-serif" font-size="15">{_esc(self.title)}</text>'
            )
        # frame
        out.append(
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" '
            'fill="none" stroke="black" stroke-width="1"/>'
        )
        out.extend(self._ticks(x_lo, x_hi, y_lo, y_hi, px, py))
        for r in self.ref_lines:
            if y_lo <= r.y <= y_hi:
                out.append(
                    f'<line x1="{px(x_lo):.2f}" y1="{py(r.y):.2f}" x2="{px(x_hi):.2f}" '
                    f'y2="{py(r.y):.2f}" stroke="{r.color}" stroke-width="0.8" '
                    'stroke-dasharray="2,3"/>'
                )
        for i, s in enumerate(self.series):
            color = s.color or PALETTE[i % len(PALETTE)]
            tx = self._x_transform(s.x)
            keep = np.isfinite(tx) & np.isfinite(s.y)
            pts = " ".join(
                f"{px(a):.2f},{py(b):.2f}" for a, b in zip(tx[keep], s.y[keep])
            )
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.3"{dash}/>'
            )
        out.extend(self._legend())
        if self.x_label:
            out.append(
                f'<text x="{MARGIN_L + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="13">{_esc(self.x_label)}</text>'
            )
        if self.y_label:
            cx, cy = 18, MARGIN_T + ph / 2
            out.append(
                f'<text x="{cx}" y="{cy}" text-anchor="middle" font-family="sans-serif" '
                f'font-size="13" transform="rotate(-90 {cx} {cy})">{_esc(self.y_label)}</text>'
            )
        out.append("</svg>")
        return "\n".join(out)

    def _ticks(self, x_lo, x_hi, y_lo, y_hi, px, py):
        out = []
        for v in _tick_values(x_lo, x_hi, self.log_x):
            x = px(v)
            label = f"1e{v:g}" if self.log_x else f"{v:g}"
            out.append(
                f'<line x1="{x:.2f}" y1="{py(y_lo):.2f}" x2="{x:.2f}" '
                f'y2="{py(y_lo) + 5:.2f}" stroke="black"/>'
            )
            out.append(
                f'<text x="{x:.2f}" y="{py(y_lo) + 20:.2f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{label}</text>'
            )
        for v in _tick_values(y_lo, y_hi, False):
            y = py(v)
            out.append(
                f'<line x1="{px(x_lo) - 5:.2f}" y1="{y:.2f}" x2="{px(x_lo):.2f}" '
                f'y2="{y:.2f}" stroke="black"/>'
            )
            out.append(
                f'<text x="{px(x_lo) - 8:.2f}" y="{y + 4:.2f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{v:g}</text>'
            )
        return out

    def _legend(self):
        out = []
        x0 = MARGIN_L + 10
        y0 = MARGIN_T + 16
        for i, s in enumerate(self.series):
            color = s.color or PALETTE[i % len(PALETTE)]
            y = y0 + 16 * i
            out.append(
                f'<line x1="{x0}" y1="{y - 4}" x2="{x0 + 22}" y2="{y - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            out.append(
                f'<text x="{x0 + 28}" y="{y}" font-family="sans-serif" '
                f'font-size="12">{_esc(s.label)}</text>'
            )
        return out


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _tick_values(lo, hi, integer_decades):
    if integer_decades:
        return [v for v in range(math.ceil(lo), math.floor(hi) + 1)]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / 4))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= 8:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    vals = []
    v = first
    while v <= hi + 1e-12 * span:
        vals.append(round(v, 12))
        v += step
    return vals


def save(plot: LinePlot, path) -> None:
    with open(path, "w") as fh:
        fh.write(plot.render())
