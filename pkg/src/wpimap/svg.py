"""Static SVG plots: variogram scatter + fitted curve, bubble map, heatmap.

All output is plain SVG text with fixed-precision coordinates, no timestamps
and no external resources, so re-rendering the same data is byte-identical
and tests can assert on the markup. The heatmap color ramp is a fixed
three-stop linear interpolation in sRGB:

    t = 0.0 -> #2c7bb6 (blue), t = 0.5 -> #ffffbf (pale yellow),
    t = 1.0 -> #d7191c (red)

Cells without a finite value (flagged kriging cells) are drawn in #bbbbbb.
Bubble markers scale their *area* linearly with the value between a fixed
minimum and maximum marker area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

RAMP_STOPS = ((0x2C, 0x7B, 0xB6), (0xFF, 0xFF, 0xBF), (0xD7, 0x19, 0x1C))
MISSING_COLOR = "#bbbbbb"
BUBBLE_AREA_MIN = 12.0
BUBBLE_AREA_MAX = 380.0


def ramp_color(t: float) -> str:
    """Hex color for t in [0, 1] on the fixed blue-yellow-red ramp."""
    t = min(max(t, 0.0), 1.0)
    if t <= 0.5:
        lo, hi, u = RAMP_STOPS[0], RAMP_STOPS[1], t * 2.0
    else:
        lo, hi, u = RAMP_STOPS[1], RAMP_STOPS[2], (t - 0.5) * 2.0
    rgb = [round(a + (b - a) * u) for a, b in zip(lo, hi)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _fmt_value(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class SvgCanvas:
    width: float
    height: float
    elements: list[str] = field(default_factory=list)

    def rect(self, x, y, w, h, fill, class_=None, stroke=None):
        attrs = (f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
                 f'height="{_fmt(h)}" fill="{fill}"')
        if stroke:
            attrs += f' stroke="{stroke}"'
        if class_:
            attrs += f' class="{class_}"'
        self.elements.append(attrs + "/>")

    def circle(self, cx, cy, r, fill, class_=None, opacity=None):
        attrs = f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{fill}"'
        if opacity is not None:
            attrs += f' fill-opacity="{opacity}"'
        if class_:
            attrs += f' class="{class_}"'
        self.elements.append(attrs + "/>")

    def polyline(self, points, stroke, class_=None, stroke_width=1.5):
        joined = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        attrs = (f'<polyline points="{joined}" fill="none" stroke="{stroke}" '
                 f'stroke-width="{stroke_width}"')
        if class_:
            attrs += f' class="{class_}"'
        self.elements.append(attrs + "/>")

    def text(self, x, y, content, class_=None, size=11, anchor="start"):
        attrs = (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
                 f'font-family="sans-serif" text-anchor="{anchor}"')
        if class_:
            attrs += f' class="{class_}"'
        self.elements.append(attrs + f">{content}</text>")

    def to_string(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{_fmt(self.width)}" height="{_fmt(self.height)}" '
                f'viewBox="0 0 {_fmt(self.width)} {_fmt(self.height)}">')
        return "\n".join([head, *self.elements, "</svg>"]) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_string())


@dataclass(frozen=True)
class _Frame:
    """Maps data coordinates onto a margin-inset drawing area (y flipped)."""

    x0: float
    x1: float
    y0: float
    y1: float
    left: float
    top: float
    w: float
    h: float

    def x(self, v: float) -> float:
        span = self.x1 - self.x0
        t = 0.5 if span == 0 else (v - self.x0) / span
        return self.left + t * self.w

    def y(self, v: float) -> float:
        span = self.y1 - self.y0
        t = 0.5 if span == 0 else (v - self.y0) / span
        return self.top + (1.0 - t) * self.h


def _make_frame(xs, ys, left, top, w, h) -> _Frame:
    return _Frame(min(xs), max(xs), min(ys), max(ys), left, top, w, h)


def _axes(canvas: SvgCanvas, frame: _Frame, x_label: str, y_label: str):
    canvas.rect(frame.left, frame.top, frame.w, frame.h, "none",
                class_="frame", stroke="#333333")
    canvas.text(frame.left, frame.top + frame.h + 28, _fmt_value(frame.x0),
                class_="axis-label")
    canvas.text(frame.left + frame.w, frame.top + frame.h + 28,
                _fmt_value(frame.x1), class_="axis-label", anchor="end")
    canvas.text(frame.left - 6, frame.top + frame.h, _fmt_value(frame.y0),
                class_="axis-label", anchor="end")
    canvas.text(frame.left - 6, frame.top + 10, _fmt_value(frame.y1),
                class_="axis-label", anchor="end")
    canvas.text(frame.left + frame.w / 2, frame.top + frame.h + 28, x_label,
                class_="axis-title", anchor="middle")
    canvas.text(12, frame.top - 8, y_label, class_="axis-title")


def render_variogram_svg(bins, curve=None, title: str = "Semivariogram",
                         path=None) -> str:
    """Variogram plot: one circle per lag bin (radius grows with pair count)
    plus the fitted model curve when given.

    ``bins`` is a sequence of (lag, gamma, pair_count); ``curve`` a sequence
    of (h, gamma) polyline vertices.
    """
    bins = list(bins)
    canvas = SvgCanvas(560, 400)
    lags = [b[0] for b in bins]
    gammas = [b[1] for b in bins]
    counts = [b[2] for b in bins]
    curve_pts = list(curve) if curve is not None else []
    all_x = lags + [p[0] for p in curve_pts] + [0.0]
    all_y = gammas + [p[1] for p in curve_pts] + [0.0]
    frame = _make_frame(all_x, all_y, 70, 40, 440, 300)
    _axes(canvas, frame, "lag (m)", "semivariance")
    canvas.text(frame.left + frame.w / 2, 24, title, class_="title",
                size=14, anchor="middle")
    if curve_pts:
        canvas.polyline([(frame.x(h), frame.y(g)) for h, g in curve_pts],
                        stroke="#d7191c", class_="model-curve")
    cmax = max(counts) if counts else 1
    for lag, gamma, count in bins:
        r = 2.5 + 5.5 * math.sqrt(count / cmax)
        canvas.circle(frame.x(lag), frame.y(gamma), r, "#2c7bb6",
                      class_="bin", opacity="0.8")
    svg = canvas.to_string()
    if path is not None:
        canvas.write(path)
    return svg


def render_bubble_svg(points, title: str = "Sample map", path=None) -> str:
    """Bubble map: one circle per sample, marker area linear in the value."""
    points = list(points)
    canvas = SvgCanvas(560, 560)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    values = [p[2] for p in points]
    frame = _make_frame(xs, ys, 70, 40, 440, 440)
    _axes(canvas, frame, "easting (m)", "northing (m)")
    canvas.text(frame.left + frame.w / 2, 24, title, class_="title",
                size=14, anchor="middle")
    vmin, vmax = min(values), max(values)
    span = vmax - vmin
    for x, y, v in points:
        t = 0.5 if span == 0 else (v - vmin) / span
        area = BUBBLE_AREA_MIN + t * (BUBBLE_AREA_MAX - BUBBLE_AREA_MIN)
        canvas.circle(frame.x(x), frame.y(y), math.sqrt(area / math.pi),
                      "#2c7bb6", class_="bubble", opacity="0.6")
    canvas.text(frame.left, frame.top + frame.h + 44,
                f"marker area linear in value, range [{_fmt_value(vmin)}, "
                f"{_fmt_value(vmax)}]", class_="legend-note")
    svg = canvas.to_string()
    if path is not None:
        canvas.write(path)
    return svg


def render_heatmap_svg(values: np.ndarray, origin_x: float, origin_y: float,
                       dx: float, dy: float, title: str = "Prediction map",
                       path=None) -> str:
    """Grid heatmap with a legend; ``values`` is (ny, nx), NaN cells gray.

    The legend is a 32-step vertical bar labeled with the finite min/max.
    """
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    canvas = SvgCanvas(640, 560)
    frame_w, frame_h = 440.0, 440.0
    left, top = 70.0, 40.0
    finite = values[np.isfinite(values)]
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    span = vmax - vmin
    cell_w = frame_w / nx
    cell_h = frame_h / ny
    for iy in range(ny):
        for ix in range(nx):
            v = values[iy, ix]
            if math.isfinite(v):
                t = 0.5 if span == 0 else (v - vmin) / span
                fill = ramp_color(t)
            else:
                fill = MISSING_COLOR
            # row iy=0 is the bottom of the map (northing grows upward)
            canvas.rect(left + ix * cell_w, top + (ny - 1 - iy) * cell_h,
                        cell_w, cell_h, fill, class_="cell")
    frame = _Frame(origin_x, origin_x + nx * dx, origin_y, origin_y + ny * dy,
                   left, top, frame_w, frame_h)
    _axes(canvas, frame, "easting (m)", "northing (m)")
    canvas.text(left + frame_w / 2, 24, title, class_="title", size=14,
                anchor="middle")
    # legend bar
    steps = 32
    bar_x, bar_y, bar_w, bar_h = left + frame_w + 30, top, 22.0, frame_h
    for s in range(steps):
        t = 1.0 - (s + 0.5) / steps
        canvas.rect(bar_x, bar_y + s * bar_h / steps, bar_w, bar_h / steps,
                    ramp_color(t), class_="legend-step")
    canvas.rect(bar_x, bar_y, bar_w, bar_h, "none", class_="legend-frame",
                stroke="#333333")
    canvas.text(bar_x + bar_w + 6, bar_y + 10, _fmt_value(vmax),
                class_="legend-label")
    canvas.text(bar_x + bar_w + 6, bar_y + bar_h, _fmt_value(vmin),
                class_="legend-label")
    svg = canvas.to_string()
    if path is not None:
        canvas.write(path)
    return svg
