"""Deterministic SVG plots of SRG clouds in the complex plane.

Output depends only on the inputs: coordinates are printed with fixed
precision and no timestamps or random ids are emitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .srg import SrgCloud

__all__ = [
    "Disk",
    "VerticalLine",
    "unit_circle",
    "PlotStyle",
    "Panel",
    "svg_document",
    "render_svg",
    "render_panels",
]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class Disk:
    """Circle overlay ``|z - center| = radius``."""

    center: float
    radius: float
    dash: str = ""
    color: str = "#444444"
    label: str = ""


@dataclass(frozen=True)
class VerticalLine:
    """Half-plane boundary ``Re z = re``; ``shade_left`` tints ``Re z < re``."""

    re: float
    dash: str = "4 3"
    color: str = "#444444"
    shade_left: bool = False


def unit_circle() -> Disk:
    return Disk(0.0, 1.0, "2 2", "#999999", "unit circle")


@dataclass(frozen=True)
class PlotStyle:
    width: int = 360
    height: int = 360
    margin: int = 36
    point_radius: float = 1.2
    point_opacity: float = 0.5
    colors: tuple = PALETTE
    xlim: "tuple[float, float] | None" = None
    ylim: "tuple[float, float] | None" = None

    def __post_init__(self):
        for lim in (self.xlim, self.ylim):
            if lim is not None and not (math.isfinite(lim[0]) and math.isfinite(lim[1])
                                        and lim[0] < lim[1]):
                raise ValueError(f"axis range {lim} must be finite and nonempty")


@dataclass(frozen=True)
class Panel:
    clouds: Sequence[SrgCloud]
    overlays: Sequence = ()
    title: str = ""
    style: PlotStyle = field(default_factory=PlotStyle)


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _auto_limits(clouds, overlays):
    xs, ys = [0.0, 1.0, -1.0], [1.0]
    for c in clouds:
        z = c.to_complex(mirror=False)
        if len(z):
            xs += [float(z.real.min()), float(z.real.max())]
            ys.append(float(np.abs(z.imag).max()))
    for o in overlays:
        if isinstance(o, Disk):
            xs += [o.center - o.radius, o.center + o.radius]
            ys.append(o.radius)
        else:
            xs.append(o.re)
    lo, hi = min(xs), max(xs)
    h = max(ys)
    pad = 0.08 * max(hi - lo, 2 * h)
    return (lo - pad, hi + pad), (-h - pad, h + pad)


def _panel_svg(panel: Panel, x0: float, y0: float) -> list[str]:
    st = panel.style
    auto_x, auto_y = _auto_limits(panel.clouds, panel.overlays)
    (xa, xb), (ya, yb) = st.xlim or auto_x, st.ylim or auto_y
    w, h = st.width - 2 * st.margin, st.height - 2 * st.margin
    # Equal scaling on both axes keeps circles round.
    scale = min(w / (xb - xa), h / (yb - ya))
    cx = x0 + st.margin + (w - scale * (xb - xa)) / 2 - scale * xa
    cy = y0 + st.margin + (h - scale * (yb - ya)) / 2 + scale * yb

    def px(re):
        return cx + scale * re

    def py(im):
        return cy - scale * im

    left, right = px(xa), px(xb)
    top, bottom = py(yb), py(ya)
    out = ['<g class="panel">']
    if panel.title:
        out.append(f'<text x="{_f(x0 + st.width / 2)}" y="{_f(y0 + st.margin * 0.6)}" '
                   f'text-anchor="middle" font-size="13">{escape(panel.title)}</text>')
    out.append(f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(right - left)}" '
               f'height="{_f(bottom - top)}" fill="none" stroke="#000000" stroke-width="0.8"/>')
    for o in panel.overlays:
        if isinstance(o, VerticalLine) and o.shade_left and xa < o.re:
            out.append(f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(px(o.re) - left)}" '
                       f'height="{_f(bottom - top)}" fill="#e8e8e8"/>')
    if ya < 0 < yb:
        out.append(f'<line x1="{_f(left)}" y1="{_f(py(0))}" x2="{_f(right)}" y2="{_f(py(0))}" '
                   'stroke="#888888" stroke-width="0.6"/>')
    if xa < 0 < xb:
        out.append(f'<line x1="{_f(px(0))}" y1="{_f(top)}" x2="{_f(px(0))}" y2="{_f(bottom)}" '
                   'stroke="#888888" stroke-width="0.6"/>')
    for k, c in enumerate(panel.clouds):
        color = st.colors[k % len(st.colors)]
        z = c.to_complex(mirror=True)
        inside = (z.real >= xa) & (z.real <= xb) & (z.imag >= ya) & (z.imag <= yb)
        out.append(f'<g fill="{color}" fill-opacity="{_f(st.point_opacity)}">')
        out.extend(f'<circle cx="{_f(px(p.real))}" cy="{_f(py(p.imag))}" r="{_f(st.point_radius)}"/>'
                   for p in z[inside])
        out.append("</g>")
    for o in panel.overlays:
        if isinstance(o, Disk):
            dash = f' stroke-dasharray="{o.dash}"' if o.dash else ""
            out.append(f'<circle cx="{_f(px(o.center))}" cy="{_f(py(0))}" r="{_f(scale * o.radius)}" '
                       f'fill="none" stroke="{o.color}" stroke-width="1.2"{dash}/>')
        elif isinstance(o, VerticalLine):
            dash = f' stroke-dasharray="{o.dash}"' if o.dash else ""
            out.append(f'<line x1="{_f(px(o.re))}" y1="{_f(top)}" x2="{_f(px(o.re))}" '
                       f'y2="{_f(bottom)}" stroke="{o.color}" stroke-width="1"{dash}/>')
        else:
            raise TypeError(f"unknown overlay {o!r}")
    fs = 10
    out.append(f'<text x="{_f(left)}" y="{_f(bottom + fs + 2)}" font-size="{fs}">{_f(xa)}</text>')
    out.append(f'<text x="{_f(right)}" y="{_f(bottom + fs + 2)}" font-size="{fs}" '
               f'text-anchor="end">{_f(xb)}</text>')
    out.append(f'<text x="{_f(right)}" y="{_f(top - 3)}" font-size="{fs}" '
               f'text-anchor="end">Im max {_f(yb)}</text>')
    out.append("</g>")
    return out


def svg_document(panels: Sequence[Panel], ncols: int = 1) -> str:
    if not panels:
        raise ValueError("nothing to render")
    ncols = max(1, min(ncols, len(panels)))
    nrows = math.ceil(len(panels) / ncols)
    cw = max(p.style.width for p in panels)
    ch = max(p.style.height for p in panels)
    W, H = cw * ncols, ch * nrows
    body = []
    for i, p in enumerate(panels):
        body += _panel_svg(p, (i % ncols) * cw, (i // ncols) * ch)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{W}" height="{H}" fill="#ffffff"/>', *body, "</svg>"]) + "\n"


def render_svg(clouds: Sequence[SrgCloud], overlays: Sequence = (), style: "PlotStyle | None" = None,
               path=None, title: str = "") -> str:
    """One complex-plane panel; points are drawn with their conjugate mirror.

    Writes to ``path`` when given and returns the SVG text.
    """
    if not clouds:
        raise ValueError("need at least one cloud")
    text = svg_document([Panel(tuple(clouds), tuple(overlays), title, style or PlotStyle())])
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def render_panels(panels: Sequence[Panel], ncols: int, path=None) -> str:
    text = svg_document(panels, ncols)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
