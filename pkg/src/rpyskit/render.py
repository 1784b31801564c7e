"""Standalone SVG spectrograms and multi-RPYS heatmaps.

Output is plain SVG 1.1 text with no external references, built from
strings so identical inputs give identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional
from xml.sax.saxutils import escape

import numpy as np

from .multi import MultiRpysMatrix
from .rpys import Spectrum

# Anchor colours, low -> high.  Each runs monotonically in lightness.
PALETTES = {
    "viridis": ["#440154", "#482878", "#3e4989", "#31688e", "#26828e",
                "#1f9e89", "#35b779", "#6ece58", "#b5de2b", "#fde725"],
    "greys": ["#ffffff", "#d9d9d9", "#bdbdbd", "#969696", "#737373",
              "#525252", "#252525", "#000000"],
    "ylorrd": ["#ffffcc", "#ffeda0", "#fed976", "#feb24c", "#fd8d3c",
               "#fc4e2a", "#e31a1c", "#bd0026", "#800026"],
}


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class PlotStyle:
    width: int = 960
    height: int = 540
    color_map: str = "viridis"
    axis_label_step: int = 10
    missing_cell_color: str = "#e6e6e6"
    line_color: str = "#1f4e79"
    peak_color: str = "#c0392b"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        if self.axis_label_step < 1:
            raise ValueError("axis_label_step must be >= 1")
        if self.color_map not in PALETTES:
            raise ValueError(f"unknown color_map {self.color_map!r}; "
                             f"choose from {sorted(PALETTES)}")


def _rgb(hex_color: str) -> tuple:
    h = hex_color.lstrip("#")
    return tuple(int(h[i: i + 2], 16) for i in (0, 2, 4))


def palette_color(name: str, pos: float) -> str:
    """Linear interpolation along a named palette, ``pos`` in [0, 1]."""
    anchors = [_rgb(c) for c in PALETTES[name]]
    pos = min(1.0, max(0.0, float(pos)))
    x = pos * (len(anchors) - 1)
    i = min(int(math.floor(x)), len(anchors) - 2)
    t = x - i
    a, b = anchors[i], anchors[i + 1]
    rgb = [round(a[k] + (b[k] - a[k]) * t) for k in range(3)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def relative_luminance(hex_color: str) -> float:
    def lin(c):
        c /= 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    r, g, b = (lin(v) for v in _rgb(hex_color))
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def _f(x: float) -> str:
    return f"{x:.2f}"


def _svg_open(style: PlotStyle, title: str) -> list:
    return [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{style.width}" '
        f'height="{style.height}" viewBox="0 0 {style.width} {style.height}" '
        'font-family="Helvetica, Arial, sans-serif" font-size="11">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{style.width}" height="{style.height}" fill="#ffffff"/>',
    ]


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9:
        out.append(round(v, 10))
        v += step
    return out


def render_spectrogram(s: Spectrum, peaks: Optional[Iterable[int]] = None,
                       style: Optional[PlotStyle] = None, title: str = "RPYS spectrogram") -> str:
    """Deviation-by-reference-year line plot with marked peak years."""
    style = style or PlotStyle()
    if not len(s):
        raise RenderError("spectrum is empty; build a spectrum from cited references first")
    peaks = sorted(set(peaks or ()))
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = style.width - ml - mr, style.height - mt - mb
    years = [int(y) for y in s.years]
    dev = [float(d) for d in s.deviation]
    lo, hi = min(0.0, min(dev)), max(0.0, max(dev))
    if hi == lo:
        hi = lo + 1.0
    span = max(1, years[-1] - years[0])

    def X(y):
        if len(years) == 1:
            return ml + pw / 2
        return ml + (y - years[0]) / span * pw

    def Y(v):
        return mt + (hi - v) / (hi - lo) * ph

    out = _svg_open(style, title)
    out.append(f'<text x="{_f(style.width / 2)}" y="18" text-anchor="middle" '
               f'font-size="13">{escape(title)}</text>')
    out.append(f'<g class="axes" stroke="#000000" stroke-width="1">'
               f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}"/>'
               f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}"/></g>')
    out.append(f'<line class="zero" x1="{ml}" y1="{_f(Y(0))}" x2="{ml + pw}" y2="{_f(Y(0))}" '
               'stroke="#999999" stroke-dasharray="4 3"/>')
    for y in years:
        if y % style.axis_label_step:
            continue
        x = _f(X(y))
        out.append(f'<g class="xtick" data-year="{y}"><line x1="{x}" y1="{mt + ph}" x2="{x}" '
                   f'y2="{mt + ph + 4}" stroke="#000000"/><text x="{x}" y="{mt + ph + 16}" '
                   f'text-anchor="middle">{y}</text></g>')
    for v in _nice_ticks(lo, hi):
        yv = _f(Y(v))
        out.append(f'<g class="ytick"><line x1="{ml - 4}" y1="{yv}" x2="{ml}" y2="{yv}" '
                   f'stroke="#000000"/><text x="{ml - 6}" y="{yv}" text-anchor="end" '
                   f'dominant-baseline="middle">{v:g}</text></g>')
    out.append(f'<text x="{_f(ml + pw / 2)}" y="{style.height - 8}" text-anchor="middle">'
               'Reference publication year</text>')
    out.append(f'<text x="14" y="{_f(mt + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_f(mt + ph / 2)})">Deviation from 5-year median</text>')
    pts = " ".join(f"{_f(X(y))},{_f(Y(v))}" for y, v in zip(years, dev))
    out.append(f'<polyline class="deviation" fill="none" stroke="{style.line_color}" '
               f'stroke-width="1.5" points="{pts}"/>')
    lookup = dict(zip(years, dev))
    for y in peaks:
        if y not in lookup:
            continue
        out.append(f'<circle class="peak" data-year="{y}" cx="{_f(X(y))}" '
                   f'cy="{_f(Y(lookup[y]))}" r="3" fill="{style.peak_color}">'
                   f'<title>{y}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def row_positions(rank_row: np.ndarray) -> np.ndarray:
    """Min-max normalise a row of ranks to [0, 1]; NaN stays NaN.

    A row whose ranks are all equal maps to 1.0.
    """
    r = np.asarray(rank_row, dtype=np.float64)
    out = np.full(r.shape, np.nan)
    ok = ~np.isnan(r)
    if not ok.any():
        return out
    lo, hi = r[ok].min(), r[ok].max()
    out[ok] = 1.0 if hi == lo else (r[ok] - lo) / (hi - lo)
    return out


def render_heatmap(m: MultiRpysMatrix, style: Optional[PlotStyle] = None,
                   title: str = "Multi-RPYS") -> str:
    """Citing-year by cited-year heatmap of per-row normalised ranks."""
    style = style or PlotStyle()
    if m.rank.size == 0:
        raise RenderError("matrix is empty; build a multi-RPYS matrix first")
    order = np.argsort(m.citing_years, kind="mergesort")
    citing = m.citing_years[order]
    ranks = m.rank[order]
    cited = [int(y) for y in m.cited_years]
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = style.width - ml - mr, style.height - mt - mb
    cw = pw / len(cited)
    rh = ph / len(citing)

    out = _svg_open(style, title)
    out.append(f'<text x="{_f(style.width / 2)}" y="18" text-anchor="middle" '
               f'font-size="13">{escape(title)}</text>')
    out.append('<g class="cells" shape-rendering="crispEdges">')
    for i, cy in enumerate(citing):
        # latest citing year at the top
        y = mt + (len(citing) - 1 - i) * rh
        pos = row_positions(ranks[i])
        for j, ry in enumerate(cited):
            p = pos[j]
            if np.isnan(p):
                fill, dp, cls = style.missing_cell_color, "missing", "cell missing"
            else:
                fill, dp, cls = palette_color(style.color_map, p), f"{p:.4f}", "cell"
            out.append(f'<rect class="{cls}" data-citing="{int(cy)}" data-cited="{ry}" '
                       f'data-pos="{dp}" x="{_f(ml + j * cw)}" y="{_f(y)}" '
                       f'width="{_f(cw)}" height="{_f(rh)}" fill="{fill}"/>')
    out.append("</g>")
    for j, ry in enumerate(cited):
        if ry % style.axis_label_step:
            continue
        x = _f(ml + (j + 0.5) * cw)
        out.append(f'<g class="xtick" data-year="{ry}"><text x="{x}" y="{mt + ph + 16}" '
                   f'text-anchor="middle">{ry}</text></g>')
    ystep = max(1, int(math.ceil(len(citing) / 20)))
    for i, cy in enumerate(citing):
        if i % ystep:
            continue
        yc = _f(mt + (len(citing) - 1 - i + 0.5) * rh)
        out.append(f'<g class="ytick" data-year="{int(cy)}"><text x="{ml - 6}" y="{yc}" '
                   f'text-anchor="end" dominant-baseline="middle">{int(cy)}</text></g>')
    out.append(f'<text x="{_f(ml + pw / 2)}" y="{style.height - 8}" text-anchor="middle">'
               'Cited reference year</text>')
    out.append(f'<text x="14" y="{_f(mt + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_f(mt + ph / 2)})">Citing year</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
