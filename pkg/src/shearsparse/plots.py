"""Deterministic SVG log-log plots.

Plots are hand-rolled text so artifacts are diffable and hashable; no
raster toolchain is involved.  Every plot is a view: the numbers behind
it are always written to a CSV first.  Reference guides draw
``C * x**-slope * log2(x)**logpow`` anchored at the first point of the
first series.
"""

from __future__ import annotations

import math

__all__ = ["loglog_svg", "REFERENCE_GUIDES"]

# slope guides for approximation-error curves
REFERENCE_GUIDES = (
    ("N^-1", 1.0, 0.0),
    ("N^-2", 2.0, 0.0),
    ("N^-2 log^3 N", 2.0, 3.0),
)

_PALETTE = ("#1b6ca8", "#c03221", "#2d7f4e", "#8448aa", "#b07d12", "#3c3c3c")
_GUIDE_COLOR = "#999999"

_WIDTH, _HEIGHT = 760, 540
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 24, 36, 56


def _decades(lo: float, hi: float):
    first = math.floor(math.log10(lo))
    last = math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(first, last + 1)]


class _Axes:
    def __init__(self, xlo, xhi, ylo, yhi):
        self.xlo, self.xhi = math.log10(xlo), math.log10(xhi)
        self.ylo, self.yhi = math.log10(ylo), math.log10(yhi)
        if self.xhi <= self.xlo:
            self.xhi = self.xlo + 1.0
        if self.yhi <= self.ylo:
            self.yhi = self.ylo + 1.0

    def x(self, v: float) -> float:
        t = (math.log10(v) - self.xlo) / (self.xhi - self.xlo)
        return _LEFT + t * (_WIDTH - _LEFT - _RIGHT)

    def y(self, v: float) -> float:
        t = (math.log10(v) - self.ylo) / (self.yhi - self.ylo)
        return _HEIGHT - _BOTTOM - t * (_HEIGHT - _TOP - _BOTTOM)


def _polyline(axes, xs, ys, color, dash="") -> str:
    pts = " ".join(f"{axes.x(x):.2f},{axes.y(y):.2f}"
                   for x, y in zip(xs, ys))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.6"'
            f'{dash_attr} points="{pts}"/>')


def loglog_svg(series, *, title="", xlabel="N", ylabel="squared error",
               references=(), path=None) -> str:
    """Render a log-log plot of ``series = [(label, xs, ys), ...]``.

    Nonpositive values cannot appear on log axes and are skipped.
    ``references`` is a sequence of ``(label, slope, logpow)`` guides.
    Returns the SVG text; also writes it when ``path`` is given.
    """
    cleaned = []
    for label, xs, ys in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if x > 0 and y > 0]
        if pts:
            cleaned.append((label, [p[0] for p in pts], [p[1] for p in pts]))
    if not cleaned:
        raise ValueError("nothing to plot: no positive data points")

    all_x = [x for _, xs, _ in cleaned for x in xs]
    all_y = [y for _, _, ys in cleaned for y in ys]
    guides = []
    if references:
        x0, y0 = cleaned[0][1][0], cleaned[0][2][0]
        for label, slope, logpow in references:
            ys = []
            for x in cleaned[0][1]:
                scale = (x / x0) ** -slope
                if logpow:
                    scale *= (math.log2(x) / math.log2(x0)) ** logpow
                ys.append(y0 * scale)
            guides.append((label, cleaned[0][1], ys))
            all_y.extend(ys)

    axes = _Axes(min(all_x), max(all_x), min(all_y), max(all_y))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    # frame
    x0, x1 = _LEFT, _WIDTH - _RIGHT
    y0, y1 = _TOP, _HEIGHT - _BOTTOM
    parts.append(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" '
                 f'height="{y1 - y0}" fill="none" stroke="#333"/>')
    # decade grid + tick labels
    for v in _decades(min(all_x), max(all_x)):
        if not (10 ** axes.xlo <= v <= 10 ** axes.xhi):
            continue
        px = axes.x(v)
        parts.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" '
                     f'y2="{y1}" stroke="#e0e0e0"/>')
        parts.append(f'<text x="{px:.2f}" y="{y1 + 18}" font-size="11" '
                     f'text-anchor="middle" font-family="monospace">'
                     f'1e{int(math.log10(v))}</text>')
    for v in _decades(min(all_y), max(all_y)):
        if not (10 ** axes.ylo <= v <= 10 ** axes.yhi):
            continue
        py = axes.y(v)
        parts.append(f'<line x1="{x0}" y1="{py:.2f}" x2="{x1}" '
                     f'y2="{py:.2f}" stroke="#e0e0e0"/>')
        parts.append(f'<text x="{x0 - 6}" y="{py + 4:.2f}" font-size="11" '
                     f'text-anchor="end" font-family="monospace">'
                     f'1e{int(math.log10(v))}</text>')
    # guides under data
    for label, xs, ys in guides:
        parts.append(_polyline(axes, xs, ys, _GUIDE_COLOR, dash="5,4"))
    for i, (label, xs, ys) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(_polyline(axes, xs, ys, color))
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{axes.x(x):.2f}" cy="{axes.y(y):.2f}" '
                         f'r="2.4" fill="{color}"/>')
    # legend
    ly = y0 + 16
    for i, (label, _, _) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<line x1="{x1 - 170}" y1="{ly - 4}" x2="{x1 - 146}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{x1 - 140}" y="{ly}" font-size="11" '
                     f'font-family="monospace">{label}</text>')
        ly += 16
    for label, _, _ in guides:
        parts.append(f'<line x1="{x1 - 170}" y1="{ly - 4}" x2="{x1 - 146}" '
                     f'y2="{ly - 4}" stroke="{_GUIDE_COLOR}" '
                     f'stroke-dasharray="5,4" stroke-width="2"/>')
        parts.append(f'<text x="{x1 - 140}" y="{ly}" font-size="11" '
                     f'font-family="monospace">{label}</text>')
        ly += 16
    if title:
        parts.append(f'<text x="{(x0 + x1) / 2}" y="{y0 - 12}" font-size="14" '
                     f'text-anchor="middle" font-family="monospace">{title}'
                     '</text>')
    parts.append(f'<text x="{(x0 + x1) / 2}" y="{_HEIGHT - 16}" '
                 f'font-size="12" text-anchor="middle" '
                 f'font-family="monospace">{xlabel}</text>')
    parts.append(f'<text x="20" y="{(y0 + y1) / 2}" font-size="12" '
                 f'text-anchor="middle" font-family="monospace" '
                 f'transform="rotate(-90 20 {(y0 + y1) / 2})">{ylabel}</text>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
