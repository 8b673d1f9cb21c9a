"""Minimal self-contained SVG plots (inline styles, no external assets)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
MARGIN = dict(left=70, right=20, top=30, bottom=55)


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(round(v, 12))
        v += step
    return out


class Figure:
    """One pair of axes mapping the data window onto the SVG canvas."""

    def __init__(self, xlim, ylim, title="", xlabel="", ylabel=""):
        self.xlim, self.ylim = xlim, ylim
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.body = []
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        x0, x1 = self.xlim
        return MARGIN["left"] + (x - x0) / (x1 - x0) * self.pw

    def py(self, y):
        y0, y1 = self.ylim
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * self.ph

    def rect(self, x0, y0, x1, y1, fill):
        X0, X1 = sorted((self.px(x0), self.px(x1)))
        Y0, Y1 = sorted((self.py(y0), self.py(y1)))
        self.body.append(
            f'<rect x="{X0:.2f}" y="{Y0:.2f}" width="{X1 - X0 + 0.3:.2f}" '
            f'height="{Y1 - Y0 + 0.3:.2f}" style="fill:{fill};stroke:none"/>'
        )

    def polyline(self, xs, ys, color, width=1.5, dashed=False):
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys)
                       if math.isfinite(x) and math.isfinite(y))
        if not pts:
            return
        dash = ";stroke-dasharray:6,4" if dashed else ""
        self.body.append(
            f'<polyline points="{pts}" style="fill:none;stroke:{color};'
            f'stroke-width:{width}{dash}"/>'
        )

    def marker(self, x, y, color, shape="circle", size=5, label=None):
        X, Y = self.px(x), self.py(y)
        if shape == "diamond":
            pts = f"{X},{Y - size} {X + size},{Y} {X},{Y + size} {X - size},{Y}"
            self.body.append(f'<polygon points="{pts}" style="fill:{color};stroke:black;stroke-width:0.5"/>')
        else:
            self.body.append(f'<circle cx="{X:.2f}" cy="{Y:.2f}" r="{size}" '
                             f'style="fill:{color};stroke:black;stroke-width:0.5"/>')
        if label:
            self.text(x, y, label, dx=size + 2, dy=-size)

    def text(self, x, y, s, dx=0, dy=0, size=11):
        self.body.append(
            f'<text x="{self.px(x) + dx:.2f}" y="{self.py(y) + dy:.2f}" '
            f'style="font-family:sans-serif;font-size:{size}px">{escape(s)}</text>'
        )

    def _axes(self):
        out = []
        l, t = MARGIN["left"], MARGIN["top"]
        out.append(f'<rect x="{l}" y="{t}" width="{self.pw}" height="{self.ph}" '
                   'style="fill:none;stroke:black;stroke-width:1"/>')
        font = "font-family:sans-serif"
        for v in _ticks(*self.xlim):
            X = self.px(v)
            out.append(f'<line x1="{X:.2f}" y1="{t + self.ph}" x2="{X:.2f}" y2="{t + self.ph + 5}" style="stroke:black"/>')
            out.append(f'<text x="{X:.2f}" y="{t + self.ph + 18}" style="{font};font-size:11px;text-anchor:middle">{v:g}</text>')
        for v in _ticks(*self.ylim):
            Y = self.py(v)
            out.append(f'<line x1="{l - 5}" y1="{Y:.2f}" x2="{l}" y2="{Y:.2f}" style="stroke:black"/>')
            out.append(f'<text x="{l - 8}" y="{Y + 4:.2f}" style="{font};font-size:11px;text-anchor:end">{v:g}</text>')
        out.append(f'<text x="{l + self.pw / 2}" y="{HEIGHT - 15}" '
                   f'style="{font};font-size:13px;text-anchor:middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="18" y="{t + self.ph / 2}" transform="rotate(-90 18 {t + self.ph / 2})" '
                   f'style="{font};font-size:13px;text-anchor:middle">{escape(self.ylabel)}</text>')
        if self.title:
            out.append(f'<text x="{l + self.pw / 2}" y="{t - 10}" '
                       f'style="{font};font-size:14px;text-anchor:middle">{escape(self.title)}</text>')
        return out

    def render(self) -> str:
        l, t = MARGIN["left"], MARGIN["top"]
        clip = (f'<clipPath id="plot"><rect x="{l}" y="{t}" width="{self.pw}" '
                f'height="{self.ph}"/></clipPath>')
        return "\n".join([
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<defs>{clip}</defs>',
            '<rect x="0" y="0" width="100%" height="100%" style="fill:white"/>',
            '<g clip-path="url(#plot)">',
            *self.body,
            "</g>",
            *self._axes(),
            "</svg>",
        ]) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.render())
