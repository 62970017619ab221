"""Minimal deterministic SVG scatter plots (no external assets, diffable output).

Fixed 1600x900 logical canvas, point markers, optional vertical marker lines
(used for window bounds and thin-stripe predictions) and an optional log scale
on the y axis.  Coordinates are formatted with fixed precision so identical
data produces identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

WIDTH, HEIGHT = 1600, 900
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 90, 30, 40, 60


@dataclass
class SvgPlot:
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    log_y: bool = False
    _body: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.log_y and (self.y_range[0] <= 0 or self.y_range[1] <= 0):
            raise ValueError("log scale needs a positive y range")

    def _tx(self, x: float) -> float:
        lo, hi = self.x_range
        frac = (x - lo) / (hi - lo)
        return MARGIN_LEFT + frac * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)

    def _ty(self, y: float) -> float:
        lo, hi = self.y_range
        if self.log_y:
            y = max(y, lo)
            frac = (math.log10(y) - math.log10(lo)) / (math.log10(hi) - math.log10(lo))
        else:
            frac = (y - lo) / (hi - lo)
        return HEIGHT - MARGIN_BOTTOM - frac * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)

    def add_points(
        self,
        xs: Sequence[float],
        ys: Sequence[float],
        color: str = "#1f3d7a",
        radius: float = 0.6,
        opacity: float = 1.0,
    ) -> None:
        lo_x, hi_x = self.x_range
        lo_y, hi_y = self.y_range
        parts = []
        for x, y in zip(xs, ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if not lo_x <= x <= hi_x:
                continue
            if not self.log_y and not lo_y <= y <= hi_y:
                continue
            if self.log_y and y > hi_y:
                continue
            parts.append(f"M{self._tx(x):.2f} {self._ty(y):.2f}h0")
        if parts:
            self._body.append(
                f'<path d="{"".join(parts)}" stroke="{color}" stroke-width="{2 * radius:.2f}" '
                f'stroke-linecap="round" fill="none" opacity="{opacity:g}"/>'
            )

    def add_vline(self, x: float, color: str, label: str = "") -> None:
        if not self.x_range[0] <= x <= self.x_range[1]:
            return
        px = self._tx(x)
        y0, y1 = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
        self._body.append(
            f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y1}" '
            f'stroke="{color}" stroke-width="0.8"/>'
        )
        if label:
            self._body.append(
                f'<text x="{px:.2f}" y="{y0 - 4}" font-size="10" text-anchor="middle" '
                f'fill="{color}">{label}</text>'
            )

    def _axes(self) -> list[str]:
        out = [
            f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" '
            f'width="{WIDTH - MARGIN_LEFT - MARGIN_RIGHT}" '
            f'height="{HEIGHT - MARGIN_TOP - MARGIN_BOTTOM}" '
            'fill="none" stroke="#222" stroke-width="1"/>'
        ]
        for i in range(11):
            fx = self.x_range[0] + i * (self.x_range[1] - self.x_range[0]) / 10
            px = self._tx(fx)
            out.append(
                f'<line x1="{px:.2f}" y1="{HEIGHT - MARGIN_BOTTOM}" x2="{px:.2f}" '
                f'y2="{HEIGHT - MARGIN_BOTTOM + 5}" stroke="#222" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{px:.2f}" y="{HEIGHT - MARGIN_BOTTOM + 18}" font-size="11" '
                f'text-anchor="middle">{fx:.6g}</text>'
            )
        ticks_y = []
        if self.log_y:
            lo_e = math.ceil(math.log10(self.y_range[0]))
            hi_e = math.floor(math.log10(self.y_range[1]))
            ticks_y = [10.0**e for e in range(lo_e, hi_e + 1)]
        else:
            ticks_y = [
                self.y_range[0] + i * (self.y_range[1] - self.y_range[0]) / 6
                for i in range(7)
            ]
        for fy in ticks_y:
            py = self._ty(fy)
            out.append(
                f'<line x1="{MARGIN_LEFT - 5}" y1="{py:.2f}" x2="{MARGIN_LEFT}" '
                f'y2="{py:.2f}" stroke="#222" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{MARGIN_LEFT - 8}" y="{py + 4:.2f}" font-size="11" '
                f'text-anchor="end">{fy:.6g}</text>'
            )
        if self.title:
            out.append(
                f'<text x="{WIDTH / 2}" y="{MARGIN_TOP - 14}" font-size="15" '
                f'text-anchor="middle">{self.title}</text>'
            )
        if self.x_label:
            out.append(
                f'<text x="{WIDTH / 2}" y="{HEIGHT - 14}" font-size="13" '
                f'text-anchor="middle">{self.x_label}</text>'
            )
        if self.y_label:
            out.append(
                f'<text x="20" y="{HEIGHT / 2}" font-size="13" text-anchor="middle" '
                f'transform="rotate(-90 20 {HEIGHT / 2})">{self.y_label}</text>'
            )
        return out

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">'
        )
        bg = f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>'
        return "\n".join([head, bg, *self._axes(), *self._body, "</svg>"]) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.render())
