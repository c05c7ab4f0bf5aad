"""Static SVG line charts for study outputs: axes, ticks, polylines and a legend."""

from __future__ import annotations

import dataclasses
import math
import os
from collections.abc import Sequence
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH = 640
HEIGHT = 420
_MARGIN = (60, 20, 30, 50)  # left, right, top, bottom
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclasses.dataclass(frozen=True)
class Series:
    label: str
    xs: Sequence[float]
    ys: Sequence[float]
    dashed: bool = False


def _fwd(v: float, log: bool) -> float:
    return math.log10(v) if log else v


def _usable(x: float, y: float, log_x: bool, log_y: bool) -> bool:
    if not (math.isfinite(x) and math.isfinite(y)):
        return False
    return (x > 0 or not log_x) and (y > 0 or not log_y)


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1) if lo <= e <= hi] or [10.0**lo]
    step = (hi - lo) / 4 if hi > lo else 1.0
    return [lo + i * step for i in range(5)]


def line_chart(
    series: Sequence[Series],
    *,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> str:
    """Render ``series`` to an SVG document; points not drawable on the chosen axes are skipped."""
    pts = [
        [(_fwd(x, log_x), _fwd(y, log_y)) for x, y in zip(s.xs, s.ys) if _usable(x, y, log_x, log_y)] for s in series
    ]
    flat = [p for ps in pts for p in ps]
    if flat:
        x_lo, x_hi = min(p[0] for p in flat), max(p[0] for p in flat)
        y_lo, y_hi = min(p[1] for p in flat), max(p[1] for p in flat)
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    left, right, top, bottom = _MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def sx(v: float) -> float:
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v: float) -> float:
        return top + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for tx in _ticks(x_lo, x_hi, log_x):
        px = sx(_fwd(tx, log_x)) if log_x else sx(tx)
        out.append(f'<line x1="{px:.1f}" y1="{top + ph}" x2="{px:.1f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{top + ph + 16}" text-anchor="middle">{tx:.3g}</text>')
    for ty in _ticks(y_lo, y_hi, log_y):
        py = sy(_fwd(ty, log_y)) if log_y else sy(ty)
        out.append(f'<line x1="{left - 4}" y1="{py:.1f}" x2="{left}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{py + 4:.1f}" text-anchor="end">{ty:.3g}</text>')
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + ph / 2:.1f})">{escape(y_label)}</text>'
    )

    for i, (s, ps) in enumerate(zip(series, pts)):
        color = _COLORS[i % len(_COLORS)]
        dash = ' stroke-dasharray="5,4"' if s.dashed else ""
        if ps:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in ps)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
            for x, y in ps:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}"/>')
        ly = top + 12 + 14 * i
        out.append(f'<line x1="{left + pw - 120}" y1="{ly}" x2="{left + pw - 100}" y2="{ly}" stroke="{color}"{dash}/>')
        out.append(f'<text x="{left + pw - 95}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str | os.PathLike[str], series: Sequence[Series], **kw: object) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(line_chart(series, **kw), encoding="utf-8")  # type: ignore[arg-type]
    return p
