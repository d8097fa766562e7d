"""Minimal standalone SVG line charts (no external assets or fonts)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#17becf", "#e377c2")
_MARKERS = ("circle", "square", "diamond", "triangle")

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 160, 40, 52


def _nice_max(value: float) -> float:
    if value <= 0:
        return 1.0
    magnitude = 10 ** math.floor(math.log10(value))
    for factor in (1, 2, 2.5, 5, 10):
        if value <= factor * magnitude:
            return factor * magnitude
    return 10 * magnitude


def _marker(shape: str, x: float, y: float, color: str) -> str:
    if shape == "circle":
        return f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3.5" fill="{color}"/>'
    if shape == "square":
        return (f'<rect x="{x - 3:.1f}" y="{y - 3:.1f}" width="6" height="6" '
                f'fill="{color}"/>')
    if shape == "diamond":
        pts = f"{x:.1f},{y - 4:.1f} {x + 4:.1f},{y:.1f} {x:.1f},{y + 4:.1f} {x - 4:.1f},{y:.1f}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    pts = f"{x:.1f},{y - 4:.1f} {x + 4:.1f},{y + 3:.1f} {x - 4:.1f},{y + 3:.1f}"
    return f'<polygon points="{pts}" fill="{color}"/>'


def render_line_chart(series: dict[str, list[tuple[float, float]]],
                      title: str, xlabel: str, ylabel: str,
                      log2_x: bool = True) -> str:
    """Render labelled series as a standalone SVG document string."""
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    xs = sorted({x for pts in series.values() for x, _ in pts})
    ymax = _nice_max(max((y for pts in series.values() for _, y in pts), default=1.0))
    if not xs:
        xs = [1.0]

    def sx(x: float) -> float:
        if log2_x:
            lo, hi = math.log2(xs[0]), math.log2(xs[-1]) if xs[-1] > xs[0] else math.log2(xs[0]) + 1
            span = (hi - lo) or 1.0
            return MARGIN_L + (math.log2(x) - lo) / span * plot_w
        lo, hi = xs[0], xs[-1] if xs[-1] > xs[0] else xs[0] + 1
        return MARGIN_L + (x - lo) / (hi - lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_T + plot_h - y / ymax * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_L + plot_w / 2:.0f}" y="24" text-anchor="middle" '
        f'font-size="15">{escape(title)}</text>',
    ]

    # grid and y axis labels
    for i in range(6):
        y_val = ymax * i / 5
        y = sy(y_val)
        out.append(f'<line x1="{MARGIN_L}" y1="{y:.1f}" x2="{MARGIN_L + plot_w}" '
                   f'y2="{y:.1f}" stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.1f}" text-anchor="end" '
                   f'font-size="11">{y_val:g}</text>')
    for x_val in xs:
        x = sx(x_val)
        out.append(f'<line x1="{x:.1f}" y1="{MARGIN_T}" x2="{x:.1f}" '
                   f'y2="{MARGIN_T + plot_h}" stroke="#eeeeee" stroke-width="1"/>')
        out.append(f'<text x="{x:.1f}" y="{MARGIN_T + plot_h + 16}" '
                   f'text-anchor="middle" font-size="11">{x_val:g}</text>')

    out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" '
               f'height="{plot_h}" fill="none" stroke="#333333"/>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2:.0f}" y="{HEIGHT - 14}" '
               f'text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN_T + plot_h / 2:.0f}" font-size="12" '
               f'text-anchor="middle" transform="rotate(-90 18 '
               f'{MARGIN_T + plot_h / 2:.0f})">{escape(ylabel)}</text>')

    for i, (label, pts) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        shape = _MARKERS[i % len(_MARKERS)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                   f'stroke-width="1.8"/>')
        for x, y in pts:
            out.append(_marker(shape, sx(x), sy(y), color))
        ly = MARGIN_T + 14 + i * 18
        lx = MARGIN_L + plot_w + 14
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        out.append(_marker(shape, lx + 11, ly - 4, color))
        out.append(f'<text x="{lx + 28}" y="{ly}" font-size="11">'
                   f'{escape(label)}</text>')

    out.append("</svg>")
    return "\n".join(out)
