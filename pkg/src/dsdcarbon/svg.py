"""Minimal deterministic SVG 1.1 charts (bar, stacked bar, line).

No external libraries; coordinates are printed with two decimals so the
output bytes depend only on the input values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)


@dataclass
class ChartSpec:
    kind: str  # "bar", "stacked_bar" or "line"
    title: str
    categories: Sequence[str] = ()
    series: Sequence[tuple[str, Sequence[float]]] = field(default_factory=list)
    y_label: str = ""
    width: int = 720
    height: int = 400


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi == lo:
        hi, lo = hi + 1.0, lo - 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    v = start
    while v <= hi + step * 1e-9:
        ticks.append(round(v, 10))
        v += step
    if ticks[-1] < hi:
        ticks.append(round(v, 10))
    return ticks


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1000 or abs(v) < 0.01:
        return f"{v:.3g}"
    return f"{v:.6g}"


def emit_svg(chart: ChartSpec) -> str:
    if chart.kind not in ("bar", "stacked_bar", "line"):
        raise ValueError(f"unsupported chart kind {chart.kind!r}")
    W, H = chart.width, chart.height
    left, right, top, bottom = 70.0, 150.0, 40.0, 60.0
    pw, ph = W - left - right, H - top - bottom
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f"<title>{_esc(chart.title)}</title>",
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>',
        f'<text x="{_f(W / 2)}" y="22.00" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{_esc(chart.title)}</text>',
    ]
    values = [v for _, vals in chart.series for v in vals if v is not None and math.isfinite(v)]
    cats = list(chart.categories)
    axis = (
        f'<line x1="{_f(left)}" y1="{_f(top)}" x2="{_f(left)}" y2="{_f(top + ph)}" stroke="#000000"/>'
    )
    if not values or not cats:
        out.append(axis)
        out.append(
            f'<line x1="{_f(left)}" y1="{_f(top + ph)}" x2="{_f(left + pw)}" y2="{_f(top + ph)}" '
            'stroke="#000000"/>'
        )
        out.append(
            f'<text x="{_f(left + pw / 2)}" y="{_f(top + ph / 2)}" text-anchor="middle" '
            'font-family="sans-serif" font-size="12" fill="#666666">no data</text>'
        )
        out.append("</svg>")
        return "\n".join(out) + "\n"

    if chart.kind == "stacked_bar":
        pos = [sum(max(vals[j], 0.0) for _, vals in chart.series) for j in range(len(cats))]
        neg = [sum(min(vals[j], 0.0) for _, vals in chart.series) for j in range(len(cats))]
        lo, hi = min(neg + [0.0]), max(pos + [0.0])
    else:
        lo, hi = min(values), max(values)
        if chart.kind == "bar":
            lo, hi = min(lo, 0.0), max(hi, 0.0)
    ticks = _nice_ticks(lo, hi)
    ymin, ymax = ticks[0], ticks[-1]

    def y(v: float) -> float:
        return top + ph * (ymax - v) / (ymax - ymin)

    for t in ticks:
        out.append(
            f'<line x1="{_f(left)}" y1="{_f(y(t))}" x2="{_f(left + pw)}" y2="{_f(y(t))}" '
            'stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{_f(left - 6)}" y="{_f(y(t) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_esc(_tick_label(t))}</text>'
        )
    out.append(axis)
    zero = y(0.0) if ymin <= 0.0 <= ymax else top + ph
    out.append(
        f'<line x1="{_f(left)}" y1="{_f(zero)}" x2="{_f(left + pw)}" y2="{_f(zero)}" stroke="#000000"/>'
    )
    if chart.y_label:
        out.append(
            f'<text x="16.00" y="{_f(top + ph / 2)}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11" transform="rotate(-90 16.00 {_f(top + ph / 2)})">{_esc(chart.y_label)}</text>'
        )

    n = len(cats)
    slot = pw / n
    for j, cat in enumerate(cats):
        out.append(
            f'<text x="{_f(left + slot * (j + 0.5))}" y="{_f(top + ph + 16)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_esc(cat)}</text>'
        )

    ns = len(chart.series)
    if chart.kind == "bar":
        bw = slot * 0.8 / max(ns, 1)
        for s_idx, (name, vals) in enumerate(chart.series):
            color = PALETTE[s_idx % len(PALETTE)]
            for j, v in enumerate(vals):
                x = left + slot * j + slot * 0.1 + bw * s_idx
                y0, y1 = sorted((y(v), zero))
                out.append(
                    f'<rect x="{_f(x)}" y="{_f(y0)}" width="{_f(bw)}" height="{_f(y1 - y0)}" '
                    f'fill="{color}"><title>{_esc(name)} {_esc(cats[j])}: {v:.6g}</title></rect>'
                )
    elif chart.kind == "stacked_bar":
        bw = slot * 0.6
        up = [0.0] * n
        down = [0.0] * n
        for s_idx, (name, vals) in enumerate(chart.series):
            color = PALETTE[s_idx % len(PALETTE)]
            for j, v in enumerate(vals):
                if v >= 0:
                    base, up[j] = up[j], up[j] + v
                    y0, y1 = y(up[j]), y(base)
                else:
                    base, down[j] = down[j], down[j] + v
                    y0, y1 = y(base), y(down[j])
                x = left + slot * j + slot * 0.2
                out.append(
                    f'<rect x="{_f(x)}" y="{_f(y0)}" width="{_f(bw)}" height="{_f(y1 - y0)}" '
                    f'fill="{color}"><title>{_esc(name)} {_esc(cats[j])}: {v:.6g}</title></rect>'
                )
    else:
        for s_idx, (name, vals) in enumerate(chart.series):
            color = PALETTE[s_idx % len(PALETTE)]
            pts = " ".join(
                f"{_f(left + slot * (j + 0.5))},{_f(y(v))}" for j, v in enumerate(vals)
            )
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')

    for s_idx, (name, _) in enumerate(chart.series):
        ly = top + 14 * s_idx
        color = PALETTE[s_idx % len(PALETTE)]
        out.append(
            f'<rect x="{_f(left + pw + 10)}" y="{_f(ly)}" width="10.00" height="10.00" fill="{color}"/>'
        )
        out.append(
            f'<text x="{_f(left + pw + 24)}" y="{_f(ly + 9)}" font-family="sans-serif" '
            f'font-size="10">{_esc(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
