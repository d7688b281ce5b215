"""Minimal self-contained SVG line charts for diagnostics and error curves."""

from __future__ import annotations

import math

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / count))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= count:
            step *= m
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * span:
        ticks.append(t)
        t += step
    return ticks


def line_chart(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               logy: bool = False, logx: bool = False) -> str:
    """Render named (x, y) series as one SVG document string."""
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    xs, ys = [], []
    for x, y in series.values():
        for xi, yi in zip(x, y):
            if (logx and xi <= 0) or (logy and yi <= 0):
                continue
            xs.append(tx(xi))
            ys.append(ty(yi))
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def px(v):
        return _ML + (tx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return _MT + ph - (ty(v) - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#333"/>',
    ]
    for t in _ticks(x0, x1):
        xp = _ML + (t - x0) / (x1 - x0) * pw
        label = f"1e{t:.0f}" if logx else f"{t:g}"
        parts.append(f'<line x1="{xp:.1f}" y1="{_MT + ph}" x2="{xp:.1f}" '
                     f'y2="{_MT + ph + 5}" stroke="#333"/>')
        parts.append(f'<text x="{xp:.1f}" y="{_MT + ph + 18}" text-anchor="middle" '
                     f'font-size="11">{label}</text>')
    for t in _ticks(y0, y1):
        yp = _MT + ph - (t - y0) / (y1 - y0) * ph
        label = f"1e{t:.0f}" if logy else f"{t:g}"
        parts.append(f'<line x1="{_ML - 5}" y1="{yp:.1f}" x2="{_ML}" '
                     f'y2="{yp:.1f}" stroke="#333"/>')
        parts.append(f'<text x="{_ML - 8}" y="{yp:.1f}" text-anchor="end" '
                     f'font-size="11">{label}</text>')
    parts.append(f'<text x="{_W / 2}" y="{_H - 8}" text-anchor="middle" '
                 f'font-size="12">{xlabel}</text>')
    parts.append(f'<text x="16" y="{_H / 2}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text>')

    for idx, (name, (x, y)) in enumerate(series.items()):
        color = palette[idx % len(palette)]
        pts = " ".join(f"{px(xi):.2f},{py(yi):.2f}" for xi, yi in zip(x, y)
                       if not ((logx and xi <= 0) or (logy and yi <= 0)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        ly = _MT + 16 + 16 * idx
        parts.append(f'<line x1="{_ML + 10}" y1="{ly}" x2="{_ML + 34}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_ML + 40}" y="{ly + 4}" font-size="11">{name}</text>')

    parts.append("</svg>")
    return "\n".join(parts)
