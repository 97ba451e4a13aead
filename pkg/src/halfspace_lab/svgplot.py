"""Minimal standalone SVG line/scatter plots, byte-deterministic."""

from __future__ import annotations

import math
from typing import Sequence

W, H = 640, 420
MARGIN = 60


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_plot(xs: Sequence[float], ys: Sequence[float], xlabel: str, ylabel: str, logx: bool = False) -> str:
    if not xs:
        raise ValueError("nothing to plot")
    if logx:
        if any(x <= 0 for x in xs):
            raise ValueError("log x axis needs positive x values")
        xs = [math.log10(x) for x in xs]
    pts = sorted(zip(xs, ys))
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * (W - 2 * MARGIN)

    def sy(y):
        return H - MARGIN - (y - y0) / (y1 - y0) * (H - 2 * MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{H - MARGIN}" x2="{W - MARGIN}" y2="{H - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{H - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        label = f"1e{t:.1f}" if logx else f"{t:.3g}"
        out.append(f'<text x="{_fmt(sx(t))}" y="{H - MARGIN + 18}" font-size="11" text-anchor="middle">{label}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6}" y="{_fmt(sy(t) + 4)}" font-size="11" text-anchor="end">{t:.3g}</text>')
    path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
    out.append(f'<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    for x, y in pts:
        out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="steelblue"/>')
    xl = f"log10({xlabel})" if logx else xlabel
    out.append(f'<text x="{W // 2}" y="{H - 15}" font-size="13" text-anchor="middle">{_esc(xl)}</text>')
    out.append(
        f'<text x="18" y="{H // 2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {H // 2})">{_esc(ylabel)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
