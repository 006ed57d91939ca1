"""Minimal log-log SVG line plots with no plotting dependency."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def _fmt(v):
    return f"{v:.2f}"


def _decades(lo, hi):
    return list(range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1))


def loglog_svg(series, title="", xlabel="", ylabel="", width=640, height=440, reference=None):
    """Render ``series`` (list of ``(label, xs, ys)``) on log axes.

    ``reference`` is an optional ``(label, slope, x0, y0)`` line through
    ``(x0, y0)`` drawn dashed.  Non-positive values are skipped.
    """
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys) if x > 0 and y > 0]
    if not pts:
        pts = [(1.0, 1.0), (10.0, 10.0)]
    xmin, xmax = min(p[0] for p in pts), max(p[0] for p in pts)
    ymin, ymax = min(p[1] for p in pts), max(p[1] for p in pts)
    if xmin == xmax:
        xmin, xmax = xmin / 2, xmax * 2
    if ymin == ymax:
        ymin, ymax = ymin / 2, ymax * 2
    lx0, lx1 = math.log10(xmin), math.log10(xmax)
    ly0, ly1 = math.log10(ymin), math.log10(ymax)
    padx, pady = 0.05 * (lx1 - lx0), 0.05 * (ly1 - ly0)
    lx0, lx1, ly0, ly1 = lx0 - padx, lx1 + padx, ly0 - pady, ly1 + pady
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (math.log10(x) - lx0) / (lx1 - lx0) * pw

    def sy(y):
        return top + (ly1 - math.log10(y)) / (ly1 - ly0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k in _decades(10 ** lx0, 10 ** lx1):
        x = 10.0 ** k
        if lx0 <= k <= lx1:
            out.append(f'<line x1="{_fmt(sx(x))}" y1="{top}" x2="{_fmt(sx(x))}" y2="{top + ph}" '
                       f'stroke="#ddd"/>')
            out.append(f'<text x="{_fmt(sx(x))}" y="{top + ph + 15}" text-anchor="middle">1e{k}</text>')
    for k in _decades(10 ** ly0, 10 ** ly1):
        y = 10.0 ** k
        if ly0 <= k <= ly1:
            out.append(f'<line x1="{left}" y1="{_fmt(sy(y))}" x2="{left + pw}" y2="{_fmt(sy(y))}" '
                       f'stroke="#ddd"/>')
            out.append(f'<text x="{left - 5}" y="{_fmt(sy(y) + 4)}" text-anchor="end">1e{k}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>')

    legend = []
    for n, (label, xs, ys) in enumerate(series):
        color = PALETTE[n % len(PALETTE)]
        coords = [(sx(x), sy(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if len(coords) > 1:
            path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in coords:
            out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="3" fill="{color}"/>')
        legend.append((label, color, ""))
    if reference is not None:
        label, slope, x0, y0 = reference
        xa, xb = 10 ** lx0, 10 ** lx1
        ya, yb = y0 * (xa / x0) ** slope, y0 * (xb / x0) ** slope
        out.append(f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>')
        out.append(f'<line x1="{_fmt(sx(xa))}" y1="{_fmt(sy(ya))}" x2="{_fmt(sx(xb))}" y2="{_fmt(sy(yb))}" '
                   f'stroke="black" stroke-dasharray="5,4" clip-path="url(#plot)"/>')
        legend.append((label, "black", ' stroke-dasharray="5,4"'))
    for n, (label, color, dash) in enumerate(legend):
        y = top + 12 + 16 * n
        x = left + pw + 10
        out.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{x + 25}" y="{y + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
