"""Standalone SVG line charts of objective vs. iteration (log10 x-axis).

Iteration ``t`` is drawn at ``log10(t + 1)`` so the starting point is shown.
Output depends only on the input numbers.
"""
import math
from html import escape

from .errors import InputError

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 30, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _f(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(first + k * step)
        k += 1
    return ticks


def render_convergence_svg(traces, title="Objective vs. iteration", comments=()):
    """SVG text for ``traces``: a mapping label -> (iterations, objective values).

    ``comments`` are emitted as XML comments right after the root element.
    """
    if not traces:
        raise InputError("need at least one trace")
    series = []
    for label, (its, vals) in traces.items():
        its, vals = list(its), list(vals)
        if len(its) != len(vals):
            raise InputError(f"trace {label!r}: iteration and value counts differ")
        if len(its) < 2:
            raise InputError(f"trace {label!r} needs at least two points")
        series.append((label, [math.log10(t + 1) for t in its], [float(v) for v in vals]))

    xmax = max(max(xs) for _, xs, _ in series) or 1.0
    ylo = min(min(ys) for _, _, ys in series)
    yhi = max(max(ys) for _, _, ys in series)
    if yhi == ylo:
        yhi, ylo = yhi + 0.5, ylo - 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + pw * x / xmax

    def sy(y):
        return TOP + ph * (yhi - y) / (yhi - ylo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        *(f"<!-- {c.replace('--', '- -')} -->" for c in comments),
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for dec in range(0, int(math.floor(xmax)) + 1):
        x = sx(dec)
        out.append(f'<line x1="{_f(x)}" y1="{TOP + ph}" x2="{_f(x)}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_f(x)}" y="{TOP + ph + 18}" text-anchor="middle">{10 ** dec}</text>')
    for t in _nice_ticks(ylo, yhi):
        y = sy(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{_f(y)}" x2="{LEFT}" y2="{_f(y)}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_f(y + 4)}" text-anchor="end">{t:.6g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">iteration + 1 (log scale)</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.2f})">objective</text>')
    for k, (label, xs, ys) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = TOP + 15 + 16 * k
        out.append(f'<line x1="{LEFT + pw - 110}" y1="{ly}" x2="{LEFT + pw - 90}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw - 85}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_convergence_svg(traces, path, title="Objective vs. iteration", comments=()):
    text = render_convergence_svg(traces, title, comments)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
