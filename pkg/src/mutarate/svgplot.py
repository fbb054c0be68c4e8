"""Static SVG rendering of the distance-versus-time fit.

Hand-rolled on purpose: one scatter-plus-line figure does not justify a
plotting dependency, and emitting the markup directly keeps the output
byte-stable across runs.
"""

from __future__ import annotations

from .rate_model import BandPoint, RateFit, RateObservation

_WIDTH = 640
_HEIGHT = 440
_MARGIN_LEFT = 70
_MARGIN_RIGHT = 20
_MARGIN_TOP = 30
_MARGIN_BOTTOM = 55


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def rate_plot_svg(
    obs: list[RateObservation],
    fit: RateFit,
    band: list[BandPoint] | None = None,
    title: str = "Distance vs. elapsed days",
) -> str:
    xs = [float(o.elapsed_days) for o in obs]
    ys = [o.distance for o in obs]
    x_hi = max(xs) if max(xs) > 0 else 1.0
    y_values = list(ys)
    if band:
        y_values += [p.lower for p in band] + [p.upper for p in band]
    y_lo = min(0.0, min(y_values))
    y_hi = max(y_values) if max(y_values) > 0 else 1.0
    y_pad = 0.06 * (y_hi - y_lo or 1.0)
    y_lo -= y_pad
    y_hi += y_pad
    x_pad = 0.04 * x_hi
    x_lo = -x_pad
    x_hi = x_hi + x_pad

    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_WIDTH / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14" fill="#333333">{title}</text>',
    ]

    if band:
        pts = [(px(p.x), py(p.upper)) for p in band]
        pts += [(px(p.x), py(p.lower)) for p in reversed(band)]
        poly = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        parts.append(f'<polygon points="{poly}" fill="#9ecae1" fill-opacity="0.45"/>')

    # axes
    ax_y = py(y_lo) + 0.0
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" x2="{_MARGIN_LEFT}" '
        f'y2="{_fmt(ax_y)}" stroke="#333333" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_fmt(ax_y)}" x2="{_WIDTH - _MARGIN_RIGHT}" '
        f'y2="{_fmt(ax_y)}" stroke="#333333" stroke-width="1"/>'
    )
    for tx in _ticks(0.0, max(xs) if max(xs) > 0 else 1.0):
        parts.append(
            f'<line x1="{_fmt(px(tx))}" y1="{_fmt(ax_y)}" x2="{_fmt(px(tx))}" '
            f'y2="{_fmt(ax_y + 5)}" stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px(tx))}" y="{_fmt(ax_y + 18)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" fill="#333333">{tx:.4g}</text>'
        )
    for ty in _ticks(min(0.0, min(ys)), max(y_values)):
        parts.append(
            f'<line x1="{_MARGIN_LEFT - 5}" y1="{_fmt(py(ty))}" x2="{_MARGIN_LEFT}" '
            f'y2="{_fmt(py(ty))}" stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{_fmt(py(ty) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="#333333">{ty:.4g}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_LEFT + plot_w / 2:.0f}" y="{_HEIGHT - 12}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'fill="#333333">days since reference</text>'
    )
    parts.append(
        f'<text x="16" y="{_MARGIN_TOP + plot_h / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" fill="#333333" '
        f'transform="rotate(-90 16 {_MARGIN_TOP + plot_h / 2:.0f})">distance</text>'
    )

    # fitted line sampled over the observed range
    samples = 60
    x_max = max(xs)
    line_pts = []
    coeffs = list(reversed(fit.coefficients))
    for i in range(samples + 1):
        x = x_max * i / samples
        y = 0.0
        for c in coeffs:
            y = y * x + c
        line_pts.append(f"{_fmt(px(x))},{_fmt(py(y))}")
    parts.append(
        f'<polyline points="{" ".join(line_pts)}" fill="none" stroke="#1f77b4" '
        f'stroke-width="2"/>'
    )

    for x, y in zip(xs, ys):
        parts.append(
            f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3.5" fill="#d62728"/>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
