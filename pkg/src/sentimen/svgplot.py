"""Tiny SVG line plots for training curves; deterministic output, no
timestamps or external toolchain."""

from __future__ import annotations

from typing import Sequence

_WIDTH, _HEIGHT = 640, 400
_MARGIN = 60


def _scale(values: Sequence[float], lo: float, hi: float, out_lo: float,
           out_hi: float) -> list[float]:
    span = (hi - lo) or 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def line_plot(series: dict[str, Sequence[float]], title: str,
              y_label: str) -> str:
    """Epoch-indexed line plot; one polyline per named series."""
    all_vals = [v for vals in series.values() for v in vals]
    if not all_vals:
        raise ValueError("nothing to plot")
    n = max(len(vals) for vals in series.values())
    y_lo, y_hi = min(all_vals), max(all_vals)
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    colors = ["#1f5fbf", "#bf3f1f", "#1f8f4f", "#8f1f8f"]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        "<style>text{font-family:monospace;font-size:13px}</style>",
        f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle">{title}</text>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="#999"/>',
        f'<text x="16" y="{_HEIGHT // 2}" transform="rotate(-90 16 '
        f'{_HEIGHT // 2})" text-anchor="middle">{y_label}</text>',
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 16}" '
        f'text-anchor="middle">epoch</text>',
        f'<text x="{_MARGIN}" y="{_HEIGHT - _MARGIN + 16}">0</text>',
        f'<text x="{_WIDTH - _MARGIN}" y="{_HEIGHT - _MARGIN + 16}" '
        f'text-anchor="end">{max(0, n - 1)}</text>',
        f'<text x="{_MARGIN - 6}" y="{_HEIGHT - _MARGIN}" '
        f'text-anchor="end">{y_lo:.4g}</text>',
        f'<text x="{_MARGIN - 6}" y="{_MARGIN + 10}" '
        f'text-anchor="end">{y_hi:.4g}</text>',
    ]
    for k, (name, vals) in enumerate(sorted(series.items())):
        xs = _scale(range(len(vals)), 0, max(1, n - 1),
                    _MARGIN, _WIDTH - _MARGIN)
        ys = _scale(vals, y_lo, y_hi, _HEIGHT - _MARGIN, _MARGIN)
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        color = colors[k % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_WIDTH - _MARGIN - 4}" '
                     f'y="{_MARGIN + 18 + 16 * k}" text-anchor="end" '
                     f'fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
