"""SVG rendering of racing lines over a map.

Walls are dark lines, waypoints small dots, each trace a colored polyline.
The terminal point of a trace gets a filled marker: red for a crash (or any
non-finish), green for a completed lap. World y points up, so the document
flips y; the affine mapping is exposed for tests via world_to_svg().
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..track import Track

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#d4a017")
_CRASH = "#d62728"
_FINISH = "#2ca02c"
_PAD = 20.0  # world units of margin around the track bounds


class RenderTransform:
    """Affine world -> document mapping with a y flip."""

    def __init__(self, track: Track, width: int):
        b = track.bounds
        self.min_x = b.min.x - _PAD
        self.min_y = b.min.y - _PAD
        world_w = (b.max.x - b.min.x) + 2 * _PAD
        world_h = (b.max.y - b.min.y) + 2 * _PAD
        self.scale = width / world_w
        self.width = width
        self.height = world_h * self.scale

    def point(self, x: float, y: float) -> tuple[float, float]:
        return ((x - self.min_x) * self.scale,
                self.height - (y - self.min_y) * self.scale)


def world_to_svg(track: Track, width: int = 800) -> RenderTransform:
    return RenderTransform(track, width)


def render(traces: Sequence[np.ndarray], track: Track,
           out_path=None, width: int = 800) -> str:
    """Build the SVG document; optionally write it to out_path.

    Each trace is an (n, 8) array of trace rows (see evaluation.TRACE_COLUMNS).
    A trace whose final completion reached 100 is marked as a finish.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to render")
    tr = RenderTransform(track, width)

    def fmt(v: float) -> str:
        return f"{v:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{tr.height:.0f}" viewBox="0 0 {width} {tr.height:.0f}">',
        f'<rect width="{width}" height="{tr.height:.0f}" fill="#fafafa"/>',
        '<g stroke="#222222" stroke-width="2" stroke-linecap="round">',
    ]
    for w in track.walls:
        x1, y1 = tr.point(w.a.x, w.a.y)
        x2, y2 = tr.point(w.b.x, w.b.y)
        parts.append(f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" '
                     f'x2="{fmt(x2)}" y2="{fmt(y2)}"/>')
    parts.append("</g>")

    parts.append('<g fill="#333333">')
    for p in track.waypoints:
        x, y = tr.point(p.x, p.y)
        parts.append(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="2.5"/>')
    parts.append("</g>")

    for label, s in sorted(track.starts.items()):
        x, y = tr.point(s.position.x, s.position.y)
        parts.append(f'<text x="{fmt(x + 5)}" y="{fmt(y - 5)}" '
                     f'font-size="12" fill="#555555">{label}</text>')

    for i, trace in enumerate(traces):
        if len(trace) == 0:
            continue
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{fmt(px)},{fmt(py)}"
                       for px, py in (tr.point(row[1], row[2]) for row in trace))
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.5" points="{pts}"/>')
        last = trace[-1]
        finished = last[7] >= 100.0
        mx, my = tr.point(last[1], last[2])
        parts.append(f'<circle cx="{fmt(mx)}" cy="{fmt(my)}" r="4" '
                     f'fill="{_FINISH if finished else _CRASH}"/>')

    parts.append("</svg>")
    doc = "\n".join(parts)
    if out_path is not None:
        Path(out_path).write_text(doc, encoding="utf-8")
    return doc
