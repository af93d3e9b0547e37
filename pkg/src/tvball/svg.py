"""SVG export of region boundaries using native arc commands."""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Tuple

from .geometry import TWO_PI, Arc, Region, Segment

SCALE = 200.0  # SVG user units per length unit


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def region_path(reg: Region, box, scale: float = SCALE) -> str:
    """Path data for all loops; y is flipped so the picture is upright."""
    xmin, _, _, ymax = box

    def pt(p):
        return f"{_fmt((p[0] - xmin) * scale)} {_fmt((ymax - p[1]) * scale)}"

    parts = []
    for loop in reg.loops:
        parts.append("M " + pt(loop[0].start))
        for piece in loop:
            if isinstance(piece, Segment):
                parts.append("L " + pt(piece.end))
                continue
            r = _fmt(piece.radius * scale)
            # mathematical ccw turns into clockwise on the flipped screen
            sweep = 0 if piece.orientation == "ccw" else 1
            if piece.span >= TWO_PI - 1e-12:
                mid = piece.point_at(piece.theta_start + 0.5 * piece.sweep)
                parts.append(f"A {r} {r} 0 0 {sweep} " + pt(mid))
                parts.append(f"A {r} {r} 0 0 {sweep} " + pt(piece.end))
            else:
                large = 1 if piece.span > math.pi else 0
                parts.append(f"A {r} {r} 0 {large} {sweep} " + pt(piece.end))
        parts.append("Z")
    return " ".join(parts)


def level_lines_svg(items: Sequence[Tuple[float, Region]], box, scale: float = SCALE) -> str:
    xmin, xmax, ymin, ymax = box
    w, h = (xmax - xmin) * scale, (ymax - ymin) * scale
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fmt(w)} {_fmt(h)}" width="{_fmt(w)}" height="{_fmt(h)}">',
    ]
    for s, reg in items:
        if not reg.loops:
            continue
        out.append(f'<path data-level="{_fmt(s)}" data-kind="{reg.kind.value}" fill="none" stroke="black" stroke-width="1" d="{region_path(reg, box, scale)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
