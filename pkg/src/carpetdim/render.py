"""SVG prefractal rendering: one filled rectangle per word of a given depth."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .carpet import CarpetSpec
from .variational import GuardError

MAX_RECTS = 10**6


def depth_rectangles(spec: CarpetSpec, depth: int) -> tuple[np.ndarray, ...]:
    """``x, y, A, B`` for all words of length ``depth`` in lexicographic order."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    count = spec.d**depth
    if count > MAX_RECTS:
        raise GuardError("rect_count", f"{spec.d}**{depth} = {count} rectangles exceeds {MAX_RECTS}")
    xo = spec.x_offsets[spec.col]
    yo = spec.y_offsets[spec.row]
    x, y, A, B = np.zeros(1), np.zeros(1), np.ones(1), np.ones(1)
    for _ in range(depth):
        # first letter varies slowest, which is lexicographic order
        x = (x[:, None] + A[:, None] * xo).ravel()
        y = (y[:, None] + B[:, None] * yo).ravel()
        A = (A[:, None] * spec.cell_widths).ravel()
        B = (B[:, None] * spec.cell_heights).ravel()
    return x, y, A, B


def _num(v: float) -> str:
    return f"{v:.6f}".rstrip("0").rstrip(".")


def render_svg(spec: CarpetSpec, depth: int, size: int = 1024, fill: str = "#1f3b73") -> str:
    """SVG 1.1 document of the depth-``depth`` prefractal in a ``size`` pixel square.

    The unit square maps onto the viewport with the y axis flipped, so row
    0 is drawn at the bottom.
    """
    if size <= 0:
        raise ValueError("size must be positive")
    x, y, A, B = depth_rectangles(spec, depth)
    px = x * size
    py = (1.0 - y - B) * size
    pw = A * size
    ph = B * size
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<g fill="{fill}" stroke="none">',
    ]
    lines += [
        f'<rect x="{_num(a)}" y="{_num(b)}" width="{_num(c)}" height="{_num(d)}"/>'
        for a, b, c, d in zip(px, py, pw, ph)
    ]
    lines += ["</g>", "</svg>", ""]
    return "\n".join(lines)


def write_svg(spec: CarpetSpec, depth: int, path, size: int = 1024) -> Path:
    path = Path(path)
    path.write_text(render_svg(spec, depth, size))
    return path
