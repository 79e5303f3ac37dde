"""Standalone SVG output for curves, snowflakes, cells and double-sided sets."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union
from xml.sax.saxutils import quoteattr

import numpy as np

from .geometry import Polyline

Shape = Union[Polyline, np.ndarray]


@dataclass(frozen=True)
class RenderOptions:
    width_px: int = 800
    height_px: int = 800
    stroke_width: float = 1.0
    fill: bool = False
    fill_rule: str = "nonzero"
    margin_fraction: float = 0.05
    stroke: str = "#1f3b73"
    fill_color: str = "#9ec5fe"
    background: str = "#ffffff"

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("image dimensions must be positive")
        if self.stroke_width < 0:
            raise ValueError("stroke width must be non-negative")
        if self.fill_rule not in ("nonzero", "evenodd"):
            raise ValueError(f"fill_rule must be 'nonzero' or 'evenodd', got {self.fill_rule!r}")
        if not 0 <= self.margin_fraction < 0.5:
            raise ValueError("margin_fraction must lie in [0, 0.5)")


@dataclass(frozen=True)
class Viewport:
    """World-to-pixel map: uniform scale, centred, y axis pointing up."""

    scale: float
    cx: float
    cy: float
    width: int
    height: int

    @classmethod
    def fit(cls, lo: np.ndarray, hi: np.ndarray, opts: RenderOptions) -> "Viewport":
        span = np.maximum(hi - lo, 1e-12)
        usable_w = opts.width_px * (1 - 2 * opts.margin_fraction)
        usable_h = opts.height_px * (1 - 2 * opts.margin_fraction)
        scale = float(min(usable_w / span[0], usable_h / span[1]))
        mid = (lo + hi) / 2
        return cls(scale, float(mid[0]), float(mid[1]), opts.width_px, opts.height_px)

    def to_pixel(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x = (pts[..., 0] - self.cx) * self.scale + self.width / 2
        y = self.height / 2 - (pts[..., 1] - self.cy) * self.scale
        return np.stack([x, y], axis=-1)

    def to_world(self, px: np.ndarray) -> np.ndarray:
        px = np.asarray(px, dtype=float)
        x = (px[..., 0] - self.width / 2) / self.scale + self.cx
        y = (self.height / 2 - px[..., 1]) / self.scale + self.cy
        return np.stack([x, y], axis=-1)


def _vertices(shape: Shape) -> np.ndarray:
    v = shape.vertices if isinstance(shape, Polyline) else np.asarray(shape, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 2:
        raise ValueError(f"each shape needs an (n >= 2, 2) vertex array, got {v.shape}")
    return v


def _path_data(px: np.ndarray, closed: bool) -> str:
    body = " L".join(f"{x:.6f} {y:.6f}" for x, y in px)
    return f"M{body}{' Z' if closed else ''}"


def to_svg(shapes: Iterable[Shape], opts: Optional[RenderOptions] = None,
           closed: Union[bool, Sequence[bool]] = False) -> str:
    """Render shapes as one SVG document.

    ``closed`` is a single flag or one flag per shape. Fill is only applied
    to closed shapes. Output is a pure function of the inputs.
    """
    opts = opts or RenderOptions()
    verts: List[np.ndarray] = [_vertices(s) for s in shapes]
    if not verts:
        raise ValueError("nothing to render")
    flags = [closed] * len(verts) if isinstance(closed, bool) else list(closed)
    if len(flags) != len(verts):
        raise ValueError("need one closed flag per shape")
    allv = np.concatenate(verts)
    view = Viewport.fit(allv.min(axis=0), allv.max(axis=0), opts)

    w, h = opts.width_px, opts.height_px
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill={quoteattr(opts.background)}/>',
        f'<g stroke={quoteattr(opts.stroke)} stroke-width="{opts.stroke_width:.6f}" '
        f'stroke-linejoin="round" fill-rule="{opts.fill_rule}">',
    ]
    for v, is_closed in zip(verts, flags):
        fill = quoteattr(opts.fill_color) if (opts.fill and is_closed) else '"none"'
        lines.append(f'<path fill={fill} d="{_path_data(view.to_pixel(v), is_closed)}"/>')
    lines += ["</g>", "</svg>"]
    return "\n".join(lines) + "\n"


def segments_to_shapes(segments: np.ndarray) -> List[np.ndarray]:
    """Split an ``(n, 2, 2)`` segment array into two-vertex shapes."""
    return [np.asarray(s) for s in segments]


def path_vertex_counts(svg: str) -> List[int]:
    """Vertex count of every ``path`` in an SVG produced by ``to_svg``."""
    root = ET.fromstring(svg)
    out = []
    for el in root.iter("{http://www.w3.org/2000/svg}path"):
        d = el.get("d", "")
        out.append(d.count("L") + 1)
    return out

