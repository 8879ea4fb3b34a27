"""Text layout and binary rasterization of glyph and position controls.

Coverage is decided at pixel centers under the nonzero winding rule, with
half-open boundaries: a center exactly on a left/top edge is inside, on a
right/bottom edge outside. That keeps adjacent regions exclusive and makes
ink counts exactly match analytic center counting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateQuad,
    EmptyText,
    SelfIntersectingPolygon,
    TooManyLines,
    ValidationError,
)
from .fontio import Font, GlyphOutline, QuadraticBezier
from .geometry import Quad

__all__ = [
    "GlyphControl",
    "PositionControl",
    "LineSpec",
    "TextLayout",
    "GlyphPlacement",
    "LayoutResult",
    "MAX_LINES",
    "DEFAULT_CANVAS",
    "flatten_outline",
    "rasterize_polylines",
    "layout_line",
    "compose_glyph_control",
    "render_position_mask",
]

MAX_LINES = 5
DEFAULT_CANVAS = 512
PAD_RATIO = 0.05
DEFAULT_TOLERANCE = 0.25


def _check_binary(bits: np.ndarray) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim != 2:
        raise ValidationError("mask must be 2-d")
    if not np.isin(arr, (0, 1)).all():
        raise ValidationError("mask must contain only 0 and 1")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class GlyphControl:
    """Binary mask of rendered text ink: 1 = ink, 0 = background."""

    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "bits", _check_binary(self.bits))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class PositionControl:
    """Binary mask of the text region polygons: 1 inside, 0 outside."""

    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "bits", _check_binary(self.bits))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class LineSpec:
    text: str
    font: Font
    quad: Quad
    orientation: str = "horizontal"

    def __post_init__(self):
        if self.orientation not in ("horizontal", "vertical"):
            raise ValidationError(f"unknown orientation {self.orientation!r}")


@dataclass(frozen=True)
class TextLayout:
    lines: tuple[LineSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if len(self.lines) > MAX_LINES:
            raise TooManyLines(f"{len(self.lines)} lines exceed the {MAX_LINES}-line limit")


@dataclass(frozen=True)
class GlyphPlacement:
    glyph: int
    affine: np.ndarray = field(repr=False)  # 2x3, font units -> canvas px

    def apply(self, points: np.ndarray) -> np.ndarray:
        m = self.affine
        return points @ m[:, :2].T + m[:, 2]


@dataclass(frozen=True)
class LayoutResult:
    placements: tuple[GlyphPlacement, ...]
    scale: float
    extent: tuple[float, float]  # laid-out text width/height in canvas px
    skipped: tuple[str, ...]  # codepoints that had no cmap entry


def flatten_outline(outline: GlyphOutline, tolerance: float) -> list[np.ndarray]:
    """Subdivide curves until they deviate from their chords by <= tolerance.

    Returns one closed (first vertex == implicit last) polyline per contour,
    in the same units as the outline.
    """
    if tolerance <= 0:
        raise ValidationError("tolerance must be > 0")
    polylines = []
    for contour in outline.contours:
        points: list[tuple[float, float]] = [contour[0].p0]
        for seg in contour:
            if isinstance(seg, QuadraticBezier):
                _flatten_quadratic(seg.p0, seg.control, seg.p1, tolerance, points)
            else:
                points.append(seg.p1)
        if points[-1] == points[0]:
            points.pop()
        if len(points) >= 2:  # a 2-vertex chord is degenerate but not an error
            polylines.append(np.asarray(points, dtype=np.float64))
    return polylines


def _flatten_quadratic(p0, c, p1, tol: float, out: list) -> None:
    # max deviation of a quadratic from its chord is |p0 - 2c + p1| / 4
    dx = p0[0] - 2.0 * c[0] + p1[0]
    dy = p0[1] - 2.0 * c[1] + p1[1]
    if math.hypot(dx, dy) <= 4.0 * tol:
        out.append(p1)
        return
    mid = ((p0[0] + 2.0 * c[0] + p1[0]) / 4.0, (p0[1] + 2.0 * c[1] + p1[1]) / 4.0)
    _flatten_quadratic(p0, ((p0[0] + c[0]) / 2.0, (p0[1] + c[1]) / 2.0), mid, tol, out)
    _flatten_quadratic(mid, ((c[0] + p1[0]) / 2.0, (c[1] + p1[1]) / 2.0), p1, tol, out)


def rasterize_polylines(polylines, size: tuple[int, int]) -> np.ndarray:
    """Scanline-fill closed polylines into a (height, width) binary mask.

    Nonzero winding rule; a pixel is ink iff its center is inside. All
    polylines contribute to one winding field, so a clockwise outer contour
    with a counter-clockwise inner contour produces a hole.
    """
    w, h = size
    if w <= 0 or h <= 0:
        raise ValidationError("canvas dimensions must be positive")
    delta = np.zeros((h, w + 1), dtype=np.int32)
    for pl in polylines:
        pts = np.asarray(pl, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValidationError("each polyline needs at least 2 (x, y) vertices")
        # 2-vertex polylines close onto themselves: opposite crossings cancel
        x0, y0 = pts[:, 0], pts[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        keep = y0 != y1
        if not keep.any():
            continue
        x0, y0, x1, y1 = x0[keep], y0[keep], x1[keep], y1[keep]
        dirs = np.where(y1 > y0, 1, -1).astype(np.int32)
        ylo = np.minimum(y0, y1)
        yhi = np.maximum(y0, y1)
        # rows whose center yc = r + 0.5 satisfies ylo <= yc < yhi
        r0 = np.maximum(np.ceil(ylo - 0.5), 0.0).astype(np.int64)
        r1 = np.minimum(np.ceil(yhi - 0.5), float(h)).astype(np.int64)
        counts = np.maximum(r1 - r0, 0)
        total = int(counts.sum())
        if total == 0:
            continue
        edge_idx = np.repeat(np.arange(len(counts)), counts)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        rows = np.arange(total) - np.repeat(starts, counts) + np.repeat(r0, counts)
        yc = rows + 0.5
        t = (yc - y0[edge_idx]) / (y1[edge_idx] - y0[edge_idx])
        xc = x0[edge_idx] + t * (x1[edge_idx] - x0[edge_idx])
        # the crossing flips winding for all centers at x >= xc
        xi = np.clip(np.ceil(xc - 0.5), 0, w).astype(np.int64)
        np.add.at(delta, (rows, xi), dirs[edge_idx])
    winding = np.cumsum(delta, axis=1)[:, :w]
    return (winding != 0).astype(np.uint8)


def _line_frame(quad: Quad) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, float]:
    """Orthonormal (baseline, downward) frame, center, and usable box size."""
    tl, tr, br, bl = (np.asarray(c, dtype=np.float64) for c in quad.corners)
    u_raw = (tr - tl) + (br - bl)
    norm = np.linalg.norm(u_raw)
    if norm < 1e-9:
        raise DegenerateQuad("quad has no baseline direction")
    u = u_raw / norm
    v = np.array([-u[1], u[0]])
    v_raw = (bl - tl) + (br - tr)
    if float(v_raw @ v) < 0:
        v = -v
    center = (tl + tr + br + bl) / 4.0
    w = quad.width()
    h = quad.height()
    pad = PAD_RATIO * h
    usable_w = w - 2.0 * pad
    usable_h = h - 2.0 * pad
    if usable_w <= 0 or usable_h <= 0:
        raise DegenerateQuad("quad too small to hold padded text")
    return u, v, center, usable_w, usable_h


def layout_line(line: LineSpec) -> LayoutResult:
    """Place glyphs along the quad's baseline with a centered uniform fit.

    Glyphs advance left-to-right (horizontal) or stack top-to-bottom with an
    em advance (vertical) in font units; one similarity transform then maps
    the assembled line into the quad, scaled as large as the padded interior
    allows while preserving aspect ratio.
    """
    text = line.text.strip()
    if not text:
        raise EmptyText("line text is empty after trimming")
    if line.quad.is_degenerate():
        raise DegenerateQuad("layout quad has no area")
    font = line.font
    u, v, center, usable_w, usable_h = _line_frame(line.quad)

    skipped: list[str] = []
    placed: list[tuple[int, float, float]] = []  # gid, pen_x, pen_y (assembled units)
    pen = 0.0
    vertical = line.orientation == "vertical"
    for ch in text:
        gid = font.codepoint_map.get(ord(ch))
        if gid is None:
            skipped.append(ch)
            gid = 0  # .notdef stands in; often blank but keeps spacing honest
        if vertical:
            placed.append((gid, 0.0, pen))
            pen += float(font.units_per_em)
        else:
            placed.append((gid, pen, 0.0))
            pen += float(font.advance_widths[gid])

    # assembled-space bbox: font y is flipped into y_a = pen_y - y_f so the
    # assembled axes match canvas orientation (y growing downward)
    boxes = []
    for gid, pen_x, pen_y in placed:
        outline = font.glyphs[gid]
        if outline.is_empty:
            continue
        x0, y0, x1, y1 = outline.bbox
        boxes.append((pen_x + x0, pen_y - y1, pen_x + x1, pen_y - y0))
    if boxes:
        ax0 = min(b[0] for b in boxes)
        ay0 = min(b[1] for b in boxes)
        ax1 = max(b[2] for b in boxes)
        ay1 = max(b[3] for b in boxes)
    else:  # nothing inked (whitespace or blank .notdef): fall back to metrics
        if vertical:
            ax0, ax1 = 0.0, float(font.units_per_em)
            ay0, ay1 = -float(font.ascent), pen - float(font.units_per_em) - float(font.descent)
        else:
            ax0, ax1 = 0.0, pen
            ay0, ay1 = -float(font.ascent), -float(font.descent)
    bw = max(ax1 - ax0, 1e-9)
    bh = max(ay1 - ay0, 1e-9)
    scale = min(usable_w / bw, usable_h / bh)
    acx = (ax0 + ax1) / 2.0
    acy = (ay0 + ay1) / 2.0

    placements = []
    for gid, pen_x, pen_y in placed:
        # canvas = center + s*u*(x_a - acx) + s*v*(y_a - acy), y_a = pen_y - y_f
        m = np.empty((2, 3), dtype=np.float64)
        m[:, 0] = scale * u
        m[:, 1] = -scale * v
        m[:, 2] = (
            center
            + scale * u * (pen_x - acx)
            + scale * v * (pen_y - acy)
        )
        placements.append(GlyphPlacement(glyph=gid, affine=m))
    return LayoutResult(
        placements=tuple(placements),
        scale=scale,
        extent=(scale * bw, scale * bh),
        skipped=tuple(skipped),
    )


def _rasterize_line(line: LineSpec, size: tuple[int, int], tolerance: float) -> np.ndarray:
    result = layout_line(line)
    polylines = []
    for placement in result.placements:
        outline = line.font.glyphs[placement.glyph]
        if outline.is_empty:
            continue
        for pl in flatten_outline(outline, tolerance / max(result.scale, 1e-12)):
            polylines.append(placement.apply(pl))
    return rasterize_polylines(polylines, size)


def compose_glyph_control(
    layout: TextLayout,
    size: tuple[int, int] = (DEFAULT_CANVAS, DEFAULT_CANVAS),
    tolerance: float = DEFAULT_TOLERANCE,
) -> GlyphControl:
    """OR-combine every line's rasterized ink onto one canvas."""
    if len(layout.lines) > MAX_LINES:
        raise TooManyLines(f"{len(layout.lines)} lines exceed the {MAX_LINES}-line limit")
    w, h = size
    bits = np.zeros((h, w), dtype=np.uint8)
    for i, line in enumerate(layout.lines):
        try:
            bits |= _rasterize_line(line, size, tolerance)
        except ValidationError as e:
            raise type(e)(f"line {i}: {e}") from None
    return GlyphControl(bits)


def _segments_properly_cross(a0, a1, b0, b1) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1 = orient(a0, a1, b0)
    d2 = orient(a0, a1, b1)
    d3 = orient(b0, b1, a0)
    d4 = orient(b0, b1, a1)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _check_simple(polygon: np.ndarray) -> None:
    n = len(polygon)
    for i in range(n):
        a0, a1 = polygon[i], polygon[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share a vertex, not a crossing
            b0, b1 = polygon[j], polygon[(j + 1) % n]
            if _segments_properly_cross(a0, a1, b0, b1):
                raise SelfIntersectingPolygon(
                    f"edges {i} and {j} of the polygon cross"
                )


def render_position_mask(
    polygons, size: tuple[int, int] = (DEFAULT_CANVAS, DEFAULT_CANVAS)
) -> PositionControl:
    """Fill each simple polygon and OR them together."""
    w, h = size
    bits = np.zeros((h, w), dtype=np.uint8)
    for poly in polygons:
        pts = np.asarray(poly.corners if isinstance(poly, Quad) else poly, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise ValidationError("polygon needs at least 3 (x, y) points")
        _check_simple(pts)
        bits |= rasterize_polylines([pts], size)
    return PositionControl(bits)
