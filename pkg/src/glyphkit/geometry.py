"""Quad perturbation, 4-point homographies, mask warping, polygon tightening.

Corner order is TL, TR, BR, BL everywhere, matching the CLI's 8-float quad
encoding. The homography is solved as the 8-unknown direct linear transform
with m[2][2] pinned to 1, so solutions are unique and need no rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateConfiguration,
    DegenerateQuad,
    ExtentTooLarge,
    PointAtInfinity,
    ValidationError,
)

__all__ = [
    "Quad",
    "Homography",
    "PerturbationConfig",
    "perturb_quad",
    "solve_homography",
    "apply_homography",
    "compose",
    "warp_mask",
    "tighten_polygon",
]

Point = tuple[float, float]

_TINY = 1e-12


@dataclass(frozen=True)
class Quad:
    corners: tuple[Point, Point, Point, Point]

    @classmethod
    def from_flat(cls, values) -> "Quad":
        vals = [float(v) for v in values]
        if len(vals) != 8:
            raise ValidationError(f"quad needs 8 numbers, got {len(vals)}")
        return cls(tuple((vals[i], vals[i + 1]) for i in range(0, 8, 2)))

    def to_flat(self) -> list[float]:
        return [v for corner in self.corners for v in corner]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.corners, dtype=np.float64)

    def signed_area(self) -> float:
        pts = self.as_array()
        x, y = pts[:, 0], pts[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def is_degenerate(self) -> bool:
        return abs(self.signed_area()) < 1e-9

    def width(self) -> float:
        tl, tr, br, bl = map(np.asarray, self.corners)
        return float((np.linalg.norm(tr - tl) + np.linalg.norm(br - bl)) / 2.0)

    def height(self) -> float:
        tl, tr, br, bl = map(np.asarray, self.corners)
        return float((np.linalg.norm(bl - tl) + np.linalg.norm(br - tr)) / 2.0)

    def max_side(self) -> float:
        pts = self.as_array()
        return float(max(np.linalg.norm(pts[i] - pts[(i + 1) % 4]) for i in range(4)))

    def bounding_box(self) -> tuple[float, float, float, float]:
        pts = self.as_array()
        return (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )

    def contains(self, point: Point, slack: float = 1e-9) -> bool:
        """Point-in-convex-quad test, tolerant of either winding."""
        pts = self.as_array()
        p = np.asarray(point, dtype=np.float64)
        crosses = []
        for i in range(4):
            edge = pts[(i + 1) % 4] - pts[i]
            rel = p - pts[i]
            crosses.append(edge[0] * rel[1] - edge[1] * rel[0])
        return all(c >= -slack for c in crosses) or all(c <= slack for c in crosses)


@dataclass(frozen=True)
class Homography:
    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.m, dtype=np.float64).reshape(3, 3).copy()
        if abs(arr[2, 2]) > _TINY:
            arr /= arr[2, 2]
        arr.flags.writeable = False
        object.__setattr__(self, "m", arr)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def inverse(self) -> "Homography":
        det = np.linalg.det(self.m)
        if abs(det) < _TINY:
            raise DegenerateConfiguration("homography is not invertible")
        return Homography(np.linalg.inv(self.m))

    def to_flat(self) -> list[float]:
        return [float(v) for v in self.m.reshape(-1)]


@dataclass(frozen=True)
class PerturbationConfig:
    epsilon: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValidationError("epsilon must be >= 0")


def perturb_quad(
    q: Quad,
    cfg: PerturbationConfig,
    bounds: tuple[int, int] | None = None,
    rng: np.random.Generator | None = None,
) -> Quad:
    """Displace each corner coordinate by uniform noise in [-eps, +eps].

    bounds, when given as (width, height), clamps the result to the canvas.
    An explicit rng overrides cfg.seed so callers can derive streams.
    """
    if cfg.epsilon == 0:
        return q
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    deltas = rng.uniform(-cfg.epsilon, cfg.epsilon, size=(4, 2))
    pts = q.as_array() + deltas
    if bounds is not None:
        w, h = bounds
        pts[:, 0] = np.clip(pts[:, 0], 0.0, float(w))
        pts[:, 1] = np.clip(pts[:, 1], 0.0, float(h))
    return Quad(tuple((float(x), float(y)) for x, y in pts))


def _check_not_collinear(q: Quad, label: str) -> None:
    pts = q.as_array()
    for i in range(4):
        a, b, c = pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) < 1e-9:
            raise DegenerateConfiguration(
                f"{label} quad has collinear corners {i}, {(i + 1) % 4}, {(i + 2) % 4}"
            )


def solve_homography(src: Quad, dst: Quad) -> Homography:
    _check_not_collinear(src, "source")
    _check_not_collinear(dst, "destination")
    a = np.zeros((8, 8), dtype=np.float64)
    b = np.zeros(8, dtype=np.float64)
    for i, ((x, y), (u, v)) in enumerate(zip(src.corners, dst.corners)):
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as e:
        raise DegenerateConfiguration(f"homography system is singular: {e}") from None
    m = np.append(h, 1.0).reshape(3, 3)
    if abs(np.linalg.det(m)) < _TINY:
        raise DegenerateConfiguration("solved homography is not invertible")
    return Homography(m)


def apply_homography(h: Homography, p: Point) -> Point:
    x, y = p
    vec = h.m @ np.array([x, y, 1.0])
    if abs(vec[2]) < _TINY:
        raise PointAtInfinity(f"point {p} maps to infinity")
    return (float(vec[0] / vec[2]), float(vec[1] / vec[2]))


def compose(outer: Homography, inner: Homography) -> Homography:
    """Homography applying inner first, then outer."""
    return Homography(outer.m @ inner.m)


def map_quad(h: Homography, q: Quad) -> Quad:
    return Quad(tuple(apply_homography(h, c) for c in q.corners))


def warp_mask(mask: np.ndarray, h: Homography, out_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Warp a binary mask by h using inverse-mapped nearest-neighbor sampling.

    out_shape is (height, width); defaults to the input shape. Pixels whose
    inverse-mapped center falls outside the source are 0.
    """
    if mask.ndim != 2:
        raise ValidationError("mask must be a 2-d array")
    src_h, src_w = mask.shape
    dst_h, dst_w = out_shape if out_shape is not None else mask.shape
    inv = h.inverse().m
    xs = np.arange(dst_w, dtype=np.float64) + 0.5
    ys = np.arange(dst_h, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    denom = inv[2, 0] * gx + inv[2, 1] * gy + inv[2, 2]
    # pixels mapping to infinity sample nowhere
    safe = np.abs(denom) > _TINY
    denom = np.where(safe, denom, 1.0)
    sx = (inv[0, 0] * gx + inv[0, 1] * gy + inv[0, 2]) / denom
    sy = (inv[1, 0] * gx + inv[1, 1] * gy + inv[1, 2]) / denom
    ix = np.floor(sx).astype(np.int64)
    iy = np.floor(sy).astype(np.int64)
    inside = safe & (ix >= 0) & (ix < src_w) & (iy >= 0) & (iy < src_h)
    out = np.zeros((dst_h, dst_w), dtype=mask.dtype)
    out[inside] = mask[iy[inside], ix[inside]]
    return out


def tighten_polygon(p: Quad, text_extent: tuple[float, float], pad_ratio: float = 0.05) -> Quad:
    """Shrink p along its baseline so it just fits the laid-out text.

    text_extent is the (width, height) of the new text in canvas pixels at
    layout scale. The padding matches the layout rule: pad_ratio of the quad
    height on each side. New corners are interpolated along the top and
    bottom edges toward their midpoints, so the result always lies inside a
    convex p; height is untouched.
    """
    if p.is_degenerate():
        raise DegenerateQuad("cannot tighten a degenerate quad")
    text_w, text_h = text_extent
    if text_w < 0 or text_h < 0:
        raise ValidationError("text extent must be non-negative")
    w = p.width()
    h = p.height()
    pad = pad_ratio * h
    needed_w = text_w + 2.0 * pad
    if needed_w > w * (1.0 + 1e-9) or text_h + 2.0 * pad > h * (1.0 + 1e-9):
        raise ExtentTooLarge(
            f"text {text_w:.1f}x{text_h:.1f} px cannot fit the {w:.1f}x{h:.1f} px quad"
        )
    f = min(needed_w / w, 1.0)
    tl, tr, br, bl = (np.asarray(c, dtype=np.float64) for c in p.corners)
    top_mid = (tl + tr) / 2.0
    bot_mid = (bl + br) / 2.0
    new = (
        top_mid + (tl - top_mid) * f,
        top_mid + (tr - top_mid) * f,
        bot_mid + (br - bot_mid) * f,
        bot_mid + (bl - bot_mid) * f,
    )
    return Quad(tuple((float(x), float(y)) for x, y in new))
