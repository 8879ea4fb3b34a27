"""Masked-image construction, Poisson blending, and zoomed region editing.

The blend step pastes a generated patch into the original image without a
visible seam: inside the mask we solve the discrete Poisson equation whose
guidance field is the patch's own 4-neighbor Laplacian and whose Dirichlet
boundary is the surrounding original. Pixels outside the mask are never
touched.

Small text regions are edited through a zoom: crop a square around the quad
with a 20% margin, resample it up to the generator's canvas, and after the
edit resample back down and blend. The downsampled edit is applied as a
delta against the original crop, so a round trip with an untouched canvas
reproduces the original exactly instead of accumulating resampling blur.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateQuad,
    DimensionMismatch,
    ExtentTooLarge,
    MaskTouchesBorder,
    NonConvergence,
    QuadOutOfBounds,
    ValidationError,
)
from .geometry import Quad
from .raster import PositionControl

__all__ = [
    "MaskedImage",
    "ZoomRecord",
    "MASKED_VALUE",
    "ZOOM_MARGIN",
    "build_masked_image",
    "seamless_clone",
    "resize_bilinear",
    "zoom_edit_begin",
    "zoom_edit_finish",
]

# 0 in the generator backend's [-1, 1] range maps to 0.5 internally.
MASKED_VALUE = 0.5
ZOOM_MARGIN = 0.2
DEFAULT_TOL = 1e-6


def _as_image(arr: np.ndarray, name: str = "image") -> np.ndarray:
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValidationError(f"{name} must have shape (h, w, 3), got {a.shape}")
    return a


def _as_region(mask, shape: tuple[int, int]) -> np.ndarray:
    bits = mask.bits if isinstance(mask, PositionControl) else np.asarray(mask)
    if bits.ndim != 2:
        raise ValidationError("mask must be 2-d")
    if not np.isin(bits, (0, 1)).all():
        raise ValidationError("mask must contain only 0 and 1")
    if bits.shape != shape:
        raise DimensionMismatch(f"mask shape {bits.shape} does not match image {shape}")
    return bits.astype(bool)


@dataclass(frozen=True)
class MaskedImage:
    """An image with the text region flattened to the backend-zero value."""

    image: np.ndarray = field(repr=False)
    position: PositionControl = field(repr=False)

    def __post_init__(self):
        img = _as_image(self.image)
        region = self.position.bits.astype(bool)
        if region.shape != img.shape[:2]:
            raise DimensionMismatch(
                f"position {region.shape} does not match image {img.shape[:2]}"
            )
        if not (img[region] == MASKED_VALUE).all():
            raise ValidationError("masked pixels must equal the masked value exactly")
        object.__setattr__(self, "image", img)


def build_masked_image(img: np.ndarray, pos: PositionControl) -> MaskedImage:
    image = _as_image(img)
    region = _as_region(pos, image.shape[:2])
    out = image.copy()
    out[region] = MASKED_VALUE
    return MaskedImage(out, pos if isinstance(pos, PositionControl) else PositionControl(pos))


def _neighbor_sum(a: np.ndarray) -> np.ndarray:
    """Sum of the 4-neighborhood with zero beyond the array edge."""
    out = np.zeros_like(a)
    out[1:, :] += a[:-1, :]
    out[:-1, :] += a[1:, :]
    out[:, 1:] += a[:, :-1]
    out[:, :-1] += a[:, 1:]
    return out


def _solve_poisson_channel(
    src: np.ndarray,
    dst: np.ndarray,
    mask: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, int, bool]:
    """Conjugate-gradient solve of the masked Poisson system on one channel.

    Returns (solution over the crop, final max-abs residual, iterations,
    converged). Arrays are crop-sized; ``mask`` never touches the crop edge.
    """
    guide = 4.0 * src - _neighbor_sum(src)
    b = np.where(mask, guide + _neighbor_sum(np.where(mask, 0.0, dst)), 0.0)

    def apply_a(x: np.ndarray) -> np.ndarray:
        return np.where(mask, 4.0 * x - _neighbor_sum(x), 0.0)

    x = np.where(mask, dst, 0.0)
    r = b - apply_a(x)
    best = x
    best_res = float(np.abs(r).max())
    if best_res <= tol:
        return x, best_res, 0, True
    p = r.copy()
    rs = float((r * r).sum())
    for it in range(1, max_iter + 1):
        ap = apply_a(p)
        denom = float((p * ap).sum())
        if denom <= 0.0:  # numerically exhausted search direction
            break
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * ap
        res = float(np.abs(r).max())
        if res < best_res:
            best, best_res = x, res
        if res <= tol:
            return x, res, it, True
        rs_new = float((r * r).sum())
        p = r + (rs_new / rs) * p
        rs = rs_new
    return best, best_res, max_iter, False


def seamless_clone(
    src: np.ndarray,
    dst: np.ndarray,
    mask,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
) -> np.ndarray:
    """Poisson-blend src into dst over the mask region.

    The result's Laplacian inside the mask equals src's (plain, non-mixed
    gradients); its boundary values are dst's ring pixels. Pixels outside
    the mask are returned bit-exact from dst; the solved interior is clamped
    to [0, 1].
    """
    source = _as_image(src, "src")
    target = _as_image(dst, "dst")
    if source.shape != target.shape:
        raise DimensionMismatch(
            f"src shape {source.shape} does not match dst {target.shape}"
        )
    region = _as_region(mask, target.shape[:2])
    out = target.copy()
    if not region.any():
        return out
    h, w = region.shape
    if region[0, :].any() or region[-1, :].any() or region[:, 0].any() or region[:, -1].any():
        raise MaskTouchesBorder("mask needs a 1-pixel margin inside the image")

    rows = np.flatnonzero(region.any(axis=1))
    cols = np.flatnonzero(region.any(axis=0))
    r0, r1 = rows[0] - 1, rows[-1] + 2
    c0, c1 = cols[0] - 1, cols[-1] + 2
    crop = (slice(r0, r1), slice(c0, c1))
    m = region[crop]
    if max_iter is None:
        max_iter = max(200, 10 * int(region.sum()))

    failures = []
    for ch in range(3):
        sol, res, its, ok = _solve_poisson_channel(
            source[crop + (ch,)], target[crop + (ch,)], m, tol, max_iter
        )
        view = out[crop + (ch,)]
        view[m] = np.clip(sol[m], 0.0, 1.0)
        if not ok:
            failures.append((ch, res, its))
    if failures:
        worst = max(res for _, res, _ in failures)
        raise NonConvergence(
            f"Poisson solve left residual {worst:.3e} > {tol:.3e} "
            f"after {max_iter} iterations on {len(failures)} channel(s)",
            best=out,
            residual=worst,
            iterations=max_iter,
        )
    return out


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Pixel-center-aligned bilinear resample to (out_h, out_w)."""
    a = _as_image(img)
    if out_w <= 0 or out_h <= 0:
        raise ValidationError("output dimensions must be positive")
    in_h, in_w = a.shape[:2]
    sx = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    sy = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    tx = sx - x0
    ty = sy - y0
    x0i = np.clip(x0.astype(np.int64), 0, in_w - 1)
    x1i = np.clip(x0.astype(np.int64) + 1, 0, in_w - 1)
    y0i = np.clip(y0.astype(np.int64), 0, in_h - 1)
    y1i = np.clip(y0.astype(np.int64) + 1, 0, in_h - 1)
    wx = tx[None, :, None]
    wy = ty[:, None, None]
    top = a[y0i[:, None], x0i[None, :]] * (1 - wx) + a[y0i[:, None], x1i[None, :]] * wx
    bot = a[y1i[:, None], x0i[None, :]] * (1 - wx) + a[y1i[:, None], x1i[None, :]] * wx
    return top * (1 - wy) + bot * wy


@dataclass(frozen=True)
class ZoomRecord:
    """Crop geometry for inverting a zoomed edit.

    The crop square is [x0, x0+side) x [y0, y0+side) in original pixel
    coordinates; scale = canvas / side maps crop lengths to canvas lengths.
    """

    x0: int
    y0: int
    side: int
    canvas: int
    original_size: tuple[int, int]  # (width, height)

    @property
    def scale(self) -> float:
        return self.canvas / self.side

    def to_canvas(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return (pts - np.array([self.x0, self.y0])) * self.scale

    def from_canvas(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts / self.scale + np.array([self.x0, self.y0])


def _crop_rect(quad: Quad, width: int, height: int, margin: float) -> tuple[int, int, int]:
    xmin, ymin, xmax, ymax = quad.bounding_box()
    if quad.is_degenerate():
        raise DegenerateQuad("zoom quad has no area")
    if xmin < 0 or ymin < 0 or xmax > width or ymax > height:
        raise QuadOutOfBounds(
            f"quad bbox ({xmin:.1f}, {ymin:.1f}, {xmax:.1f}, {ymax:.1f}) "
            f"exceeds the {width}x{height} image"
        )
    bw = xmax - xmin
    bh = ymax - ymin
    side = int(np.ceil(max(bw, bh) * (1.0 + margin)))
    side = max(side, 1)
    if side > min(width, height):
        side = min(width, height)
        if bw > side or bh > side:
            raise ExtentTooLarge(
                "no axis-aligned square inside the image can cover the quad"
            )
    cx = (xmin + xmax) / 2.0
    cy = (ymin + ymax) / 2.0
    x0 = int(np.clip(round(cx - side / 2.0), 0, width - side))
    y0 = int(np.clip(round(cy - side / 2.0), 0, height - side))
    return x0, y0, side


def zoom_edit_begin(
    img: np.ndarray,
    quad: Quad,
    canvas: int = 512,
    margin: float = ZOOM_MARGIN,
) -> tuple[np.ndarray, ZoomRecord]:
    """Crop a margined square around the quad and resample it to canvas^2."""
    image = _as_image(img)
    h, w = image.shape[:2]
    if canvas <= 0:
        raise ValidationError("canvas must be positive")
    x0, y0, side = _crop_rect(quad, w, h, margin)
    rec = ZoomRecord(x0, y0, side, canvas, (w, h))
    crop = image[y0 : y0 + side, x0 : x0 + side]
    if side == canvas:
        return crop.copy(), rec
    return resize_bilinear(crop, canvas, canvas), rec


def zoom_edit_finish(
    edited: np.ndarray,
    rec: ZoomRecord,
    original: np.ndarray,
    mask,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
) -> np.ndarray:
    """Map an edited zoom canvas back into the original and blend it.

    The edit is taken as a delta between the edited canvas and the
    round-tripped unedited crop, so regions and structure the generator left
    alone come back from the original at full resolution rather than
    resampled. The patch then replaces the mask region via seamless_clone.
    """
    canvas = _as_image(edited, "edited")
    source = _as_image(original, "original")
    h, w = source.shape[:2]
    if rec.original_size != (w, h):
        raise DimensionMismatch(
            f"record was made for a {rec.original_size} image, got {(w, h)}"
        )
    if canvas.shape[:2] != (rec.canvas, rec.canvas):
        raise DimensionMismatch(
            f"edited canvas is {canvas.shape[1]}x{canvas.shape[0]}, "
            f"expected {rec.canvas}x{rec.canvas}"
        )
    region = _as_region(mask, (h, w))
    box = (slice(rec.y0, rec.y0 + rec.side), slice(rec.x0, rec.x0 + rec.side))
    if region[box].sum() != region.sum():
        raise QuadOutOfBounds("mask extends outside the recorded crop square")
    crop = source[box]
    if rec.side == rec.canvas:
        patch = canvas
        baseline = crop
    else:
        patch = resize_bilinear(canvas, rec.side, rec.side)
        baseline = resize_bilinear(
            resize_bilinear(crop, rec.canvas, rec.canvas), rec.side, rec.side
        )
    merged = np.clip(crop + patch - baseline, 0.0, 1.0)
    src_full = source.copy()
    src_full[box] = merged
    return seamless_clone(src_full, source, region, tol=tol, max_iter=max_iter)
