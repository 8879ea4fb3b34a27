"""Image and mask serialization.

Images live as float64 RGB arrays in [0, 1] internally; the generator
backend's [-1, 1] convention exists only at the marshaling boundary. Masks
serialize as 8-bit single-channel PNG with ink at 255 (bit-exact
round-trip); images as 8-bit RGB PNG (round-trip within 1/255).
"""

from __future__ import annotations

import base64
import io
from pathlib import Path

import numpy as np
from PIL import Image as PilImage

from .errors import ValidationError

__all__ = [
    "new_image",
    "load_image",
    "save_image",
    "image_to_png",
    "png_to_image",
    "mask_to_png",
    "png_to_mask",
    "load_mask",
    "save_mask",
    "to_backend_range",
    "from_backend_range",
    "encode_b64",
    "decode_b64",
]


def new_image(width: int, height: int, fill: float = 1.0) -> np.ndarray:
    if width <= 0 or height <= 0:
        raise ValidationError("image dimensions must be positive")
    return np.full((height, width, 3), float(fill), dtype=np.float64)


def _check_image(arr: np.ndarray) -> np.ndarray:
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 2:
        a = np.repeat(a[:, :, None], 3, axis=2)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValidationError(f"expected (h, w, 3) image, got shape {a.shape}")
    if a.min() < -1e-9 or a.max() > 1 + 1e-9:
        raise ValidationError("image samples must lie in [0, 1]")
    return np.clip(a, 0.0, 1.0)


def image_to_png(arr: np.ndarray) -> bytes:
    a = _check_image(arr)
    data = np.rint(a * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    PilImage.fromarray(data, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def png_to_image(data: bytes) -> np.ndarray:
    try:
        img = PilImage.open(io.BytesIO(data))
        img.load()
    except Exception as e:
        raise ValidationError(f"not a decodable image: {e}") from None
    return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def load_image(path) -> np.ndarray:
    return png_to_image(Path(path).read_bytes())


def save_image(arr: np.ndarray, path) -> None:
    Path(path).write_bytes(image_to_png(arr))


def mask_to_png(mask: np.ndarray) -> bytes:
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValidationError("mask must be 2-d")
    if not np.isin(m, (0, 1)).all():
        raise ValidationError("mask must contain only 0 and 1")
    buf = io.BytesIO()
    PilImage.fromarray((m.astype(np.uint8) * 255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def png_to_mask(data: bytes) -> np.ndarray:
    try:
        img = PilImage.open(io.BytesIO(data))
        img.load()
    except Exception as e:
        raise ValidationError(f"not a decodable mask: {e}") from None
    arr = np.asarray(img.convert("L"))
    if not np.isin(arr, (0, 255)).all():
        raise ValidationError("mask PNG must be strictly black/white")
    return (arr == 255).astype(np.uint8)


def load_mask(path) -> np.ndarray:
    return png_to_mask(Path(path).read_bytes())


def save_mask(mask: np.ndarray, path) -> None:
    Path(path).write_bytes(mask_to_png(mask))


def to_backend_range(arr: np.ndarray) -> np.ndarray:
    """[0, 1] samples to the generator's [-1, 1] convention."""
    return 2.0 * np.asarray(arr, dtype=np.float64) - 1.0


def from_backend_range(arr: np.ndarray) -> np.ndarray:
    return (np.asarray(arr, dtype=np.float64) + 1.0) / 2.0


def encode_b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def decode_b64(text: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except Exception as e:
        raise ValidationError(f"invalid base64 payload: {e}") from None
