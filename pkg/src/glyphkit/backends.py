"""External model integrations: protocols, offline stand-ins, HTTP adapters.

Every neural model (generator, OCR, segmentation, inpainting, classifier)
sits behind a small protocol. The wire contract for remote backends is JSON
with base64 PNG payloads over a single HTTP POST; images travel as 8-bit
PNG with a declared sample range, so a [0, 1] internal sample lands within
1/255 after the round trip.

The stub generator gives the whole toolchain an offline, deterministic
backend: it echoes the glyph drawn in ink over the masked image, which is
exactly what the blend stage needs to be exercised end to end.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from . import imageutil
from .errors import (
    BackendMalformedReply,
    BackendUnavailable,
    ValidationError,
)
from .fontmetric import ProbabilityVector
from .quality import OcrResult

__all__ = [
    "GeneratorBackend",
    "OcrBackend",
    "SegmentationBackend",
    "InpaintBackend",
    "StubGenerator",
    "HttpGenerator",
    "HttpOcr",
    "HttpClassifier",
    "ScriptedOcr",
    "ThresholdSegmentation",
    "MeanFillInpainter",
    "read_ocr_sidecar",
    "make_generate_request",
    "decode_generate_response",
]

DEFAULT_TIMEOUT = 30.0
STUB_INK = 0.0  # sample value the stub paints glyph ink with


@runtime_checkable
class GeneratorBackend(Protocol):
    """Produces an edited canvas from a control bundle request."""

    deterministic: bool

    def generate(self, request: dict) -> dict: ...


@runtime_checkable
class OcrBackend(Protocol):
    def recognize(self, image: np.ndarray) -> OcrResult: ...


@runtime_checkable
class SegmentationBackend(Protocol):
    def segment(self, image: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class InpaintBackend(Protocol):
    def erase(self, image: np.ndarray, mask: np.ndarray) -> np.ndarray: ...


def make_generate_request(
    glyph_bits: np.ndarray,
    position_bits: np.ndarray,
    masked_image: np.ndarray,
    caption: str,
    seed: int,
) -> dict:
    """Marshal bundle pieces into the /generate wire format.

    The masked image is declared in the generator's [-1, 1] range; the PNG
    bytes stay 8-bit, so receivers map byte/255*2-1.
    """
    n = glyph_bits.shape[0]
    return {
        "caption": caption,
        "seed": int(seed),
        "canvas": int(n),
        "glyph_png": imageutil.encode_b64(imageutil.mask_to_png(glyph_bits)),
        "position_png": imageutil.encode_b64(imageutil.mask_to_png(position_bits)),
        "masked_png": imageutil.encode_b64(imageutil.image_to_png(masked_image)),
        "sample_range": [-1.0, 1.0],
    }


def decode_generate_response(reply: dict, canvas: int) -> np.ndarray:
    if not isinstance(reply, dict) or "image_png" not in reply:
        raise BackendMalformedReply("generator reply lacks an image_png field")
    try:
        image = imageutil.png_to_image(imageutil.decode_b64(reply["image_png"]))
    except ValidationError as e:
        raise BackendMalformedReply(f"generator reply image is invalid: {e}") from None
    if image.shape[:2] != (canvas, canvas):
        raise BackendMalformedReply(
            f"generator returned {image.shape[1]}x{image.shape[0]}, "
            f"expected {canvas}x{canvas}"
        )
    return image


class StubGenerator:
    """Offline generator: paints the glyph in ink over the masked image.

    Deterministic by construction; the seed is accepted and ignored.
    """

    deterministic = True

    def __init__(self, ink: float = STUB_INK):
        self.ink = float(ink)

    def generate(self, request: dict) -> dict:
        glyph = imageutil.png_to_mask(imageutil.decode_b64(request["glyph_png"]))
        masked = imageutil.png_to_image(imageutil.decode_b64(request["masked_png"]))
        if glyph.shape != masked.shape[:2]:
            raise ValidationError("glyph and masked image dims differ")
        out = masked.copy()
        out[glyph.astype(bool)] = self.ink
        return {"image_png": imageutil.encode_b64(imageutil.image_to_png(out))}


def _post_json(url: str, payload: dict, timeout: float) -> dict:
    body = json.dumps(payload).encode("utf-8")
    req = urllib.request.Request(
        url, data=body, headers={"Content-Type": "application/json"}, method="POST"
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            raw = resp.read()
    except urllib.error.HTTPError as e:
        raise BackendUnavailable(
            f"backend at {url} answered HTTP {e.code}", retryable=e.code >= 500
        ) from None
    except (urllib.error.URLError, TimeoutError, OSError) as e:
        raise BackendUnavailable(
            f"backend at {url} unreachable: {e}", retryable=True
        ) from None
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise BackendMalformedReply(f"backend reply is not JSON: {e}") from None


class HttpGenerator:
    """Remote generator speaking the /generate wire contract."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT, deterministic: bool = False):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.deterministic = deterministic

    def generate(self, request: dict) -> dict:
        return _post_json(f"{self.endpoint}/generate", request, self.timeout)


class HttpOcr:
    """Remote OCR: PNG region in, {"text", "confidence"} out."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def recognize(self, image: np.ndarray) -> OcrResult:
        payload = {"image_png": imageutil.encode_b64(imageutil.image_to_png(image))}
        reply = _post_json(f"{self.endpoint}/ocr", payload, self.timeout)
        if not isinstance(reply, dict) or "text" not in reply or "confidence" not in reply:
            raise BackendMalformedReply("OCR reply needs text and confidence fields")
        try:
            return OcrResult(text=str(reply["text"]), confidence=float(reply["confidence"]))
        except (TypeError, ValueError) as e:
            raise BackendMalformedReply(f"OCR reply fields invalid: {e}") from None


class HttpClassifier:
    """Remote font classifier: PNG in, {"probs": [...]} out."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def classify(self, image: np.ndarray) -> ProbabilityVector:
        payload = {"image_png": imageutil.encode_b64(imageutil.image_to_png(image))}
        reply = _post_json(f"{self.endpoint}/classify", payload, self.timeout)
        if not isinstance(reply, dict) or "probs" not in reply:
            raise BackendMalformedReply("classifier reply lacks a probs field")
        try:
            return ProbabilityVector(np.asarray(reply["probs"], dtype=np.float64))
        except (ValidationError, TypeError, ValueError) as e:
            raise BackendMalformedReply(f"classifier probs invalid: {e}") from None


class ScriptedOcr:
    """Replays a fixed list of OCR answers in call order.

    Useful for self-checks where the expected reading of every region is
    known up front (the answers simply mirror the manifest's texts).
    """

    def __init__(self, answers, confidence: float = 1.0):
        self.answers = list(answers)
        self.confidence = float(confidence)
        self.calls = 0

    def recognize(self, image: np.ndarray) -> OcrResult:
        if self.calls >= len(self.answers):
            raise ValidationError(
                f"scripted OCR exhausted after {len(self.answers)} answers"
            )
        text = self.answers[self.calls]
        self.calls += 1
        return OcrResult(text=text, confidence=self.confidence)


class ThresholdSegmentation:
    """Heuristic text segmenter: ink = pixels darker than the threshold.

    A stand-in for a neural segmenter so isolate-mode evaluation and demos
    run offline.
    """

    def __init__(self, threshold: float = 0.5):
        self.threshold = float(threshold)

    def segment(self, image: np.ndarray) -> np.ndarray:
        arr = np.asarray(image, dtype=np.float64)
        if arr.ndim == 3:
            arr = arr.mean(axis=2)
        return (arr < self.threshold).astype(np.uint8)


class MeanFillInpainter:
    """Erases a region by flooding it with the color of its boundary ring."""

    def erase(self, image: np.ndarray, mask: np.ndarray) -> np.ndarray:
        img = np.asarray(image, dtype=np.float64)
        region = np.asarray(mask).astype(bool)
        if region.shape != img.shape[:2]:
            raise ValidationError("inpaint mask dims differ from image")
        if not region.any():
            return img.copy()
        grown = region.copy()
        grown[1:, :] |= region[:-1, :]
        grown[:-1, :] |= region[1:, :]
        grown[:, 1:] |= region[:, :-1]
        grown[:, :-1] |= region[:, 1:]
        ring = grown & ~region
        fill = img[ring].mean(axis=0) if ring.any() else img[region].mean(axis=0)
        out = img.copy()
        out[region] = fill
        return out


def read_ocr_sidecar(path) -> tuple[OcrResult, ...]:
    """Load precomputed OCR results for one image, ordered by line index."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"OCR sidecar {p.name} unreadable: {e}") from None
    if not isinstance(raw, list):
        raise ValidationError(f"OCR sidecar {p.name} must be a JSON array")
    results = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "text" not in entry or "confidence" not in entry:
            raise ValidationError(
                f"OCR sidecar {p.name} entry {i} needs text and confidence"
            )
        results.append(OcrResult(text=str(entry["text"]), confidence=float(entry["confidence"])))
    return tuple(results)
