"""Fuzzy font-similarity metrics over classifier probability vectors.

Distances are computed after truncating each vector independently to its k
largest entries (no renormalization; ties at the cutoff keep the lowest
index). FULL skips truncation. cos distance is 1 minus cosine similarity,
so identical vectors score 0 and disjoint supports score 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import (
    BackendUnavailable,
    InsufficientFonts,
    KOutOfRange,
    LengthMismatch,
    UnrenderableProbe,
    ValidationError,
    ZeroVector,
)
from .fontio import Font
from .geometry import Quad
from .raster import LineSpec, TextLayout, compose_glyph_control

__all__ = [
    "FULL",
    "ProbabilityVector",
    "FontClassifier",
    "topk_truncate",
    "l2_at_k",
    "cos_at_k",
    "build_reference_classifier",
    "font_fidelity_report",
    "ReferenceClassifier",
]


class _Full:
    """Sentinel: keep every entry instead of truncating."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FULL"


FULL = _Full()

GRID = 16  # feature grid is GRID x GRID ink densities


@dataclass(frozen=True)
class ProbabilityVector:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).reshape(-1).copy()
        if (arr < 0).any():
            raise ValidationError("probabilities must be non-negative")
        if abs(float(arr.sum()) - 1.0) > 1e-6:
            raise ValidationError(f"probabilities sum to {arr.sum()}, expected 1")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.values)


@runtime_checkable
class FontClassifier(Protocol):
    label_count: int

    def classify(self, region: np.ndarray) -> ProbabilityVector: ...


def _as_values(p) -> np.ndarray:
    if isinstance(p, ProbabilityVector):
        return p.values
    arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if (arr < 0).any():
        raise ValidationError("probabilities must be non-negative")
    return arr


def topk_truncate(p, k) -> np.ndarray:
    """Zero out everything but the k largest entries, keeping their values."""
    values = _as_values(p)
    if k is FULL:
        return values.copy()
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise KOutOfRange(f"k must be a positive integer or FULL, got {k!r}")
    if not 1 <= k <= len(values):
        raise KOutOfRange(f"k={k} outside [1, {len(values)}]")
    # stable argsort on the negated values keeps ascending-index tie order
    order = np.argsort(-values, kind="stable")
    out = np.zeros_like(values)
    keep = order[:k]
    out[keep] = values[keep]
    return out


def l2_at_k(p, q, k) -> float:
    tp, tq = _truncated_pair(p, q, k)
    return float(np.sqrt(np.sum((tp - tq) ** 2)))


def cos_at_k(p, q, k) -> float:
    tp, tq = _truncated_pair(p, q, k)
    dot_pq = float(np.dot(tp, tq))
    dot_pp = float(np.dot(tp, tp))
    dot_qq = float(np.dot(tq, tq))
    if dot_pp == 0.0 or dot_qq == 0.0:
        raise ZeroVector("a truncated vector is all zeros; cosine is undefined")
    # sqrt(x*x) == x exactly in IEEE-754, so cos(p, p) is exactly 0
    return 1.0 - dot_pq / np.sqrt(dot_pp * dot_qq)


def _truncated_pair(p, q, k) -> tuple[np.ndarray, np.ndarray]:
    vp, vq = _as_values(p), _as_values(q)
    if len(vp) != len(vq):
        raise LengthMismatch(f"vector lengths differ: {len(vp)} vs {len(vq)}")
    return topk_truncate(vp, k), topk_truncate(vq, k)


def _to_ink(region: np.ndarray) -> np.ndarray:
    """Coerce a region (binary mask, gray, or RGB) to ink densities in [0,1].

    Binary inputs are trusted as masks. Anything else is rescaled to [0,1]
    and inverted when mostly bright, assuming ink is the minority color.
    """
    arr = np.asarray(region, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    if arr.ndim != 2:
        raise ValidationError("region must be 2-d or 3-d")
    values = np.unique(arr)
    if np.isin(values, (0.0, 1.0)).all():
        return arr
    top = float(arr.max())
    if top > 1.0:
        arr = arr / 255.0
    if float(arr.mean()) > 0.5:
        arr = 1.0 - arr
    return np.clip(arr, 0.0, 1.0)


def _feature(region: np.ndarray) -> np.ndarray:
    """Bbox-cropped 16x16 mean-ink grid, flattened and L2-normalized."""
    ink = _to_ink(region)
    rows = np.flatnonzero(ink.sum(axis=1) > 0)
    cols = np.flatnonzero(ink.sum(axis=0) > 0)
    if len(rows) and len(cols):
        ink = ink[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
    h, w = ink.shape
    row_cell = (np.arange(h) * GRID) // max(h, 1)
    col_cell = (np.arange(w) * GRID) // max(w, 1)
    grid = np.zeros((GRID, GRID), dtype=np.float64)
    counts = np.zeros((GRID, GRID), dtype=np.float64)
    np.add.at(grid, (row_cell[:, None], col_cell[None, :]), ink)
    np.add.at(counts, (row_cell[:, None], col_cell[None, :]), 1.0)
    grid = np.divide(grid, counts, out=np.zeros_like(grid), where=counts > 0)
    flat = grid.reshape(-1)
    norm = float(np.linalg.norm(flat))
    return flat / norm if norm > 0 else flat


@dataclass(frozen=True)
class ReferenceClassifier:
    """Nearest-feature classifier over a fixed reference font set.

    classify is softmax(-distances / temperature) over the reference
    features, so it is smooth in the input and deterministic.
    """

    features: np.ndarray = field(repr=False)  # (c, GRID*GRID)
    temperature: float = 0.1

    @property
    def label_count(self) -> int:
        return len(self.features)

    def classify(self, region: np.ndarray) -> ProbabilityVector:
        f = _feature(region)
        dists = np.linalg.norm(self.features - f, axis=1)
        logits = -dists / self.temperature
        logits -= logits.max()
        e = np.exp(logits)
        return ProbabilityVector(e / e.sum())


def _probe_quad(canvas: tuple[int, int]) -> Quad:
    w, h = canvas
    m_x, m_y = 0.1 * w, 0.1 * h
    return Quad(
        (
            (m_x, m_y),
            (w - m_x, m_y),
            (w - m_x, h - m_y),
            (m_x, h - m_y),
        )
    )


def render_probe(font: Font, probe_text: str, canvas: tuple[int, int]) -> np.ndarray:
    """Render the probe string the same way for references and queries."""
    layout = TextLayout((LineSpec(probe_text, font, _probe_quad(canvas)),))
    return compose_glyph_control(layout, canvas).bits


def build_reference_classifier(
    fonts: Sequence[Font],
    probe_text: str = "ABC",
    canvas: tuple[int, int] = (256, 256),
    temperature: float = 0.1,
) -> ReferenceClassifier:
    fonts = list(fonts)
    if len(fonts) < 2:
        raise InsufficientFonts(f"need at least 2 reference fonts, got {len(fonts)}")
    if not probe_text.strip():
        raise UnrenderableProbe("probe text is empty")
    features = []
    for i, font in enumerate(fonts):
        unmapped = [ch for ch in probe_text if ch != " " and ord(ch) not in font.codepoint_map]
        if unmapped:
            raise UnrenderableProbe(
                f"font {i} does not map probe characters {''.join(unmapped)!r}"
            )
        features.append(_feature(render_probe(font, probe_text, canvas)))
    return ReferenceClassifier(features=np.stack(features), temperature=temperature)


def font_fidelity_report(
    glyph,
    output_region: np.ndarray,
    classifier: FontClassifier,
    ks: Sequence,
    isolate: bool = False,
    segmentation=None,
) -> dict:
    """Map each k to the (l2, cos) distance between glyph and output probs."""
    if isolate:
        if segmentation is None:
            raise BackendUnavailable("isolate=True needs a segmentation backend", retryable=False)
        region_mask = segmentation.segment(output_region)
        output_region = np.asarray(output_region, dtype=np.float64) * np.asarray(region_mask)
    glyph_bits = glyph.bits if hasattr(glyph, "bits") else glyph
    p_g = classifier.classify(glyph_bits)
    p_x = classifier.classify(output_region)
    return {k: (l2_at_k(p_g, p_x, k), cos_at_k(p_g, p_x, k)) for k in ks}
