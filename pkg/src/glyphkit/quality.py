"""OCR quality gating and text accuracy metrics.

The gate keeps a line when the OCR confidence is at least min_confidence and
the Levenshtein distance to the target is at most max_edit_ratio times the
target length. Both boundaries are inclusive. Lengths and distances count
Unicode scalar values, never bytes.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum

from .errors import BothEmpty, EmptyInput, EmptyTarget, ValidationError

__all__ = [
    "OcrResult",
    "QualityCriteria",
    "RejectReason",
    "GateResult",
    "edit_distance",
    "ned",
    "gate",
    "sentence_accuracy",
]


@dataclass(frozen=True)
class OcrResult:
    text: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class QualityCriteria:
    min_confidence: float = 0.8
    max_edit_ratio: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValidationError("min_confidence must be in [0, 1]")
        if self.max_edit_ratio < 0:
            raise ValidationError("max_edit_ratio must be >= 0")


class RejectReason(str, Enum):
    CONFIDENCE = "confidence"
    EDIT_DISTANCE = "edit_distance"


@dataclass(frozen=True)
class GateResult:
    passed: bool
    reason: RejectReason | None
    edit_distance: int
    max_allowed: float

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else f"reject:{self.reason.value}"


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance (insert, delete, substitute)."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    if lb > la:  # keep the inner row short
        a, b, la, lb = b, a, lb, la
    prev = list(range(lb + 1))
    cur = [0] * (lb + 1)
    for i in range(1, la + 1):
        cur[0] = i
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev, cur = cur, prev
    return prev[lb]


def ned(predicted: str, target: str) -> float:
    """Normalized edit-distance similarity: 1 means identical."""
    longest = max(len(predicted), len(target))
    if longest == 0:
        raise BothEmpty("ned needs at least one non-empty string")
    return 1.0 - edit_distance(predicted, target) / longest


def gate(ocr: OcrResult, target: str, criteria: QualityCriteria | None = None) -> GateResult:
    if not target:
        raise EmptyTarget("gate target must be non-empty")
    crit = criteria if criteria is not None else QualityCriteria()
    max_allowed = crit.max_edit_ratio * len(target)
    dist = edit_distance(ocr.text, target)
    if ocr.confidence < crit.min_confidence:
        return GateResult(False, RejectReason.CONFIDENCE, dist, max_allowed)
    if dist > max_allowed:
        return GateResult(False, RejectReason.EDIT_DISTANCE, dist, max_allowed)
    return GateResult(True, None, dist, max_allowed)


def _normalize(s: str) -> str:
    return unicodedata.normalize("NFC", s.strip())


def sentence_accuracy(pairs) -> float:
    """Fraction of (predicted, target) pairs matching exactly after NFC+strip."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("sentence_accuracy needs at least one pair")
    hits = sum(1 for pred, tgt in pairs if _normalize(pred) == _normalize(tgt))
    return hits / len(pairs)
