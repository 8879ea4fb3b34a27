"""Exception hierarchy.

Every failure mode callers are expected to handle gets its own type so that
the CLI and service layers can map errors to exit codes and HTTP payloads
without string matching.
"""

from __future__ import annotations


class GlyphkitError(Exception):
    """Base class for all library errors."""

    code = "internal"


class ValidationError(GlyphkitError):
    """Bad input from the caller: wrong shapes, empty text, out-of-range k."""

    code = "validation"


class BackendError(GlyphkitError):
    """A configured external backend failed or answered garbage."""

    code = "backend"


# font parsing


class FontError(ValidationError):
    pass


class MalformedFont(FontError):
    """Structurally broken font bytes: truncated tables, bad offsets."""


class MissingTable(FontError):
    def __init__(self, tag: str):
        super().__init__(f"required table {tag!r} not present")
        self.tag = tag


class UnsupportedFeature(FontError):
    """A well-formed font using features outside the supported subset."""


class IndexOutOfRange(ValidationError):
    pass


# geometry


class DegenerateQuad(ValidationError):
    pass


class DegenerateConfiguration(ValidationError):
    """Homography cannot be solved: collinear corners or singular system."""


class PointAtInfinity(ValidationError):
    pass


class ExtentTooLarge(ValidationError):
    """Replacement text cannot fit inside the polygon being tightened."""


# layout / rasterization


class EmptyText(ValidationError):
    pass


class TooManyLines(ValidationError):
    pass


class SelfIntersectingPolygon(ValidationError):
    pass


# text metrics


class EmptyTarget(ValidationError):
    pass


class BothEmpty(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


# font metrics


class KOutOfRange(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class ZeroVector(ValidationError):
    """A truncated probability vector is all zeros; cosine is undefined."""


class InsufficientFonts(ValidationError):
    pass


class UnrenderableProbe(ValidationError):
    pass


# images / blending


class DimensionMismatch(ValidationError):
    pass


class MaskTouchesBorder(ValidationError):
    """Blend region needs a 1-px margin so the boundary ring exists."""


class QuadOutOfBounds(ValidationError):
    pass


class NonConvergence(GlyphkitError):
    """Solver hit max_iter above tolerance. Carries the best iterate."""

    code = "internal"

    def __init__(self, message: str, best, residual: float, iterations: int):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


# pipeline


class MissingSidecar(ValidationError):
    pass


class MisalignedOutputs(ValidationError):
    pass


class BackendUnavailable(BackendError):
    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class BackendMalformedReply(BackendError):
    pass
