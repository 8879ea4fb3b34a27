"""Font-aware glyph controls for visual text rendering.

The package covers everything around the neural generator: TrueType
parsing, quad-frame text layout and rasterization, perspective
perturbation, OCR-based quality gating, font-fidelity metrics, Poisson
blending with zoomed region editing, and the dataset / inference /
evaluation pipelines that tie them together. Neural models (generator,
OCR, segmentation, inpainting) stay behind the backend protocols in
:mod:`glyphkit.backends`.

The HTTP service lives in :mod:`glyphkit.service` and is imported lazily
so the core library does not depend on fastapi.
"""

from .backends import (
    GeneratorBackend,
    HttpClassifier,
    HttpGenerator,
    HttpOcr,
    InpaintBackend,
    MeanFillInpainter,
    OcrBackend,
    ScriptedOcr,
    SegmentationBackend,
    StubGenerator,
    ThresholdSegmentation,
)
from .blend import (
    MaskedImage,
    ZoomRecord,
    build_masked_image,
    resize_bilinear,
    seamless_clone,
    zoom_edit_begin,
    zoom_edit_finish,
)
from .errors import BackendError, GlyphkitError, ValidationError
from .fontio import Font, GlyphOutline, load_font
from .fontmetric import (
    FULL,
    ProbabilityVector,
    build_reference_classifier,
    cos_at_k,
    font_fidelity_report,
    l2_at_k,
    topk_truncate,
)
from .geometry import (
    Homography,
    PerturbationConfig,
    Quad,
    apply_homography,
    perturb_quad,
    solve_homography,
    tighten_polygon,
    warp_mask,
)
from .pipeline import (
    BundleOptions,
    DatasetLine,
    DatasetRecord,
    EvalReport,
    InferenceBundle,
    PrepareReport,
    build_inference_bundle,
    build_manifest_classifier,
    evaluate_benchmark,
    load_manifest,
    prepare_dataset,
    prepare_training_example,
    run_edit,
)
from .quality import (
    GateResult,
    OcrResult,
    QualityCriteria,
    RejectReason,
    edit_distance,
    gate,
    ned,
    sentence_accuracy,
)
from .raster import (
    GlyphControl,
    LineSpec,
    PositionControl,
    TextLayout,
    compose_glyph_control,
    layout_line,
    render_position_mask,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "GlyphkitError",
    "ValidationError",
    "BackendError",
    # fonts
    "Font",
    "GlyphOutline",
    "load_font",
    # geometry
    "Quad",
    "Homography",
    "PerturbationConfig",
    "perturb_quad",
    "solve_homography",
    "apply_homography",
    "warp_mask",
    "tighten_polygon",
    # layout / rasterization
    "LineSpec",
    "TextLayout",
    "GlyphControl",
    "PositionControl",
    "layout_line",
    "compose_glyph_control",
    "render_position_mask",
    # quality gate
    "OcrResult",
    "QualityCriteria",
    "GateResult",
    "RejectReason",
    "gate",
    "edit_distance",
    "ned",
    "sentence_accuracy",
    # font metrics
    "FULL",
    "ProbabilityVector",
    "topk_truncate",
    "l2_at_k",
    "cos_at_k",
    "build_reference_classifier",
    "font_fidelity_report",
    # blending
    "MaskedImage",
    "ZoomRecord",
    "build_masked_image",
    "seamless_clone",
    "resize_bilinear",
    "zoom_edit_begin",
    "zoom_edit_finish",
    # backends
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
    # pipeline
    "DatasetLine",
    "DatasetRecord",
    "PrepareReport",
    "prepare_training_example",
    "prepare_dataset",
    "BundleOptions",
    "InferenceBundle",
    "build_inference_bundle",
    "run_edit",
    "EvalReport",
    "evaluate_benchmark",
    "build_manifest_classifier",
    "load_manifest",
]
