"""Dataset preparation, inference bundles, edit execution, and evaluation.

Three flows share this module:

- training side: read a JSON Lines manifest of images with text lines,
  gate each line on its OCR result, perturb surviving quads, warp the
  segmentation masks through the induced homography, and write the control
  artifacts (glyph, position, masked image) plus a prepared manifest;
- inference side: build the control bundle for one edit (zooming into
  small regions), call a generator backend over the wire format, and blend
  the returned canvas back into the original;
- evaluation: OCR and classify rendered outputs against their references
  and aggregate per-language text and font-fidelity metrics.

Determinism contract: every randomized step derives its stream from
(global_seed ^ record_index, line_index), so record-level parallelism
cannot change any output byte.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import imageutil
from .backends import (
    GeneratorBackend,
    InpaintBackend,
    OcrBackend,
    decode_generate_response,
    make_generate_request,
    read_ocr_sidecar,
)
from .blend import (
    ZoomRecord,
    build_masked_image,
    seamless_clone,
    zoom_edit_begin,
    zoom_edit_finish,
    MaskedImage,
)
from .errors import (
    DimensionMismatch,
    MisalignedOutputs,
    MissingSidecar,
    QuadOutOfBounds,
    ValidationError,
)
from .fontio import Font, load_font
from .fontmetric import FULL, FontClassifier, font_fidelity_report
from .geometry import (
    PerturbationConfig,
    Quad,
    perturb_quad,
    solve_homography,
    tighten_polygon,
    warp_mask,
)
from .quality import GateResult, OcrResult, QualityCriteria, RejectReason, gate
from .raster import (
    DEFAULT_CANVAS,
    DEFAULT_TOLERANCE,
    GlyphControl,
    LineSpec,
    PositionControl,
    TextLayout,
    compose_glyph_control,
    layout_line,
    render_position_mask,
)

__all__ = [
    "DatasetLine",
    "DatasetRecord",
    "TrainingExample",
    "Rejection",
    "PrepareReport",
    "BundleOptions",
    "InferenceBundle",
    "EvalReport",
    "load_manifest",
    "prepare_training_example",
    "prepare_dataset",
    "build_inference_bundle",
    "run_edit",
    "evaluate_benchmark",
]

ZOOM_SIDE_FRACTION = 0.25  # polygons smaller than canvas/4 take the zoom path


# --- manifest model ---


@dataclass(frozen=True)
class DatasetLine:
    text: str
    polygon: Quad
    mask_path: str | None = None
    ocr: OcrResult | None = None
    font_path: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError("dataset line text is empty")


@dataclass(frozen=True)
class DatasetRecord:
    image_path: str
    caption: str
    lines: tuple[DatasetLine, ...]
    language: str = "all"
    ocr_sidecar: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.lines:
            raise ValidationError(f"record {self.image_path!r} has no text lines")


def _parse_polygon(points) -> Quad:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
        raise ValidationError("polygon needs at least 4 [x, y] points")
    if len(pts) > 4:
        raise ValidationError("only 4-point quads are supported")
    return Quad(tuple((float(x), float(y)) for x, y in pts))


def _parse_record(obj: dict, where: str) -> DatasetRecord:
    try:
        lines = []
        for entry in obj["lines"]:
            ocr = entry.get("ocr")
            lines.append(
                DatasetLine(
                    text=entry["text"],
                    polygon=_parse_polygon(entry["polygon"]),
                    mask_path=entry.get("mask"),
                    ocr=OcrResult(ocr["text"], float(ocr["confidence"])) if ocr else None,
                    font_path=entry.get("font"),
                )
            )
        return DatasetRecord(
            image_path=obj["image"],
            caption=obj.get("caption", ""),
            lines=tuple(lines),
            language=obj.get("language", "all"),
            ocr_sidecar=obj.get("ocr_sidecar"),
        )
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{where}: malformed record ({e})") from None


def load_manifest(path) -> tuple[DatasetRecord, ...]:
    """Read a JSON Lines manifest, one DatasetRecord per non-blank line."""
    p = Path(path)
    records = []
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{p.name}:{lineno}: not valid JSON ({e})") from None
        records.append(_parse_record(obj, f"{p.name}:{lineno}"))
    if not records:
        raise ValidationError(f"manifest {p.name} contains no records")
    return tuple(records)


# --- training-side preparation ---


@dataclass(frozen=True)
class KeptLine:
    index: int
    text: str
    polygon: Quad  # perturbed quad actually used for the glyph control
    gate: GateResult


@dataclass(frozen=True)
class RejectedLine:
    index: int
    text: str
    reason: RejectReason


@dataclass(frozen=True)
class TrainingExample:
    index: int
    image_path: str
    caption: str
    glyph_path: str
    position_path: str
    masked_path: str
    kept: tuple[KeptLine, ...]
    rejected: tuple[RejectedLine, ...]
    seed: int


@dataclass(frozen=True)
class Rejection:
    index: int
    image_path: str
    rejected: tuple[RejectedLine, ...]


@dataclass(frozen=True)
class PrepareReport:
    examples: tuple[TrainingExample, ...]
    rejections: tuple[Rejection, ...]
    manifest_path: str

    @property
    def kept_line_count(self) -> int:
        return sum(len(e.kept) for e in self.examples)

    @property
    def rejected_line_count(self) -> int:
        return sum(len(e.rejected) for e in self.examples) + sum(
            len(r.rejected) for r in self.rejections
        )


def _line_ocr(
    rec: DatasetRecord,
    sidecar: tuple[OcrResult, ...] | None,
    line_index: int,
    image: np.ndarray,
    ocr_backend: OcrBackend | None,
) -> OcrResult:
    line = rec.lines[line_index]
    if line.ocr is not None:
        return line.ocr
    if sidecar is not None:
        if line_index >= len(sidecar):
            raise MissingSidecar(
                f"OCR sidecar for {rec.image_path} has {len(sidecar)} entries, "
                f"line {line_index} needs one"
            )
        return sidecar[line_index]
    if ocr_backend is not None:
        x0, y0, x1, y1 = _pixel_bbox(line.polygon, image.shape[1], image.shape[0])
        return ocr_backend.recognize(image[y0:y1, x0:x1])
    raise MissingSidecar(
        f"no OCR result for {rec.image_path} line {line_index} and no OCR backend"
    )


def _pixel_bbox(quad: Quad, width: int, height: int) -> tuple[int, int, int, int]:
    xmin, ymin, xmax, ymax = quad.bounding_box()
    x0 = max(0, int(np.floor(xmin)))
    y0 = max(0, int(np.floor(ymin)))
    x1 = min(width, int(np.ceil(xmax)))
    y1 = min(height, int(np.ceil(ymax)))
    if x1 <= x0 or y1 <= y0:
        raise QuadOutOfBounds("polygon has no pixel overlap with the image")
    return x0, y0, x1, y1


def _check_polygon_in_bounds(quad: Quad, width: int, height: int, what: str) -> None:
    xmin, ymin, xmax, ymax = quad.bounding_box()
    if xmin < 0 or ymin < 0 or xmax > width or ymax > height:
        raise QuadOutOfBounds(
            f"{what} bbox ({xmin:.1f}, {ymin:.1f}, {xmax:.1f}, {ymax:.1f}) "
            f"exceeds the {width}x{height} image"
        )


def prepare_training_example(
    rec: DatasetRecord,
    criteria: QualityCriteria | None = None,
    perturb: PerturbationConfig | None = None,
    *,
    root: Path,
    out_dir: Path,
    record_index: int = 0,
    global_seed: int = 0,
    ocr_backend: OcrBackend | None = None,
) -> TrainingExample | Rejection:
    """Gate, perturb, and materialize one record's control artifacts.

    Paths inside rec are resolved against root; artifacts land in out_dir
    named after the image stem. Per-line randomness comes from
    SeedSequence((global_seed ^ record_index, line_index)).
    """
    criteria = criteria if criteria is not None else QualityCriteria()
    perturb = perturb if perturb is not None else PerturbationConfig()
    record_seed = global_seed ^ record_index
    image = imageutil.load_image(root / rec.image_path)
    height, width = image.shape[:2]

    sidecar = None
    if rec.ocr_sidecar is not None:
        sidecar_path = root / rec.ocr_sidecar
        if not sidecar_path.exists():
            raise MissingSidecar(f"OCR sidecar {rec.ocr_sidecar} not found")
        sidecar = read_ocr_sidecar(sidecar_path)

    kept: list[KeptLine] = []
    rejected: list[RejectedLine] = []
    glyph_bits = np.zeros((height, width), dtype=np.uint8)
    position_bits = np.zeros((height, width), dtype=np.uint8)

    for i, line in enumerate(rec.lines):
        _check_polygon_in_bounds(line.polygon, width, height, f"line {i} polygon")
        verdict = gate(_line_ocr(rec, sidecar, i, image, ocr_backend), line.text, criteria)
        if not verdict.passed:
            rejected.append(RejectedLine(i, line.text, verdict.reason))
            continue
        if line.mask_path is None:
            raise MissingSidecar(f"line {i} of {rec.image_path} has no mask sidecar")
        mask_file = root / line.mask_path
        if not mask_file.exists():
            raise MissingSidecar(f"mask sidecar {line.mask_path} not found")
        seg = imageutil.load_mask(mask_file)
        if seg.shape != (height, width):
            raise DimensionMismatch(
                f"mask {line.mask_path} is {seg.shape[::-1]}, image is {(width, height)}"
            )
        rng = np.random.default_rng(np.random.SeedSequence((record_seed, i)))
        quad_p = perturb_quad(line.polygon, perturb, bounds=(width, height), rng=rng)
        h = solve_homography(line.polygon, quad_p)
        glyph_bits |= warp_mask(seg, h)
        position_bits |= render_position_mask([line.polygon], (width, height)).bits
        kept.append(KeptLine(i, line.text, quad_p, verdict))

    if not kept:
        return Rejection(record_index, rec.image_path, tuple(rejected))

    stem = Path(rec.image_path).stem
    glyph_name = f"{stem}_glyph.png"
    position_name = f"{stem}_position.png"
    masked_name = f"{stem}_masked.png"
    masked = build_masked_image(image, PositionControl(position_bits))
    out_dir.mkdir(parents=True, exist_ok=True)
    imageutil.save_mask(glyph_bits, out_dir / glyph_name)
    imageutil.save_mask(position_bits, out_dir / position_name)
    imageutil.save_image(masked.image, out_dir / masked_name)
    return TrainingExample(
        index=record_index,
        image_path=rec.image_path,
        caption=rec.caption,
        glyph_path=glyph_name,
        position_path=position_name,
        masked_path=masked_name,
        kept=tuple(kept),
        rejected=tuple(rejected),
        seed=record_seed,
    )


def _example_to_json(result: TrainingExample | Rejection) -> dict:
    if isinstance(result, TrainingExample):
        return {
            "kind": "example",
            "index": result.index,
            "image": result.image_path,
            "caption": result.caption,
            "glyph": result.glyph_path,
            "position": result.position_path,
            "masked": result.masked_path,
            "seed": result.seed,
            "lines": [
                {
                    "index": k.index,
                    "text": k.text,
                    "polygon": [[x, y] for x, y in k.polygon.corners],
                    "edit_distance": k.gate.edit_distance,
                }
                for k in result.kept
            ],
            "rejected_lines": [
                {"index": r.index, "text": r.text, "reason": r.reason.value}
                for r in result.rejected
            ],
        }
    return {
        "kind": "rejection",
        "index": result.index,
        "image": result.image_path,
        "rejected_lines": [
            {"index": r.index, "text": r.text, "reason": r.reason.value}
            for r in result.rejected
        ],
    }


def prepare_dataset(
    manifest_path,
    out_dir,
    criteria: QualityCriteria | None = None,
    perturb: PerturbationConfig | None = None,
    *,
    global_seed: int = 0,
    jobs: int = 1,
    ocr_backend: OcrBackend | None = None,
) -> PrepareReport:
    """Run prepare_training_example over a manifest; write prepared.jsonl.

    Results are gathered and written in record order, so jobs > 1 cannot
    change any byte of the outputs.
    """
    manifest = Path(manifest_path)
    root = manifest.parent
    out = Path(out_dir)
    records = load_manifest(manifest)

    def work(pair):
        index, rec = pair
        return prepare_training_example(
            rec,
            criteria,
            perturb,
            root=root,
            out_dir=out,
            record_index=index,
            global_seed=global_seed,
            ocr_backend=ocr_backend,
        )

    items = list(enumerate(records))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(item) for item in items]

    out.mkdir(parents=True, exist_ok=True)
    prepared = out / "prepared.jsonl"
    with prepared.open("w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(_example_to_json(result), sort_keys=True) + "\n")
    return PrepareReport(
        examples=tuple(r for r in results if isinstance(r, TrainingExample)),
        rejections=tuple(r for r in results if isinstance(r, Rejection)),
        manifest_path=str(prepared),
    )


# --- inference side ---


@dataclass(frozen=True)
class BundleOptions:
    canvas: int = DEFAULT_CANVAS
    seed: int = 0
    tighten: bool = False
    orientation: str = "horizontal"
    tolerance: float = DEFAULT_TOLERANCE
    force_zoom: bool | None = None  # None = automatic small-region rule

    def __post_init__(self):
        if self.canvas <= 0:
            raise ValidationError("canvas must be positive")


@dataclass(frozen=True)
class InferenceBundle:
    """The control set one edit sends to the generator.

    glyph/position/masked live on the n x n generator canvas; region_quad
    and erase_quad are in original-image coordinates so the blend step can
    find its way back (zoom is the canvas-to-original crop, None when the
    image was used directly).
    """

    glyph: GlyphControl
    position: PositionControl
    masked: MaskedImage
    caption: str
    canvas: int
    seed: int
    region_quad: Quad
    erase_quad: Quad
    source_size: tuple[int, int]  # (width, height) of the original image
    zoom: ZoomRecord | None = None

    def __post_init__(self):
        n = self.canvas
        shapes = {
            "glyph": self.glyph.bits.shape,
            "position": self.position.bits.shape,
            "masked": self.masked.image.shape[:2],
        }
        for name, shape in shapes.items():
            if shape != (n, n):
                raise DimensionMismatch(f"{name} is {shape}, bundle canvas is {n}x{n}")
        stray = int((self.glyph.bits & ~self.position.bits.astype(bool)).sum())
        if stray:
            raise ValidationError(
                f"{stray} glyph ink pixels fall outside the position region"
            )


def build_inference_bundle(
    img: np.ndarray,
    polygon: Quad,
    text: str,
    font: Font,
    caption: str = "",
    opts: BundleOptions | None = None,
) -> InferenceBundle:
    """Convert one edit request into glyph/position/masked controls.

    Small regions (max side < canvas/4) and images that are not already
    canvas-sized are routed through the zoom crop first.
    """
    opts = opts if opts is not None else BundleOptions()
    image = np.asarray(img, dtype=np.float64)
    height, width = image.shape[:2]
    n = opts.canvas
    _check_polygon_in_bounds(polygon, width, height, "polygon")

    if opts.force_zoom is None:
        zoom_needed = (width, height) != (n, n) or polygon.max_side() < n * ZOOM_SIDE_FRACTION
    else:
        zoom_needed = opts.force_zoom
    if zoom_needed:
        canvas_img, rec = zoom_edit_begin(image, polygon, canvas=n)
        quad_c = Quad(tuple(map(tuple, rec.to_canvas(np.asarray(polygon.corners)))))
    else:
        if (width, height) != (n, n):
            raise DimensionMismatch(
                f"direct path needs a {n}x{n} image, got {width}x{height}"
            )
        canvas_img, rec, quad_c = image, None, polygon

    spec = LineSpec(text, font, quad_c, opts.orientation)
    if opts.tighten:
        extent = layout_line(spec).extent
        quad_t = tighten_polygon(quad_c, extent)
        spec = LineSpec(text, font, quad_t, opts.orientation)
    else:
        quad_t = quad_c

    glyph = compose_glyph_control(TextLayout((spec,)), (n, n), opts.tolerance)
    position = render_position_mask([quad_t], (n, n))
    masked = build_masked_image(canvas_img, position)
    if rec is not None:
        region_quad = Quad(tuple(map(tuple, rec.from_canvas(np.asarray(quad_t.corners)))))
    else:
        region_quad = quad_t
    return InferenceBundle(
        glyph=glyph,
        position=position,
        masked=masked,
        caption=caption,
        canvas=n,
        seed=opts.seed,
        region_quad=region_quad,
        erase_quad=polygon,
        source_size=(width, height),
        zoom=rec,
    )


def run_edit(
    bundle: InferenceBundle,
    backend: GeneratorBackend,
    original: np.ndarray,
    *,
    tol: float = 1e-6,
    max_iter: int | None = None,
    inpainter: InpaintBackend | None = None,
) -> np.ndarray:
    """Send the bundle to the generator and blend the reply into original.

    Without an inpainter, pixels outside the blend region come back
    bit-exact. A configured inpainter additionally erases the full
    (untightened) polygon before blending, so old text outside a tightened
    region does not survive.
    """
    image = np.asarray(original, dtype=np.float64)
    height, width = image.shape[:2]
    if (width, height) != bundle.source_size:
        raise DimensionMismatch(
            f"bundle was built for a {bundle.source_size} image, got {(width, height)}"
        )
    if inpainter is not None:
        erase_bits = render_position_mask([bundle.erase_quad], (width, height)).bits
        image = inpainter.erase(image, erase_bits)

    request = make_generate_request(
        bundle.glyph.bits,
        bundle.position.bits,
        bundle.masked.image,
        bundle.caption,
        bundle.seed,
    )
    generated = decode_generate_response(backend.generate(request), bundle.canvas)

    if bundle.zoom is not None:
        mask = render_position_mask([bundle.region_quad], (width, height)).bits
        return zoom_edit_finish(generated, bundle.zoom, image, mask, tol=tol, max_iter=max_iter)
    return seamless_clone(generated, image, bundle.position.bits, tol=tol, max_iter=max_iter)


# --- evaluation ---


def _format_k(k) -> str:
    return "full" if k is FULL else str(int(k))


@dataclass(frozen=True)
class EvalReport:
    """Per-language text accuracy and font-fidelity distances."""

    ks: tuple
    rows: dict[str, dict[str, float]] = field(repr=False)
    line_counts: dict[str, int] = field(repr=False)

    @property
    def metric_columns(self) -> list[str]:
        cols = ["senacc", "ned"]
        cols += [f"l2@{_format_k(k)}" for k in self.ks]
        cols += [f"cos@{_format_k(k)}" for k in self.ks]
        return cols

    def to_csv(self) -> str:
        header = ["language", "lines"] + self.metric_columns
        out = [",".join(header)]
        for lang in sorted(self.rows):
            row = self.rows[lang]
            cells = [lang, str(self.line_counts[lang])]
            cells += [f"{row[c]:.6f}" for c in self.metric_columns]
            out.append(",".join(cells))
        return "\n".join(out) + "\n"

    def summary(self) -> str:
        lines = []
        for lang in sorted(self.rows):
            row = self.rows[lang]
            lines.append(f"{lang} ({self.line_counts[lang]} lines)")
            for col in self.metric_columns:
                lines.append(f"  {col:>10}: {row[col]:.4f}")
        return "\n".join(lines)


def build_manifest_classifier(
    records: Sequence[DatasetRecord],
    root,
    probe_text: str = "ABC",
    canvas: tuple[int, int] = (128, 128),
) -> FontClassifier:
    """Reference classifier whose classes are the manifest's distinct fonts."""
    from .fontmetric import build_reference_classifier

    font_paths: list[str] = []
    for rec in records:
        for line in rec.lines:
            if line.font_path and line.font_path not in font_paths:
                font_paths.append(line.font_path)
    if len(font_paths) < 2:
        raise ValidationError("manifest needs at least 2 distinct fonts to classify")
    fonts = [load_font((Path(root) / p).read_bytes()) for p in font_paths]
    return build_reference_classifier(fonts, probe_text=probe_text, canvas=canvas)


@dataclass(frozen=True)
class _LineTask:
    """One scored line: OCR already done, fidelity still pending."""

    language: str
    target: str
    predicted: str
    crop: np.ndarray = field(repr=False)
    font_path: str
    polygon: Quad
    canvas: tuple[int, int]
    bbox: tuple[int, int, int, int]


def evaluate_benchmark(
    manifest_path,
    outputs_dir,
    classifier: FontClassifier,
    ks: Sequence,
    ocr_backend: OcrBackend,
    *,
    isolate: bool = False,
    segmentation=None,
    jobs: int = 1,
) -> EvalReport:
    """Score rendered outputs named {image stem}.png against the manifest.

    Per line: OCR the polygon crop of the output for SenACC/NED, and
    compare the classifier's distribution on that crop against the line's
    reference glyph render at each k.

    OCR calls always happen in manifest order regardless of jobs, so
    scripted backends replay correctly; jobs > 1 parallelizes only the
    fidelity side and cannot change any reported number.
    """
    manifest = Path(manifest_path)
    root = manifest.parent
    out_root = Path(outputs_dir)
    records = load_manifest(manifest)
    ks = tuple(ks)
    if not ks:
        raise ValidationError("ks must not be empty")
    if jobs < 1:
        raise ValidationError("jobs must be >= 1")

    tasks: list[_LineTask] = []
    for index, rec in enumerate(records):
        stem = Path(rec.image_path).stem
        out_file = out_root / f"{stem}.png"
        if not out_file.exists():
            raise MisalignedOutputs(
                f"record {index} ({rec.image_path}) has no output {out_file.name}"
            )
        output = imageutil.load_image(out_file)
        height, width = output.shape[:2]
        for i, line in enumerate(rec.lines):
            _check_polygon_in_bounds(line.polygon, width, height, f"line {i} polygon")
            if line.font_path is None:
                raise ValidationError(
                    f"record {index} line {i} has no font for fidelity metrics"
                )
            x0, y0, x1, y1 = _pixel_bbox(line.polygon, width, height)
            crop = output[y0:y1, x0:x1]
            result = ocr_backend.recognize(crop)
            tasks.append(
                _LineTask(
                    language=rec.language,
                    target=line.text,
                    predicted=result.text,
                    crop=crop,
                    font_path=line.font_path,
                    polygon=line.polygon,
                    canvas=(width, height),
                    bbox=(x0, y0, x1, y1),
                )
            )

    fonts: dict[str, Font] = {}
    for task in tasks:
        if task.font_path not in fonts:
            fonts[task.font_path] = load_font((root / task.font_path).read_bytes())

    def fidelity(task: _LineTask) -> dict:
        width, height = task.canvas
        x0, y0, x1, y1 = task.bbox
        layout = TextLayout((LineSpec(task.target, fonts[task.font_path], task.polygon),))
        reference = compose_glyph_control(layout, (width, height)).bits[y0:y1, x0:x1]
        return font_fidelity_report(
            reference, task.crop, classifier, ks, isolate=isolate, segmentation=segmentation
        )

    if jobs == 1:
        reports = [fidelity(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(fidelity, tasks))

    per_lang: dict[str, dict] = {}
    for task, distances in zip(tasks, reports):
        bucket = per_lang.setdefault(
            task.language,
            {"pairs": [], "l2": {k: [] for k in ks}, "cos": {k: [] for k in ks}},
        )
        bucket["pairs"].append((task.predicted, task.target))
        for k in ks:
            l2_k, cos_k = distances[k]
            bucket["l2"][k].append(l2_k)
            bucket["cos"][k].append(cos_k)

    from .quality import ned, sentence_accuracy

    rows: dict[str, dict[str, float]] = {}
    counts: dict[str, int] = {}
    for lang, bucket in per_lang.items():
        pairs = bucket["pairs"]
        row = {
            "senacc": sentence_accuracy(pairs),
            "ned": float(np.mean([ned(pred, tgt) for pred, tgt in pairs])),
        }
        for k in ks:
            row[f"l2@{_format_k(k)}"] = float(np.mean(bucket["l2"][k]))
            row[f"cos@{_format_k(k)}"] = float(np.mean(bucket["cos"][k]))
        rows[lang] = row
        counts[lang] = len(pairs)
    return EvalReport(ks=ks, rows=rows, line_counts=counts)
