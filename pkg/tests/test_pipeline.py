import json
from pathlib import Path

import numpy as np
import pytest

from glyphkit import imageutil, pipeline
from glyphkit.backends import MeanFillInpainter, StubGenerator
from glyphkit.errors import (
    DimensionMismatch,
    EmptyText,
    MisalignedOutputs,
    MissingSidecar,
    QuadOutOfBounds,
    ValidationError,
)
from glyphkit.fontio import Font, GlyphOutline, Line, load_font
from glyphkit.fontmetric import FULL, build_reference_classifier
from glyphkit.geometry import PerturbationConfig, Quad
from glyphkit.quality import OcrResult, RejectReason
from glyphkit.raster import LineSpec, TextLayout, compose_glyph_control

MANIFEST = Path(__file__).parent / "fixtures" / "corpus" / "manifest.jsonl"


def tree_bytes(root: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(root.iterdir()) if p.is_file()}


class QueueOcr:
    """Replays scripted OCR answers in call order."""

    def __init__(self, answers):
        self.answers = list(answers)
        self.calls = 0

    def recognize(self, image):
        text = self.answers[self.calls]
        self.calls += 1
        return OcrResult(text=text, confidence=1.0)


def square_font(width: int, height: int) -> Font:
    """In-memory font whose A/B/C are one rectangle; shape varies per size."""
    x1, y1 = 100 + width, 100 + height
    contour = (
        Line((100.0, 100.0), (x1, 100.0)),
        Line((x1, 100.0), (x1, y1)),
        Line((x1, y1), (100.0, y1)),
        Line((100.0, y1), (100.0, 100.0)),
    )
    box = GlyphOutline(contours=(contour,), bbox=(100.0, 100.0, x1, y1))
    return Font(
        units_per_em=1000,
        codepoint_map={ord("A"): 1, ord("B"): 1, ord("C"): 1, ord(" "): 0},
        glyphs=(GlyphOutline(contours=(), bbox=(0.0, 0.0, 0.0, 0.0)), box),
        ascent=800,
        descent=-200,
        advance_widths=(500, width + 200),
    )


@pytest.fixture(scope="module")
def eval_classifier():
    # enough reference classes for k = 50 columns
    fonts = [square_font(200 + 12 * i, 600 - 7 * i) for i in range(52)]
    return build_reference_classifier(fonts, probe_text="A", canvas=(128, 128))


# --- manifest loading ---


def test_load_manifest_reads_corpus():
    records = pipeline.load_manifest(MANIFEST)
    assert len(records) == 10
    assert records[0].caption == "a storefront sign"
    assert records[0].language == "english"
    assert records[4].lines[1].text == "FAB"
    assert records[0].ocr_sidecar == "ocr/r0.json"
    assert records[0].lines[0].mask_path == "masks/r0_l0.png"


def test_load_manifest_rejects_bad_json(tmp_path):
    bad = tmp_path / "m.jsonl"
    bad.write_text("{not json}\n")
    with pytest.raises(ValidationError, match="not valid JSON"):
        pipeline.load_manifest(bad)


def test_load_manifest_rejects_missing_fields(tmp_path):
    bad = tmp_path / "m.jsonl"
    bad.write_text(json.dumps({"image": "x.png", "lines": [{"text": "A"}]}) + "\n")
    with pytest.raises(ValidationError, match="malformed record"):
        pipeline.load_manifest(bad)


def test_load_manifest_rejects_non_quad_polygons(tmp_path):
    bad = tmp_path / "m.jsonl"
    entry = {
        "image": "x.png",
        "lines": [{"text": "A", "polygon": [[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]]}],
    }
    bad.write_text(json.dumps(entry) + "\n")
    with pytest.raises(ValidationError, match="4-point"):
        pipeline.load_manifest(bad)


def test_empty_manifest_rejected(tmp_path):
    empty = tmp_path / "m.jsonl"
    empty.write_text("\n\n")
    with pytest.raises(ValidationError, match="no records"):
        pipeline.load_manifest(empty)


# --- prepare_training_example ---


def test_prepare_single_passing_record(tmp_path):
    records = pipeline.load_manifest(MANIFEST)
    result = pipeline.prepare_training_example(
        records[0], root=MANIFEST.parent, out_dir=tmp_path, record_index=0, global_seed=7
    )
    assert isinstance(result, pipeline.TrainingExample)
    assert len(result.kept) == 1 and not result.rejected
    assert result.kept[0].gate.edit_distance == 0
    for name in (result.glyph_path, result.position_path, result.masked_path):
        assert (tmp_path / name).exists()
    # artifacts are consistent: glyph ink within the image, masked region flat
    glyph = imageutil.load_mask(tmp_path / result.glyph_path)
    position = imageutil.load_mask(tmp_path / result.position_path)
    masked = imageutil.load_image(tmp_path / result.masked_path)
    assert glyph.shape == position.shape == (512, 512)
    assert glyph.sum() > 0 and position.sum() > glyph.sum()
    region = position.astype(bool)
    assert np.abs(masked[region] - 0.5).max() <= 1.0 / 255.0


def test_prepare_confidence_rejection(tmp_path):
    records = pipeline.load_manifest(MANIFEST)
    result = pipeline.prepare_training_example(
        records[2], root=MANIFEST.parent, out_dir=tmp_path, record_index=2, global_seed=7
    )
    assert isinstance(result, pipeline.Rejection)
    assert result.rejected[0].reason is RejectReason.CONFIDENCE
    assert not list(tmp_path.iterdir())  # rejected records write nothing


def test_prepare_mixed_record_keeps_survivors(tmp_path):
    records = pipeline.load_manifest(MANIFEST)
    result = pipeline.prepare_training_example(
        records[4], root=MANIFEST.parent, out_dir=tmp_path, record_index=4, global_seed=7
    )
    assert isinstance(result, pipeline.TrainingExample)
    assert [k.text for k in result.kept] == ["EACH"]
    assert [(r.text, r.reason) for r in result.rejected] == [("FAB", RejectReason.EDIT_DISTANCE)]


def test_prepare_perturbs_polygon_within_epsilon(tmp_path):
    records = pipeline.load_manifest(MANIFEST)
    eps = 3.0
    result = pipeline.prepare_training_example(
        records[0],
        perturb=PerturbationConfig(epsilon=eps),
        root=MANIFEST.parent,
        out_dir=tmp_path,
        record_index=0,
        global_seed=7,
    )
    original = records[0].lines[0].polygon.as_array()
    moved = result.kept[0].polygon.as_array()
    deltas = np.abs(moved - original)
    assert deltas.max() <= eps
    assert deltas.max() > 0


def test_prepare_missing_ocr_raises(tmp_path):
    rec = pipeline.DatasetRecord(
        image_path="images/r0.png",
        caption="",
        lines=(pipeline.DatasetLine("ABCD", Quad.from_flat([60, 80, 420, 90, 415, 200, 55, 190])),),
    )
    with pytest.raises(MissingSidecar, match="no OCR result"):
        pipeline.prepare_training_example(rec, root=MANIFEST.parent, out_dir=tmp_path)


def test_prepare_missing_mask_raises(tmp_path):
    rec = pipeline.DatasetRecord(
        image_path="images/r0.png",
        caption="",
        lines=(
            pipeline.DatasetLine(
                "ABCD",
                Quad.from_flat([60, 80, 420, 90, 415, 200, 55, 190]),
                mask_path="masks/nope.png",
                ocr=OcrResult("ABCD", 0.95),
            ),
        ),
    )
    with pytest.raises(MissingSidecar, match="masks/nope.png"):
        pipeline.prepare_training_example(rec, root=MANIFEST.parent, out_dir=tmp_path)


def test_prepare_wrong_mask_dims_raises(tmp_path):
    imageutil.save_mask(np.ones((8, 8), dtype=np.uint8), tmp_path / "tiny.png")
    imageutil.save_image(np.full((512, 512, 3), 0.5), tmp_path / "img.png")
    rec = pipeline.DatasetRecord(
        image_path="img.png",
        caption="",
        lines=(
            pipeline.DatasetLine(
                "ABCD",
                Quad.from_flat([60, 80, 420, 90, 415, 200, 55, 190]),
                mask_path="tiny.png",
                ocr=OcrResult("ABCD", 0.95),
            ),
        ),
    )
    with pytest.raises(DimensionMismatch):
        pipeline.prepare_training_example(rec, root=tmp_path, out_dir=tmp_path / "out")


def test_prepare_ocr_backend_fallback(tmp_path):
    rec = pipeline.DatasetRecord(
        image_path="images/r0.png",
        caption="",
        lines=(
            pipeline.DatasetLine(
                "ABCD",
                Quad.from_flat([60, 80, 420, 90, 415, 200, 55, 190]),
                mask_path="masks/r0_l0.png",
            ),
        ),
    )
    result = pipeline.prepare_training_example(
        rec, root=MANIFEST.parent, out_dir=tmp_path, ocr_backend=QueueOcr(["ABCD"])
    )
    assert isinstance(result, pipeline.TrainingExample)


def test_prepare_out_of_bounds_polygon(tmp_path):
    rec = pipeline.DatasetRecord(
        image_path="images/r0.png",
        caption="",
        lines=(
            pipeline.DatasetLine(
                "ABCD",
                Quad.from_flat([400, 80, 600, 90, 595, 200, 395, 190]),
                ocr=OcrResult("ABCD", 0.95),
            ),
        ),
    )
    with pytest.raises(QuadOutOfBounds):
        pipeline.prepare_training_example(rec, root=MANIFEST.parent, out_dir=tmp_path)


# --- prepare_dataset ---


def test_prepare_dataset_counts_and_manifest(tmp_path):
    report = pipeline.prepare_dataset(MANIFEST, tmp_path, global_seed=7)
    assert len(report.examples) == 7
    assert len(report.rejections) == 3
    assert report.kept_line_count == 9
    assert report.rejected_line_count == 4
    entries = [
        json.loads(line)
        for line in (tmp_path / "prepared.jsonl").read_text().splitlines()
    ]
    assert len(entries) == 10
    assert [e["kind"] for e in entries].count("example") == 7
    reasons = [
        r["reason"]
        for e in entries
        for r in e.get("rejected_lines", [])
    ]
    assert sorted(reasons) == ["confidence", "confidence", "edit_distance", "edit_distance"]


def test_prepare_dataset_deterministic_bytes(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    pipeline.prepare_dataset(MANIFEST, a_dir, global_seed=7)
    pipeline.prepare_dataset(MANIFEST, b_dir, global_seed=7)
    assert tree_bytes(a_dir) == tree_bytes(b_dir)


def test_prepare_dataset_jobs_do_not_change_bytes(tmp_path):
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    pipeline.prepare_dataset(MANIFEST, serial, global_seed=7)
    pipeline.prepare_dataset(MANIFEST, parallel, global_seed=7, jobs=4)
    assert tree_bytes(serial) == tree_bytes(parallel)


def test_prepare_dataset_seed_changes_polygons(tmp_path):
    a = pipeline.prepare_dataset(MANIFEST, tmp_path / "a", global_seed=7)
    b = pipeline.prepare_dataset(MANIFEST, tmp_path / "b", global_seed=8)
    pa = a.examples[0].kept[0].polygon.as_array()
    pb = b.examples[0].kept[0].polygon.as_array()
    assert not np.allclose(pa, pb)


# --- build_inference_bundle ---


@pytest.fixture(scope="module")
def family_font():
    fonts = Path(__file__).parent / "fixtures" / "fonts"
    return load_font((fonts / "blockwide.ttf").read_bytes())


def test_bundle_direct_path(family_font):
    img = np.full((512, 512, 3), 0.7)
    quad = Quad.from_flat([60, 160, 460, 160, 460, 330, 60, 330])
    bundle = pipeline.build_inference_bundle(img, quad, "ABC", family_font, caption="x")
    assert bundle.zoom is None
    assert bundle.canvas == 512
    assert bundle.glyph.bits.sum() > 0
    stray = bundle.glyph.bits & ~bundle.position.bits.astype(bool)
    assert stray.sum() == 0
    assert bundle.region_quad == quad
    region = bundle.position.bits.astype(bool)
    assert (bundle.masked.image[region] == 0.5).all()
    assert (bundle.masked.image[~region] == 0.7).all()


def test_bundle_small_region_takes_zoom(family_font):
    img = np.full((512, 512, 3), 0.7)
    quad = Quad.from_flat([200, 200, 280, 200, 280, 250, 200, 250])  # max side 80 < 128
    bundle = pipeline.build_inference_bundle(img, quad, "AB", family_font)
    assert bundle.zoom is not None
    assert bundle.glyph.bits.shape == (512, 512)
    back = bundle.zoom.from_canvas(np.asarray(bundle.region_quad.corners))
    # region_quad is stored in original coordinates already
    assert bundle.region_quad.bounding_box()[2] <= 512


def test_bundle_non_canvas_image_takes_zoom(family_font):
    img = np.full((300, 700, 3), 0.4)
    quad = Quad.from_flat([100, 50, 360, 50, 360, 220, 100, 220])
    bundle = pipeline.build_inference_bundle(img, quad, "AB", family_font)
    assert bundle.zoom is not None
    assert bundle.source_size == (700, 300)
    assert bundle.masked.image.shape == (512, 512, 3)


def test_bundle_determinism(family_font):
    rng = np.random.default_rng(5)
    img = np.clip(rng.random((512, 512, 3)), 0.1, 0.9)
    quad = Quad.from_flat([60, 160, 460, 160, 460, 330, 60, 330])
    a = pipeline.build_inference_bundle(img, quad, "ABC", family_font)
    b = pipeline.build_inference_bundle(img, quad, "ABC", family_font)
    assert (a.glyph.bits == b.glyph.bits).all()
    assert (a.position.bits == b.position.bits).all()
    assert (a.masked.image == b.masked.image).all()
    assert imageutil.mask_to_png(a.glyph.bits) == imageutil.mask_to_png(b.glyph.bits)


def test_bundle_empty_text_raises(family_font):
    img = np.full((512, 512, 3), 0.7)
    quad = Quad.from_flat([60, 160, 460, 160, 460, 330, 60, 330])
    with pytest.raises(EmptyText):
        pipeline.build_inference_bundle(img, quad, "   ", family_font)


def test_bundle_out_of_bounds_polygon(family_font):
    img = np.full((512, 512, 3), 0.7)
    quad = Quad.from_flat([400, 160, 600, 160, 600, 330, 400, 330])
    with pytest.raises(QuadOutOfBounds):
        pipeline.build_inference_bundle(img, quad, "AB", family_font)


def test_bundle_tighten_shrinks_region(family_font):
    img = np.full((512, 512, 3), 0.7)
    quad = Quad.from_flat([20, 200, 500, 200, 500, 280, 20, 280])
    loose = pipeline.build_inference_bundle(img, quad, "A", family_font)
    tight = pipeline.build_inference_bundle(
        img, quad, "A", family_font, opts=pipeline.BundleOptions(tighten=True)
    )
    assert tight.position.bits.sum() < loose.position.bits.sum()
    assert tight.glyph.bits.sum() > 0
    # tightening never grows the region outside the original quad
    outside = tight.position.bits & ~loose.position.bits.astype(bool)
    assert outside.sum() == 0


# --- run_edit ---


def test_run_edit_stub_direct_path(family_font):
    rng = np.random.default_rng(11)
    original = np.clip(0.3 + 0.4 * rng.random((512, 512, 3)), 0.0, 1.0)
    quad = Quad.from_flat([80, 160, 440, 160, 440, 340, 80, 340])
    bundle = pipeline.build_inference_bundle(original, quad, "ABC", family_font)
    out = pipeline.run_edit(bundle, StubGenerator(), original)
    region = bundle.position.bits.astype(bool)
    assert (out[~region] == original[~region]).all()
    ink = bundle.glyph.bits.astype(bool)
    assert out[ink].mean() < out[region & ~ink].mean() - 0.2


def test_run_edit_stub_zoom_path(family_font):
    rng = np.random.default_rng(12)
    original = np.clip(0.3 + 0.4 * rng.random((512, 512, 3)), 0.0, 1.0)
    quad = Quad.from_flat([220, 230, 320, 230, 320, 280, 220, 280])
    bundle = pipeline.build_inference_bundle(original, quad, "AB", family_font)
    assert bundle.zoom is not None
    out = pipeline.run_edit(bundle, StubGenerator(), original)
    from glyphkit.raster import render_position_mask

    region = render_position_mask([bundle.region_quad], (512, 512)).bits.astype(bool)
    assert (out[~region] == original[~region]).all()
    assert out[region].min() < original[region].min()  # dark ink appeared


def test_run_edit_size_mismatch(family_font):
    original = np.full((512, 512, 3), 0.5)
    quad = Quad.from_flat([80, 160, 440, 160, 440, 340, 80, 340])
    bundle = pipeline.build_inference_bundle(original, quad, "ABC", family_font)
    with pytest.raises(DimensionMismatch):
        pipeline.run_edit(bundle, StubGenerator(), np.full((256, 256, 3), 0.5))


def test_run_edit_with_inpainter_erases_old_text(family_font):
    original = np.full((512, 512, 3), 0.8)
    original[200:300, 100:420] = 0.1  # "old text" band inside the polygon
    quad = Quad.from_flat([80, 160, 440, 160, 440, 340, 80, 340])
    bundle = pipeline.build_inference_bundle(
        original, quad, "A", family_font, opts=pipeline.BundleOptions(tighten=True)
    )
    out = pipeline.run_edit(bundle, StubGenerator(), original, inpainter=MeanFillInpainter())
    # the old dark band outside the tightened region is gone (inpainted bright)
    tight_region = bundle.position.bits.astype(bool)
    old_band = np.zeros((512, 512), dtype=bool)
    old_band[200:300, 100:420] = True
    leftover = old_band & ~tight_region
    assert leftover.any()
    assert out[leftover].mean() > 0.5


# --- evaluate_benchmark ---


def render_truth_outputs(tmp_path: Path) -> Path:
    """Outputs that are exactly the reference renders: white ink on black."""
    records = pipeline.load_manifest(MANIFEST)
    out_dir = tmp_path / "outputs"
    out_dir.mkdir()
    root = MANIFEST.parent
    for rec in records:
        canvas = np.zeros((512, 512, 3))
        for line in rec.lines:
            font = load_font((root / line.font_path).read_bytes())
            layout = TextLayout((LineSpec(line.text, font, line.polygon),))
            bits = compose_glyph_control(layout, (512, 512)).bits
            canvas[bits.astype(bool)] = 1.0
        imageutil.save_image(canvas, out_dir / f"{Path(rec.image_path).stem}.png")
    return out_dir


def test_evaluate_self_test_is_perfect(tmp_path, eval_classifier):
    out_dir = render_truth_outputs(tmp_path)
    records = pipeline.load_manifest(MANIFEST)
    truth = QueueOcr([line.text for rec in records for line in rec.lines])
    report = pipeline.evaluate_benchmark(
        MANIFEST, out_dir, eval_classifier, ks=[5, 20, 50, FULL], ocr_backend=truth
    )
    row = report.rows["english"]
    assert row["senacc"] == 1.0
    assert row["ned"] == 1.0
    for col in report.metric_columns[2:]:
        assert row[col] == 0.0
    assert report.line_counts["english"] == 13


def test_evaluate_report_columns(tmp_path, eval_classifier):
    out_dir = render_truth_outputs(tmp_path)
    records = pipeline.load_manifest(MANIFEST)
    truth = QueueOcr([line.text for rec in records for line in rec.lines])
    report = pipeline.evaluate_benchmark(
        MANIFEST, out_dir, eval_classifier, ks=[5, 20, 50, FULL], ocr_backend=truth
    )
    assert report.metric_columns == [
        "senacc",
        "ned",
        "l2@5",
        "l2@20",
        "l2@50",
        "l2@full",
        "cos@5",
        "cos@20",
        "cos@50",
        "cos@full",
    ]
    csv = report.to_csv()
    header = csv.splitlines()[0].split(",")
    assert header == ["language", "lines"] + report.metric_columns
    assert "english" in report.summary()


def test_evaluate_imperfect_ocr_lowers_scores(tmp_path, eval_classifier):
    out_dir = render_truth_outputs(tmp_path)
    records = pipeline.load_manifest(MANIFEST)
    answers = [line.text for rec in records for line in rec.lines]
    answers[0] = "WRONG"
    report = pipeline.evaluate_benchmark(
        MANIFEST, out_dir, eval_classifier, ks=[5, FULL], ocr_backend=QueueOcr(answers)
    )
    row = report.rows["english"]
    assert row["senacc"] == pytest.approx(12 / 13)
    assert row["ned"] < 1.0


def test_evaluate_missing_output_named(tmp_path, eval_classifier):
    out_dir = render_truth_outputs(tmp_path)
    (out_dir / "r3.png").unlink()
    with pytest.raises(MisalignedOutputs, match="r3"):
        pipeline.evaluate_benchmark(
            MANIFEST, out_dir, eval_classifier, ks=[5], ocr_backend=QueueOcr(["X"] * 20)
        )
