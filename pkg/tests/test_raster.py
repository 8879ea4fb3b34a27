import math
from pathlib import Path

import numpy as np
import pytest

from glyphkit.errors import (
    DegenerateQuad,
    EmptyText,
    SelfIntersectingPolygon,
    TooManyLines,
    ValidationError,
)
from glyphkit.fontio import GlyphOutline, Line, QuadraticBezier, load_font
from glyphkit.geometry import Quad
from glyphkit.raster import (
    GlyphControl,
    LineSpec,
    TextLayout,
    compose_glyph_control,
    flatten_outline,
    layout_line,
    rasterize_polylines,
    render_position_mask,
)

FONT_DIR = Path(__file__).parent / "fixtures" / "fonts"
SQUARE_FONT = load_font((FONT_DIR / "testsquare.ttf").read_bytes())
CURVES_FONT = load_font((FONT_DIR / "testcurves.ttf").read_bytes())


def rect(x0, y0, x1, y1, ccw=False):
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    return pts[::-1] if ccw else pts


def raster_oracle(polylines, size):
    """Independent per-pixel ray cast with the same half-open convention."""
    w, h = size
    mask = np.zeros((h, w), dtype=np.uint8)
    edges = []
    for pl in polylines:
        pts = [tuple(map(float, p)) for p in pl]
        for i in range(len(pts)):
            edges.append((pts[i], pts[(i + 1) % len(pts)]))
    for y in range(h):
        yc = y + 0.5
        crossings = []
        for (x0, y0), (x1, y1) in edges:
            if y0 == y1:
                continue
            if min(y0, y1) <= yc < max(y0, y1):
                t = (yc - y0) / (y1 - y0)
                crossings.append((x0 + t * (x1 - x0), 1 if y1 > y0 else -1))
        for x in range(w):
            wind = sum(d for xc, d in crossings if xc <= x + 0.5)
            mask[y, x] = 1 if wind != 0 else 0
    return mask


# rasterize_polylines


def test_square_ink_count_is_exact():
    mask = rasterize_polylines([rect(10, 10, 90, 90)], (100, 100))
    assert int(mask.sum()) == 6400
    assert mask[10, 10] == 1 and mask[89, 89] == 1
    assert mask[9, 10] == 0 and mask[90, 90] == 0


def test_fractional_square_half_open():
    # centers x, y in [10.3, 90.3): pixels 10..89 on both axes
    mask = rasterize_polylines([rect(10.3, 10.3, 90.3, 90.3)], (100, 100))
    assert int(mask.sum()) == 6400


def test_empty_polyline_set():
    mask = rasterize_polylines([], (64, 32))
    assert mask.shape == (32, 64)
    assert mask.sum() == 0


def test_annulus_nonzero_winding():
    outer = rect(10, 10, 90, 90)
    inner = rect(30, 30, 70, 70, ccw=True)
    mask = rasterize_polylines([outer, inner], (100, 100))
    assert int(mask.sum()) == 6400 - 1600
    assert mask[50, 50] == 0
    # same-winding inner square does not cut a hole under the nonzero rule
    mask2 = rasterize_polylines([outer, rect(30, 30, 70, 70)], (100, 100))
    assert int(mask2.sum()) == 6400


def test_overlapping_squares_union():
    mask = rasterize_polylines(
        [rect(10, 10, 50, 50), rect(30, 30, 70, 70)], (100, 100)
    )
    assert int(mask.sum()) == 1600 + 1600 - 400


def test_matches_ray_cast_oracle_on_random_polygons():
    rng = np.random.default_rng(31)
    for _ in range(8):
        n = rng.integers(3, 7)
        angles = np.sort(rng.uniform(0, 2 * math.pi, size=n))
        radii = rng.uniform(8, 28, size=n)
        cx, cy = rng.uniform(24, 40, size=2)
        poly = [
            (cx + r * math.cos(a), cy + r * math.sin(a)) for a, r in zip(angles, radii)
        ]
        got = rasterize_polylines([poly], (64, 64))
        assert np.array_equal(got, raster_oracle([poly], (64, 64)))


def test_mask_is_binary_uint8():
    mask = rasterize_polylines([rect(0, 0, 20, 20)], (32, 32))
    assert mask.dtype == np.uint8
    assert set(np.unique(mask)) <= {0, 1}


# flatten_outline


def square_outline():
    pts = [(100.0, 100.0), (900.0, 100.0), (900.0, 900.0), (100.0, 900.0)]
    segs = tuple(Line(pts[i], pts[(i + 1) % 4]) for i in range(4))
    return GlyphOutline((segs,), (100.0, 100.0, 900.0, 900.0))


def test_flatten_lines_pass_through():
    polylines = flatten_outline(square_outline(), 0.25)
    assert len(polylines) == 1
    assert np.array_equal(
        polylines[0], np.array([(100, 100), (900, 100), (900, 900), (100, 900)], dtype=float)
    )


def arc_outline():
    segs = (
        QuadraticBezier((0.0, 0.0), (50.0, 100.0), (100.0, 0.0)),
        Line((100.0, 0.0), (0.0, 0.0)),
    )
    return GlyphOutline((segs,), (0.0, 0.0, 100.0, 100.0))


def bezier_point(p0, c, p1, t):
    s = 1.0 - t
    return (
        s * s * p0[0] + 2 * s * t * c[0] + t * t * p1[0],
        s * s * p0[1] + 2 * s * t * c[1] + t * t * p1[1],
    )


def point_segment_distance(p, a, b):
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    t = 0.0 if denom == 0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


@pytest.mark.parametrize("tolerance", [0.25, 1.0, 5.0])
def test_flatten_quadratic_within_tolerance(tolerance):
    polyline = flatten_outline(arc_outline(), tolerance)[0]
    verts = [tuple(v) for v in polyline]
    segments = [(verts[i], verts[(i + 1) % len(verts)]) for i in range(len(verts))]
    worst = 0.0
    for i in range(2001):
        p = bezier_point((0, 0), (50, 100), (100, 0), i / 2000)
        worst = max(worst, min(point_segment_distance(p, a, b) for a, b in segments))
    assert worst <= tolerance + 1e-9


def test_flatten_huge_tolerance_gives_single_chord():
    polyline = flatten_outline(arc_outline(), 1e9)[0]
    assert len(polyline) == 2  # chord endpoints only; closing edge is implicit
    rounded = flatten_outline(CURVES_FONT.glyphs[1], 1e9)[0]
    assert len(rounded) == 4  # each quadratic collapsed to its chord


def test_flatten_empty_outline():
    assert flatten_outline(GlyphOutline((), (0, 0, 0, 0)), 0.25) == []


def test_flatten_rejects_nonpositive_tolerance():
    with pytest.raises(ValidationError):
        flatten_outline(square_outline(), 0.0)


# layout_line


QUAD = Quad(((50.0, 50.0), (450.0, 50.0), (450.0, 250.0), (50.0, 250.0)))


def test_two_glyph_layout_offsets_by_advance():
    result = layout_line(LineSpec("AA", SQUARE_FONT, QUAD))
    assert len(result.placements) == 2
    a, b = result.placements
    assert a.glyph == b.glyph == 1
    # usable 380x180, line bbox 1800x800 in font units
    expected_scale = min(380.0 / 1800.0, 180.0 / 800.0)
    assert result.scale == pytest.approx(expected_scale)
    shift = b.affine[:, 2] - a.affine[:, 2]
    assert shift == pytest.approx([1000.0 * result.scale, 0.0])
    assert np.allclose(a.affine[:, :2], b.affine[:, :2])


def test_single_glyph_centered():
    result = layout_line(LineSpec("A", SQUARE_FONT, QUAD))
    (placement,) = result.placements
    center = placement.apply(np.array([[500.0, 500.0]]))[0]
    assert center == pytest.approx([250.0, 150.0])


def test_extent_matches_scale_times_bbox():
    result = layout_line(LineSpec("AA", SQUARE_FONT, QUAD))
    assert result.extent[0] == pytest.approx(result.scale * 1800.0)
    assert result.extent[1] == pytest.approx(result.scale * 800.0)


def test_empty_text_rejected():
    with pytest.raises(EmptyText):
        layout_line(LineSpec("", SQUARE_FONT, QUAD))
    with pytest.raises(EmptyText):
        layout_line(LineSpec("   ", SQUARE_FONT, QUAD))


def test_degenerate_quad_rejected():
    point_quad = Quad(((5.0, 5.0),) * 4)
    with pytest.raises(DegenerateQuad):
        layout_line(LineSpec("A", SQUARE_FONT, point_quad))


def test_unmapped_codepoint_uses_notdef_and_warns():
    result = layout_line(LineSpec("A☃A", SQUARE_FONT, QUAD))
    assert result.skipped == ("☃",)
    assert [p.glyph for p in result.placements] == [1, 0, 1]


def test_vertical_layout_stacks_downward():
    tall = Quad(((100.0, 20.0), (200.0, 20.0), (200.0, 480.0), (100.0, 480.0)))
    result = layout_line(LineSpec("AA", SQUARE_FONT, tall, orientation="vertical"))
    a, b = result.placements
    shift = b.affine[:, 2] - a.affine[:, 2]
    assert shift == pytest.approx([0.0, 1000.0 * result.scale])


def test_rotated_quad_rotates_ink():
    # 90-degree rotated quad: baseline points down the canvas
    rot = Quad(((400.0, 100.0), (400.0, 400.0), (200.0, 400.0), (200.0, 100.0)))
    result = layout_line(LineSpec("AA", SQUARE_FONT, rot))
    a, b = result.placements
    shift = b.affine[:, 2] - a.affine[:, 2]
    assert shift[0] == pytest.approx(0.0, abs=1e-9)
    assert shift[1] > 0


# compose_glyph_control / render_position_mask


def canvas_quad(x0, y0, x1, y1):
    return Quad(((float(x0), float(y0)), (float(x1), float(y0)), (float(x1), float(y1)), (float(x0), float(y1))))


def test_disjoint_lines_ink_adds():
    top = LineSpec("A", SQUARE_FONT, canvas_quad(10, 10, 250, 120))
    bottom = LineSpec("A", SQUARE_FONT, canvas_quad(10, 200, 250, 310))
    both = compose_glyph_control(TextLayout((top, bottom)), (512, 512))
    only_top = compose_glyph_control(TextLayout((top,)), (512, 512))
    only_bottom = compose_glyph_control(TextLayout((bottom,)), (512, 512))
    assert int(both.bits.sum()) == int(only_top.bits.sum()) + int(only_bottom.bits.sum())


def test_duplicate_line_is_idempotent():
    line = LineSpec("AA", SQUARE_FONT, canvas_quad(30, 30, 400, 200))
    once = compose_glyph_control(TextLayout((line,)), (512, 512))
    twice = compose_glyph_control(TextLayout((line, line)), (512, 512))
    assert np.array_equal(once.bits, twice.bits)


def test_line_order_does_not_matter():
    a = LineSpec("A", SQUARE_FONT, canvas_quad(10, 10, 200, 100))
    b = LineSpec("O", CURVES_FONT, canvas_quad(100, 80, 400, 260))
    ab = compose_glyph_control(TextLayout((a, b)), (512, 512))
    ba = compose_glyph_control(TextLayout((b, a)), (512, 512))
    assert np.array_equal(ab.bits, ba.bits)


def test_six_lines_rejected():
    line = LineSpec("A", SQUARE_FONT, canvas_quad(10, 10, 100, 60))
    with pytest.raises(TooManyLines):
        TextLayout((line,) * 6)


def test_line_errors_annotated_with_index():
    good = LineSpec("A", SQUARE_FONT, canvas_quad(10, 10, 100, 60))
    bad = LineSpec("", SQUARE_FONT, canvas_quad(10, 80, 100, 130))
    with pytest.raises(EmptyText, match="line 1"):
        compose_glyph_control(TextLayout((good, bad)), (512, 512))


def test_glyph_control_binary_and_sized():
    line = LineSpec("AA", SQUARE_FONT, canvas_quad(30, 30, 480, 200))
    control = compose_glyph_control(TextLayout((line,)), (512, 512))
    assert isinstance(control, GlyphControl)
    assert (control.width, control.height) == (512, 512)
    assert set(np.unique(control.bits)) <= {0, 1}
    assert control.bits.sum() > 0


def test_position_mask_rectangle_count():
    mask = render_position_mask([canvas_quad(10, 10, 90, 90)], (100, 100))
    assert int(mask.bits.sum()) == 6400


def test_position_mask_empty_list():
    mask = render_position_mask([], (100, 100))
    assert mask.bits.sum() == 0


def test_position_mask_union():
    mask = render_position_mask(
        [canvas_quad(10, 10, 50, 50), canvas_quad(30, 30, 70, 70)], (100, 100)
    )
    assert int(mask.bits.sum()) == 2800


def test_position_mask_rejects_bowtie():
    bowtie = [(0.0, 0.0), (50.0, 50.0), (50.0, 0.0), (0.0, 50.0)]
    with pytest.raises(SelfIntersectingPolygon):
        render_position_mask([bowtie], (100, 100))


def test_glyph_ink_within_position_region():
    quad = canvas_quad(40, 60, 470, 230)
    glyph = compose_glyph_control(
        TextLayout((LineSpec("AA", SQUARE_FONT, quad),)), (512, 512)
    )
    pos = render_position_mask([quad], (512, 512))
    assert int((glyph.bits & ~pos.bits & 1).sum()) == 0
    assert glyph.bits.sum() > 0


def downsample_majority(mask: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    blocks = mask.reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))
    return (blocks >= 2).astype(np.uint8)


@pytest.mark.parametrize(
    "name", [p.name for p in sorted(FONT_DIR.glob("*.ttf")) if p.name != "testscaled.ttf"]
)
def test_supersample_consistency(name):
    font = load_font((FONT_DIR / name).read_bytes())
    text = "".join(
        chr(cp) for cp in sorted(font.codepoint_map) if cp <= 0xFFFF and chr(cp).isalnum()
    )[:2]
    if not text:
        pytest.skip("no renderable letters")
    quad1 = canvas_quad(40, 40, 472, 472)
    quad2 = canvas_quad(80, 80, 944, 944)
    direct = compose_glyph_control(
        TextLayout((LineSpec(text, font, quad1),)), (512, 512)
    ).bits
    doubled = compose_glyph_control(
        TextLayout((LineSpec(text, font, quad2),)), (1024, 1024)
    ).bits
    down = downsample_majority(doubled)
    ink = int(direct.sum())
    assert ink > 0
    deviating = int((direct ^ down).sum())
    assert deviating / ink < 0.02
