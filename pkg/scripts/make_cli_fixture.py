"""Regenerate the golden mask for the render-glyph CLI test.

The fixture is only committed after it survives an independent check: a
per-pixel ray cast (pixel centers, half-open nonzero winding) over the
device-space polygons the layout produces. Run from the repository root:

    python3 scripts/make_cli_fixture.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FONT = ROOT / "tests" / "fixtures" / "fonts" / "testsquare.ttf"
OUT = ROOT / "tests" / "fixtures" / "cli" / "render_glyph_A.png"
QUAD = "10,10,90,10,90,90,10,90"
CANVAS = 128


def ray_cast(polylines, size):
    """Pixel-center winding test, written without the production rasterizer."""
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


def main() -> int:
    from glyphkit import imageutil
    from glyphkit.cli import run_cli
    from glyphkit.fontio import load_font
    from glyphkit.geometry import Quad
    from glyphkit.raster import DEFAULT_TOLERANCE, LineSpec, flatten_outline, layout_line

    OUT.parent.mkdir(parents=True, exist_ok=True)
    code = run_cli(
        [
            "render-glyph",
            "--font", str(FONT),
            "--text", "A",
            "--quad", QUAD,
            "--out", str(OUT),
            "--canvas", str(CANVAS),
        ]
    )
    if code != 0:
        print(f"render-glyph exited {code}", file=sys.stderr)
        return 1

    font = load_font(FONT.read_bytes())
    quad = Quad.from_flat([float(v) for v in QUAD.split(",")])
    result = layout_line(LineSpec("A", font, quad))
    polylines = []
    for placement in result.placements:
        outline = font.glyphs[placement.glyph]
        if outline.is_empty:
            continue
        for pl in flatten_outline(outline, DEFAULT_TOLERANCE / max(result.scale, 1e-12)):
            polylines.append(placement.apply(pl))
    oracle = ray_cast(polylines, (CANVAS, CANVAS))

    written = imageutil.load_mask(OUT)
    if not np.array_equal(written, oracle):
        diff = int(np.abs(written.astype(int) - oracle.astype(int)).sum())
        print(f"fixture disagrees with the ray cast on {diff} pixels", file=sys.stderr)
        return 1
    print(f"wrote {OUT} ({int(written.sum())} ink pixels, ray cast agrees)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
