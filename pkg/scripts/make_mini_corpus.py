#!/usr/bin/env python3
"""Generate the bundled 10-image mini-corpus used by the dataset tests.

Each record is a 512x512 procedural background with one or two text lines
drawn into quads, a binary segmentation mask per line, an OCR sidecar with
scripted text/confidence values, and a manifest.jsonl tying it together.

The OCR values are chosen so the quality gate's outcome is known by hand:

  r0  ABCD      conf 0.95, exact            -> pass
  r1  BEAD      conf 0.80, exact            -> pass (confidence boundary)
  r2  CAGE      conf 0.79, exact            -> REJECT confidence
  r3  DECAF     conf 0.90, read DECAD (d=1) -> pass (1 <= 0.2*5)
  r4  EACH      conf 0.90, exact            -> pass
      FAB       conf 0.90, read FEB (d=1)   -> REJECT edit_distance (1 > 0.6)
  r5  HEDGE     conf 0.90, read HADGE (d=1) -> pass
      ACED      conf 0.88, exact            -> pass
  r6  DFACE     conf 0.50, exact            -> REJECT confidence
  r7  GAFF      conf 0.90, read GAFE (d=1)  -> REJECT edit_distance (1 > 0.8)
  r8  BED       conf 0.92, exact            -> pass
      FACE      conf 0.85, exact            -> pass
  r9  ABCDEFGH  conf 0.90, read ABCDEFGG    -> pass (1 <= 1.6)

Totals: 7 examples, 3 whole-record rejections; 9 kept lines, 4 rejected
lines (2 confidence, 2 edit_distance). Texts stay inside the A-H alphabet
the family fixture fonts cover.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from glyphkit import imageutil
from glyphkit.fontio import load_font
from glyphkit.geometry import Quad
from glyphkit.raster import LineSpec, TextLayout, compose_glyph_control

SIZE = 512

# (text, ocr_text, confidence, quad flat coords TL,TR,BR,BL)
RECORDS = [
    ("a storefront sign", [("ABCD", "ABCD", 0.95, (60, 80, 420, 90, 415, 200, 55, 190))]),
    ("painted wall text", [("BEAD", "BEAD", 0.80, (90, 150, 430, 150, 430, 260, 90, 260))]),
    ("weathered plaque", [("CAGE", "CAGE", 0.79, (100, 180, 400, 170, 405, 280, 105, 290))]),
    ("menu board", [("DECAF", "DECAD", 0.90, (70, 120, 450, 130, 445, 230, 65, 220))]),
    (
        "two stacked banners",
        [
            ("EACH", "EACH", 0.90, (80, 60, 430, 60, 430, 170, 80, 170)),
            ("FAB", "FEB", 0.90, (120, 300, 390, 310, 385, 400, 115, 390)),
        ],
    ),
    (
        "shop window pair",
        [
            ("HEDGE", "HADGE", 0.90, (50, 90, 460, 100, 455, 200, 45, 190)),
            ("ACED", "ACED", 0.88, (100, 320, 410, 320, 410, 430, 100, 430)),
        ],
    ),
    ("faded poster", [("DFACE", "DFACE", 0.50, (90, 140, 420, 150, 415, 260, 85, 250))]),
    ("street stencil", [("GAFF", "GAFE", 0.90, (110, 170, 400, 160, 405, 270, 115, 280))]),
    (
        "cafe chalkboard",
        [
            ("BED", "BED", 0.92, (140, 80, 380, 80, 380, 180, 140, 180)),
            ("FACE", "FACE", 0.85, (90, 280, 430, 290, 425, 390, 85, 380)),
        ],
    ),
    ("warehouse lettering", [("ABCDEFGH", "ABCDEFGG", 0.90, (30, 190, 480, 200, 475, 320, 25, 310))]),
]

FONT_CYCLE = ["blockwide.ttf", "blocknarrow.ttf", "rounded.ttf", "slanted.ttf"]


def background(seed: int) -> np.ndarray:
    rng = np.random.default_rng(1000 + seed)
    ys, xs = np.mgrid[0:SIZE, 0:SIZE] / SIZE
    base = 0.55 + 0.25 * np.sin(2.2 * xs + rng.uniform(0, 6.28)) * np.cos(
        1.7 * ys + rng.uniform(0, 6.28)
    )
    img = np.stack([base, base * rng.uniform(0.9, 1.0), base * rng.uniform(0.85, 1.0)], axis=2)
    img += rng.normal(0, 0.015, img.shape)
    return np.clip(img, 0.15, 0.9)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "corpus",
    )
    parser.add_argument(
        "--fonts",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "fonts",
    )
    args = parser.parse_args()

    out = args.out
    for sub in ("images", "masks", "ocr", "fonts"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    for name in set(FONT_CYCLE):  # corpus is self-contained for evaluation
        (out / "fonts" / name).write_bytes((args.fonts / name).read_bytes())

    manifest_lines = []
    for i, (caption, lines) in enumerate(RECORDS):
        font_name = FONT_CYCLE[i % len(FONT_CYCLE)]
        font = load_font((args.fonts / font_name).read_bytes())
        img = background(i)
        entries = []
        sidecar = []
        for j, (text, ocr_text, conf, flat) in enumerate(lines):
            quad = Quad.from_flat(flat)
            layout = TextLayout((LineSpec(text, font, quad),))
            ink = compose_glyph_control(layout, (SIZE, SIZE)).bits
            img[ink.astype(bool)] = (0.08, 0.08, 0.12)
            mask_rel = f"masks/r{i}_l{j}.png"
            imageutil.save_mask(ink, out / mask_rel)
            entries.append(
                {
                    "text": text,
                    "polygon": [[float(x), float(y)] for x, y in quad.corners],
                    "mask": mask_rel,
                    "font": f"fonts/{font_name}",
                }
            )
            sidecar.append({"text": ocr_text, "confidence": conf})
        image_rel = f"images/r{i}.png"
        imageutil.save_image(img, out / image_rel)
        ocr_rel = f"ocr/r{i}.json"
        (out / ocr_rel).write_text(json.dumps(sidecar, indent=1) + "\n", encoding="utf-8")
        manifest_lines.append(
            json.dumps(
                {
                    "image": image_rel,
                    "caption": caption,
                    "language": "english",
                    "ocr_sidecar": ocr_rel,
                    "lines": entries,
                },
                sort_keys=True,
            )
        )
    (out / "manifest.jsonl").write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    print(f"wrote {len(RECORDS)} records under {out}")


if __name__ == "__main__":
    main()
