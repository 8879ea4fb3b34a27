"""End-to-end edit walkthrough against the stub generator.

Synthesizes a textured scene, builds the control bundle for a replacement
line, runs the edit, and writes every intermediate to --out so the whole
chain can be eyeballed: scene, glyph/position controls, masked image, and
the blended result. A second pass uses a small region to show the zoom
path. No network, no model weights.

    python3 scripts/demo_edit.py --out out/demo
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from glyphkit import imageutil, pipeline
from glyphkit.backends import StubGenerator
from glyphkit.fontio import load_font
from glyphkit.geometry import Quad

FONT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "fonts"


def make_scene(seed: int, n: int = 512) -> np.ndarray:
    """Smooth random gradients, quantized so PNG round-trips are exact."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:n, 0:n] / n
    img = np.zeros((n, n, 3))
    for ch in range(3):
        a, b, c = rng.uniform(0.2, 0.8, 3)
        img[..., ch] = 0.35 + 0.3 * (a * xx + b * yy + c * np.sin(3 * xx + 2 * yy))
    img += rng.normal(0, 0.015, img.shape)
    return np.rint(np.clip(img, 0, 1) * 255) / 255


def run_one(scene, quad, text, font, out_dir: Path, tag: str) -> None:
    bundle = pipeline.build_inference_bundle(scene, quad, text, font)
    result = pipeline.run_edit(bundle, StubGenerator(), scene)
    imageutil.save_mask(bundle.glyph.bits, out_dir / f"{tag}_glyph.png")
    imageutil.save_mask(bundle.position.bits, out_dir / f"{tag}_position.png")
    imageutil.save_image(bundle.masked.image, out_dir / f"{tag}_masked.png")
    imageutil.save_image(result, out_dir / f"{tag}_result.png")
    changed = int(np.any(result != scene, axis=2).sum())
    mode = "zoom" if bundle.zoom is not None else "direct"
    print(f"{tag}: {mode} path, canvas {bundle.canvas}, {changed} px changed")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("out/demo"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--font", type=Path, default=FONT_DIR / "rounded.ttf")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    font = load_font(args.font.read_bytes())
    scene = make_scene(args.seed)
    imageutil.save_image(scene, args.out / "scene.png")

    wide = Quad(((60.0, 180.0), (470.0, 200.0), (465.0, 330.0), (55.0, 310.0)))
    run_one(scene, wide, "HEADGE", font, args.out, "wide")

    small = Quad(((340.0, 40.0), (430.0, 40.0), (430.0, 80.0), (340.0, 80.0)))
    run_one(scene, small, "ACE", font, args.out, "small")

    print(f"wrote {len(list(args.out.iterdir()))} files to {args.out}")


if __name__ == "__main__":
    main()
