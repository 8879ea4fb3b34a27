"""How well the reference font classifier separates the fixture fonts.

For every renderable fixture font, renders the probe text, scores it with
a classifier built over the same family, and prints the top-k distance
between each pair of probe renders. Useful when tuning probe text or k:
distances on the diagonal must be zero, off-diagonal should be large.

    python3 scripts/classifier_separation.py [--probe ABC] [--ks 1,2,full]
"""

from __future__ import annotations

import argparse
from pathlib import Path

from glyphkit.errors import UnsupportedFeature
from glyphkit.fontio import load_font
from glyphkit.fontmetric import FULL, build_reference_classifier, cos_at_k, render_probe

FONT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "fonts"


def parse_ks(text: str):
    return [FULL if p.strip().lower() == "full" else int(p) for p in text.split(",")]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--probe", default="AB")
    parser.add_argument("--ks", type=parse_ks, default=[1, FULL])
    parser.add_argument("--fonts", default=FONT_DIR, type=Path)
    parser.add_argument("--canvas", type=int, default=256)
    args = parser.parse_args()
    canvas = (args.canvas, args.canvas)

    fonts, names = [], []
    for path in sorted(args.fonts.glob("*.ttf")):
        try:
            font = load_font(path.read_bytes())
        except UnsupportedFeature as exc:
            print(f"skip {path.name}: {exc}")
            continue
        if not all(ord(c) in font.codepoint_map for c in args.probe):
            print(f"skip {path.name}: probe {args.probe!r} not covered")
            continue
        fonts.append(font)
        names.append(path.name.removesuffix(".ttf"))

    classifier = build_reference_classifier(fonts, probe_text=args.probe, canvas=canvas)
    probes = [render_probe(f, args.probe, canvas) for f in fonts]
    dists = [classifier.classify(p) for p in probes]

    for k in args.ks:
        label = "full" if k is FULL else str(k)
        print(f"\ncos@{label} between probe renders")
        width = max(len(n) for n in names)
        print(" " * (width + 2) + "  ".join(f"{n[:6]:>6}" for n in names))
        for name, p in zip(names, dists):
            row = "  ".join(f"{cos_at_k(p, q, k):6.3f}" for q in dists)
            print(f"{name:>{width}}  {row}")

    hits = sum(int(d.values.argmax()) == i for i, d in enumerate(dists))
    print(f"\nargmax self-identification: {hits}/{len(fonts)}")


if __name__ == "__main__":
    main()
