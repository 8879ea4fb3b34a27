"""Command-line surface: every pipeline stage as a subcommand.

Exit codes: 0 success, 2 validation error, 3 backend failure, 1 internal.
Errors go to stderr, as single-line JSON when --json is set. Subcommands
that draw random numbers (perturb, prepare-dataset) require --seed so a
rerun with identical argv reproduces every output byte.

Quads are 8 comma-separated floats in TL,TR,BR,BL corner order, e.g.
``--quad 10,10,90,10,90,90,10,90``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import imageutil, pipeline
from .backends import HttpGenerator, HttpOcr, ScriptedOcr, StubGenerator
from .blend import seamless_clone
from .errors import GlyphkitError, ValidationError
from .fontio import load_font
from .fontmetric import FULL
from .geometry import PerturbationConfig, Quad, perturb_quad
from .quality import OcrResult, QualityCriteria, gate
from .raster import LineSpec, TextLayout, compose_glyph_control

__all__ = ["run_cli", "main"]

_EXIT = {"validation": 2, "backend": 3, "internal": 1}


def _quad(text: str) -> Quad:
    try:
        return Quad.from_flat([float(v) for v in text.split(",")])
    except (ValueError, GlyphkitError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected W,H, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _ks(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part.lower() == "full":
            out.append(FULL)
        else:
            try:
                out.append(int(part))
            except ValueError:
                raise argparse.ArgumentTypeError(f"k must be an integer or 'full', got {part!r}")
    return out


def _flat(quad: Quad) -> str:
    return ",".join(repr(v) for v in quad.to_flat())


def _emit(args, payload: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _load_font_file(path) -> object:
    return load_font(Path(path).read_bytes())


# --- subcommands ---


def _cmd_render_glyph(args) -> int:
    font = _load_font_file(args.font)
    layout = TextLayout((LineSpec(args.text, font, args.quad),))
    control = compose_glyph_control(layout, (args.canvas, args.canvas))
    imageutil.save_mask(control.bits, args.out)
    _emit(args, {"out": str(args.out), "ink": int(control.bits.sum())})
    return 0


def _cmd_perturb(args) -> int:
    cfg = PerturbationConfig(epsilon=args.epsilon, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    quads = [
        perturb_quad(args.quad, cfg, bounds=args.bounds, rng=rng)
        for _ in range(args.count)
    ]
    if args.json:
        print(json.dumps({"quads": [q.to_flat() for q in quads]}))
    else:
        for q in quads:
            print(_flat(q))
    return 0


def _cmd_gate(args) -> int:
    criteria = QualityCriteria(
        min_confidence=args.min_conf, max_edit_ratio=args.max_edit_ratio
    )
    result = gate(OcrResult(text=args.pred, confidence=args.conf), args.target, criteria)
    if args.json:
        print(
            json.dumps(
                {
                    "verdict": result.verdict,
                    "passed": result.passed,
                    "edit_distance": result.edit_distance,
                    "max_allowed": result.max_allowed,
                },
                sort_keys=True,
            )
        )
    else:
        print(result.verdict)
    return 0


def _cmd_prepare_dataset(args) -> int:
    criteria = QualityCriteria(
        min_confidence=args.min_conf, max_edit_ratio=args.max_edit_ratio
    )
    perturb = PerturbationConfig(epsilon=args.epsilon, seed=args.seed)
    report = pipeline.prepare_dataset(
        args.manifest,
        args.out,
        criteria,
        perturb,
        global_seed=args.seed,
        jobs=args.jobs,
    )
    _emit(
        args,
        {
            "examples": len(report.examples),
            "rejections": len(report.rejections),
            "kept_lines": report.kept_line_count,
            "rejected_lines": report.rejected_line_count,
            "manifest": report.manifest_path,
        },
    )
    return 0


def _build_bundle(args):
    image = imageutil.load_image(args.image)
    font = _load_font_file(args.font)
    opts = pipeline.BundleOptions(
        canvas=args.canvas, seed=args.seed, tighten=args.tighten
    )
    bundle = pipeline.build_inference_bundle(
        image, args.quad, args.text, font, args.caption, opts
    )
    return image, bundle


def _cmd_bundle(args) -> int:
    _, bundle = _build_bundle(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    imageutil.save_mask(bundle.glyph.bits, out_dir / "glyph.png")
    imageutil.save_mask(bundle.position.bits, out_dir / "position.png")
    imageutil.save_image(bundle.masked.image, out_dir / "masked.png")
    meta = {
        "canvas": bundle.canvas,
        "caption": bundle.caption,
        "region_quad": bundle.region_quad.to_flat(),
        "seed": bundle.seed,
        "source_size": list(bundle.source_size),
        "text": args.text,
        "zoomed": bundle.zoom is not None,
    }
    (out_dir / "bundle.json").write_text(json.dumps(meta, sort_keys=True) + "\n")
    _emit(args, {"out_dir": str(out_dir), "zoomed": meta["zoomed"]})
    return 0


def _select_generator(args):
    if args.backend == "stub":
        return StubGenerator()
    endpoint = args.endpoint or os.environ.get("GLYPHKIT_GENERATOR_URL")
    if not endpoint:
        raise ValidationError("http backend needs --endpoint or GLYPHKIT_GENERATOR_URL")
    return HttpGenerator(endpoint, timeout=args.timeout)


def _cmd_edit(args) -> int:
    image, bundle = _build_bundle(args)
    backend = _select_generator(args)
    result = pipeline.run_edit(bundle, backend, image, tol=args.tol)
    imageutil.save_image(result, args.out)
    _emit(args, {"out": str(args.out), "zoomed": bundle.zoom is not None})
    return 0


def _cmd_blend(args) -> int:
    src = imageutil.load_image(args.src)
    dst = imageutil.load_image(args.dst)
    mask = imageutil.load_mask(args.mask)
    result = seamless_clone(src, dst, mask, tol=args.tol, max_iter=args.max_iter)
    imageutil.save_image(result, args.out)
    _emit(args, {"out": str(args.out)})
    return 0


def _cmd_eval(args) -> int:
    manifest = Path(args.manifest)
    records = pipeline.load_manifest(manifest)
    classifier = pipeline.build_manifest_classifier(
        records, manifest.parent, probe_text=args.probe_text
    )
    if args.ocr == "truth":
        ocr = ScriptedOcr([line.text for rec in records for line in rec.lines])
    else:
        if not args.ocr_endpoint:
            raise ValidationError("--ocr http needs --ocr-endpoint")
        ocr = HttpOcr(args.ocr_endpoint, timeout=args.timeout)
    report = pipeline.evaluate_benchmark(
        manifest, args.outputs, classifier, args.ks, ocr_backend=ocr, jobs=args.jobs
    )
    if args.out:
        Path(args.out).write_text(report.to_csv())
    if args.json:
        print(
            json.dumps(
                {
                    "columns": report.metric_columns,
                    "rows": report.rows,
                    "line_counts": report.line_counts,
                },
                sort_keys=True,
            )
        )
    else:
        print(report.summary())
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(generator_url=args.generator_url)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- parser ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glyphkit",
        description="Produce, perturb, validate, blend, and evaluate glyph controls.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--json", action="store_true", help="machine-readable output and errors"
    )

    p = sub.add_parser(
        "render-glyph", parents=[common], help="rasterize one text line into a mask PNG"
    )
    p.add_argument("--font", required=True, help="TTF file")
    p.add_argument("--text", required=True)
    p.add_argument("--quad", required=True, type=_quad, help="TL,TR,BR,BL as 8 floats")
    p.add_argument("--out", required=True, help="output mask PNG")
    p.add_argument("--canvas", type=int, default=128, help="square canvas side (default 128)")
    p.set_defaults(func=_cmd_render_glyph)

    p = sub.add_parser(
        "perturb", parents=[common], help="randomly displace quad corners within ±epsilon"
    )
    p.add_argument("--quad", required=True, type=_quad)
    p.add_argument("--epsilon", type=float, default=5.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bounds", type=_pair, default=None, help="clamp corners into W,H")
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser(
        "gate", parents=[common], help="accept or reject one OCR result for training"
    )
    p.add_argument("--conf", type=float, required=True, help="OCR confidence in [0, 1]")
    p.add_argument("--target", required=True, help="ground-truth text")
    p.add_argument("--pred", required=True, help="OCR-predicted text")
    p.add_argument("--min-conf", type=float, default=0.8)
    p.add_argument("--max-edit-ratio", type=float, default=0.2)
    p.set_defaults(func=_cmd_gate)

    p = sub.add_parser(
        "prepare-dataset",
        parents=[common],
        help="gate, perturb, and write control artifacts for a manifest",
    )
    p.add_argument("--manifest", required=True, help="JSON Lines manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=5.0)
    p.add_argument("--min-conf", type=float, default=0.8)
    p.add_argument("--max-edit-ratio", type=float, default=0.2)
    p.set_defaults(func=_cmd_prepare_dataset)

    bundle_common = argparse.ArgumentParser(add_help=False)
    bundle_common.add_argument("--image", required=True, help="source image PNG")
    bundle_common.add_argument("--font", required=True, help="TTF file")
    bundle_common.add_argument("--text", required=True, help="replacement text")
    bundle_common.add_argument("--quad", required=True, type=_quad)
    bundle_common.add_argument("--canvas", type=int, default=512)
    bundle_common.add_argument("--seed", type=int, default=0)
    bundle_common.add_argument("--caption", default="")
    bundle_common.add_argument("--tighten", action="store_true")

    p = sub.add_parser(
        "bundle",
        parents=[common, bundle_common],
        help="write glyph/position/masked controls for one edit",
    )
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_bundle)

    p = sub.add_parser(
        "edit",
        parents=[common, bundle_common],
        help="run one edit through a generator backend and blend it back",
    )
    p.add_argument("--out", required=True, help="output image PNG")
    p.add_argument("--backend", choices=["stub", "http"], default="stub")
    p.add_argument("--endpoint", default=None, help="generator URL for --backend http")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_edit)

    p = sub.add_parser(
        "blend", parents=[common], help="seamless-clone src into dst under a mask"
    )
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("--mask", required=True, help="binary PNG, ink = blend region")
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=None)
    p.set_defaults(func=_cmd_blend)

    p = sub.add_parser(
        "eval", parents=[common], help="score an outputs directory against a manifest"
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--outputs", required=True, help="directory of {stem}.png renders")
    p.add_argument("--ks", type=_ks, default=[FULL], help="comma list, e.g. 5,20,full")
    p.add_argument("--ocr", choices=["truth", "http"], default="truth")
    p.add_argument("--ocr-endpoint", default=None)
    p.add_argument("--probe-text", default="ABC")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="also write the CSV here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--generator-url", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def _report_error(args, code: str, message: str, detail: str) -> None:
    if getattr(args, "json", False):
        line = json.dumps({"code": code, "message": message, "detail": detail})
        print(line, file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GlyphkitError as exc:
        _report_error(args, exc.code, str(exc), type(exc).__name__)
        return _EXIT.get(exc.code, 1)
    except FileNotFoundError as exc:
        _report_error(args, "validation", str(exc), "FileNotFoundError")
        return 2
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # pragma: no cover - safety net
        _report_error(args, "internal", f"{type(exc).__name__}: {exc}", type(exc).__name__)
        return 1


def main() -> None:
    sys.exit(run_cli())
