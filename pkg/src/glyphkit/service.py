"""HTTP service exposing the edit pipeline to UIs and remote callers.

Endpoints:

- GET  /healthz             liveness
- GET  /fonts               registered fonts
- POST /fonts               multipart TTF upload, parsed and registered
- POST /bundle              controls (glyph/position/masked) for one edit
- POST /edit                full edit: bundle -> generator -> blend
- POST /generate            the stub generator behind the wire contract
- POST /evaluate            score an outputs directory against a manifest

All image payloads are base64 PNG inside JSON bodies; font upload is the
one multipart route. Errors come back as {code, message, detail} with 400
for validation, 502 for backend failures, 500 otherwise. The service holds
no mutable state beyond the font registry, so concurrent sessions are
isolated by construction.
"""

from __future__ import annotations

import hashlib
import os
import threading
from pathlib import Path

from fastapi import FastAPI, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import imageutil, pipeline
from .backends import HttpGenerator, HttpOcr, ScriptedOcr, StubGenerator
from .errors import GlyphkitError, ValidationError
from .fontio import Font, load_font
from .fontmetric import FULL
from .geometry import Quad

__all__ = ["create_app"]

_STATUS = {"validation": 400, "backend": 502, "internal": 500}


class FontRegistry:
    """Parsed fonts keyed by a digest of their bytes; thread-safe."""

    def __init__(self):
        self._lock = threading.Lock()
        self._fonts: dict[str, tuple[str, Font]] = {}

    def add(self, name: str, data: bytes) -> str:
        font = load_font(data)  # validation happens before registration
        font_id = hashlib.sha256(data).hexdigest()[:12]
        with self._lock:
            self._fonts[font_id] = (name, font)
        return font_id

    def get(self, font_id: str) -> Font:
        with self._lock:
            entry = self._fonts.get(font_id)
        if entry is None:
            raise ValidationError(f"unknown font id {font_id!r}")
        return entry[1]

    def listing(self) -> list[dict]:
        with self._lock:
            items = sorted(self._fonts.items())
        return [
            {
                "id": font_id,
                "name": name,
                "units_per_em": font.units_per_em,
                "glyphs": len(font.glyphs),
            }
            for font_id, (name, font) in items
        ]


class BundleRequest(BaseModel):
    image_png: str
    polygon: list[float] = Field(min_length=8, max_length=8)
    text: str
    font_id: str
    caption: str = ""
    canvas: int = 512
    seed: int = 0
    tighten: bool = False


class EditRequest(BundleRequest):
    backend: str = "stub"
    endpoint: str | None = None
    tol: float = 1e-6


class EvaluateRequest(BaseModel):
    manifest: str
    outputs: str
    ks: list = Field(default_factory=lambda: ["full"])
    ocr_mode: str = "truth"
    ocr_endpoint: str | None = None
    probe_text: str = "ABC"


def _parse_ks(raw: list) -> list:
    ks = []
    for k in raw:
        if isinstance(k, str) and k.lower() == "full":
            ks.append(FULL)
        else:
            ks.append(int(k))
    return ks


def _build(registry: FontRegistry, req: BundleRequest) -> tuple:
    image = imageutil.png_to_image(imageutil.decode_b64(req.image_png))
    quad = Quad.from_flat(req.polygon)
    font = registry.get(req.font_id)
    opts = pipeline.BundleOptions(canvas=req.canvas, seed=req.seed, tighten=req.tighten)
    bundle = pipeline.build_inference_bundle(image, quad, req.text, font, req.caption, opts)
    return image, bundle


def create_app(generator_url: str | None = None, timeout: float | None = None) -> FastAPI:
    generator_url = generator_url or os.environ.get("GLYPHKIT_GENERATOR_URL")
    timeout = timeout if timeout is not None else float(os.environ.get("GLYPHKIT_TIMEOUT", "30"))
    app = FastAPI(title="glyphkit", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = FontRegistry()
    app.state.fonts = registry

    @app.exception_handler(GlyphkitError)
    async def glyphkit_error(request: Request, exc: GlyphkitError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 500),
            content={"code": exc.code, "message": str(exc), "detail": type(exc).__name__},
        )

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation", "message": str(exc), "detail": "FileNotFoundError"},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/fonts")
    def list_fonts():
        return {"fonts": registry.listing()}

    @app.post("/fonts")
    async def upload_font(file: UploadFile):
        data = await file.read()
        font_id = registry.add(file.filename or "font", data)
        return {"id": font_id, "fonts": registry.listing()}

    @app.post("/bundle")
    def bundle(req: BundleRequest):
        _, built = _build(registry, req)
        return {
            "glyph_png": imageutil.encode_b64(imageutil.mask_to_png(built.glyph.bits)),
            "position_png": imageutil.encode_b64(imageutil.mask_to_png(built.position.bits)),
            "masked_png": imageutil.encode_b64(imageutil.image_to_png(built.masked.image)),
            "canvas": built.canvas,
            "zoomed": built.zoom is not None,
            "region_quad": [c for corner in built.region_quad.corners for c in corner],
        }

    @app.post("/edit")
    def edit(req: EditRequest):
        image, built = _build(registry, req)
        if req.backend == "stub":
            backend = StubGenerator()
        elif req.backend == "http":
            endpoint = req.endpoint or generator_url
            if not endpoint:
                raise ValidationError("http backend needs an endpoint")
            backend = HttpGenerator(endpoint, timeout=timeout)
        else:
            raise ValidationError(f"unknown backend {req.backend!r}")
        result = pipeline.run_edit(built, backend, image, tol=req.tol)
        return {
            "image_png": imageutil.encode_b64(imageutil.image_to_png(result)),
            "zoomed": built.zoom is not None,
            "region_quad": [c for corner in built.region_quad.corners for c in corner],
        }

    @app.post("/generate")
    def generate(request: dict):
        return StubGenerator().generate(request)

    @app.post("/evaluate")
    def evaluate(req: EvaluateRequest):
        manifest = Path(req.manifest)
        records = pipeline.load_manifest(manifest)
        classifier = pipeline.build_manifest_classifier(
            records, manifest.parent, probe_text=req.probe_text
        )
        if req.ocr_mode == "truth":
            ocr = ScriptedOcr([line.text for rec in records for line in rec.lines])
        elif req.ocr_mode == "http":
            if not req.ocr_endpoint:
                raise ValidationError("ocr_mode=http needs ocr_endpoint")
            ocr = HttpOcr(req.ocr_endpoint, timeout=timeout)
        else:
            raise ValidationError(f"unknown ocr_mode {req.ocr_mode!r}")
        report = pipeline.evaluate_benchmark(
            manifest, req.outputs, classifier, _parse_ks(req.ks), ocr_backend=ocr
        )
        return {
            "columns": report.metric_columns,
            "rows": report.rows,
            "line_counts": report.line_counts,
            "csv": report.to_csv(),
            "summary": report.summary(),
        }

    return app
