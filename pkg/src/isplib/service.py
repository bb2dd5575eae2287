"""Stateless-per-request render service backing the browser UI.

Endpoints:
  POST /images                       upload a sidecar bundle (multipart)
  POST /images/{id}/render           render with a recipe JSON body
  GET  /styles                       list available style presets
  GET  /images/{id}/preview.png      last rendered preview as PNG
  GET  /images/{id}/export?embed=    JPEG export, optionally with embedded raw

Renders are pure functions of (bundle, recipe); per-session renders are
serialized while separate sessions proceed concurrently.
"""

from __future__ import annotations

import base64
import io
import json
import os
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, File, Query, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from PIL import Image

from . import bundleio
from .errors import ConfigError, FormatError, IspError
from .pipeline import RenderRecipe, RenderResult, render
from .presets import load_builtin_styles
from .rawproc import RawBundle

MAX_UPLOAD_BYTES = 64 * 1024 * 1024
MAX_SESSIONS = 16
THUMB_MAX_EDGE = 256


def _to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def encode_png(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(_to_uint8(img)).save(buf, format="PNG")
    return buf.getvalue()


def encode_jpeg(img: np.ndarray, quality: int = 95) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(_to_uint8(img)).save(buf, format="JPEG", quality=quality)
    return buf.getvalue()


def _thumbnail(img: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    edge = max(h, w)
    if edge <= THUMB_MAX_EDGE:
        return img
    from .imagecore import resample_to

    s = THUMB_MAX_EDGE / edge
    return np.clip(resample_to(img, (max(1, round(h * s)), max(1, round(w * s)))), 0.0, 1.0)


@dataclass
class Session:
    bundle: RawBundle
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_result: RenderResult | None = None
    last_recipe: RenderRecipe | None = None
    full_scale_done: bool = False


class SessionStore:
    """In-memory LRU map of upload id -> session."""

    def __init__(self, max_sessions: int = MAX_SESSIONS):
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, Session] = OrderedDict()
        self._max = max_sessions

    def add(self, bundle: RawBundle) -> str:
        sid = uuid.uuid4().hex[:12]
        with self._lock:
            self._sessions[sid] = Session(bundle=bundle)
            while len(self._sessions) > self._max:
                self._sessions.popitem(last=False)
        return sid

    def get(self, sid: str) -> Session | None:
        with self._lock:
            session = self._sessions.get(sid)
            if session is not None:
                self._sessions.move_to_end(sid)
            return session


def create_app(styles=None, max_upload_bytes: int | None = None) -> FastAPI:
    app = FastAPI(title="isplib render service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[os.environ.get("ISPD_UI_ORIGIN", "*")],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()
    style_map = styles if styles is not None else load_builtin_styles()
    upload_limit = max_upload_bytes or int(os.environ.get("ISPD_MAX_UPLOAD", MAX_UPLOAD_BYTES))

    @app.exception_handler(IspError)
    async def _isp_error(request: Request, exc: IspError):
        status = 400 if isinstance(exc, FormatError) else 422
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.post("/images", status_code=201)
    async def upload(mosaic: UploadFile = File(...), metadata: UploadFile = File(...)):
        mosaic_bytes = await mosaic.read()
        meta_bytes = await metadata.read()
        if len(mosaic_bytes) + len(meta_bytes) > upload_limit:
            return JSONResponse(status_code=413, content={"error": "upload too large"})
        try:
            meta_dict = json.loads(meta_bytes.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            return JSONResponse(status_code=400,
                                content={"error": f"metadata is not valid JSON: {exc}"})
        try:
            meta = bundleio.metadata_from_dict(meta_dict)
            arr = _decode_mosaic_upload(mosaic_bytes, mosaic.filename or "mosaic.png")
            if "width" in meta_dict and "height" in meta_dict:
                if (meta_dict["height"], meta_dict["width"]) != arr.shape:
                    raise FormatError("metadata dims do not match the mosaic",
                                      field="width/height")
            bundle = RawBundle(mosaic=arr, meta=meta)
        except FormatError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        sid = store.add(bundle)
        return {"id": sid}

    @app.post("/images/{sid}/render")
    def render_image(sid: str, recipe: dict):
        session = store.get(sid)
        if session is None:
            return JSONResponse(status_code=404, content={"error": f"unknown image id {sid}"})
        try:
            parsed = RenderRecipe.from_dict(recipe)
            _check_styles(parsed, style_map)
        except ConfigError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        with session.lock:
            result = render(session.bundle, parsed, style_map)
            session.last_result = result
            session.last_recipe = parsed
            if parsed.preview_scale == 1.0:
                session.full_scale_done = True
        stages = {name: base64.b64encode(encode_png(_thumbnail(img))).decode()
                  for name, img in result.stages.items()}
        return {
            "preview_png": base64.b64encode(encode_png(result.image)).decode(),
            "stages": stages,
            "applied_ev": result.applied_ev,
            "preview_scale": parsed.preview_scale,
        }

    @app.get("/styles")
    def list_styles():
        return {"styles": sorted(style_map.keys())}

    @app.get("/images/{sid}/preview.png")
    def preview(sid: str):
        session = store.get(sid)
        if session is None:
            return JSONResponse(status_code=404, content={"error": f"unknown image id {sid}"})
        if session.last_result is None:
            return JSONResponse(status_code=409, content={"error": "render first"})
        return Response(content=encode_png(session.last_result.image), media_type="image/png")

    @app.get("/images/{sid}/export")
    def export(sid: str, embed: bool = Query(default=False)):
        session = store.get(sid)
        if session is None:
            return JSONResponse(status_code=404, content={"error": f"unknown image id {sid}"})
        with session.lock:
            if session.last_result is None or not session.full_scale_done:
                return JSONResponse(status_code=409,
                                    content={"error": "render at full scale first"})
            jpeg = encode_jpeg(session.last_result.image)
            if embed:
                recipe_dict = session.last_recipe.to_dict() if session.last_recipe else {}
                jpeg = bundleio.embed_raw(jpeg, session.bundle, recipe_dict)
        return Response(content=jpeg, media_type="image/jpeg")

    return app


def _check_styles(recipe: RenderRecipe, style_map) -> None:
    missing = [n for n in recipe.styles if n not in style_map]
    if missing:
        raise ConfigError(f"unknown styles: {missing}")


def _decode_mosaic_upload(data: bytes, filename: str) -> np.ndarray:
    import tempfile
    from pathlib import Path

    suffix = Path(filename).suffix.lower() or ".png"
    with tempfile.NamedTemporaryFile(suffix=suffix, delete=False) as tmp:
        tmp.write(data)
        tmp_path = Path(tmp.name)
    try:
        return bundleio._read_mosaic(tmp_path)
    finally:
        tmp_path.unlink(missing_ok=True)


def main() -> None:
    import uvicorn

    port = int(os.environ.get("ISPD_PORT", "8601"))
    uvicorn.run(create_app(), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
