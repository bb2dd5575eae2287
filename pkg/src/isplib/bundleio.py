"""On-disk formats: raw sidecar bundles, style presets, render recipes, and
the embedded-raw JPEG container.

All writers are deterministic; all readers reject malformed data with a
located error instead of truncating silently.
"""

from __future__ import annotations

import base64
import io
import json
import struct
import zlib
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ContainerError, FormatError
from .photofinish import ChromaLut, GtmParams, LtmGrid, RgbLut3d, StyleParams
from .rawproc import CFA_PATTERNS, CameraMetadata, RawBundle

CONTAINER_MAGIC = b"MISP"
CONTAINER_VERSION = 1


# ---------------------------------------------------------------------------
# Raw sidecar bundles: 16-bit grayscale PNG or PGM + JSON metadata


def _require(meta: dict, field: str, kind) -> object:
    if field not in meta:
        raise FormatError("missing required metadata entry", field=field)
    value = meta[field]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, kind):
        raise FormatError(f"expected {kind.__name__}", field=field)
    return value


def metadata_from_dict(meta: dict) -> CameraMetadata:
    black = _require(meta, "black_level", float)
    white = _require(meta, "white_level", float)
    cfa = _require(meta, "cfa", str)
    if cfa not in CFA_PATTERNS:
        raise FormatError(f"unknown CFA pattern {cfa!r}", field="cfa")
    gains = _require(meta, "wb_gains", list)
    if len(gains) != 2:
        raise FormatError("wb_gains must be [g_r, g_b]", field="wb_gains")
    cals_raw = _require(meta, "ccm_calibrations", list)
    if not cals_raw:
        raise FormatError("need at least one calibration", field="ccm_calibrations")
    cals = []
    for i, entry in enumerate(cals_raw):
        if not isinstance(entry, dict) or "cct" not in entry or "matrix" not in entry:
            raise FormatError("calibration entries need cct and matrix",
                              field=f"ccm_calibrations[{i}]")
        m = np.asarray(entry["matrix"], dtype=float)
        if m.shape != (3, 3):
            raise FormatError("matrix must be 3x3", field=f"ccm_calibrations[{i}].matrix")
        cals.append((float(entry["cct"]), m))
    iso = float(meta.get("iso", 100.0))
    try:
        return CameraMetadata(black_level=black, white_level=white, cfa=cfa,
                              wb_gains=(float(gains[0]), float(gains[1])),
                              ccm_calibrations=cals, iso=iso)
    except Exception as exc:
        raise FormatError(str(exc), field="metadata") from exc


def metadata_to_dict(meta: CameraMetadata) -> dict:
    return {
        "black_level": meta.black_level,
        "white_level": meta.white_level,
        "cfa": meta.cfa,
        "wb_gains": list(meta.wb_gains),
        "ccm_calibrations": [
            {"cct": cct, "matrix": m.tolist()} for cct, m in meta.ccm_calibrations
        ],
        "iso": meta.iso,
    }


def _read_mosaic(path: Path) -> np.ndarray:
    if path.suffix.lower() == ".pgm":
        return _read_pgm(path)
    with Image.open(path) as img:
        arr = np.array(img)
    if arr.ndim != 2:
        raise FormatError("mosaic image must be single-channel", field="mosaic")
    return arr.astype(np.uint16)


def _write_mosaic(path: Path, mosaic: np.ndarray) -> None:
    if path.suffix.lower() == ".pgm":
        _write_pgm(path, mosaic)
        return
    Image.fromarray(mosaic.astype(np.uint16)).save(path, format="PNG")


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    try:
        header, rest = data.split(b"\n", 1)
        if header.strip() != b"P5":
            raise ValueError("not a binary PGM")
        fields = []
        while len(fields) < 3:
            line, rest = rest.split(b"\n", 1)
            line = line.split(b"#", 1)[0]
            fields.extend(line.split())
        w, h, maxval = (int(f) for f in fields[:3])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"bad PGM header: {exc}", field="mosaic") from exc
    dtype = ">u2" if maxval > 255 else "u1"
    count = w * h
    arr = np.frombuffer(rest, dtype=dtype, count=count)
    if arr.size != count:
        raise FormatError("PGM payload truncated", field="mosaic")
    return arr.reshape(h, w).astype(np.uint16)


def _write_pgm(path: Path, mosaic: np.ndarray) -> None:
    h, w = mosaic.shape
    header = f"P5\n{w} {h}\n65535\n".encode()
    path.write_bytes(header + mosaic.astype(">u2").tobytes())


def read_bundle(mosaic_path: str | Path, meta_path: str | Path | None = None) -> RawBundle:
    mosaic_path = Path(mosaic_path)
    meta_path = Path(meta_path) if meta_path else mosaic_path.with_suffix(".json")
    if not mosaic_path.exists():
        raise FormatError(f"no such mosaic file: {mosaic_path}", field="mosaic")
    if not meta_path.exists():
        raise FormatError(f"no such metadata file: {meta_path}", field="metadata")
    try:
        meta_dict = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"metadata is not valid JSON: {exc}", field="metadata") from exc
    mosaic = _read_mosaic(mosaic_path)
    if "width" in meta_dict and "height" in meta_dict:
        if (meta_dict["height"], meta_dict["width"]) != mosaic.shape:
            raise FormatError("metadata dims do not match the mosaic", field="width/height")
    meta = metadata_from_dict(meta_dict)
    return RawBundle(mosaic=mosaic, meta=meta)


def write_bundle(bundle: RawBundle, mosaic_path: str | Path,
                 meta_path: str | Path | None = None) -> None:
    mosaic_path = Path(mosaic_path)
    meta_path = Path(meta_path) if meta_path else mosaic_path.with_suffix(".json")
    _write_mosaic(mosaic_path, bundle.mosaic)
    payload = metadata_to_dict(bundle.meta)
    payload["height"], payload["width"] = bundle.mosaic.shape
    meta_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Style presets


def _encode_f32(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f4").tobytes()).decode()


def _decode_f32(text: str, count: int, field: str) -> np.ndarray:
    try:
        raw = base64.b64decode(text, validate=True)
    except Exception as exc:
        raise FormatError(f"bad base64 tensor: {exc}", field=field) from exc
    arr = np.frombuffer(raw, dtype="<f4")
    if arr.size != count:
        raise FormatError(f"tensor length {arr.size} != expected {count}", field=field)
    return arr.astype(np.float32)


def style_to_dict(style: StyleParams) -> dict:
    out = {
        "name": style.name,
        "d_g": style.gain,
        "gtm": {"a": style.gtm.a, "b": style.gtm.b, "c": style.gtm.c},
        "gamma": style.gamma,
        "ltm": {"n_g": style.ltm.n_g, "n_c": style.ltm.n_c,
                "values": _encode_f32(style.ltm.values)},
        "chroma": {"n_h": style.chroma.n_h, "values": _encode_f32(style.chroma.table)},
    }
    if style.lut3d is not None:
        out["lut3d"] = {"size": style.lut3d.size, "values": _encode_f32(style.lut3d.table)}
    return out


def style_from_dict(data: dict) -> StyleParams:
    name = _require(data, "name", str)
    gain = _require(data, "d_g", float)
    gamma = _require(data, "gamma", float)
    gtm_d = _require(data, "gtm", dict)
    gtm = GtmParams(float(_require(gtm_d, "a", float)), float(_require(gtm_d, "b", float)),
                    float(_require(gtm_d, "c", float)))
    ltm_d = _require(data, "ltm", dict)
    n_g = int(_require(ltm_d, "n_g", int))
    n_c = int(_require(ltm_d, "n_c", int))
    ltm_vals = _decode_f32(_require(ltm_d, "values", str), n_g * n_g * n_c * 5, "ltm.values")
    ltm = LtmGrid(ltm_vals.reshape(n_g, n_g, n_c, 5))
    chroma_d = _require(data, "chroma", dict)
    n_h = int(_require(chroma_d, "n_h", int))
    chroma_vals = _decode_f32(_require(chroma_d, "values", str), n_h * n_h * 2, "chroma.values")
    chroma = ChromaLut(chroma_vals.reshape(n_h, n_h, 2))
    lut3d = None
    if "lut3d" in data and data["lut3d"] is not None:
        lut_d = data["lut3d"]
        size = int(_require(lut_d, "size", int))
        vals = _decode_f32(_require(lut_d, "values", str), size**3 * 3, "lut3d.values")
        lut3d = RgbLut3d(vals.reshape(size, size, size, 3))
    try:
        return StyleParams(name=name, gain=float(gain), gtm=gtm, ltm=ltm,
                           chroma=chroma, lut3d=lut3d, gamma=float(gamma))
    except Exception as exc:
        raise FormatError(str(exc), field="style") from exc


def read_style(path: str | Path) -> StyleParams:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"style preset is not valid JSON: {exc}", field="style") from exc
    return style_from_dict(data)


def write_style(style: StyleParams, path: str | Path) -> None:
    Path(path).write_text(json.dumps(style_to_dict(style), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Embedded-raw JPEG container
#
# layout: jpeg bytes | "MISP" | version u8 | u32 metadata length | metadata
# JSON | u32 payload length | DEFLATE(mosaic as <u2) | u32 CRC32 of
# everything from the magic through the payload. All integers little-endian.


def embed_raw(jpeg_bytes: bytes, bundle: RawBundle, recipe: dict | None = None) -> bytes:
    if not jpeg_bytes.startswith(b"\xff\xd8"):
        raise FormatError("not a JPEG stream (missing SOI)", field="jpeg")
    if b"\xff\xd9" not in jpeg_bytes:
        raise FormatError("not a JPEG stream (missing EOI)", field="jpeg")
    meta = {
        "metadata": metadata_to_dict(bundle.meta),
        "recipe": recipe or {},
        "height": int(bundle.mosaic.shape[0]),
        "width": int(bundle.mosaic.shape[1]),
    }
    meta_bytes = json.dumps(meta, sort_keys=True).encode()
    payload = zlib.compress(np.ascontiguousarray(bundle.mosaic, dtype="<u2").tobytes(), 9)
    trailer = io.BytesIO()
    trailer.write(CONTAINER_MAGIC)
    trailer.write(struct.pack("<B", CONTAINER_VERSION))
    trailer.write(struct.pack("<I", len(meta_bytes)))
    trailer.write(meta_bytes)
    trailer.write(struct.pack("<I", len(payload)))
    trailer.write(payload)
    body = trailer.getvalue()
    return jpeg_bytes + body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def extract_raw(data: bytes):
    """Split an embedded-raw file into (jpeg_bytes, bundle, recipe).

    Returns None when no container trailer is present. Raises ContainerError
    for a trailer that is present but damaged.
    """
    pos = len(data)
    candidate = None
    while True:
        pos = data.rfind(CONTAINER_MAGIC, 0, pos)
        if pos < 0:
            break
        if _trailer_spans_to_eof(data, pos):
            candidate = pos
            break
        # keep scanning: the magic may appear inside the compressed payload
    if candidate is None:
        if CONTAINER_MAGIC in data and data.rfind(CONTAINER_MAGIC) > data.rfind(b"\xff\xd9"):
            raise ContainerError("trailer magic found but the container is truncated")
        return None
    pos = candidate
    off = pos + 4
    version = data[off]
    off += 1
    if version != CONTAINER_VERSION:
        raise ContainerError(f"unsupported container version {version}")
    mlen = struct.unpack_from("<I", data, off)[0]
    off += 4
    meta_bytes = data[off:off + mlen]
    off += mlen
    plen = struct.unpack_from("<I", data, off)[0]
    off += 4
    payload = data[off:off + plen]
    off += plen
    crc_stored = struct.unpack_from("<I", data, off)[0]
    crc_actual = zlib.crc32(data[pos:off]) & 0xFFFFFFFF
    if crc_stored != crc_actual:
        raise ContainerError("container checksum mismatch")
    try:
        meta = json.loads(meta_bytes.decode())
        mosaic = np.frombuffer(zlib.decompress(payload), dtype="<u2")
        mosaic = mosaic.reshape(meta["height"], meta["width"]).astype(np.uint16)
        bundle = RawBundle(mosaic=mosaic, meta=metadata_from_dict(meta["metadata"]))
    except (KeyError, ValueError, zlib.error) as exc:
        raise ContainerError(f"container body damaged: {exc}") from exc
    return data[:pos], bundle, meta.get("recipe", {})


def _trailer_spans_to_eof(data: bytes, pos: int) -> bool:
    try:
        off = pos + 4 + 1
        mlen = struct.unpack_from("<I", data, off)[0]
        off += 4 + mlen
        plen = struct.unpack_from("<I", data, off)[0]
        off += 4 + plen + 4
        return off == len(data)
    except struct.error:
        return False
