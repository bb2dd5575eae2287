"""Mosaic normalization, demosaicing, and color correction.

Demosaicing is per-channel bilinear with the production tiling contract:
512x512 tiles with a 16-pixel overlap whose result is bit-identical to the
untiled path (interior pixels win, overlap ring discarded).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .imagecore import _M_RGB2XYZ

CFA_PATTERNS = {
    "RGGB": np.array([[0, 1], [1, 2]]),
    "BGGR": np.array([[2, 1], [1, 0]]),
    "GRBG": np.array([[1, 0], [2, 1]]),
    "GBRG": np.array([[1, 2], [0, 1]]),
}

TILE_SIZE = 512
TILE_OVERLAP = 16


@dataclass
class CameraMetadata:
    black_level: float
    white_level: float
    cfa: str
    wb_gains: tuple[float, float]  # (g_r, g_b); green fixed at 1
    ccm_calibrations: list[tuple[float, np.ndarray]]
    iso: float = 100.0

    def __post_init__(self):
        if self.white_level <= self.black_level:
            raise ConfigError("white_level must exceed black_level")
        if self.cfa not in CFA_PATTERNS:
            raise ConfigError(f"unknown CFA pattern: {self.cfa}")
        if self.wb_gains[0] <= 0 or self.wb_gains[1] <= 0:
            raise ConfigError("wb gains must be positive")
        if not self.ccm_calibrations:
            raise ConfigError("at least one CCM calibration is required")
        cals = []
        for cct, m in self.ccm_calibrations:
            m = np.asarray(m, dtype=float)
            if m.shape != (3, 3) or not np.all(np.isfinite(m)):
                raise ConfigError("CCM calibrations must be finite 3x3 matrices")
            cals.append((float(cct), m))
        self.ccm_calibrations = sorted(cals, key=lambda c: c[0])


@dataclass
class RawBundle:
    mosaic: np.ndarray  # (H, W) sensor counts, uint16
    meta: CameraMetadata

    def __post_init__(self):
        if self.mosaic.ndim != 2:
            raise ConfigError("mosaic must be a 2-D array")


def normalize_black_level(bundle: RawBundle) -> np.ndarray:
    """Map sensor counts to [0, 1] using the black/white levels."""
    meta = bundle.meta
    span = meta.white_level - meta.black_level
    if span <= 0:
        raise ConfigError("white_level must exceed black_level")
    out = (bundle.mosaic.astype(float) - meta.black_level) / span
    return np.clip(out, 0.0, 1.0)


def denormalize_black_level(plane: np.ndarray, meta: CameraMetadata) -> np.ndarray:
    """Inverse of normalize_black_level on the [black, white] range."""
    return np.clip(plane, 0.0, 1.0) * (meta.white_level - meta.black_level) + meta.black_level


# ---------------------------------------------------------------------------
# Demosaicing

_KERNEL_G = np.array([[0.0, 0.25, 0.0], [0.25, 1.0, 0.25], [0.0, 0.25, 0.0]])
_KERNEL_RB = np.array([[0.25, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 0.25]])


def _conv3(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 convolution with reflect padding, fixed accumulation order."""
    p = np.pad(plane, 1, mode="reflect")
    h, w = plane.shape
    out = np.zeros_like(plane)
    for dy in range(3):
        for dx in range(3):
            k = kernel[dy, dx]
            if k != 0.0:
                out += k * p[dy:dy + h, dx:dx + w]
    return out


def _demosaic_block(mosaic: np.ndarray, cfa: str) -> np.ndarray:
    pattern = CFA_PATTERNS[cfa]
    h, w = mosaic.shape
    masks = np.zeros((3, h, w))
    for py in range(2):
        for px in range(2):
            masks[pattern[py, px], py::2, px::2] = 1.0
    channels = []
    for c, kernel in ((0, _KERNEL_RB), (1, _KERNEL_G), (2, _KERNEL_RB)):
        channels.append(_conv3(mosaic * masks[c], kernel))
    return np.stack(channels, axis=-1)


def demosaic(mosaic: np.ndarray, cfa: str, tiled: bool = False,
             tile_size: int = TILE_SIZE, overlap: int = TILE_OVERLAP) -> np.ndarray:
    """Bilinear demosaic of a normalized mosaic to camera-raw RGB.

    When `tiled` is set, the image is processed as independent tiles with a
    halo of `overlap` pixels; the result is bit-identical to the untiled path.
    """
    h, w = mosaic.shape
    if h % 2 or w % 2:
        raise ConfigError("mosaic dims must be even")
    if cfa not in CFA_PATTERNS:
        raise ConfigError(f"unknown CFA pattern: {cfa}")
    if not tiled or (h <= tile_size and w <= tile_size):
        return _demosaic_block(mosaic, cfa)
    if tile_size % 2 or overlap % 2:
        raise ConfigError("tile size and overlap must be even to preserve CFA phase")
    out = np.empty((h, w, 3))
    for ty in range(0, h, tile_size):
        for tx in range(0, w, tile_size):
            y1 = min(ty + tile_size, h)
            x1 = min(tx + tile_size, w)
            hy0 = max(ty - overlap, 0)
            hx0 = max(tx - overlap, 0)
            hy1 = min(y1 + overlap, h)
            hx1 = min(x1 + overlap, w)
            sub = _demosaic_block(mosaic[hy0:hy1, hx0:hx1], cfa)
            out[ty:y1, tx:x1] = sub[ty - hy0:y1 - hy0, tx - hx0:x1 - hx0]
    return out


# ---------------------------------------------------------------------------
# White balance + CCM


def apply_wb_ccm(rgb: np.ndarray, gains: tuple[float, float], ccm: np.ndarray) -> np.ndarray:
    """Per-pixel CCM @ (diag(g_r, 1, g_b) @ p), clamped to [0, 1]."""
    ccm = np.asarray(ccm, dtype=float)
    if not np.all(np.isfinite(ccm)):
        raise ConfigError("CCM must be finite")
    g = np.array([gains[0], 1.0, gains[1]])
    return np.clip((rgb * g) @ ccm.T, 0.0, 1.0)


def interpolate_ccm(meta: CameraMetadata, target_cct: float) -> np.ndarray:
    """Inverse-CCT interpolation between the two bracketing calibrations,
    clamped outside the calibrated range."""
    cals = meta.ccm_calibrations
    if len(cals) == 1:
        return cals[0][1].copy()
    if target_cct <= cals[0][0]:
        return cals[0][1].copy()
    if target_cct >= cals[-1][0]:
        return cals[-1][1].copy()
    for (cct_lo, m_lo), (cct_hi, m_hi) in zip(cals, cals[1:]):
        if cct_lo <= target_cct <= cct_hi:
            w = (1.0 / target_cct - 1.0 / cct_hi) / (1.0 / cct_lo - 1.0 / cct_hi)
            return w * m_lo + (1.0 - w) * m_hi
    raise ConfigError("CCT interpolation fell through")  # pragma: no cover


# ---------------------------------------------------------------------------
# CCT / tint via the Planckian locus in CIE 1960 (u, v)

CCT_MIN, CCT_MAX = 2000.0, 12000.0
_CCT_STEP = 100.0

_M_XYZ2RGB = np.linalg.inv(_M_RGB2XYZ)


def _planck_uv(cct: np.ndarray) -> np.ndarray:
    """Planckian locus in 1960 uv via the cubic xy approximation (valid
    1667 K to 25000 K)."""
    t = np.asarray(cct, dtype=float)
    x = np.where(
        t < 4000.0,
        -0.2661239e9 / t**3 - 0.2343589e6 / t**2 + 0.8776956e3 / t + 0.179910,
        -3.0258469e9 / t**3 + 2.1070379e6 / t**2 + 0.2226347e3 / t + 0.240390,
    )
    y = np.where(
        t < 2222.0,
        -1.1063814 * x**3 - 1.34811020 * x**2 + 2.18555832 * x - 0.20219683,
        np.where(
            t < 4000.0,
            -0.9549476 * x**3 - 1.37418593 * x**2 + 2.09137015 * x - 0.16748867,
            3.0817580 * x**3 - 5.8733867 * x**2 + 3.75112997 * x - 0.37001483,
        ),
    )
    d = -2.0 * x + 12.0 * y + 3.0
    return np.stack([4.0 * x / d, 6.0 * y / d], axis=-1)


_LOCUS_CCT = np.arange(CCT_MIN, CCT_MAX + _CCT_STEP, _CCT_STEP)
_LOCUS_UV = _planck_uv(_LOCUS_CCT)


def _xyz_to_uv(xyz: np.ndarray) -> np.ndarray:
    x, y, z = xyz
    d = x + 15.0 * y + 3.0 * z
    return np.array([4.0 * x / d, 6.0 * y / d])


def _uv_to_xyz(uv: np.ndarray) -> np.ndarray:
    u, v = uv
    # CIE 1960: u = 4x/(-2x+12y+3), v = 6y/(-2x+12y+3)
    x = 3.0 * u / (2.0 * u - 8.0 * v + 4.0)
    y = 2.0 * v / (2.0 * u - 8.0 * v + 4.0)
    X = x / y
    Z = (1.0 - x - y) / y
    return np.array([X, 1.0, Z])


def _locus_point(cct: float) -> tuple[np.ndarray, np.ndarray]:
    """Locus uv and unit normal (rotated tangent) at a CCT."""
    if not (CCT_MIN <= cct <= CCT_MAX):
        raise ConfigError(f"cct {cct} outside supported range [{CCT_MIN}, {CCT_MAX}]")
    i = min(int((cct - CCT_MIN) / _CCT_STEP), len(_LOCUS_CCT) - 2)
    f = (cct - _LOCUS_CCT[i]) / _CCT_STEP
    uv = (1 - f) * _LOCUS_UV[i] + f * _LOCUS_UV[i + 1]
    tangent = _LOCUS_UV[i + 1] - _LOCUS_UV[i]
    tangent = tangent / np.linalg.norm(tangent)
    normal = np.array([-tangent[1], tangent[0]])
    return uv, normal


def _nearest_locus(uv: np.ndarray) -> tuple[float, float]:
    """Nearest Planckian-locus point: returns (cct, signed uv tint offset)."""
    seg = _LOCUS_UV[1:] - _LOCUS_UV[:-1]
    rel = uv - _LOCUS_UV[:-1]
    t = np.clip(np.einsum("ij,ij->i", rel, seg) / np.einsum("ij,ij->i", seg, seg), 0.0, 1.0)
    proj = _LOCUS_UV[:-1] + t[:, None] * seg
    d2 = np.sum((uv - proj) ** 2, axis=1)
    i = int(np.argmin(d2))
    cct = float(_LOCUS_CCT[i] + t[i] * _CCT_STEP)
    _, normal = _locus_point(min(max(cct, CCT_MIN), CCT_MAX))
    tint = float(np.dot(uv - proj[i], normal))
    return cct, tint


def cct_tint_to_gains(meta: CameraMetadata, cct: float, tint: float = 0.0) -> tuple[float, float]:
    """WB gains (g_r, g_b) for an illuminant at (cct, tint)."""
    uv, normal = _locus_point(cct)
    xyz = _uv_to_xyz(uv + tint * normal)
    srgb = _M_XYZ2RGB @ xyz
    ccm = interpolate_ccm(meta, cct)
    cam = np.linalg.solve(ccm, srgb)
    if np.any(cam <= 0):
        raise ConfigError("illuminant maps outside the camera gamut")
    return float(cam[1] / cam[0]), float(cam[1] / cam[2])


def gains_to_cct_tint(meta: CameraMetadata, gains: tuple[float, float],
                      n_iter: int = 8) -> tuple[float, float]:
    """Invert WB gains to (cct, tint). Iterates because the CCM used to map
    the camera illuminant to XYZ itself depends on the CCT estimate."""
    cam = np.array([1.0 / gains[0], 1.0, 1.0 / gains[1]])
    cct = 6500.0
    tint = 0.0
    for _ in range(n_iter):
        ccm = interpolate_ccm(meta, cct)
        xyz = _M_RGB2XYZ @ (ccm @ cam)
        cct, tint = _nearest_locus(_xyz_to_uv(xyz))
        cct = min(max(cct, CCT_MIN), CCT_MAX)
    return cct, tint
