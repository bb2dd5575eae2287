"""Image buffers, color conversions, and resampling shared by the pipeline.

All functions operate on float64 numpy arrays: planes are (H, W), RGB images
are (H, W, 3). Everything is pure; inputs are never modified in place.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


class ColorState(enum.Enum):
    MOSAIC = "mosaic-normalized"
    CAMERA_RAW = "camera-raw"
    LINEAR_SRGB = "linear-srgb"
    PRE_GAMMA = "pre-gamma"
    DISPLAY = "display"


# Pipeline order; transitions may only move forward.
_STATE_ORDER = [ColorState.MOSAIC, ColorState.CAMERA_RAW, ColorState.LINEAR_SRGB,
                ColorState.PRE_GAMMA, ColorState.DISPLAY]


@dataclass(frozen=True)
class ImagePlane:
    """Single-channel float buffer."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ConfigError("ImagePlane expects a 2-D array")
        if not np.all(np.isfinite(self.data)):
            raise ConfigError("ImagePlane values must be finite")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class RgbImage:
    """Three-channel float buffer tagged with its position in the pipeline."""

    data: np.ndarray
    state: ColorState

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ConfigError("RgbImage expects an (H, W, 3) array")

    def advanced(self, data: np.ndarray, state: ColorState) -> "RgbImage":
        if _STATE_ORDER.index(state) < _STATE_ORDER.index(self.state):
            raise ConfigError(f"cannot move color state backwards: {self.state} -> {state}")
        return RgbImage(data, state)


# ---------------------------------------------------------------------------
# Color conversions

# ITU-R BT.709, full range, chroma centered at zero.
_KR, _KG, _KB = 0.2126, 0.7152, 0.0722

# Weights used by the solver guidance path (distinct from BT.709 luma).
_GUIDE_WEIGHTS = np.array([0.2989, 0.5870, 0.1140])


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = _KR * r + _KG * g + _KB * b
    cb = (b - y) / (2.0 * (1.0 - _KB))
    cr = (r - y) / (2.0 * (1.0 - _KR))
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    y, cb, cr = ycc[..., 0], ycc[..., 1], ycc[..., 2]
    r = y + 2.0 * (1.0 - _KR) * cr
    b = y + 2.0 * (1.0 - _KB) * cb
    g = (y - _KR * r - _KB * b) / _KG
    return np.stack([r, g, b], axis=-1)


def bt709_luma(rgb: np.ndarray) -> np.ndarray:
    return _KR * rgb[..., 0] + _KG * rgb[..., 1] + _KB * rgb[..., 2]


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Guidance luminance (0.2989 / 0.5870 / 0.1140 weights)."""
    return rgb @ _GUIDE_WEIGHTS


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = np.max(rgb, axis=-1)
    mn = np.min(rgb, axis=-1)
    d = v - mn
    s = np.where(v > 0, d / np.where(v > 0, v, 1.0), 0.0)
    # hue in [0, 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        dd = np.where(d > 0, d, 1.0)
        hr = ((g - b) / dd) % 6.0
        hg = (b - r) / dd + 2.0
        hb = (r - g) / dd + 4.0
    h = np.where(v == r, hr, np.where(v == g, hg, hb))
    h = np.where(d > 0, h / 6.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


# ---------------------------------------------------------------------------
# Resampling


def _output_dim(n: int, factor: float) -> int:
    out = int(round(n * factor))
    if out < 1:
        raise ConfigError(f"resample factor {factor} collapses a {n}-sample axis")
    return out


def resample(img: np.ndarray, factor: float, mode: str = "bilinear") -> np.ndarray:
    """Resize by `factor` (> 0). Modes: 'bilinear' (half-pixel centers,
    edges clamped) and 'area' (mean over fractional source boxes)."""
    if factor <= 0:
        raise ConfigError("resample factor must be positive")
    h, w = img.shape[:2]
    oh, ow = _output_dim(h, factor), _output_dim(w, factor)
    return resample_to(img, (oh, ow), mode)


def resample_to(img: np.ndarray, out_shape: tuple[int, int], mode: str = "bilinear") -> np.ndarray:
    oh, ow = out_shape
    if oh < 1 or ow < 1:
        raise ConfigError("resample target must have positive dims")
    if mode == "bilinear":
        return _bilinear(img, oh, ow)
    if mode == "area":
        return _area(img, oh, ow)
    raise ConfigError(f"unknown resample mode: {mode}")


def _bilinear(img: np.ndarray, oh: int, ow: int) -> np.ndarray:
    h, w = img.shape[:2]
    ys = (np.arange(oh) + 0.5) * (h / oh) - 0.5
    xs = (np.arange(ow) + 0.5) * (w / ow) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0).reshape(-1, 1)
    wx = (xs - x0).reshape(1, -1)
    if img.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]
    a = img[np.ix_(y0, x0)]
    b = img[np.ix_(y0, x1)]
    c = img[np.ix_(y1, x0)]
    d = img[np.ix_(y1, x1)]
    return (a * (1 - wy) * (1 - wx) + b * (1 - wy) * wx +
            c * wy * (1 - wx) + d * wy * wx)


def _area_axis(img: np.ndarray, out_n: int, axis: int) -> np.ndarray:
    n = img.shape[axis]
    arr = np.moveaxis(img, axis, 0)
    win = n / out_n
    # integral along the axis for O(1) fractional box sums
    cs = np.concatenate([np.zeros_like(arr[:1]), np.cumsum(arr, axis=0)], axis=0)

    def box(a: float, b: float) -> np.ndarray:
        ia, ib = int(np.floor(a)), int(np.floor(b))
        ia = min(ia, n - 1)
        ib = min(ib, n)
        total = cs[ib] - cs[ia]
        total = total - (a - ia) * arr[ia]
        if ib < n:
            total = total + (b - ib) * arr[ib]
        return total / (b - a)

    out = np.stack([box(j * win, (j + 1) * win) for j in range(out_n)], axis=0)
    return np.moveaxis(out, 0, axis)


def _area(img: np.ndarray, oh: int, ow: int) -> np.ndarray:
    return _area_axis(_area_axis(img, oh, 0), ow, 1)


# ---------------------------------------------------------------------------
# Soft CIE Lab (smooth-blend cube root)

_M_RGB2XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE = _M_RGB2XYZ @ np.ones(3)
_DELTA = 6.0 / 29.0
SOFT_LAB_SHARPNESS = 150.0


def soft_cbrt(t: np.ndarray, sharpness: float = SOFT_LAB_SHARPNESS) -> np.ndarray:
    """Sigmoid blend of the Lab cube-root branches, clipped to the valid
    range [4/29, 1] so that L stays inside [0, 100]."""
    t = np.asarray(t, dtype=float)
    s = 1.0 / (1.0 + np.exp(-sharpness * (t - _DELTA**3)))
    f = s * np.cbrt(np.maximum(t, 0.0)) + (1.0 - s) * (t / (3.0 * _DELTA**2) + 4.0 / 29.0)
    return np.clip(f, 4.0 / 29.0, 1.0)


def exact_cbrt(t: np.ndarray) -> np.ndarray:
    """Standard piecewise CIE Lab cube-root function."""
    t = np.asarray(t, dtype=float)
    return np.where(t > _DELTA**3, np.cbrt(np.maximum(t, 0.0)),
                    t / (3.0 * _DELTA**2) + 4.0 / 29.0)


def linear_srgb_to_soft_lab(rgb: np.ndarray) -> np.ndarray:
    """Linear sRGB -> CIE Lab using the smooth cube-root blend. Returns
    an (..., 3) array of (L, a, b); L is in [0, 100]."""
    xyz = rgb @ _M_RGB2XYZ.T
    f = soft_cbrt(xyz / _WHITE)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)
