"""User-controlled operators inserted at fixed pipeline points.

Every operator is a bit-exact identity at its neutral setting. Y-only
operators work in YCbCr and leave chroma untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .imagecore import bt709_luma, hsv_to_rgb, resample_to, rgb_to_hsv, rgb_to_ycbcr, ycbcr_to_rgb
from .refine import guided_filter

AE_BINS = 96
AE_TARGET_MEAN = 0.08
AE_TARGET_SIGMA = 0.05
AE_MAX_EV = 1.8
AE_STEPS = 37  # 0.1 EV steps over [-1.8, +1.8]
AE_POOL = 128

HIGHLIGHT_EDGE = 0.7
SHADOW_EDGE = 0.3
EDGE_WIDTH = 0.1
VALID_LUMA = (0.1, 0.9)
# width of the linear fade-in of the valid-range gate; 0.05 is the narrowest
# transition that keeps the operator monotone in Y for |alpha| <= 1
# (max adjustment 0.045 times gate slope 1/width must stay below 1)
VALID_LUMA_SMOOTH = 0.05


@dataclass
class EditSettings:
    ev: float = 0.0
    auto_exposure: bool = False
    contrast: float = 0.0
    highlights: float = 0.0
    shadows: float = 0.0
    saturation: float = 0.0
    vibrance: float = 0.0
    sharpen: float = 0.0
    # master blend between the un-denoised and denoised image: 0 keeps the
    # input, 1 applies the luma/chroma result fully (their own strengths
    # default to 0, so the overall neutral is still an exact identity)
    denoise_strength: float = 1.0
    luma_denoise: float = 0.0
    chroma_denoise: float = 0.0
    cct: float | None = None
    tint: float | None = None

    def __post_init__(self):
        for name in ("contrast", "highlights", "shadows", "saturation", "vibrance"):
            v = getattr(self, name)
            if not (-1.0 <= v <= 1.0):
                raise ConfigError(f"{name} must lie in [-1, 1]")
        for name in ("denoise_strength", "luma_denoise", "chroma_denoise"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.sharpen < 0:
            raise ConfigError("sharpen must be >= 0")


def auto_exposure(linear_img: np.ndarray) -> float:
    """Histogram-based EV estimate on the linear image (before digital gain).

    The image is area-pooled to 128x128; candidate EVs over [-1.8, +1.8] are
    scored by the l2 distance between the scaled-luminance histogram and a
    Gaussian target centered at mid-gray 0.08.
    """
    small = resample_to(linear_img, (AE_POOL, AE_POOL), "area")
    y = np.clip(bt709_luma(small), 0.0, 1.0).ravel()
    if float(y.max(initial=0.0)) <= 1e-8:
        return AE_MAX_EV
    centers = (np.arange(AE_BINS) + 0.5) / AE_BINS
    target = np.exp(-0.5 * ((centers - AE_TARGET_MEAN) / AE_TARGET_SIGMA) ** 2)
    target /= target.sum()
    candidates = np.linspace(-AE_MAX_EV, AE_MAX_EV, AE_STEPS)
    best_ev, best_d = 0.0, np.inf
    for ev in candidates:
        hist, _ = np.histogram(np.clip(y * 2.0**ev, 0.0, 1.0), bins=AE_BINS, range=(0.0, 1.0))
        hist = hist / hist.sum()
        d = float(np.sum((hist - target) ** 2))
        if d < best_d - 1e-15:
            best_ev, best_d = float(ev), d
    return best_ev


def apply_ev(img: np.ndarray, ev: float) -> np.ndarray:
    if ev == 0.0:
        return img.copy()
    return np.clip(img * 2.0**ev, 0.0, 1.0)


def adjust_contrast(y: np.ndarray, alpha: float) -> np.ndarray:
    """Scale luminance around mid-gray: (Y-0.5)(1+0.5a)+0.5."""
    if alpha == 0.0:
        return y.copy()
    return np.clip((y - 0.5) * (1.0 + 0.5 * alpha) + 0.5, 0.0, 1.0)


def _ramp(x: np.ndarray, e0: float, e1: float) -> np.ndarray:
    """Quadratic transition ramp, clamped to [0, 1]."""
    t = np.clip((x - e0) / (e1 - e0), 0.0, 1.0)
    return t * t


def adjust_highlights_shadows(y: np.ndarray, alpha_high: float,
                              alpha_shad: float) -> np.ndarray:
    if alpha_high == 0.0 and alpha_shad == 0.0:
        return y.copy()
    m_high = _ramp(y, HIGHLIGHT_EDGE, HIGHLIGHT_EDGE + EDGE_WIDTH)
    m_shad = 1.0 - _ramp(y, SHADOW_EDGE, SHADOW_EDGE + EDGE_WIDTH)
    lo, hi = VALID_LUMA
    gate = (np.clip((y - lo) / VALID_LUMA_SMOOTH, 0.0, 1.0)
            * np.clip((hi - y) / VALID_LUMA_SMOOTH, 0.0, 1.0))
    out = y + gate * (alpha_high / 20.0 * y * m_high
                      + alpha_shad / 20.0 * (1.0 - y) * m_shad)
    return np.clip(out, 0.0, 1.0)


def adjust_sat_vib(img: np.ndarray, alpha_sat: float, alpha_vib: float) -> np.ndarray:
    """Saturation then vibrance in HSV; vibrance boosts muted colors only."""
    if alpha_sat == 0.0 and alpha_vib == 0.0:
        return img.copy()
    hsv = rgb_to_hsv(np.clip(img, 0.0, 1.0))
    s = hsv[..., 1]
    if alpha_sat != 0.0:
        s = np.minimum(s * (1.0 + alpha_sat), 1.0)
    if alpha_vib != 0.0:
        s = np.minimum(s * (1.0 + alpha_vib * (1.0 - s)), 1.0)
    out = hsv.copy()
    out[..., 1] = s
    return np.clip(hsv_to_rgb(out), 0.0, 1.0)


_GAUSS3 = None


def _gauss3_kernel() -> np.ndarray:
    global _GAUSS3
    if _GAUSS3 is None:
        k = np.exp(-np.arange(-1, 2) ** 2 / 2.0)
        _GAUSS3 = k / k.sum()
    return _GAUSS3


def _sep_conv(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Separable 2-D convolution with reflect padding, per channel."""
    r = len(k) // 2
    out = np.pad(img, [(r, r), (0, 0)] + [(0, 0)] * (img.ndim - 2), mode="reflect")
    out = sum(k[i] * out[i:i + img.shape[0]] for i in range(len(k)))
    out = np.pad(out, [(0, 0), (r, r)] + [(0, 0)] * (img.ndim - 2), mode="reflect")
    out = sum(k[i] * out[:, i:i + img.shape[1]] for i in range(len(k)))
    return out


def sharpen(img: np.ndarray, alpha: float) -> np.ndarray:
    """Edge-masked unsharp mask: img + alpha * (img - blur) * mask."""
    if alpha == 0.0:
        return img.copy()
    base = _sep_conv(img, _gauss3_kernel())
    detail = img - base
    p = np.pad(img, [(1, 1), (1, 1)] + [(0, 0)] * (img.ndim - 2), mode="reflect")
    gx = p[1:-1, 2:] - p[1:-1, :-2]
    gy = p[2:, 1:-1] - p[:-2, 1:-1]
    mag = np.sqrt(gx**2 + gy**2)
    if mag.ndim == 3:
        mag = mag.mean(axis=2)
    peak = mag.max()
    mask = mag / peak if peak > 0 else mag
    if img.ndim == 3:
        mask = mask[..., None]
    return np.clip(img + alpha * detail * mask, 0.0, 1.0)


def luma_denoise(img: np.ndarray, strength: float) -> np.ndarray:
    """Guided-filter luma smoothing blended by strength; chroma untouched."""
    if strength == 0.0:
        return img.copy()
    ycc = rgb_to_ycbcr(np.clip(img, 0.0, 1.0))
    y = ycc[..., 0]
    r = int(round(2 + 10 * strength))
    eps = (0.001 + 0.03 * strength) ** 2
    filtered = guided_filter(y, y, r, eps)
    ycc[..., 0] = (1.0 - strength) * y + strength * filtered
    return np.clip(ycbcr_to_rgb(ycc), 0.0, 1.0)


def chroma_denoise(img: np.ndarray, strength: float) -> np.ndarray:
    """Gaussian chroma smoothing with resolution-adaptive sigma; Y untouched."""
    if strength == 0.0:
        return img.copy()
    ycc = rgb_to_ycbcr(np.clip(img, 0.0, 1.0))
    h = img.shape[0]
    sigma = (3.0 + 12.0 * strength) * (h / 3000.0) ** 0.9
    radius = max(1, int(np.ceil(3.0 * sigma)))
    k = np.exp(-np.arange(-radius, radius + 1) ** 2 / (2.0 * sigma**2))
    k /= k.sum()
    blurred = _sep_conv(ycc[..., 1:], k)
    if strength > 0.4:
        blurred = _sep_conv(blurred, k)
    mix = strength**1.5
    ycc[..., 1:] = (1.0 - mix) * ycc[..., 1:] + mix * blurred
    return np.clip(ycbcr_to_rgb(ycc), 0.0, 1.0)


def blend_strength(before: np.ndarray, after: np.ndarray, s: float) -> np.ndarray:
    if before.shape != after.shape:
        raise ConfigError("blend inputs must share dims")
    if s == 0.0:
        return before.copy()
    if s == 1.0:
        return after.copy()
    return (1.0 - s) * before + s * after
