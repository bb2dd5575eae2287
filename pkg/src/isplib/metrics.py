"""Quality metrics: PSNR, SSIM, soft-Lab deltaE76, TV smoothness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .imagecore import linear_srgb_to_soft_lab

SSIM_WINDOW = 11
SSIM_SIGMA = 1.0
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


@dataclass
class MetricReport:
    psnr: float
    ssim: float
    delta_e76: float

    def as_dict(self) -> dict:
        return {"psnr": self.psnr, "ssim": self.ssim, "delta_e76": self.delta_e76}


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ConfigError("psnr inputs must share dims")
    mse = float(np.mean((a.astype(float) - b.astype(float)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(n: int, sigma: float) -> np.ndarray:
    ax = np.arange(n) - (n - 1) / 2.0
    k = np.exp(-(ax**2) / (2.0 * sigma**2))
    k /= k.sum()
    return np.outer(k, k)


def _valid_windows(plane: np.ndarray, win: np.ndarray) -> np.ndarray:
    """'valid'-mode correlation of a plane with a small window."""
    n = win.shape[0]
    h, w = plane.shape
    out = np.zeros((h - n + 1, w - n + 1))
    for dy in range(n):
        for dx in range(n):
            out += win[dy, dx] * plane[dy:dy + h - n + 1, dx:dx + w - n + 1]
    return out


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma=1), per channel then
    averaged across channels."""
    if a.shape != b.shape:
        raise ConfigError("ssim inputs must share dims")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ConfigError("image smaller than the SSIM window")
    if a.ndim == 2:
        a = a[..., None]
        b = b[..., None]
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    vals = []
    for c in range(a.shape[2]):
        x = a[..., c].astype(float)
        y = b[..., c].astype(float)
        mu1 = _valid_windows(x, win)
        mu2 = _valid_windows(y, win)
        s11 = _valid_windows(x * x, win) - mu1**2
        s22 = _valid_windows(y * y, win) - mu2**2
        s12 = _valid_windows(x * y, win) - mu1 * mu2
        sm = ((2 * mu1 * mu2 + SSIM_C1) * (2 * s12 + SSIM_C2)) / \
             ((mu1**2 + mu2**2 + SSIM_C1) * (s11 + s22 + SSIM_C2))
        vals.append(float(sm.mean()))
    return float(np.mean(vals))


def delta_e76(a: np.ndarray, b: np.ndarray) -> float:
    """Mean Euclidean Lab distance using the smooth-blend Lab conversion."""
    la = linear_srgb_to_soft_lab(a)
    lb = linear_srgb_to_soft_lab(b)
    return float(np.mean(np.linalg.norm(la - lb, axis=-1)))


def tv_smoothness(plane: np.ndarray) -> float:
    """Isotropic total variation, (|grad_h|_1 + |grad_w|_1) / 2, normalized
    by the pixel count."""
    plane = np.asarray(plane, dtype=float)
    gh = np.abs(np.diff(plane, axis=0)).sum()
    gw = np.abs(np.diff(plane, axis=1)).sum()
    return float(0.5 * (gh + gw) / plane.size)


def report(a: np.ndarray, b: np.ndarray) -> MetricReport:
    return MetricReport(psnr=psnr(a, b), ssim=ssim(a, b), delta_e76=delta_e76(a, b))
