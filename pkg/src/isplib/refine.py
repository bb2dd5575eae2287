"""Iterative bilateral solver, multi-scale LTM aggregation, guided filter.

The solver minimizes a bilateral-affinity quadratic via damped simultaneous
(Jacobi-style) relaxation sweeps with precomputed normalized weights. Sweeps
are double-buffered, so results are independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError
from .imagecore import luminance, resample_to


@dataclass(frozen=True)
class SolverConfig:
    k: int = 7
    sigma_s: float = 3.0
    sigma_r: float = 0.01
    lam: float = 1e-3
    n_iter: int = 80
    omega: float = 1.6

    def __post_init__(self):
        if self.k < 3 or self.k % 2 == 0:
            raise ConfigError("neighborhood size k must be odd and >= 3")
        if min(self.sigma_s, self.sigma_r, self.lam) <= 0 or self.n_iter < 0:
            raise ConfigError("solver scales and lambda must be positive")
        if not (1.0 <= self.omega < 2.0):
            raise ConfigError("relaxation omega must lie in [1, 2)")


def neighborhood_offsets(k: int) -> np.ndarray:
    r = k // 2
    return np.array([(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)],
                    dtype=np.intp)


def bilateral_weights(guide: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Normalized bilateral affinities for every pixel's k*k neighborhood.

    Returns (H, W, k*k); each pixel's weights sum to 1. Borders use
    reflection padding of the guide.
    """
    if not np.all(np.isfinite(guide)):
        raise ConfigError("guide must be finite")
    h, w = guide.shape
    r = cfg.k // 2
    gp = np.pad(guide, r, mode="reflect")
    offs = neighborhood_offsets(cfg.k)
    wts = np.empty((h, w, cfg.k * cfg.k))
    for i, (dy, dx) in enumerate(offs):
        nb = gp[r + dy:r + dy + h, r + dx:r + dx + w]
        wts[:, :, i] = np.exp(-(dy * dy + dx * dx) / (2.0 * cfg.sigma_s**2)
                              - (guide - nb) ** 2 / (2.0 * cfg.sigma_r**2))
    wts /= wts.sum(axis=2, keepdims=True)
    return wts


def bilateral_solve(M: np.ndarray, guide: np.ndarray,
                    cfg: SolverConfig | None = None,
                    weights: np.ndarray | None = None) -> np.ndarray:
    """Refine M (H, W) or (H, W, C) against a scalar guide.

    The same normalized weights are reused across channels and iterations.
    The result is clamped to the global per-channel range of M, which the
    damped update preserves up to over-relaxation transients.
    """
    cfg = cfg or SolverConfig()
    squeeze = M.ndim == 2
    data = M[:, :, None] if squeeze else M
    if data.shape[:2] != guide.shape:
        raise ConfigError("M and guide dims differ")
    if weights is None:
        weights = bilateral_weights(guide, cfg)
    offs = neighborhood_offsets(cfg.k)
    out = kernels.sor_solve(np.ascontiguousarray(data, dtype=float),
                            np.ascontiguousarray(weights, dtype=float),
                            np.ascontiguousarray(offs), cfg.lam, cfg.omega,
                            cfg.n_iter)
    lo = data.min(axis=(0, 1), keepdims=True)
    hi = data.max(axis=(0, 1), keepdims=True)
    out = np.clip(out, lo, hi)
    return out[:, :, 0] if squeeze else out


def solver_energy(Y: np.ndarray, M: np.ndarray, guide: np.ndarray,
                  cfg: SolverConfig, weights: np.ndarray | None = None) -> float:
    """Value of the quadratic objective (data + bilateral smoothness)."""
    if weights is None:
        weights = bilateral_weights(guide, cfg)
    squeeze = Y.ndim == 2
    Yc = Y[:, :, None] if squeeze else Y
    Mc = M[:, :, None] if squeeze else M
    h, w = guide.shape
    r = cfg.k // 2
    e = cfg.lam * float(np.sum((Yc - Mc) ** 2))
    Yp = np.pad(Yc, ((r, r), (r, r), (0, 0)), mode="reflect")
    for i, (dy, dx) in enumerate(neighborhood_offsets(cfg.k)):
        nb = Yp[r + dy:r + dy + h, r + dx:r + dx + w]
        e += float(np.sum(weights[:, :, i, None] * (Yc - nb) ** 2))
    return e


def multiscale_ltm(gain_img: np.ndarray, gtm_img: np.ndarray, grid,
                   scales: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125, 0.0625),
                   refine: bool = False,
                   cfg: SolverConfig | None = None) -> np.ndarray:
    """Aggregate LTM coefficient maps over multiple scales.

    Per scale: downsample the gain image, build its smoothed guidance, slice
    the grid, and bilinearly upsample the coefficient planes back to full
    size; the planes are averaged across scales. With `refine`, a bilateral
    solve over the averaged planes follows, guided by the gain image's
    luminance.

    `gtm_img` is accepted for interface symmetry with the per-scale input
    pair; a fixed coefficient grid does not depend on it (it fed the grid
    predictor this grid replaces).
    """
    from .photofinish import guidance_map, slice_ltm_grid

    if any(s <= 0 or s > 1 for s in scales):
        raise ConfigError("scales must lie in (0, 1]")
    h, w = gain_img.shape[:2]
    acc = np.zeros((h, w, 5))
    for s in scales:
        if s == 1.0:
            g_s = gain_img
        else:
            g_s = np.clip(resample_to(gain_img, (max(1, round(h * s)), max(1, round(w * s))),
                                      "bilinear"), 0.0, 1.0)
        guidance = guidance_map(g_s)
        planes = slice_ltm_grid(grid, guidance)
        if planes.shape[:2] != (h, w):
            planes = resample_to(planes, (h, w), "bilinear")
        acc += planes
    acc /= len(scales)
    if refine:
        acc = bilateral_solve(acc, luminance(gain_img), cfg or SolverConfig())
    return acc


def _box_sum(plane: np.ndarray, r: int) -> np.ndarray:
    """Sum over (2r+1)^2 windows clipped at the borders, via integral image."""
    h, w = plane.shape
    ii = np.zeros((h + 1, w + 1))
    ii[1:, 1:] = np.cumsum(np.cumsum(plane, axis=0), axis=1)
    y0 = np.clip(np.arange(h) - r, 0, h)
    y1 = np.clip(np.arange(h) + r + 1, 0, h)
    x0 = np.clip(np.arange(w) - r, 0, w)
    x1 = np.clip(np.arange(w) + r + 1, 0, w)
    return (ii[np.ix_(y1, x1)] - ii[np.ix_(y0, x1)]
            - ii[np.ix_(y1, x0)] + ii[np.ix_(y0, x0)])


def box_mean(plane: np.ndarray, r: int) -> np.ndarray:
    h, w = plane.shape
    ones = _box_sum(np.ones((h, w)), r)
    return _box_sum(plane, r) / ones


def guided_filter(p: np.ndarray, I: np.ndarray, r: int, eps: float) -> np.ndarray:
    """Edge-preserving filter of p with guide I via local linear models."""
    if p.shape != I.shape:
        raise ConfigError("p and I dims differ")
    mean_i = box_mean(I, r)
    mean_p = box_mean(p, r)
    corr_ip = box_mean(I * p, r)
    corr_ii = box_mean(I * I, r)
    cov_ip = corr_ip - mean_i * mean_p
    var_i = corr_ii - mean_i * mean_i
    a = cov_ip / (var_i + eps)
    b = mean_p - a * mean_i
    return box_mean(a, r) * I + box_mean(b, r)
