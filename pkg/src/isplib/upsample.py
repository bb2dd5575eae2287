"""Bilateral guided upsampling with per-channel gated regularization.

A coarse (H/64, W/64, 16) grid accumulates least-squares statistics from the
low-resolution input/output pair; each cell solves a regularized 3x4 affine
whose regularization target is a per-channel gain (the cell's own output/input
ratio when populated, a global pooled ratio otherwise). The solved affines are
sliced trilinearly over the high-resolution guide. No grid blurring is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError
from .imagecore import bt709_luma

CELL_PX = 64      # spatial cell size in full-resolution pixels
DEPTH_BINS = 16   # luminance bins
DEFAULT_LAMBDA = 1e-3


@dataclass
class BguGrid:
    """Accumulated per-cell statistics: S (Gram of [rgb;1]), T (output
    moments), count; plus the geometry needed for slicing."""

    S: np.ndarray       # (gy, gx, gz, 4, 4)
    T: np.ndarray       # (gy, gx, gz, 3, 4)
    count: np.ndarray   # (gy, gx, gz)
    hi_shape: tuple[int, int]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.count.shape


def _grid_dims(hi_h: int, hi_w: int) -> tuple[int, int, int]:
    return (int(np.ceil(hi_h / CELL_PX)), int(np.ceil(hi_w / CELL_PX)), DEPTH_BINS)


def bgu_fit(low_in: np.ndarray, low_out: np.ndarray,
            hi_shape: tuple[int, int]) -> BguGrid:
    """Accumulate affine-fitting statistics from the low-resolution pair."""
    if low_in.shape != low_out.shape:
        raise ConfigError("low_in and low_out dims differ")
    lh, lw = low_in.shape[:2]
    hi_h, hi_w = hi_shape
    gy, gx, gz = _grid_dims(hi_h, hi_w)
    ys, xs = np.mgrid[0:lh, 0:lw]
    # low-res sample centers mapped into full-resolution pixel coordinates
    cy = np.minimum(((ys + 0.5) * (hi_h / lh)).astype(np.intp) // CELL_PX, gy - 1)
    cx = np.minimum(((xs + 0.5) * (hi_w / lw)).astype(np.intp) // CELL_PX, gx - 1)
    lum = np.clip(bt709_luma(low_in), 0.0, 1.0)
    cz = np.minimum((lum * DEPTH_BINS).astype(np.intp), DEPTH_BINS - 1)
    S, T, count = kernels.bgu_accumulate(
        np.ascontiguousarray(low_in.reshape(-1, 3), dtype=float),
        np.ascontiguousarray(low_out.reshape(-1, 3), dtype=float),
        np.ascontiguousarray(cy.ravel()), np.ascontiguousarray(cx.ravel()),
        np.ascontiguousarray(cz.ravel()), gy, gx, gz)
    return BguGrid(S=S, T=T, count=count, hi_shape=(hi_h, hi_w))


def bgu_solve(grid: BguGrid, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Solve every cell's gated regularized normal equations.

    Returns (gy, gx, gz, 3, 4) affines. Empty cells fall back to the global
    per-channel gains pooled over the whole grid.
    """
    if lam <= 0:
        raise ConfigError("regularization lambda must be positive")
    gy, gx, gz = grid.dims
    S = grid.S.reshape(-1, 4, 4)
    T = grid.T.reshape(-1, 3, 4)
    count = grid.count.ravel()
    lam_m = lam * (count + 1.0)

    lam_glob = lam * (count.sum() + 1.0)
    r_glob = T[:, :, 3].sum(axis=0) / (S[:, :3, 3].sum(axis=0) + lam_glob)

    # per-channel gated gains
    r = np.where(count[:, None] > 0,
                 T[:, :, 3] / (S[:, np.arange(3), 3] + lam_m[:, None]),
                 r_glob[None, :])
    R = np.zeros_like(T)
    R[:, np.arange(3), np.arange(3)] = r

    lhs = S + lam_m[:, None, None] * np.eye(4)
    rhs = T + lam_m[:, None, None] * R
    # A @ lhs = rhs  =>  lhs^T A^T = rhs^T
    A = np.linalg.solve(np.transpose(lhs, (0, 2, 1)),
                        np.transpose(rhs, (0, 2, 1)))
    A = np.transpose(A, (0, 2, 1))
    return A.reshape(gy, gx, gz, 3, 4)


def bgu_slice(affines: np.ndarray, hi_guide: np.ndarray) -> np.ndarray:
    """Trilinearly interpolate the affines over the guide and apply them.

    Cell centers are the interpolation lattice: spatial coordinate
    (x + 0.5)/64 - 0.5, depth coordinate luma*16 - 0.5.
    """
    h, w = hi_guide.shape[:2]
    gy, gx, gz = affines.shape[:3]
    ys = (np.arange(h) + 0.5) / CELL_PX - 0.5
    xs = (np.arange(w) + 0.5) / CELL_PX - 0.5
    cy = np.broadcast_to(ys.reshape(-1, 1), (h, w))
    cx = np.broadcast_to(xs.reshape(1, -1), (h, w))
    lum = np.clip(bt709_luma(hi_guide), 0.0, 1.0)
    cz = lum * DEPTH_BINS - 0.5
    out = kernels.bgu_apply(np.ascontiguousarray(affines, dtype=float),
                            np.ascontiguousarray(hi_guide, dtype=float),
                            np.ascontiguousarray(cx, dtype=float),
                            np.ascontiguousarray(cy, dtype=float),
                            np.ascontiguousarray(cz, dtype=float))
    return np.clip(out, 0.0, 1.0)


def bgu_upsample(low_in: np.ndarray, low_out: np.ndarray, hi_guide: np.ndarray,
                 lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """fit -> solve -> slice; output has the guide's dimensions."""
    grid = bgu_fit(low_in, low_out, hi_guide.shape[:2])
    affines = bgu_solve(grid, lam)
    return bgu_slice(affines, hi_guide)
