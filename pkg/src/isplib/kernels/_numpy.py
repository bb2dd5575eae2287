"""Pure NumPy implementations of the hot kernels.

These are the reference/fallback versions of everything in the compiled
extension. Signatures and numerics match `_core.pyx`; the dispatch module
picks whichever backend is available.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def sor_solve(M: np.ndarray, weights: np.ndarray, offsets: np.ndarray,
              lam: float, omega: float, n_iter: int) -> np.ndarray:
    """Damped fixed-point sweeps of the bilateral smoothing system.

    M: (H, W, C) data term, weights: (H, W, K) normalized bilateral weights
    for the K neighborhood offsets (dy, dx) in `offsets`. Returns the refined
    (H, W, C) tensor after `n_iter` simultaneous sweeps with relaxation omega.
    """
    H, W, C = M.shape
    K = offsets.shape[0]
    r = int(np.max(np.abs(offsets)))
    Y = M.copy()
    denom = lam + 1.0
    for _ in range(n_iter):
        Yp = np.pad(Y, ((r, r), (r, r), (0, 0)), mode="reflect")
        smooth = np.zeros_like(Y)
        for i in range(K):
            dy, dx = offsets[i]
            nb = Yp[r + dy:r + dy + H, r + dx:r + dx + W]
            smooth += weights[:, :, i, None] * nb
        target = (lam * M + smooth) / denom
        Y += omega * (target - Y)
    return Y


def slice_grid_3d(grid: np.ndarray, gx: np.ndarray, gy: np.ndarray,
                  gz: np.ndarray) -> np.ndarray:
    """Trilinear sampling of a (GY, GX, GZ, C) lattice at fractional coords.

    gx/gy/gz are same-shape fractional lattice coordinates (already scaled to
    index units, clamped here). Returns array of shape gx.shape + (C,).
    """
    GY, GX, GZ = grid.shape[:3]
    fx = np.clip(gx, 0.0, GX - 1.0)
    fy = np.clip(gy, 0.0, GY - 1.0)
    fz = np.clip(gz, 0.0, GZ - 1.0)
    x0 = np.floor(fx).astype(np.intp)
    y0 = np.floor(fy).astype(np.intp)
    z0 = np.floor(fz).astype(np.intp)
    x1 = np.minimum(x0 + 1, GX - 1)
    y1 = np.minimum(y0 + 1, GY - 1)
    z1 = np.minimum(z0 + 1, GZ - 1)
    wx = (fx - x0)[..., None]
    wy = (fy - y0)[..., None]
    wz = (fz - z0)[..., None]
    c000 = grid[y0, x0, z0]
    c001 = grid[y0, x0, z1]
    c010 = grid[y0, x1, z0]
    c011 = grid[y0, x1, z1]
    c100 = grid[y1, x0, z0]
    c101 = grid[y1, x0, z1]
    c110 = grid[y1, x1, z0]
    c111 = grid[y1, x1, z1]
    out = ((c000 * (1 - wz) + c001 * wz) * (1 - wx) +
           (c010 * (1 - wz) + c011 * wz) * wx) * (1 - wy) + \
          ((c100 * (1 - wz) + c101 * wz) * (1 - wx) +
           (c110 * (1 - wz) + c111 * wz) * wx) * wy
    return out


def sample_lut_2d(table: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear sampling of a (N, N, C) table at fractional coords (u=row, v=col)."""
    N = table.shape[0]
    fu = np.clip(u, 0.0, N - 1.0)
    fv = np.clip(v, 0.0, N - 1.0)
    u0 = np.floor(fu).astype(np.intp)
    v0 = np.floor(fv).astype(np.intp)
    u1 = np.minimum(u0 + 1, N - 1)
    v1 = np.minimum(v0 + 1, N - 1)
    wu = (fu - u0)[..., None]
    wv = (fv - v0)[..., None]
    return (table[u0, v0] * (1 - wu) * (1 - wv) +
            table[u0, v1] * (1 - wu) * wv +
            table[u1, v0] * wu * (1 - wv) +
            table[u1, v1] * wu * wv)


def sample_lut_3d(table: np.ndarray, rgb: np.ndarray) -> np.ndarray:
    """Trilinear sampling of a (N, N, N, 3) lattice over [0,1]^3 at rgb points."""
    N = table.shape[0]
    f = np.clip(rgb, 0.0, 1.0) * (N - 1)
    i0 = np.floor(f).astype(np.intp)
    i0 = np.minimum(i0, N - 2) if N > 1 else i0
    i1 = np.minimum(i0 + 1, N - 1)
    w = f - i0
    r0, g0, b0 = i0[..., 0], i0[..., 1], i0[..., 2]
    r1, g1, b1 = i1[..., 0], i1[..., 1], i1[..., 2]
    wr, wg, wb = w[..., 0:1], w[..., 1:2], w[..., 2:3]
    out = (table[r0, g0, b0] * (1 - wr) * (1 - wg) * (1 - wb) +
           table[r0, g0, b1] * (1 - wr) * (1 - wg) * wb +
           table[r0, g1, b0] * (1 - wr) * wg * (1 - wb) +
           table[r0, g1, b1] * (1 - wr) * wg * wb +
           table[r1, g0, b0] * wr * (1 - wg) * (1 - wb) +
           table[r1, g0, b1] * wr * (1 - wg) * wb +
           table[r1, g1, b0] * wr * wg * (1 - wb) +
           table[r1, g1, b1] * wr * wg * wb)
    return out


def bgu_accumulate(low_in: np.ndarray, low_out: np.ndarray,
                   cell_y: np.ndarray, cell_x: np.ndarray, cell_z: np.ndarray,
                   gy: int, gx: int, gz: int):
    """Accumulate per-cell least-squares statistics for the bilateral grid.

    Returns (S, T, count): S is (gy,gx,gz,4,4) Gram of [rgb;1], T is
    (gy,gx,gz,3,4) output moments, count the number of samples per cell.
    """
    n = low_in.shape[0]
    flat = (cell_y * gx + cell_x) * gz + cell_z
    x1 = np.concatenate([low_in, np.ones((n, 1))], axis=1)
    S = np.zeros((gy * gx * gz, 4, 4))
    T = np.zeros((gy * gx * gz, 3, 4))
    count = np.zeros(gy * gx * gz)
    np.add.at(S, flat, x1[:, :, None] * x1[:, None, :])
    np.add.at(T, flat, low_out[:, :, None] * x1[:, None, :])
    np.add.at(count, flat, 1.0)
    return (S.reshape(gy, gx, gz, 4, 4),
            T.reshape(gy, gx, gz, 3, 4),
            count.reshape(gy, gx, gz))


def bgu_apply(affines: np.ndarray, guide: np.ndarray, gx: np.ndarray,
              gy: np.ndarray, gz: np.ndarray) -> np.ndarray:
    """Trilinearly interpolate per-cell affines and apply them to the guide.

    affines: (GY, GX, GZ, 3, 4); guide: (H, W, 3); gx/gy/gz: (H, W) coords.
    """
    H, W = guide.shape[:2]
    coeff = slice_grid_3d(affines.reshape(*affines.shape[:3], 12), gx, gy, gz)
    coeff = coeff.reshape(H, W, 3, 4)
    ones = np.ones((H, W, 1))
    vec = np.concatenate([guide, ones], axis=2)
    return np.einsum("hwcj,hwj->hwc", coeff, vec)
