# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: bilateral SOR sweeps, grid/LuT slicing, BGU fit/apply.

Numerics intentionally mirror kernels/_numpy.py; the two backends are
cross-checked in tests/test_kernels_parity.py.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


cdef inline Py_ssize_t _reflect(Py_ssize_t i, Py_ssize_t n) nogil:
    # numpy-style 'reflect' (no edge repeat): -1 -> 1, n -> n-2
    while i < 0 or i >= n:
        if i < 0:
            i = -i
        if i >= n:
            i = 2 * n - 2 - i
    return i


def sor_solve(cnp.ndarray[cnp.float64_t, ndim=3] M,
              cnp.ndarray[cnp.float64_t, ndim=3] weights,
              cnp.ndarray[cnp.npy_intp, ndim=2] offsets,
              double lam, double omega, int n_iter):
    cdef Py_ssize_t H = M.shape[0], W = M.shape[1], C = M.shape[2]
    cdef Py_ssize_t K = offsets.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Y = M.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Ynext = np.empty_like(M)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] tmp
    cdef double denom = lam + 1.0
    cdef Py_ssize_t it, y, x, c, k, qy, qx
    cdef double acc, w, target
    with nogil:
        for it in range(n_iter):
            for y in range(H):
                for x in range(W):
                    for c in range(C):
                        acc = 0.0
                        for k in range(K):
                            qy = _reflect(y + offsets[k, 0], H)
                            qx = _reflect(x + offsets[k, 1], W)
                            acc += weights[y, x, k] * Y[qy, qx, c]
                        target = (lam * M[y, x, c] + acc) / denom
                        Ynext[y, x, c] = Y[y, x, c] + omega * (target - Y[y, x, c])
            with gil:
                tmp = Y
                Y = Ynext
                Ynext = tmp
    return np.asarray(Y)


def slice_grid_3d(cnp.ndarray[cnp.float64_t, ndim=4] grid,
                  cnp.ndarray[cnp.float64_t, ndim=2] gx,
                  cnp.ndarray[cnp.float64_t, ndim=2] gy,
                  cnp.ndarray[cnp.float64_t, ndim=2] gz):
    cdef Py_ssize_t GY = grid.shape[0], GX = grid.shape[1], GZ = grid.shape[2]
    cdef Py_ssize_t C = grid.shape[3]
    cdef Py_ssize_t H = gx.shape[0], W = gx.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((H, W, C))
    cdef Py_ssize_t y, x, c, x0, y0, z0, x1, y1, z1
    cdef double fx, fy, fz, wx, wy, wz, v0, v1, v00, v01, v10, v11
    with nogil:
        for y in range(H):
            for x in range(W):
                fx = gx[y, x]
                fy = gy[y, x]
                fz = gz[y, x]
                if fx < 0: fx = 0
                if fx > GX - 1: fx = GX - 1
                if fy < 0: fy = 0
                if fy > GY - 1: fy = GY - 1
                if fz < 0: fz = 0
                if fz > GZ - 1: fz = GZ - 1
                x0 = <Py_ssize_t>fx
                y0 = <Py_ssize_t>fy
                z0 = <Py_ssize_t>fz
                x1 = x0 + 1 if x0 + 1 < GX else GX - 1
                y1 = y0 + 1 if y0 + 1 < GY else GY - 1
                z1 = z0 + 1 if z0 + 1 < GZ else GZ - 1
                wx = fx - x0
                wy = fy - y0
                wz = fz - z0
                for c in range(C):
                    v00 = grid[y0, x0, z0, c] * (1 - wz) + grid[y0, x0, z1, c] * wz
                    v01 = grid[y0, x1, z0, c] * (1 - wz) + grid[y0, x1, z1, c] * wz
                    v10 = grid[y1, x0, z0, c] * (1 - wz) + grid[y1, x0, z1, c] * wz
                    v11 = grid[y1, x1, z0, c] * (1 - wz) + grid[y1, x1, z1, c] * wz
                    v0 = v00 * (1 - wx) + v01 * wx
                    v1 = v10 * (1 - wx) + v11 * wx
                    out[y, x, c] = v0 * (1 - wy) + v1 * wy
    return np.asarray(out)


def sample_lut_2d(cnp.ndarray[cnp.float64_t, ndim=3] table,
                  cnp.ndarray[cnp.float64_t, ndim=2] u,
                  cnp.ndarray[cnp.float64_t, ndim=2] v):
    cdef Py_ssize_t N = table.shape[0], C = table.shape[2]
    cdef Py_ssize_t H = u.shape[0], W = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((H, W, C))
    cdef Py_ssize_t y, x, c, u0, v0, u1, v1
    cdef double fu, fv, wu, wv
    with nogil:
        for y in range(H):
            for x in range(W):
                fu = u[y, x]
                fv = v[y, x]
                if fu < 0: fu = 0
                if fu > N - 1: fu = N - 1
                if fv < 0: fv = 0
                if fv > N - 1: fv = N - 1
                u0 = <Py_ssize_t>fu
                v0 = <Py_ssize_t>fv
                u1 = u0 + 1 if u0 + 1 < N else N - 1
                v1 = v0 + 1 if v0 + 1 < N else N - 1
                wu = fu - u0
                wv = fv - v0
                for c in range(C):
                    out[y, x, c] = (table[u0, v0, c] * (1 - wu) * (1 - wv) +
                                    table[u0, v1, c] * (1 - wu) * wv +
                                    table[u1, v0, c] * wu * (1 - wv) +
                                    table[u1, v1, c] * wu * wv)
    return np.asarray(out)


def sample_lut_3d(cnp.ndarray[cnp.float64_t, ndim=4] table,
                  cnp.ndarray[cnp.float64_t, ndim=3] rgb):
    cdef Py_ssize_t N = table.shape[0]
    cdef Py_ssize_t H = rgb.shape[0], W = rgb.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((H, W, 3))
    cdef Py_ssize_t y, x, c, r0, g0, b0, r1, g1, b1
    cdef double fr, fg, fb, wr, wg, wb
    with nogil:
        for y in range(H):
            for x in range(W):
                fr = rgb[y, x, 0]
                fg = rgb[y, x, 1]
                fb = rgb[y, x, 2]
                if fr < 0: fr = 0
                if fr > 1: fr = 1
                if fg < 0: fg = 0
                if fg > 1: fg = 1
                if fb < 0: fb = 0
                if fb > 1: fb = 1
                fr *= N - 1
                fg *= N - 1
                fb *= N - 1
                r0 = <Py_ssize_t>fr
                g0 = <Py_ssize_t>fg
                b0 = <Py_ssize_t>fb
                if N > 1:
                    if r0 > N - 2: r0 = N - 2
                    if g0 > N - 2: g0 = N - 2
                    if b0 > N - 2: b0 = N - 2
                r1 = r0 + 1 if r0 + 1 < N else N - 1
                g1 = g0 + 1 if g0 + 1 < N else N - 1
                b1 = b0 + 1 if b0 + 1 < N else N - 1
                wr = fr - r0
                wg = fg - g0
                wb = fb - b0
                for c in range(3):
                    out[y, x, c] = (
                        table[r0, g0, b0, c] * (1 - wr) * (1 - wg) * (1 - wb) +
                        table[r0, g0, b1, c] * (1 - wr) * (1 - wg) * wb +
                        table[r0, g1, b0, c] * (1 - wr) * wg * (1 - wb) +
                        table[r0, g1, b1, c] * (1 - wr) * wg * wb +
                        table[r1, g0, b0, c] * wr * (1 - wg) * (1 - wb) +
                        table[r1, g0, b1, c] * wr * (1 - wg) * wb +
                        table[r1, g1, b0, c] * wr * wg * (1 - wb) +
                        table[r1, g1, b1, c] * wr * wg * wb)
    return np.asarray(out)


def bgu_accumulate(cnp.ndarray[cnp.float64_t, ndim=2] low_in,
                   cnp.ndarray[cnp.float64_t, ndim=2] low_out,
                   cnp.ndarray[cnp.npy_intp, ndim=1] cell_y,
                   cnp.ndarray[cnp.npy_intp, ndim=1] cell_x,
                   cnp.ndarray[cnp.npy_intp, ndim=1] cell_z,
                   int gy, int gx, int gz):
    cdef Py_ssize_t n = low_in.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=5] S = np.zeros((gy, gx, gz, 4, 4))
    cdef cnp.ndarray[cnp.float64_t, ndim=5] T = np.zeros((gy, gx, gz, 3, 4))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] count = np.zeros((gy, gx, gz))
    cdef Py_ssize_t p, i, j, cy, cx, cz
    cdef double xi[4]
    with nogil:
        for p in range(n):
            cy = cell_y[p]
            cx = cell_x[p]
            cz = cell_z[p]
            xi[0] = low_in[p, 0]
            xi[1] = low_in[p, 1]
            xi[2] = low_in[p, 2]
            xi[3] = 1.0
            for i in range(4):
                for j in range(4):
                    S[cy, cx, cz, i, j] += xi[i] * xi[j]
            for i in range(3):
                for j in range(4):
                    T[cy, cx, cz, i, j] += low_out[p, i] * xi[j]
            count[cy, cx, cz] += 1.0
    return np.asarray(S), np.asarray(T), np.asarray(count)


def bgu_apply(cnp.ndarray[cnp.float64_t, ndim=5] affines,
              cnp.ndarray[cnp.float64_t, ndim=3] guide,
              cnp.ndarray[cnp.float64_t, ndim=2] gx,
              cnp.ndarray[cnp.float64_t, ndim=2] gy,
              cnp.ndarray[cnp.float64_t, ndim=2] gz):
    cdef Py_ssize_t GY = affines.shape[0], GX = affines.shape[1], GZ = affines.shape[2]
    cdef Py_ssize_t H = guide.shape[0], W = guide.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((H, W, 3))
    cdef Py_ssize_t y, x, c, j, x0, y0, z0, x1, y1, z1
    cdef double fx, fy, fz, wx, wy, wz, acc, co
    cdef double w000, w001, w010, w011, w100, w101, w110, w111
    cdef double vec[4]
    with nogil:
        for y in range(H):
            for x in range(W):
                fx = gx[y, x]
                fy = gy[y, x]
                fz = gz[y, x]
                if fx < 0: fx = 0
                if fx > GX - 1: fx = GX - 1
                if fy < 0: fy = 0
                if fy > GY - 1: fy = GY - 1
                if fz < 0: fz = 0
                if fz > GZ - 1: fz = GZ - 1
                x0 = <Py_ssize_t>fx
                y0 = <Py_ssize_t>fy
                z0 = <Py_ssize_t>fz
                x1 = x0 + 1 if x0 + 1 < GX else GX - 1
                y1 = y0 + 1 if y0 + 1 < GY else GY - 1
                z1 = z0 + 1 if z0 + 1 < GZ else GZ - 1
                wx = fx - x0
                wy = fy - y0
                wz = fz - z0
                w000 = (1 - wy) * (1 - wx) * (1 - wz)
                w001 = (1 - wy) * (1 - wx) * wz
                w010 = (1 - wy) * wx * (1 - wz)
                w011 = (1 - wy) * wx * wz
                w100 = wy * (1 - wx) * (1 - wz)
                w101 = wy * (1 - wx) * wz
                w110 = wy * wx * (1 - wz)
                w111 = wy * wx * wz
                vec[0] = guide[y, x, 0]
                vec[1] = guide[y, x, 1]
                vec[2] = guide[y, x, 2]
                vec[3] = 1.0
                for c in range(3):
                    acc = 0.0
                    for j in range(4):
                        co = (affines[y0, x0, z0, c, j] * w000 +
                              affines[y0, x0, z1, c, j] * w001 +
                              affines[y0, x1, z0, c, j] * w010 +
                              affines[y0, x1, z1, c, j] * w011 +
                              affines[y1, x0, z0, c, j] * w100 +
                              affines[y1, x0, z1, c, j] * w101 +
                              affines[y1, x1, z0, c, j] * w110 +
                              affines[y1, x1, z1, c, j] * w111)
                        acc += co * vec[j]
                    out[y, x, c] = acc
    return np.asarray(out)
