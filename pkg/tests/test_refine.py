import numpy as np
import pytest

from isplib import refine
from isplib.errors import ConfigError
from isplib.photofinish import LtmGrid, slice_ltm_grid

from conftest import make_scene


def small_cfg(**kw):
    defaults = dict(k=5, sigma_s=2.0, sigma_r=0.05, lam=1e-3, n_iter=40, omega=1.5)
    defaults.update(kw)
    return refine.SolverConfig(**defaults)


class TestSolverConfig:
    def test_paper_defaults(self):
        cfg = refine.SolverConfig()
        assert (cfg.k, cfg.sigma_s, cfg.sigma_r) == (7, 3.0, 0.01)
        assert (cfg.lam, cfg.n_iter, cfg.omega) == (1e-3, 80, 1.6)

    def test_even_k_rejected(self):
        with pytest.raises(ConfigError):
            refine.SolverConfig(k=4)

    def test_omega_range(self):
        with pytest.raises(ConfigError):
            refine.SolverConfig(omega=2.0)


class TestBilateralWeights:
    def test_constant_guide_gives_spatial_kernel(self):
        cfg = small_cfg()
        w = refine.bilateral_weights(np.full((10, 10), 0.5), cfg)
        offs = refine.neighborhood_offsets(cfg.k)
        spatial = np.exp(-(offs[:, 0] ** 2 + offs[:, 1] ** 2) / (2 * cfg.sigma_s**2))
        spatial = spatial / spatial.sum()
        assert np.abs(w[5, 5] - spatial).max() < 1e-12

    def test_rows_sum_to_one(self, rng):
        w = refine.bilateral_weights(rng.random((12, 14)), small_cfg())
        assert np.abs(w.sum(axis=2) - 1.0).max() < 1e-6

    def test_strong_edge_blocks_cross_weights(self):
        cfg = refine.SolverConfig()  # sigma_r=0.01
        guide = np.zeros((10, 16))
        guide[:, 8:] = 1.0
        w = refine.bilateral_weights(guide, cfg)
        offs = refine.neighborhood_offsets(cfg.k)
        # pixel just left of the edge: weights reaching across the step
        cross = [i for i, (dy, dx) in enumerate(offs) if 7 + dx >= 8]
        same = [i for i, (dy, dx) in enumerate(offs) if 7 + dx < 8]
        ratio = w[5, 7, cross].max() / w[5, 7, same].max()
        assert ratio < 1e-6


class TestBilateralSolve:
    def test_constant_fixed_point(self):
        m = np.full((12, 12), 0.3)
        guide = make_scene(12, 12)[:, :, 0]
        out = refine.bilateral_solve(m, guide, refine.SolverConfig())
        assert np.abs(out - 0.3).max() < 1e-12

    def test_huge_lambda_returns_input(self, rng):
        m = rng.random((12, 12))
        guide = rng.random((12, 12))
        out = refine.bilateral_solve(m, guide, refine.SolverConfig(lam=1e6))
        assert np.abs(out - m).max() < 1e-4

    def test_range_preserved(self, rng):
        m = rng.random((20, 20, 3))
        guide = rng.random((20, 20))
        out = refine.bilateral_solve(m, guide, small_cfg())
        for c in range(3):
            assert out[..., c].min() >= m[..., c].min() - 1e-12
            assert out[..., c].max() <= m[..., c].max() + 1e-12

    def test_channels_independent(self, rng):
        m = rng.random((10, 10, 2))
        guide = rng.random((10, 10))
        cfg = small_cfg()
        both = refine.bilateral_solve(m, guide, cfg)
        c0 = refine.bilateral_solve(m[..., 0], guide, cfg)
        assert np.abs(both[..., 0] - c0).max() < 1e-12

    def test_sor_reaches_direct_minimizer_energy(self, rng):
        # 12x12 instance: noisy data, step guide, paper defaults
        cfg = refine.SolverConfig()
        guide = np.zeros((12, 12))
        guide[:, 6:] = 1.0
        m = np.clip(0.15 + 0.7 * guide + rng.normal(0, 0.1, (12, 12)), 0, 1)
        weights = refine.bilateral_weights(guide, cfg)
        y_sor = refine.bilateral_solve(m, guide, cfg, weights=weights)
        y_direct = direct_minimizer(m, weights, cfg)
        e_sor = refine.solver_energy(y_sor, m, guide, cfg, weights)
        e_dir = refine.solver_energy(y_direct, m, guide, cfg, weights)
        assert e_sor <= e_dir * 1.01

    def test_jacobi_energy_non_increasing(self, rng):
        cfg = refine.SolverConfig(n_iter=1, omega=1.0)
        guide = make_scene(10, 10)[:, :, 1]
        m = rng.random((10, 10))
        weights = refine.bilateral_weights(guide, cfg)
        energies = []
        y = m.copy()
        for _ in range(6):
            energies.append(refine.solver_energy(y, m, guide, cfg, weights))
            y = _one_sweep(y, m, weights, cfg)
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def _one_sweep(y, m, weights, cfg):
    """Single omega=1 Jacobi sweep (for the energy-descent property)."""
    h, w = y.shape
    r = cfg.k // 2
    yp = np.pad(y, r, mode="reflect")
    smooth = np.zeros_like(y)
    for i, (dy, dx) in enumerate(refine.neighborhood_offsets(cfg.k)):
        smooth += weights[:, :, i] * yp[r + dy:r + dy + h, r + dx:r + dx + w]
    return (cfg.lam * m + smooth) / (cfg.lam + 1.0)


def direct_minimizer(m, weights, cfg):
    """Assemble and solve the normal equations of the quadratic energy
    exactly (dense; only viable at toy sizes)."""
    h, w = m.shape
    n = h * w
    r = cfg.k // 2

    def refl(i, nmax):
        while i < 0 or i >= nmax:
            if i < 0:
                i = -i
            if i >= nmax:
                i = 2 * nmax - 2 - i
        return i

    A = np.zeros((n, n))
    b = cfg.lam * m.ravel()
    for p in range(n):
        A[p, p] += cfg.lam
    offs = refine.neighborhood_offsets(cfg.k)
    for y in range(h):
        for x in range(w):
            p = y * w + x
            for i, (dy, dx) in enumerate(offs):
                q = refl(y + dy, h) * w + refl(x + dx, w)
                wpq = weights[y, x, i]
                A[p, p] += wpq
                A[p, q] -= wpq
                A[q, q] += wpq
                A[q, p] -= wpq
    return np.linalg.solve(A, b).reshape(h, w)


class TestMultiscale:
    def test_single_scale_equals_plain_slice(self, rng):
        from isplib.photofinish import guidance_map

        gain = make_scene(32, 32, seed=7)
        gtm = np.clip(gain * 1.2, 0, 1)
        grid = LtmGrid(rng.random((4, 4, 3, 5)).astype(np.float32))
        ms = refine.multiscale_ltm(gain, gtm, grid, scales=(1.0,), refine=False)
        single = slice_ltm_grid(grid, guidance_map(gain))
        assert np.abs(ms - single).max() < 1e-12

    def test_constant_grid_scale_invariant(self):
        gain = make_scene(32, 32, seed=9)
        gtm = gain
        vals = np.ones((4, 4, 3, 5), dtype=np.float32)
        vals[..., 4] = -2.0
        grid = LtmGrid(vals)
        ms = refine.multiscale_ltm(gain, gtm, grid)
        single = refine.multiscale_ltm(gain, gtm, grid, scales=(1.0,))
        assert np.abs(ms - single).max() < 1e-9

    def test_refinement_stays_in_range(self, rng):
        gain = make_scene(40, 40, seed=11)
        gtm = np.clip(gain**0.8, 0, 1)
        grid = LtmGrid(rng.random((6, 6, 4, 5)).astype(np.float32))
        plain = refine.multiscale_ltm(gain, gtm, grid, refine=False)
        refined = refine.multiscale_ltm(gain, gtm, grid, refine=True,
                                        cfg=small_cfg(n_iter=20))
        assert not np.array_equal(plain, refined)
        for c in range(5):
            assert refined[..., c].min() >= plain[..., c].min() - 1e-6
            assert refined[..., c].max() <= plain[..., c].max() + 1e-6

    def test_bad_scales_rejected(self):
        gain = make_scene(16, 16)
        with pytest.raises(ConfigError):
            refine.multiscale_ltm(gain, gain, LtmGrid.neutral(), scales=(1.5,))


class TestGuidedFilter:
    def test_self_guide_near_identity(self, rng):
        img = make_scene(32, 32, seed=13)[:, :, 0]
        out = refine.guided_filter(img, img, r=4, eps=1e-9)
        assert np.abs(out - img).max() < 1e-3

    def test_constant_guide_gives_smoothed_mean(self, rng):
        # a = 0, b = mean(p); the output q = mean(a) I + mean(b) is the
        # window mean of b, i.e. the box mean applied twice
        p = rng.random((20, 20))
        guide = np.full((20, 20), 0.5)
        out = refine.guided_filter(p, guide, r=3, eps=1e-6)
        expect = refine.box_mean(refine.box_mean(p, 3), 3)
        assert np.abs(out - expect).max() < 1e-9

    def test_huge_eps_gives_smoothed_mean(self, rng):
        p = rng.random((20, 20))
        guide = rng.random((20, 20))
        out = refine.guided_filter(p, guide, r=3, eps=1e9)
        expect = refine.box_mean(refine.box_mean(p, 3), 3)
        assert np.abs(out - expect).max() < 1e-6

    def test_box_mean_matches_naive(self, rng):
        p = rng.random((15, 11))
        r = 2
        got = refine.box_mean(p, r)
        for y in (0, 7, 14):
            for x in (0, 5, 10):
                y0, y1 = max(0, y - r), min(15, y + r + 1)
                x0, x1 = max(0, x - r), min(11, x + r + 1)
                assert got[y, x] == pytest.approx(p[y0:y1, x0:x1].mean(), abs=1e-12)
