import numpy as np
import pytest

from isplib import editops as eo
from isplib.errors import ConfigError
from isplib.imagecore import rgb_to_ycbcr

from conftest import make_scene


class TestEditSettings:
    def test_defaults_are_neutral(self):
        e = eo.EditSettings()
        assert e.ev == 0 and e.contrast == 0 and e.sharpen == 0

    def test_range_validation(self):
        with pytest.raises(ConfigError):
            eo.EditSettings(contrast=1.5)
        with pytest.raises(ConfigError):
            eo.EditSettings(luma_denoise=-0.1)


class TestAutoExposure:
    def test_target_histogram_scores_zero_shift(self, rng):
        # build an image whose pooled luminance histogram is close to the
        # Gaussian target; the zero candidate must win
        target_samples = np.clip(rng.normal(eo.AE_TARGET_MEAN, eo.AE_TARGET_SIGMA,
                                            (128, 128)), 0.001, 1.0)
        img = np.repeat(target_samples[..., None], 3, axis=2)
        assert eo.auto_exposure(img) == pytest.approx(0.0, abs=0.1 + 1e-9)

    @pytest.mark.parametrize("shift", [-1.0, 1.0])
    def test_prescaling_shifts_estimate(self, rng, shift):
        img = make_scene(96, 96, seed=5) * 0.3
        base = eo.auto_exposure(img)
        moved = eo.auto_exposure(np.clip(img * 2.0**shift, 0, 1))
        if abs(base - shift) <= eo.AE_MAX_EV:  # stays inside the search range
            assert moved == pytest.approx(base - shift, abs=0.1 + 1e-9)

    def test_constant_midgray_prefers_zero(self):
        img = np.full((64, 64, 3), eo.AE_TARGET_MEAN)
        assert abs(eo.auto_exposure(img)) <= 0.1 + 1e-9

    def test_all_black_returns_max_boost(self):
        assert eo.auto_exposure(np.zeros((32, 32, 3))) == eo.AE_MAX_EV


class TestApplyEv:
    def test_zero_identity(self, rng):
        img = rng.random((4, 4, 3))
        assert np.array_equal(eo.apply_ev(img, 0.0), img)

    def test_plus_one_doubles(self):
        assert eo.apply_ev(np.array([[[0.25] * 3]]), 1.0)[0, 0, 0] == pytest.approx(0.5)

    def test_minus_two_quarters(self):
        assert eo.apply_ev(np.array([[[0.8] * 3]]), -2.0)[0, 0, 0] == pytest.approx(0.2)


class TestContrast:
    def test_zero_identity(self, rng):
        y = rng.random((8, 8))
        assert np.array_equal(eo.adjust_contrast(y, 0.0), y)

    def test_midgray_fixed(self):
        y = np.full((4, 4), 0.5)
        for a in (-1.0, -0.3, 0.4, 1.0):
            assert np.abs(eo.adjust_contrast(y, a) - 0.5).max() < 1e-12

    def test_direct_value(self):
        got = eo.adjust_contrast(np.array([[0.7]]), 1.0)[0, 0]
        assert got == pytest.approx(0.8, abs=1e-12)

    def test_monotone(self, rng):
        y = np.sort(rng.random(64))
        for a in (-1.0, 1.0):
            out = eo.adjust_contrast(y.reshape(1, -1), a)[0]
            assert np.all(np.diff(out) >= -1e-12)


class TestHighlightsShadows:
    def test_zero_identity(self, rng):
        y = rng.random((8, 8))
        assert np.array_equal(eo.adjust_highlights_shadows(y, 0.0, 0.0), y)

    def test_midgray_untouched(self):
        y = np.full((2, 2), 0.5)
        out = eo.adjust_highlights_shadows(y, 1.0, 1.0)
        assert np.abs(out - 0.5).max() < 1e-12

    def test_highlight_boost_value(self):
        got = eo.adjust_highlights_shadows(np.array([[0.85]]), 1.0, 0.0)[0, 0]
        assert got == pytest.approx(0.85 + 0.05 * 0.85, abs=1e-12)

    def test_outside_valid_range_untouched(self):
        y = np.array([[0.05, 0.95]])
        out = eo.adjust_highlights_shadows(y, 1.0, 1.0)
        assert np.array_equal(out, y)

    def test_monotone(self, rng):
        y = np.sort(rng.random(256)).reshape(1, -1)
        for ah, ash in ((1.0, 0.0), (0.0, 1.0), (-1.0, -1.0), (1.0, 1.0)):
            out = eo.adjust_highlights_shadows(y, ah, ash)[0]
            assert np.all(np.diff(out) >= -1e-9)


class TestSatVib:
    def test_zero_identity(self, rng):
        img = rng.random((8, 8, 3))
        assert np.array_equal(eo.adjust_sat_vib(img, 0.0, 0.0), img)

    def test_saturation_scaling(self):
        # s=0.5 pixel: pure construction (v=1, s=0.5)
        img = np.array([[[1.0, 0.5, 0.5]]])
        out = eo.adjust_sat_vib(img, 0.5, 0.0)
        from isplib.imagecore import rgb_to_hsv

        assert rgb_to_hsv(out)[0, 0, 1] == pytest.approx(0.75, abs=1e-9)

    def test_vibrance_noop_on_saturated(self):
        img = np.array([[[1.0, 0.0, 0.0]]])
        for a in (0.3, 1.0, -0.5):
            out = eo.adjust_sat_vib(img, 0.0, a)
            assert np.allclose(out, img, atol=1e-12)


class TestSharpen:
    def test_zero_identity(self, rng):
        img = rng.random((16, 16, 3))
        assert np.array_equal(eo.sharpen(img, 0.0), img)

    def test_constant_unchanged(self):
        img = np.full((16, 16, 3), 0.6)
        assert np.abs(eo.sharpen(img, 2.0) - 0.6).max() < 1e-12

    def test_step_edge_flat_regions_stable(self):
        img = np.zeros((16, 32, 3))
        img[:, 16:] = 0.8
        out = eo.sharpen(img, 1.0)
        assert out.min() >= 0.0 and out.max() <= 1.0
        # far from the edge the mask vanishes
        assert np.abs(out[:, :12] - img[:, :12]).max() < 1e-4
        assert np.abs(out[:, 20:] - img[:, 20:]).max() < 1e-4
        # the edge itself gains contrast
        assert np.abs(out[:, 14:18] - img[:, 14:18]).max() > 1e-3


class TestLumaDenoise:
    def test_zero_identity(self, rng):
        img = rng.random((16, 16, 3))
        assert np.array_equal(eo.luma_denoise(img, 0.0), img)

    def test_constant_unchanged(self):
        img = np.full((24, 24, 3), 0.4)
        assert np.abs(eo.luma_denoise(img, 1.0) - 0.4).max() < 1e-9

    def test_chroma_untouched(self, rng):
        img = np.clip(make_scene(32, 32, seed=1) + rng.normal(0, 0.05, (32, 32, 3)), 0, 1)
        out = eo.luma_denoise(img, 0.8)
        before = rgb_to_ycbcr(img)
        after = rgb_to_ycbcr(out)
        assert np.abs(after[..., 1:] - before[..., 1:]).max() < 1e-6

    def test_variance_reduction_on_flat_noise(self, rng):
        # mild noise: variance below the filter's eps so the flat patch is
        # treated as structure-free
        img = np.clip(0.5 + rng.normal(0, 0.02, (64, 64, 3)), 0, 1)
        out = eo.luma_denoise(img, 1.0)
        var_before = rgb_to_ycbcr(img)[..., 0].var()
        var_after = rgb_to_ycbcr(out)[..., 0][8:-8, 8:-8].var()
        assert var_before / var_after >= 5.0


class TestChromaDenoise:
    def test_zero_identity(self, rng):
        img = rng.random((16, 16, 3))
        assert np.array_equal(eo.chroma_denoise(img, 0.0), img)

    def test_constant_chroma_unchanged(self):
        img = np.zeros((32, 32, 3))
        img[..., 0] = np.linspace(0.2, 0.8, 32)[None, :]
        img[..., 1] = img[..., 0]
        img[..., 2] = img[..., 0]
        out = eo.chroma_denoise(img, 0.9)
        ycc = rgb_to_ycbcr(out)
        assert np.abs(ycc[..., 1:]).max() < 1e-9

    def test_luma_untouched(self, rng):
        img = np.clip(make_scene(48, 48, seed=2) + rng.normal(0, 0.04, (48, 48, 3)), 0, 1)
        out = eo.chroma_denoise(img, 0.7)
        assert np.abs(rgb_to_ycbcr(out)[..., 0] - rgb_to_ycbcr(img)[..., 0]).max() < 1e-6

    def test_chroma_noise_reduction(self, rng):
        # the blur sigma scales with (H/3000)^0.9: use a tall patch so the
        # kernel is wide enough to flatten the synthetic noise
        h, w = 1200, 48
        base = np.full((h, w, 3), 0.5)
        ycc = rgb_to_ycbcr(base)
        ycc[..., 1:] += rng.normal(0, 0.03, (h, w, 2))
        from isplib.imagecore import ycbcr_to_rgb

        noisy = np.clip(ycbcr_to_rgb(ycc), 0, 1)
        out = eo.chroma_denoise(noisy, 0.8)
        std_before = rgb_to_ycbcr(noisy)[..., 1][32:-32, 8:-8].std()
        std_after = rgb_to_ycbcr(out)[..., 1][32:-32, 8:-8].std()
        assert std_before / std_after >= 3.0


class TestBlend:
    def test_endpoints(self, rng):
        a, b = rng.random((4, 4, 3)), rng.random((4, 4, 3))
        assert np.array_equal(eo.blend_strength(a, b, 0.0), a)
        assert np.array_equal(eo.blend_strength(a, b, 1.0), b)

    def test_midpoint(self, rng):
        a, b = rng.random((4, 4, 3)), rng.random((4, 4, 3))
        assert np.abs(eo.blend_strength(a, b, 0.5) - 0.5 * (a + b)).max() < 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(ConfigError):
            eo.blend_strength(np.zeros((2, 2, 3)), np.zeros((3, 3, 3)), 0.5)
