import numpy as np
import pytest

from isplib import rawproc


def make_scene(h, w, seed=0):
    """Smooth synthetic RGB scene in [0.05, 0.95]."""
    yy, xx = np.mgrid[0:h, 0:w]
    base = 0.5 + 0.4 * np.sin(2 * np.pi * xx / w) * np.cos(2 * np.pi * yy / h)
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0, np.pi, 3)
    chans = [0.5 + 0.42 * np.sin(2 * np.pi * (xx + yy) / (w + h) + p) * base for p in phase]
    return np.clip(np.stack(chans, axis=-1), 0.05, 0.95)


def make_ramp(h, w, lo=0.15, hi=0.85):
    yy, xx = np.mgrid[0:h, 0:w]
    base = lo + (hi - lo) * (xx + yy) / (h + w - 2)
    return np.stack([base, base * 0.9 + 0.05, base * 0.8 + 0.1], axis=-1).clip(0, 1)


def mosaic_from_scene(scene, cfa="RGGB", black=64, white=1023):
    h, w, _ = scene.shape
    pattern = rawproc.CFA_PATTERNS[cfa]
    mosaic = np.zeros((h, w))
    for py in range(2):
        for px in range(2):
            mosaic[py::2, px::2] = scene[py::2, px::2, pattern[py, px]]
    return np.round(black + mosaic * (white - black)).astype(np.uint16)


def make_metadata(cfa="RGGB", gains=(2.0, 1.5), iso=100.0):
    warm = np.array([[0.9, 0.08, 0.02], [0.05, 0.9, 0.05], [0.02, 0.08, 0.9]])
    cool = np.array([[1.1, -0.05, -0.05], [-0.04, 1.08, -0.04], [-0.06, -0.04, 1.1]])
    return rawproc.CameraMetadata(
        black_level=64, white_level=1023, cfa=cfa, wb_gains=gains,
        ccm_calibrations=[(2856.0, warm), (6504.0, cool)], iso=iso)


@pytest.fixture
def sample_bundle():
    scene = make_scene(96, 128, seed=3)
    return rawproc.RawBundle(mosaic=mosaic_from_scene(scene), meta=make_metadata())


@pytest.fixture
def rng():
    return np.random.default_rng(42)
