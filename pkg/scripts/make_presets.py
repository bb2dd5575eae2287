"""Regenerate the shipped style presets under src/isplib/presets/.

The six looks are hand-authored parameter sets chosen to read as their names
suggest; the identity preset renders the pipeline as a no-op.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from isplib.bundleio import write_style
from isplib.photofinish import ChromaLut, GtmParams, LtmGrid, RgbLut3d, StyleParams, bin_centers

OUT = Path(__file__).resolve().parents[1] / "src" / "isplib" / "presets"

N_G, N_C = 8, 4


def uniform_ltm(w_prime: float, g: float = 1.0, a: float = 1.0, b: float = 1.0,
                c: float = 1.0) -> LtmGrid:
    v = np.zeros((N_G, N_G, N_C, 5), dtype=np.float32)
    v[..., 0] = a
    v[..., 1] = b
    v[..., 2] = c
    v[..., 3] = g
    v[..., 4] = w_prime
    return LtmGrid(v)


def shadow_lift_ltm(strength: float) -> LtmGrid:
    """Blend weight rises in the dark depth slices: local brightening where
    the guidance (smoothed luminance) is low."""
    v = np.zeros((N_G, N_G, N_C, 5), dtype=np.float32)
    v[..., 0] = 0.85         # a < 1 lifts midtones of the re-mapped branch
    v[..., 1] = 1.0
    v[..., 2] = 0.9
    v[..., 3] = 1.25         # local gain before the tone curve
    depth = np.linspace(strength, -6.0, N_C, dtype=np.float32)
    v[..., 4] = depth[None, None, :]
    return LtmGrid(v)


def chroma_shift(d_cb: float, d_cr: float, compress: float = 1.0) -> ChromaLut:
    centers = bin_centers()
    cb, cr = np.meshgrid(centers, centers, indexing="ij")
    table = np.stack([cb * compress + d_cb, cr * compress + d_cr], axis=-1)
    return ChromaLut(table.astype(np.float32))


def lut3d_identity_warp(warp) -> RgbLut3d:
    base = RgbLut3d.identity().table.astype(np.float64)
    return RgbLut3d(np.clip(warp(base), 0.0, 1.0).astype(np.float32))


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    write_style(StyleParams.identity(), OUT / "identity.json")

    write_style(StyleParams(
        name="Default", gain=1.25,
        gtm=GtmParams(a=1.15, b=1.05, c=0.95),
        ltm=uniform_ltm(-1.5, g=1.1, a=0.95, c=0.9),
        chroma=chroma_shift(0.0, 0.0, compress=1.06),
        gamma=2.2), OUT / "default.json")

    write_style(StyleParams(
        name="Warm", gain=1.3,
        gtm=GtmParams(a=1.1, b=1.0, c=0.92),
        ltm=uniform_ltm(-2.0, g=1.05),
        chroma=chroma_shift(-0.035, 0.03, compress=1.04),
        gamma=2.1), OUT / "warm.json")

    write_style(StyleParams(
        name="Moody", gain=0.95,
        gtm=GtmParams(a=1.45, b=1.25, c=1.05),
        ltm=shadow_lift_ltm(1.5),
        chroma=chroma_shift(0.0, 0.0, compress=0.82),
        gamma=1.9), OUT / "moody.json")

    def cinematic_warp(t):
        out = t.copy()
        # teal shadows, warm highlights
        luma = t.mean(axis=-1, keepdims=True)
        out[..., 0] += 0.06 * luma[..., 0] ** 2 - 0.02 * (1 - luma[..., 0])
        out[..., 2] += 0.05 * (1 - luma[..., 0]) - 0.02 * luma[..., 0] ** 2
        return out

    write_style(StyleParams(
        name="Cinematic", gain=1.2,
        gtm=GtmParams(a=1.3, b=1.15, c=1.0),
        ltm=uniform_ltm(-1.0, g=1.15, a=0.9),
        chroma=chroma_shift(0.0, 0.008, compress=0.96),
        lut3d=lut3d_identity_warp(cinematic_warp),
        gamma=2.0), OUT / "cinematic.json")

    write_style(StyleParams(
        name="Greenish", gain=1.25,
        gtm=GtmParams(a=1.1, b=1.0, c=0.95),
        ltm=uniform_ltm(-2.0),
        chroma=chroma_shift(-0.02, -0.025, compress=1.0),
        gamma=2.15), OUT / "greenish.json")

    def retro_warp(t):
        out = 0.92 * t + 0.04
        out[..., 2] = 0.9 * t[..., 2] + 0.07
        return out

    write_style(StyleParams(
        name="Retro", gain=1.35,
        gtm=GtmParams(a=0.95, b=0.85, c=0.9),
        ltm=uniform_ltm(-2.5),
        chroma=chroma_shift(0.012, 0.012, compress=0.78),
        lut3d=lut3d_identity_warp(retro_warp),
        gamma=2.35), OUT / "retro.json")

    print(f"wrote presets to {OUT}")


if __name__ == "__main__":
    main()
