"""The five parametric photofinishing operators and the picture-style model.

Stage order is fixed: gain -> global tone map -> local tone map ->
[optional 3D LuT] -> chroma LuT -> gamma. All stages clamp to [0, 1] at
their boundary and operate on the 1/4-resolution linear sRGB image.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError
from .imagecore import bt709_luma, resample, rgb_to_ycbcr, ycbcr_to_rgb

GAIN_RANGE = (0.25, 4.0)
GAMMA_RANGE = (1.2, 3.0)
LTM_GRID_SIZE = 64
LTM_DEPTH = 18
CHROMA_BINS = 24
CHROMA_RANGE = (-0.5, 0.5)
CHROMA_SIGMA = 0.075
LUT3D_SIZE = 11


@dataclass(frozen=True)
class GtmParams:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ConfigError("tone-curve parameters must be positive")


@dataclass
class LtmGrid:
    """(n_g, n_g, n_c, 5) coefficient grid; slots A, B, C, G, W' in order.
    W' is stored pre-sigmoid."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 4 or v.shape[0] != v.shape[1] or v.shape[3] != 5:
            raise ConfigError("LTM grid must have shape (n_g, n_g, n_c, 5)")
        if np.any(v[..., :4] < 0):
            raise ConfigError("LTM grid slots A, B, C, G must be non-negative")
        self.values = v

    @property
    def n_g(self) -> int:
        return self.values.shape[0]

    @property
    def n_c(self) -> int:
        return self.values.shape[2]

    @classmethod
    def neutral(cls, n_g: int = 4, n_c: int = 2) -> "LtmGrid":
        """Grid whose blend weight collapses to zero (LTM is a no-op)."""
        v = np.ones((n_g, n_g, n_c, 5), dtype=np.float32)
        v[..., 4] = -20.0
        return cls(v)


@dataclass
class ChromaLut:
    """(n_h, n_h, 2) table of absolute CbCr targets over [-0.5, 0.5]^2,
    indexed (cb_bin, cr_bin)."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.float32)
        if t.ndim != 3 or t.shape[0] != t.shape[1] or t.shape[2] != 2:
            raise ConfigError("chroma LuT must have shape (n_h, n_h, 2)")
        self.table = np.clip(t, CHROMA_RANGE[0], CHROMA_RANGE[1])

    @property
    def n_h(self) -> int:
        return self.table.shape[0]

    @classmethod
    def identity(cls, n_h: int = CHROMA_BINS) -> "ChromaLut":
        centers = bin_centers(n_h)
        cb, cr = np.meshgrid(centers, centers, indexing="ij")
        return cls(np.stack([cb, cr], axis=-1).astype(np.float32))


@dataclass
class RgbLut3d:
    table: np.ndarray  # (n, n, n, 3) over [0, 1]^3

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.float32)
        if t.ndim != 4 or t.shape[3] != 3 or len(set(t.shape[:3])) != 1:
            raise ConfigError("3D LuT must have shape (n, n, n, 3)")
        if t.min() < 0 or t.max() > 1:
            raise ConfigError("3D LuT entries must lie in [0, 1]")
        self.table = t

    @property
    def size(self) -> int:
        return self.table.shape[0]

    @classmethod
    def identity(cls, size: int = LUT3D_SIZE) -> "RgbLut3d":
        ax = np.linspace(0.0, 1.0, size, dtype=np.float32)
        r, g, b = np.meshgrid(ax, ax, ax, indexing="ij")
        return cls(np.stack([r, g, b], axis=-1))


@dataclass
class StyleParams:
    name: str = "custom"
    gain: float = 1.0
    gtm: GtmParams = field(default_factory=lambda: GtmParams(1.0, 1.0, 1.0))
    ltm: LtmGrid = field(default_factory=LtmGrid.neutral)
    chroma: ChromaLut = field(default_factory=ChromaLut.identity)
    lut3d: RgbLut3d | None = None
    gamma: float = 1.2

    def __post_init__(self):
        if not (GAIN_RANGE[0] <= self.gain <= GAIN_RANGE[1]):
            raise ConfigError(f"style gain must lie in {GAIN_RANGE}")
        # predictor outputs live in [1.2, 3.0]; gamma=1 is allowed so the
        # identity preset can exist
        if not (1.0 <= self.gamma <= GAMMA_RANGE[1]):
            raise ConfigError(f"style gamma must lie in [1.0, {GAMMA_RANGE[1]}]")

    @classmethod
    def identity(cls, name: str = "identity") -> "StyleParams":
        return cls(name=name, gain=1.0, gtm=GtmParams(1.0, 1.0, 1.0),
                   ltm=LtmGrid.neutral(), chroma=ChromaLut.identity(),
                   lut3d=None, gamma=1.0)


def bin_centers(n_h: int = CHROMA_BINS, vmin: float = CHROMA_RANGE[0],
                vmax: float = CHROMA_RANGE[1]) -> np.ndarray:
    return vmin + np.arange(n_h) / (n_h - 1) * (vmax - vmin)


# ---------------------------------------------------------------------------
# Operators


def tm_curve(x: np.ndarray, p: GtmParams) -> np.ndarray:
    """x^a / (x^a + (c(1-x))^b) on [0, 1], pinned to 0 at 0 and 1 at 1."""
    x = np.clip(x, 0.0, 1.0)
    num = np.power(x, p.a)
    den = num + np.power(p.c * (1.0 - x), p.b)
    out = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return np.where(x >= 1.0, 1.0, np.where(x <= 0.0, 0.0, out))


def apply_gain(img: np.ndarray, gain: float) -> np.ndarray:
    if not (GAIN_RANGE[0] <= gain <= GAIN_RANGE[1]):
        raise ConfigError(f"gain must lie in {GAIN_RANGE}; use EV edits for manual exposure")
    return np.clip(gain * img, 0.0, 1.0)


def apply_gtm(img: np.ndarray, p: GtmParams) -> np.ndarray:
    return tm_curve(img, p)


def smooth5(plane: np.ndarray) -> np.ndarray:
    """5x5 mean with reflection padding."""
    p = np.pad(plane, 2, mode="reflect")
    h, w = plane.shape
    out = np.zeros_like(plane)
    for dy in range(5):
        for dx in range(5):
            out += p[dy:dy + h, dx:dx + w]
    return out / 25.0


def guidance_map(gain_img: np.ndarray) -> np.ndarray:
    """Smoothed-luminance guidance in [-1, 1] (heuristic stand-in for the
    learned guidance)."""
    y = bt709_luma(np.clip(gain_img, 0.0, 1.0))
    return np.clip(2.0 * smooth5(y) - 1.0, -1.0, 1.0)


def slice_ltm_grid(grid: LtmGrid, guidance: np.ndarray,
                   out_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Sample the coefficient grid at each pixel: bilinear over space, linear
    over depth at (guidance+1)/2 * (n_c - 1). Returns (H, W, 5) planes
    A, B, C, G, W with W already sigmoid-activated."""
    if out_shape is None:
        out_shape = guidance.shape
    h, w = out_shape
    if guidance.shape != (h, w):
        raise ConfigError("guidance must match the requested output dims")
    n_g, n_c = grid.n_g, grid.n_c
    ys = ((np.arange(h) + 0.5) * (n_g / h) - 0.5).reshape(-1, 1)
    xs = ((np.arange(w) + 0.5) * (n_g / w) - 0.5).reshape(1, -1)
    gy = np.broadcast_to(ys, (h, w)).astype(float)
    gx = np.broadcast_to(xs, (h, w)).astype(float)
    gz = (np.clip(guidance, -1.0, 1.0) + 1.0) / 2.0 * (n_c - 1)
    planes = kernels.slice_grid_3d(
        np.ascontiguousarray(grid.values, dtype=float),
        np.ascontiguousarray(gx), np.ascontiguousarray(gy),
        np.ascontiguousarray(gz))
    out = planes.copy()
    out[..., 4] = 1.0 / (1.0 + np.exp(-planes[..., 4]))
    return out


def apply_ltm(gain_img: np.ndarray, gtm_img: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """(1-W)*GTM + W*tm_curve(clamp(gain*G); A, B, C) per pixel/channel."""
    A, B, C, G, W = (coeffs[..., i] for i in range(5))
    x = np.clip(gain_img * G[..., None], 0.0, 1.0)
    num = np.power(x, A[..., None])
    den = num + np.power(np.maximum(C[..., None] * (1.0 - x), 0.0), B[..., None])
    tm = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    tm = np.where(x >= 1.0, 1.0, np.where(x <= 0.0, 0.0, tm))
    out = (1.0 - W[..., None]) * gtm_img + W[..., None] * tm
    return np.clip(out, 0.0, 1.0)


def apply_chroma_lut(img: np.ndarray, lut: ChromaLut) -> np.ndarray:
    """Bilinear CbCr remap: Y is kept, chroma is replaced by the table value
    sampled at the pixel's (Cb, Cr)."""
    ycc = rgb_to_ycbcr(img)
    n_h = lut.n_h
    span = CHROMA_RANGE[1] - CHROMA_RANGE[0]
    u = (ycc[..., 1] - CHROMA_RANGE[0]) / span * (n_h - 1)
    v = (ycc[..., 2] - CHROMA_RANGE[0]) / span * (n_h - 1)
    mapped = kernels.sample_lut_2d(np.ascontiguousarray(lut.table, dtype=float),
                                   np.ascontiguousarray(u), np.ascontiguousarray(v))
    out = np.stack([ycc[..., 0], mapped[..., 0], mapped[..., 1]], axis=-1)
    return np.clip(ycbcr_to_rgb(out), 0.0, 1.0)


def apply_3d_lut(img: np.ndarray, lut3d: RgbLut3d) -> np.ndarray:
    out = kernels.sample_lut_3d(np.ascontiguousarray(lut3d.table, dtype=float),
                                np.ascontiguousarray(img, dtype=float))
    return np.clip(out, 0.0, 1.0)


def apply_gamma(img: np.ndarray, gamma: float) -> np.ndarray:
    if gamma <= 0:
        raise ConfigError("gamma must be positive")
    return np.clip(np.power(np.maximum(img, 0.0), 1.0 / gamma), 0.0, 1.0)


def soft_chroma_histogram(img: np.ndarray, n_bins: int = CHROMA_BINS,
                          sigma: float = CHROMA_SIGMA) -> np.ndarray:
    """Gaussian soft-assignment CbCr histogram, unit-sum normalized and
    square-rooted. Returns (n_bins, n_bins) indexed (cb_bin, cr_bin)."""
    if img.size == 0:
        raise ConfigError("cannot histogram an empty image")
    ycc = rgb_to_ycbcr(img)
    cb = ycc[..., 1].ravel()
    cr = ycc[..., 2].ravel()
    centers = bin_centers(n_bins)
    wb = np.exp(-((cb[:, None] - centers[None, :]) ** 2) / (2.0 * sigma**2))
    wr = np.exp(-((cr[:, None] - centers[None, :]) ** 2) / (2.0 * sigma**2))
    hist = np.einsum("pi,pj->ij", wb, wr)
    return np.sqrt(hist / (hist.sum() + 1e-12))


def mix_styles(styles: list[StyleParams], weights: list[float]) -> StyleParams:
    """Convex combination of all parameter tensors and scalars."""
    if len(styles) != len(weights) or not styles:
        raise ConfigError("styles and weights must be equal-length and non-empty")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-6:
        raise ConfigError("weights must be non-negative and sum to 1")
    ref = styles[0]
    for s in styles[1:]:
        if s.ltm.values.shape != ref.ltm.values.shape:
            raise ConfigError("LTM grid shapes differ between mixed styles")
        if s.chroma.table.shape != ref.chroma.table.shape:
            raise ConfigError("chroma LuT shapes differ between mixed styles")
    gain = float(np.dot(w, [s.gain for s in styles]))
    gtm = GtmParams(float(np.dot(w, [s.gtm.a for s in styles])),
                    float(np.dot(w, [s.gtm.b for s in styles])),
                    float(np.dot(w, [s.gtm.c for s in styles])))
    ltm = LtmGrid(sum(wi * s.ltm.values.astype(np.float64) for wi, s in zip(w, styles)).astype(np.float32))
    chroma = ChromaLut(sum(wi * s.chroma.table.astype(np.float64) for wi, s in zip(w, styles)).astype(np.float32))
    gamma = float(np.dot(w, [s.gamma for s in styles]))
    # 3D LuTs may be absent on some styles; absent means identity.
    lut3d = None
    if any(s.lut3d is not None for s in styles):
        size = next(s.lut3d.size for s in styles if s.lut3d is not None)
        tables = []
        for s in styles:
            t = s.lut3d.table if s.lut3d is not None else RgbLut3d.identity(size).table
            if t.shape[0] != size:
                raise ConfigError("3D LuT sizes differ between mixed styles")
            tables.append(t.astype(np.float64))
        lut3d = RgbLut3d(sum(wi * t for wi, t in zip(w, tables)).astype(np.float32))
    name = "+".join(f"{s.name}*{wi:g}" for s, wi in zip(styles, w) if wi > 0)
    return StyleParams(name=name, gain=gain, gtm=gtm, ltm=ltm, chroma=chroma,
                       lut3d=lut3d, gamma=gamma)


# ---------------------------------------------------------------------------
# Orchestration


@dataclass
class PhotofinishOptions:
    downsample: float = 0.25
    enable_gain: bool = True
    enable_gtm: bool = True
    enable_ltm: bool = True
    enable_lut3d: bool = True
    enable_chroma: bool = True
    enable_gamma: bool = True
    multiscale: bool = False
    refine_ltm: bool = False


@dataclass
class PhotofinishResult:
    image: np.ndarray
    stages: dict[str, np.ndarray]
    guidance: np.ndarray
    coeffs: np.ndarray


def run_photofinish(linear_img: np.ndarray, style: StyleParams,
                    options: PhotofinishOptions | None = None,
                    edit_hook=None) -> PhotofinishResult:
    """Render the downsampled photofinishing chain, keeping every stage.

    `edit_hook(stage_name, img) -> img` lets the pipeline insert the
    user-controlled operators at their fixed points (post-LTM Y edits).
    """
    from .refine import multiscale_ltm  # local import; refine depends on us not

    opts = options or PhotofinishOptions()
    stages: dict[str, np.ndarray] = {}
    if opts.downsample != 1.0:
        low = np.clip(resample(linear_img, opts.downsample, "bilinear"), 0.0, 1.0)
    else:
        low = np.clip(linear_img, 0.0, 1.0)
    stages["linear"] = low

    gain_img = apply_gain(low, style.gain) if opts.enable_gain else low
    stages["gain"] = gain_img

    gtm_img = apply_gtm(gain_img, style.gtm) if opts.enable_gtm else gain_img
    stages["gtm"] = gtm_img

    guidance = guidance_map(gain_img)
    if opts.enable_ltm:
        if opts.multiscale or opts.refine_ltm:
            coeffs = multiscale_ltm(
                gain_img, gtm_img, style.ltm,
                scales=(1.0, 0.5, 0.25, 0.125, 0.0625) if opts.multiscale else (1.0,),
                refine=opts.refine_ltm)
        else:
            coeffs = slice_ltm_grid(style.ltm, guidance)
        ltm_img = apply_ltm(gain_img, gtm_img, coeffs)
    else:
        coeffs = slice_ltm_grid(LtmGrid.neutral(), guidance)
        ltm_img = gtm_img
    if edit_hook is not None:
        ltm_img = edit_hook("post_ltm", ltm_img)
    stages["ltm"] = ltm_img

    img = ltm_img
    if opts.enable_lut3d and style.lut3d is not None:
        img = apply_3d_lut(img, style.lut3d)
        stages["lut3d"] = img

    img = apply_chroma_lut(img, style.chroma) if opts.enable_chroma else img
    stages["chroma"] = img

    img = apply_gamma(img, style.gamma) if opts.enable_gamma else img
    stages["gamma"] = img

    return PhotofinishResult(image=img, stages=stages, guidance=guidance, coeffs=coeffs)
