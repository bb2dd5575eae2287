"""Full raw-to-display rendering: recipe model and orchestration.

The render is a pure function of (bundle, recipe, styles): identical inputs
produce identical outputs. Photofinishing always runs at one quarter of the
full resolution; guided upsampling bridges to the requested preview scale and
is skipped when the preview is at or below quarter resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import editops, rawproc
from .editops import EditSettings
from .errors import ConfigError
from .imagecore import resample, resample_to
from .photofinish import PhotofinishOptions, StyleParams, mix_styles, run_photofinish
from .upsample import bgu_upsample

PREVIEW_SCALES = (0.125, 0.25, 0.5, 1.0)
WB_SOURCES = ("as-shot", "gray-world", "manual")


@dataclass
class RenderRecipe:
    styles: list[str] = field(default_factory=lambda: ["identity"])
    weights: list[float] = field(default_factory=lambda: [1.0])
    edits: EditSettings = field(default_factory=EditSettings)
    enable_denoise: bool = True
    enable_lut3d: bool = True
    multiscale_ltm: bool = False
    refine_ltm: bool = False
    enable_sharpen: bool = True
    wb_source: str = "as-shot"
    preview_scale: float = 1.0

    def __post_init__(self):
        if len(self.styles) != len(self.weights) or not self.styles:
            raise ConfigError("styles and weights must be equal-length and non-empty")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-6:
            raise ConfigError("style weights must be non-negative and sum to 1")
        if self.wb_source not in WB_SOURCES:
            raise ConfigError(f"wb_source must be one of {WB_SOURCES}")
        if self.wb_source == "manual" and self.edits.cct is None:
            raise ConfigError("manual white balance requires a cct")
        if self.preview_scale not in PREVIEW_SCALES:
            raise ConfigError(f"preview_scale must be one of {PREVIEW_SCALES}")

    def to_dict(self) -> dict:
        e = self.edits
        return {
            "styles": list(self.styles),
            "weights": list(self.weights),
            "edits": {
                "ev": e.ev, "auto_exposure": e.auto_exposure,
                "contrast": e.contrast, "highlights": e.highlights,
                "shadows": e.shadows, "saturation": e.saturation,
                "vibrance": e.vibrance, "sharpen": e.sharpen,
                "denoise_strength": e.denoise_strength,
                "luma_denoise": e.luma_denoise, "chroma_denoise": e.chroma_denoise,
                "cct": e.cct, "tint": e.tint,
            },
            "enable_denoise": self.enable_denoise,
            "enable_lut3d": self.enable_lut3d,
            "multiscale_ltm": self.multiscale_ltm,
            "refine_ltm": self.refine_ltm,
            "enable_sharpen": self.enable_sharpen,
            "wb_source": self.wb_source,
            "preview_scale": self.preview_scale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RenderRecipe":
        if not isinstance(data, dict):
            raise ConfigError("recipe must be a JSON object")
        edits_raw = data.get("edits", {})
        if not isinstance(edits_raw, dict):
            raise ConfigError("recipe edits must be an object")
        try:
            edits = EditSettings(**edits_raw)
        except TypeError as exc:
            raise ConfigError(f"unknown edit setting: {exc}") from exc
        kwargs = {k: v for k, v in data.items() if k != "edits"}
        try:
            return cls(edits=edits, **kwargs)
        except TypeError as exc:
            raise ConfigError(f"unknown recipe field: {exc}") from exc


@dataclass
class RenderResult:
    image: np.ndarray                  # display-referred, preview scale
    stages: dict[str, np.ndarray]      # photofinishing intermediates (1/4 res)
    linear: np.ndarray                 # color-corrected linear sRGB (preview scale)
    applied_ev: float


def _effective_style(recipe: RenderRecipe, styles: dict[str, StyleParams]) -> StyleParams:
    missing = [n for n in recipe.styles if n not in styles]
    if missing:
        raise ConfigError(f"unknown styles: {missing}")
    chosen = [styles[n] for n in recipe.styles]
    if len(chosen) == 1:
        return chosen[0]
    return mix_styles(chosen, recipe.weights)


def _white_balance(bundle: rawproc.RawBundle, recipe: RenderRecipe,
                   raw_rgb: np.ndarray) -> tuple[tuple[float, float], np.ndarray]:
    meta = bundle.meta
    if recipe.wb_source == "as-shot":
        gains = meta.wb_gains
        cct, _ = rawproc.gains_to_cct_tint(meta, gains)
    elif recipe.wb_source == "gray-world":
        from .calib import gray_world_illuminant

        ill = gray_world_illuminant(raw_rgb)
        gains = (float(ill[1] / ill[0]), float(ill[1] / ill[2]))
        cct, _ = rawproc.gains_to_cct_tint(meta, gains)
    else:
        cct = float(recipe.edits.cct)
        tint = float(recipe.edits.tint or 0.0)
        gains = rawproc.cct_tint_to_gains(meta, cct, tint)
    ccm = rawproc.interpolate_ccm(meta, cct)
    return gains, ccm


def render(bundle: rawproc.RawBundle, recipe: RenderRecipe,
           styles: dict[str, StyleParams]) -> RenderResult:
    style = _effective_style(recipe, styles)
    edits = recipe.edits

    plane = rawproc.normalize_black_level(bundle)
    raw_rgb = rawproc.demosaic(plane, bundle.meta.cfa, tiled=True)
    gains, ccm = _white_balance(bundle, recipe, raw_rgb)
    linear = rawproc.apply_wb_ccm(raw_rgb, gains, ccm)

    if recipe.enable_denoise and edits.denoise_strength > 0 and (
            edits.luma_denoise > 0 or edits.chroma_denoise > 0):
        denoised = editops.luma_denoise(linear, edits.luma_denoise)
        denoised = editops.chroma_denoise(denoised, edits.chroma_denoise)
        linear = editops.blend_strength(linear, denoised, edits.denoise_strength)

    applied_ev = edits.ev
    if edits.auto_exposure:
        applied_ev += editops.auto_exposure(linear)
    if applied_ev != 0.0:
        linear = editops.apply_ev(linear, applied_ev)

    scale = recipe.preview_scale
    linear_preview = linear if scale == 1.0 else np.clip(resample(linear, scale), 0.0, 1.0)

    opts = PhotofinishOptions(
        downsample=0.25,
        enable_lut3d=recipe.enable_lut3d,
        multiscale=recipe.multiscale_ltm,
        refine_ltm=recipe.refine_ltm,
    )

    def edit_hook(stage: str, img: np.ndarray) -> np.ndarray:
        if stage != "post_ltm":
            return img
        if edits.contrast == 0.0 and edits.highlights == 0.0 and edits.shadows == 0.0:
            return img
        from .imagecore import rgb_to_ycbcr, ycbcr_to_rgb

        ycc = rgb_to_ycbcr(img)
        y = editops.adjust_contrast(ycc[..., 0], edits.contrast)
        y = editops.adjust_highlights_shadows(y, edits.highlights, edits.shadows)
        ycc[..., 0] = y
        return np.clip(ycbcr_to_rgb(ycc), 0.0, 1.0)

    pf = run_photofinish(linear, style, opts, edit_hook=edit_hook)
    low_render = editops.adjust_sat_vib(pf.image, edits.saturation, edits.vibrance)

    if scale > 0.25:
        out = bgu_upsample(pf.stages["linear"], low_render, linear_preview)
    else:
        out = low_render if scale == 0.25 else \
            np.clip(resample_to(low_render, linear_preview.shape[:2]), 0.0, 1.0)

    if recipe.enable_sharpen and edits.sharpen > 0:
        out = editops.sharpen(out, edits.sharpen)

    return RenderResult(image=out, stages=pf.stages, linear=linear_preview,
                        applied_ev=applied_ev)
