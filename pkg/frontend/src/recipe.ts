/** Render recipe model mirroring the service schema, with slider ranges. */

export interface EditSettings {
  ev: number;
  auto_exposure: boolean;
  contrast: number;
  highlights: number;
  shadows: number;
  saturation: number;
  vibrance: number;
  sharpen: number;
  denoise_strength: number;
  luma_denoise: number;
  chroma_denoise: number;
  cct: number | null;
  tint: number | null;
}

export interface RenderRecipe {
  styles: string[];
  weights: number[];
  edits: EditSettings;
  enable_denoise: boolean;
  enable_lut3d: boolean;
  multiscale_ltm: boolean;
  refine_ltm: boolean;
  enable_sharpen: boolean;
  wb_source: "as-shot" | "gray-world" | "manual";
  preview_scale: number;
}

/** Inclusive slider ranges; identical to the service-side EditSettings. */
export const EDIT_RANGES: Record<string, [number, number]> = {
  ev: [-3, 3],
  contrast: [-1, 1],
  highlights: [-1, 1],
  shadows: [-1, 1],
  saturation: [-1, 1],
  vibrance: [-1, 1],
  sharpen: [0, 3],
  denoise_strength: [0, 1],
  luma_denoise: [0, 1],
  chroma_denoise: [0, 1],
};

export const PREVIEW_SCALES = [0.125, 0.25, 0.5, 1.0];

export function neutralEdits(): EditSettings {
  return {
    ev: 0,
    auto_exposure: false,
    contrast: 0,
    highlights: 0,
    shadows: 0,
    saturation: 0,
    vibrance: 0,
    sharpen: 0,
    denoise_strength: 1,
    luma_denoise: 0,
    chroma_denoise: 0,
    cct: null,
    tint: null,
  };
}

/** The canonical identity recipe: renders the color-corrected input. */
export function identityRecipe(previewScale = 1.0): RenderRecipe {
  return {
    styles: ["identity"],
    weights: [1.0],
    edits: neutralEdits(),
    enable_denoise: true,
    enable_lut3d: true,
    multiscale_ltm: false,
    refine_ltm: false,
    enable_sharpen: true,
    wb_source: "as-shot",
    preview_scale: previewScale,
  };
}

export class RecipeError extends Error {}

/** Validate a draft before it is ever sent; mirrors server-side checks. */
export function validateRecipe(recipe: RenderRecipe): void {
  if (recipe.styles.length === 0 || recipe.styles.length !== recipe.weights.length) {
    throw new RecipeError("styles and weights must pair up");
  }
  const sum = recipe.weights.reduce((a, b) => a + b, 0);
  if (recipe.weights.some((w) => w < 0) || Math.abs(sum - 1) > 1e-6) {
    throw new RecipeError("style weights must be non-negative and sum to 1");
  }
  if (!PREVIEW_SCALES.includes(recipe.preview_scale)) {
    throw new RecipeError(`preview_scale must be one of ${PREVIEW_SCALES.join(", ")}`);
  }
  if (recipe.wb_source === "manual" && recipe.edits.cct === null) {
    throw new RecipeError("manual white balance requires a cct");
  }
  for (const [key, [lo, hi]] of Object.entries(EDIT_RANGES)) {
    const value = (recipe.edits as unknown as Record<string, number>)[key];
    if (typeof value !== "number" || value < lo || value > hi) {
      throw new RecipeError(`${key} must lie in [${lo}, ${hi}]`);
    }
  }
}

/** Two-style mix helper: slider position in [0,1] becomes weights. */
export function mixWeights(position: number): [number, number] {
  const p = Math.min(Math.max(position, 0), 1);
  return [1 - p, p];
}
