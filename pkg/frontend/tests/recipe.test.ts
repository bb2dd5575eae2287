import { describe, expect, it } from "vitest";

import {
  EDIT_RANGES,
  RecipeError,
  identityRecipe,
  mixWeights,
  neutralEdits,
  validateRecipe,
} from "../src/recipe.js";

describe("identityRecipe", () => {
  it("is valid and neutral", () => {
    const r = identityRecipe();
    validateRecipe(r);
    expect(r.styles).toEqual(["identity"]);
    expect(r.weights).toEqual([1.0]);
    expect(r.edits).toEqual(neutralEdits());
    expect(r.preview_scale).toBe(1.0);
  });

  it("serializes to the exact JSON shape the service expects", () => {
    // keep this in sync with the server: the CLI renders the same recipe,
    // so identical JSON means byte-identical previews
    const r = identityRecipe(0.25);
    const json = JSON.parse(JSON.stringify(r));
    expect(json).toEqual({
      styles: ["identity"],
      weights: [1.0],
      edits: {
        ev: 0, auto_exposure: false, contrast: 0, highlights: 0, shadows: 0,
        saturation: 0, vibrance: 0, sharpen: 0, denoise_strength: 1,
        luma_denoise: 0, chroma_denoise: 0, cct: null, tint: null,
      },
      enable_denoise: true,
      enable_lut3d: true,
      multiscale_ltm: false,
      refine_ltm: false,
      enable_sharpen: true,
      wb_source: "as-shot",
      preview_scale: 0.25,
    });
  });
});

describe("validateRecipe", () => {
  it("rejects weights that do not sum to one", () => {
    const r = identityRecipe();
    r.styles = ["a", "b"];
    r.weights = [0.6, 0.6];
    expect(() => validateRecipe(r)).toThrow(RecipeError);
  });

  it("rejects out-of-range sliders", () => {
    for (const [name, [lo, hi]] of Object.entries(EDIT_RANGES)) {
      const r = identityRecipe();
      (r.edits as unknown as Record<string, number>)[name] = hi + 1;
      expect(() => validateRecipe(r), name).toThrow(RecipeError);
      (r.edits as unknown as Record<string, number>)[name] = lo - 1;
      expect(() => validateRecipe(r), name).toThrow(RecipeError);
    }
  });

  it("rejects preview scales outside the whitelist", () => {
    const r = identityRecipe();
    r.preview_scale = 0.3;
    expect(() => validateRecipe(r)).toThrow(RecipeError);
  });

  it("requires a cct for manual white balance", () => {
    const r = identityRecipe();
    r.wb_source = "manual";
    expect(() => validateRecipe(r)).toThrow(RecipeError);
    r.edits.cct = 5000;
    validateRecipe(r);
  });
});

describe("mixWeights", () => {
  it("maps slider position to convex weights", () => {
    expect(mixWeights(0)).toEqual([1, 0]);
    expect(mixWeights(1)).toEqual([0, 1]);
    expect(mixWeights(0.5)).toEqual([0.5, 0.5]);
  });

  it("clamps outside [0, 1]", () => {
    expect(mixWeights(-2)).toEqual([1, 0]);
    expect(mixWeights(9)).toEqual([0, 1]);
  });
});
