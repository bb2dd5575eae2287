import { describe, expect, it } from "vitest";

import type { RenderResponse } from "../src/api.js";
import { RecipeError } from "../src/recipe.js";
import { UiState } from "../src/state.js";

function fakeRender(scale: number, stages: string[] = ["linear", "gain", "gtm", "ltm", "chroma", "gamma"]): RenderResponse {
  return {
    preview_png: `preview@${scale}`,
    stages: Object.fromEntries(stages.map((s, i) => [s, `thumb-${s}-${i}`])),
    applied_ev: 0,
    preview_scale: scale,
  };
}

describe("UiState", () => {
  it("slider edits keep the draft schema-valid", () => {
    const state = new UiState();
    state.setEdit("contrast", 0.5);
    expect(state.recipe.edits.contrast).toBe(0.5);
    expect(() => state.setEdit("contrast", 2)).toThrow(RecipeError);
    // the rejected edit must not corrupt the draft
    expect(state.recipe.edits.contrast).toBe(0.5);
  });

  it("style mix slider builds (1-p, p) weights", () => {
    const state = new UiState();
    state.setStyleMix("Warm", "Moody", 0.5);
    expect(state.recipe.styles).toEqual(["Warm", "Moody"]);
    expect(state.recipe.weights).toEqual([0.5, 0.5]);
  });

  it("stage inspection is served from the cached render", () => {
    const state = new UiState();
    state.acceptRender(fakeRender(0.25));
    expect(state.availableStages()).toEqual([
      "linear", "gain", "gtm", "ltm", "chroma", "gamma",
    ]);
    expect(state.stageThumbnail("gtm")).toBe("thumb-gtm-2");
    expect(state.stageThumbnail("lut3d")).toBeNull();
  });

  it("keeps six photofinishing thumbnails after any render", () => {
    const state = new UiState();
    state.acceptRender(fakeRender(0.25));
    expect(state.availableStages()).toHaveLength(6);
  });

  it("before/after split uses the two most recent renders", () => {
    const state = new UiState();
    state.acceptRender(fakeRender(0.25));
    state.acceptRender(fakeRender(0.25, ["linear", "gain", "gtm", "ltm", "chroma", "gamma"]));
    expect(state.previousPreview).toBe("preview@0.25");
  });

  it("returning to a rendered recipe is a cache hit", () => {
    const state = new UiState();
    state.imageId = "abc";
    const neutral = { ...state.recipe };
    const resp = fakeRender(0.25);
    state.storeRender(neutral, resp);
    // moving a slider away and back reproduces the same recipe object
    state.setEdit("contrast", 0.4);
    expect(state.cachedRender(state.recipe)).toBeNull();
    state.setEdit("contrast", 0);
    expect(state.cachedRender(state.recipe)).toBe(resp);
  });

  it("cache is keyed by image id and bounded", () => {
    const state = new UiState();
    state.imageId = "abc";
    const recipe = { ...state.recipe };
    state.storeRender(recipe, fakeRender(0.25));
    state.imageId = "other";
    expect(state.cachedRender(recipe)).toBeNull();
    state.imageId = "abc";
    expect(state.cachedRender(recipe)).not.toBeNull();
    for (let i = 0; i < 40; i++) {
      state.storeRender({ ...recipe, weights: [1], styles: [`s${i}`] }, fakeRender(0.25));
    }
    // the oldest entry (the original recipe) was evicted
    expect(state.cachedRender(recipe)).toBeNull();
  });

  it("export stays disabled until a full-scale render finished", () => {
    const state = new UiState();
    expect(state.canExport()).toBe(false);
    state.imageId = "abc";
    state.acceptRender(fakeRender(0.25));
    expect(state.canExport()).toBe(false); // quarter preview only
    state.acceptRender(fakeRender(1.0));
    expect(state.canExport()).toBe(true);
    state.pendingRequest = true; // render in flight: export locked
    expect(state.canExport()).toBe(false);
  });
});
