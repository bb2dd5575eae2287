/** UI state: recipe draft, cached render payload, pending flag. */

import type { RenderResponse } from "./api.js";
import {
  identityRecipe,
  mixWeights,
  validateRecipe,
  type RenderRecipe,
} from "./recipe.js";

export const STAGE_ORDER = ["linear", "gain", "gtm", "ltm", "lut3d", "chroma", "gamma"];

const RENDER_CACHE_LIMIT = 32;

export class UiState {
  imageId: string | null = null;
  recipe: RenderRecipe = identityRecipe(0.25);
  lastRender: RenderResponse | null = null;
  previousPreview: string | null = null; // for the before/after split
  pendingRequest = false;
  errorMessage: string | null = null;
  private renderCache = new Map<string, RenderResponse>();

  private cacheKey(recipe: RenderRecipe): string {
    return `${this.imageId}|${JSON.stringify(recipe)}`;
  }

  /** Returning to an already-rendered recipe is a cache hit: no request. */
  cachedRender(recipe: RenderRecipe): RenderResponse | null {
    return this.renderCache.get(this.cacheKey(recipe)) ?? null;
  }

  storeRender(recipe: RenderRecipe, resp: RenderResponse): void {
    const key = this.cacheKey(recipe);
    this.renderCache.delete(key);
    this.renderCache.set(key, resp);
    while (this.renderCache.size > RENDER_CACHE_LIMIT) {
      const oldest = this.renderCache.keys().next().value as string;
      this.renderCache.delete(oldest);
    }
  }

  clearCache(): void {
    this.renderCache.clear();
  }

  /** Mutate one edit slider; the draft is validated before it can be sent. */
  setEdit(name: keyof RenderRecipe["edits"], value: number | boolean): RenderRecipe {
    const draft: RenderRecipe = {
      ...this.recipe,
      edits: { ...this.recipe.edits, [name]: value },
    };
    validateRecipe(draft);
    this.recipe = draft;
    return draft;
  }

  setStyles(styles: string[], weights: number[]): RenderRecipe {
    const draft = { ...this.recipe, styles, weights };
    validateRecipe(draft);
    this.recipe = draft;
    return draft;
  }

  /** Two-style mix slider: position 0 is all first style, 1 all second. */
  setStyleMix(a: string, b: string, position: number): RenderRecipe {
    const [wa, wb] = mixWeights(position);
    return this.setStyles([a, b], [wa, wb]);
  }

  setPreviewScale(scale: number): RenderRecipe {
    const draft = { ...this.recipe, preview_scale: scale };
    validateRecipe(draft);
    this.recipe = draft;
    return draft;
  }

  /** Record a completed render; the previous preview backs the split view. */
  acceptRender(resp: RenderResponse): void {
    if (this.lastRender) this.previousPreview = this.lastRender.preview_png;
    this.lastRender = resp;
    this.errorMessage = null;
  }

  /** Stage thumbnails come with every render; switching is cache-only. */
  stageThumbnail(stage: string): string | null {
    if (!this.lastRender) return null;
    return this.lastRender.stages[stage] ?? null;
  }

  availableStages(): string[] {
    if (!this.lastRender) return [];
    return STAGE_ORDER.filter((s) => s in this.lastRender!.stages);
  }

  /** Export is enabled only after a full-scale render has completed. */
  canExport(): boolean {
    return (
      this.imageId !== null &&
      !this.pendingRequest &&
      this.lastRender !== null &&
      this.lastRender.preview_scale === 1.0
    );
  }
}
