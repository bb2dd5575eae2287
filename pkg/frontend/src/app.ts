/** DOM wiring for the studio UI. Every displayed pixel is a server render. */

import { ApiClient, ApiError, type RenderResponse } from "./api.js";
import { EDIT_RANGES, identityRecipe, neutralEdits, type RenderRecipe } from "./recipe.js";
import { Debouncer, RenderQueue } from "./scheduler.js";
import { STAGE_ORDER, UiState } from "./state.js";

const DEBOUNCE_MS = 150;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function pngUrl(b64: string): string {
  return `data:image/png;base64,${b64}`;
}

export function startApp(): void {
  const api = new ApiClient("");
  const state = new UiState();

  const preview = el<HTMLImageElement>("preview");
  const beforeView = el<HTMLImageElement>("before");
  const statusLine = el<HTMLDivElement>("status");
  const stageStrip = el<HTMLDivElement>("stages");
  const exportBtn = el<HTMLButtonElement>("export");
  const exportEmbed = el<HTMLInputElement>("export-embed");
  const styleA = el<HTMLSelectElement>("style-a");
  const styleB = el<HTMLSelectElement>("style-b");
  const mixSlider = el<HTMLInputElement>("style-mix");

  const queue = new RenderQueue<RenderRecipe, RenderResponse>(
    (recipe) => {
      if (!state.imageId) return Promise.reject(new Error("no image uploaded"));
      return api.render(state.imageId, recipe);
    },
    ({ result }) => {
      state.pendingRequest = queue.busy;
      if (lastSubmitted) state.storeRender(lastSubmitted, result);
      state.acceptRender(result);
      preview.src = pngUrl(result.preview_png);
      renderStageStrip();
      updateControls();
    },
    (err) => {
      state.pendingRequest = queue.busy;
      state.errorMessage = err instanceof ApiError ? err.message : String(err);
      statusLine.textContent = `render failed: ${state.errorMessage}`;
      statusLine.classList.add("error");
      updateControls();
    },
  );

  const debouncer = new Debouncer<RenderRecipe>(DEBOUNCE_MS, (recipe) => {
    const cached = state.cachedRender(recipe);
    if (cached) {
      // returning to an already-rendered recipe: serve from cache
      state.acceptRender(cached);
      preview.src = pngUrl(cached.preview_png);
      renderStageStrip();
      updateControls();
      return;
    }
    state.pendingRequest = true;
    statusLine.textContent = "rendering…";
    statusLine.classList.remove("error");
    lastSubmitted = recipe;
    queue.submit(recipe);
    updateControls();
  });

  let lastSubmitted: RenderRecipe | null = null;

  function requestRender(recipe: RenderRecipe): void {
    debouncer.push(recipe);
  }

  /** Slider release: fire immediately at full scale (drags preview at 1/4). */
  function releaseRender(): void {
    debouncer.push({ ...state.recipe, preview_scale: 1.0 });
    debouncer.flush();
  }

  function updateControls(): void {
    exportBtn.disabled = !state.canExport();
    if (!state.pendingRequest && !state.errorMessage) {
      statusLine.textContent = "ready";
    }
  }

  function renderStageStrip(): void {
    stageStrip.replaceChildren();
    for (const stage of STAGE_ORDER) {
      const b64 = state.stageThumbnail(stage);
      if (!b64) continue;
      const fig = document.createElement("figure");
      const img = document.createElement("img");
      img.src = pngUrl(b64);
      img.title = stage;
      img.addEventListener("click", () => {
        // cache-only switch: no re-render to inspect a stage
        preview.src = pngUrl(b64);
        statusLine.textContent = `stage: ${stage}`;
      });
      const cap = document.createElement("figcaption");
      cap.textContent = stage;
      fig.append(img, cap);
      stageStrip.append(fig);
    }
  }

  // --- edit sliders ------------------------------------------------------
  const neutral = neutralEdits();
  for (const [name, [lo, hi]] of Object.entries(EDIT_RANGES)) {
    const slider = document.getElementById(`edit-${name}`) as HTMLInputElement | null;
    if (!slider) continue;
    slider.min = String(lo);
    slider.max = String(hi);
    slider.step = "0.01";
    slider.value = String((neutral as unknown as Record<string, number>)[name] ?? 0);
    slider.addEventListener("input", () => {
      const draft = state.setEdit(
        name as keyof RenderRecipe["edits"],
        Number(slider.value),
      );
      requestRender({ ...draft, preview_scale: 0.25 });
    });
    slider.addEventListener("change", releaseRender);
  }

  // --- style selection / mixing ------------------------------------------
  function onStyleChange(): void {
    const position = Number(mixSlider.value);
    const draft =
      styleA.value === styleB.value || position === 0
        ? state.setStyles([styleA.value], [1.0])
        : position === 1
          ? state.setStyles([styleB.value], [1.0])
          : state.setStyleMix(styleA.value, styleB.value, position);
    requestRender({ ...draft, preview_scale: 0.25 });
  }
  mixSlider.min = "0";
  mixSlider.max = "1";
  mixSlider.step = "0.05";
  mixSlider.addEventListener("input", onStyleChange);
  mixSlider.addEventListener("change", releaseRender);
  styleA.addEventListener("change", () => {
    onStyleChange();
    releaseRender();
  });
  styleB.addEventListener("change", () => {
    onStyleChange();
    releaseRender();
  });

  // --- upload -------------------------------------------------------------
  const mosaicInput = el<HTMLInputElement>("mosaic-file");
  const metaInput = el<HTMLInputElement>("meta-file");
  el<HTMLButtonElement>("upload").addEventListener("click", async () => {
    const mosaic = mosaicInput.files?.[0];
    const meta = metaInput.files?.[0];
    if (!mosaic || !meta) {
      statusLine.textContent = "choose a mosaic file and its metadata JSON";
      return;
    }
    try {
      state.imageId = await api.uploadBundle(mosaic, meta);
      state.clearCache();
      state.recipe = identityRecipe(0.25);
      statusLine.textContent = `uploaded ${state.imageId}`;
      requestRender(state.recipe); // fast quarter preview first
      debouncer.flush();
      releaseRender(); // full-scale follow-up enables export
    } catch (err) {
      statusLine.textContent = `upload failed: ${err instanceof ApiError ? err.message : err}`;
      statusLine.classList.add("error");
    }
  });

  // --- before/after split --------------------------------------------------
  el<HTMLInputElement>("split-toggle").addEventListener("change", (ev) => {
    const on = (ev.target as HTMLInputElement).checked;
    beforeView.style.display = on && state.previousPreview ? "block" : "none";
    if (state.previousPreview) beforeView.src = pngUrl(state.previousPreview);
  });

  // --- export ---------------------------------------------------------------
  exportBtn.addEventListener("click", async () => {
    if (!state.imageId) return;
    try {
      // a full-scale render already ran (canExport gates the button);
      // the service answers 409 otherwise and we surface it below
      const blob = await api.export(state.imageId, exportEmbed.checked);
      const styleName = state.recipe.styles.join("+");
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = `render-${styleName}${exportEmbed.checked ? "-embedded" : ""}.jpg`;
      link.click();
      URL.revokeObjectURL(link.href);
      statusLine.textContent = "exported";
    } catch (err) {
      state.pendingRequest = false;
      const msg =
        err instanceof ApiError && err.status === 409
          ? "render full size first"
          : String(err);
      statusLine.textContent = `export failed: ${msg}`;
      statusLine.classList.add("error");
    } finally {
      updateControls();
    }
  });

  // --- boot -----------------------------------------------------------------
  void api
    .listStyles()
    .then((styles) => {
      for (const sel of [styleA, styleB]) {
        sel.replaceChildren();
        for (const name of styles) {
          const opt = document.createElement("option");
          opt.value = name;
          opt.textContent = name;
          sel.append(opt);
        }
      }
      if (styles.includes("identity")) styleA.value = "identity";
    })
    .catch((err) => {
      statusLine.textContent = `cannot reach render service: ${err}`;
      statusLine.classList.add("error");
    });
  updateControls();
}

if (typeof document !== "undefined" && document.getElementById("preview")) {
  startApp();
}
