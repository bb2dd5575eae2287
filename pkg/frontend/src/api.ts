/** Typed client for the render service. */

import type { RenderRecipe } from "./recipe.js";

export interface RenderResponse {
  preview_png: string; // base64 PNG
  stages: Record<string, string>; // stage name -> base64 PNG thumbnail
  applied_ev: number;
  preview_scale: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function errorOf(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const body = (await resp.json()) as { error?: string };
    if (body.error) detail = body.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async uploadBundle(mosaic: Blob, metadata: Blob): Promise<string> {
    const form = new FormData();
    form.append("mosaic", mosaic, "mosaic.png");
    form.append("metadata", metadata, "metadata.json");
    const resp = await fetch(`${this.baseUrl}/images`, { method: "POST", body: form });
    if (resp.status !== 201) throw await errorOf(resp);
    const body = (await resp.json()) as { id: string };
    return body.id;
  }

  async render(imageId: string, recipe: RenderRecipe): Promise<RenderResponse> {
    const resp = await fetch(`${this.baseUrl}/images/${imageId}/render`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(recipe),
    });
    if (!resp.ok) throw await errorOf(resp);
    return (await resp.json()) as RenderResponse;
  }

  async listStyles(): Promise<string[]> {
    const resp = await fetch(`${this.baseUrl}/styles`);
    if (!resp.ok) throw await errorOf(resp);
    const body = (await resp.json()) as { styles: string[] };
    return body.styles;
  }

  async export(imageId: string, embed: boolean): Promise<Blob> {
    const resp = await fetch(
      `${this.baseUrl}/images/${imageId}/export?embed=${embed ? "true" : "false"}`,
    );
    if (!resp.ok) throw await errorOf(resp);
    return resp.blob();
  }
}
