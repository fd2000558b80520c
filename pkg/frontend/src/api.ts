// Thin fetch wrapper around the service endpoints the page uses.
// Every number shown in the UI comes out of these responses.

import type { TestResponse, UploadResponse } from "./types.js";

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function parseJson<T>(res: Response): Promise<T> {
  const text = await res.text();
  if (!res.ok) {
    let message = text;
    try {
      const doc = JSON.parse(text);
      if (doc && typeof doc.error === "string") message = doc.error;
    } catch {
      // non-JSON error body, keep raw text
    }
    throw new ApiError(res.status, message);
  }
  return JSON.parse(text) as T;
}

export class Api {
  private readonly base: string;

  constructor(base = "") {
    this.base = base;
  }

  /** POST /datasets with the panel file; column names use service defaults. */
  async upload(file: Blob, name = "panel.csv"): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", file, name);
    const res = await fetch(this.base + "/datasets", {
      method: "POST",
      body: form,
    });
    return parseJson<UploadResponse>(res);
  }

  /** POST /datasets/{id}/test with a partial config body. */
  async runTest(
    datasetId: string,
    body: object,
    signal?: AbortSignal,
  ): Promise<TestResponse> {
    const res = await fetch(`${this.base}/datasets/${datasetId}/test`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    return parseJson<TestResponse>(res);
  }

  /** The bundled demo panel, served by the same process. */
  async demoCsv(): Promise<Blob> {
    const res = await fetch(this.base + "/ui/demo.csv");
    if (!res.ok) {
      throw new ApiError(res.status, "demo data unavailable");
    }
    return res.blob();
  }
}
