// Thin typed client for the facet-path service. The fetch implementation
// is injectable so tests can run against recorded payloads.

import type {
  AugmentRequest,
  AugmentResponse,
  CatalogResponse,
  HealthResponse,
  SimulateRequest,
  SimulateResponse,
  SweepPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service returned ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText || "request failed";
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (body && body.detail !== undefined) detail = String(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class FacetPathApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.get("/health");
  }

  sweep(): Promise<SweepPayload> {
    return this.get("/sweep");
  }

  catalog(limit = 200): Promise<CatalogResponse> {
    return this.get(`/catalog?limit=${limit}`);
  }

  augment(request: AugmentRequest): Promise<AugmentResponse> {
    return this.post("/augment", request);
  }

  simulate(request: SimulateRequest): Promise<SimulateResponse> {
    return this.post("/simulate", request);
  }
}
