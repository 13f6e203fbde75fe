// Service payload shapes, mirrored exactly. Every number shown in the UI
// comes from one of these; nothing is recomputed client-side.

export interface HealthResponse {
  status: string;
  models: string[];
  default_model: string;
  ct: number;
}

export interface AugmentRequest {
  session_products: string[];
  candidates: string[];
  ct_override?: number;
  model_id?: string;
}

export interface AugmentResult {
  query: string;
  path: string[];
  confidence: number[];
  model_id: string;
  cache_hit: boolean;
  latency_us: number;
}

export interface AugmentResponse {
  results: AugmentResult[];
  ct: number;
}

export interface SweepRow {
  ct: number;
  micro_precision: number | null;
  micro_recall: number | null;
  macro_precision: number | null;
  macro_recall: number | null;
  mean_depth: number;
  events: number;
  excluded: number;
  no_filtered: number;
}

export interface TraceEvent {
  event_id: string;
  query: string;
  path: string[];
  gini: number[];
  truncated: Record<string, string[]>;
}

export interface SweepPayload {
  rows: SweepRow[];
  events: TraceEvent[];
  default_ct: number;
}

export interface CatalogProduct {
  product_id: string;
  path: string[];
}

export interface CatalogResponse {
  products: CatalogProduct[];
  total: number;
}

export interface SimulateRequest {
  result_set: string[];
  clicked: string[];
  predicted_path: string[];
}

export interface SimulateResponse {
  tp: number;
  fp: number;
  fn: number;
  precision: number | null;
  recall: number | null;
  excluded: boolean;
}
