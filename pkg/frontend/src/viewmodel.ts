// Framework-free state holders. All service traffic rules live here:
// debouncing, stale-response discard, last-good-state retention, and
// snapping the threshold slider to thresholds the sweep actually holds.

import type { FacetPathApi } from "./api.js";
import type { AugmentResponse, SweepPayload, SweepRow, TraceEvent } from "./types.js";

export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly delayMs: number) {}

  schedule(fn: () => void): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      fn();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}

export interface TypeaheadState {
  session: string[];
  ctOverride: number | null;
  modelId: string | null;
  query: string;
  response: AugmentResponse | null;
  error: string | null;
  pending: boolean;
}

export class TypeaheadModel {
  private seq = 0;
  readonly state: TypeaheadState = {
    session: [],
    ctOverride: null,
    modelId: null,
    query: "",
    response: null,
    error: null,
    pending: false,
  };

  constructor(
    private readonly api: FacetPathApi,
    private readonly onChange: () => void = () => {},
  ) {}

  addProduct(productId: string): void {
    if (!this.state.session.includes(productId)) {
      this.state.session.push(productId);
      this.onChange();
    }
  }

  removeProduct(productId: string): void {
    this.state.session = this.state.session.filter((p) => p !== productId);
    this.onChange();
  }

  setCtOverride(ct: number | null): void {
    this.state.ctOverride = ct;
    this.onChange();
  }

  // One in-flight request wins: responses carrying an older ticket than
  // the latest submission are dropped, so a slow early reply can never
  // overwrite the suggestion for what the user actually typed.
  async submit(query: string): Promise<void> {
    this.state.query = query;
    const trimmed = query.trim();
    if (!trimmed) {
      this.seq += 1;
      this.state.response = null;
      this.state.error = null;
      this.state.pending = false;
      this.onChange();
      return;
    }
    const ticket = ++this.seq;
    this.state.pending = true;
    this.onChange();
    try {
      const response = await this.api.augment({
        session_products: [...this.state.session],
        candidates: [trimmed],
        ...(this.state.ctOverride !== null ? { ct_override: this.state.ctOverride } : {}),
        ...(this.state.modelId !== null ? { model_id: this.state.modelId } : {}),
      });
      if (ticket !== this.seq) return;
      this.state.response = response;
      this.state.error = null;
    } catch (err) {
      if (ticket !== this.seq) return;
      // keep the last good response on screen; surface the failure beside it
      this.state.error = err instanceof Error ? err.message : String(err);
    } finally {
      if (ticket === this.seq) {
        this.state.pending = false;
        this.onChange();
      }
    }
  }
}

// Matches the service's threshold key format (Python "%g"): plain decimal
// numbers round-trip through String unchanged.
export function ctKey(ct: number): string {
  return String(ct);
}

export class ExplorerModel {
  readonly cts: number[];
  private selected: number;

  constructor(readonly payload: SweepPayload) {
    if (!payload.rows.length) throw new Error("sweep payload holds no rows");
    this.cts = payload.rows.map((r) => r.ct).sort((a, b) => a - b);
    this.selected = this.snap(payload.default_ct);
  }

  // The slider only ever lands on thresholds the sweep actually computed.
  snap(ct: number): number {
    let best = this.cts[0]!;
    for (const candidate of this.cts) {
      if (Math.abs(candidate - ct) < Math.abs(best - ct)) best = candidate;
    }
    return best;
  }

  select(ct: number): void {
    this.selected = this.snap(ct);
  }

  get selectedCt(): number {
    return this.selected;
  }

  get selectedRow(): SweepRow {
    const row = this.payload.rows.find((r) => r.ct === this.selected);
    if (!row) throw new Error(`no sweep row for ct ${this.selected}`);
    return row;
  }

  truncatedFor(event: TraceEvent, ct: number = this.selected): string[] {
    return event.truncated[ctKey(ct)] ?? [];
  }

  // Rows not dominated by another row (higher-or-equal precision AND
  // recall, one strict). Sorted by recall for drawing.
  paretoFrontier(): SweepRow[] {
    const defined = this.payload.rows.filter(
      (r) => r.micro_precision !== null && r.micro_recall !== null,
    );
    const frontier = defined.filter(
      (row) =>
        !defined.some(
          (other) =>
            other !== row &&
            other.micro_precision! >= row.micro_precision! &&
            other.micro_recall! >= row.micro_recall! &&
            (other.micro_precision! > row.micro_precision! ||
              other.micro_recall! > row.micro_recall!),
        ),
    );
    return frontier.sort((a, b) => a.micro_recall! - b.micro_recall!);
  }
}
