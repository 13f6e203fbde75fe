// Threshold explorer: a slider over the swept confidence thresholds, a
// precision/recall scatter, the sweep table verbatim, and replayed sample
// events showing how far each generated path survives truncation.
//
// Every figure is copied from the /sweep payload as-is. The client never
// recomputes a metric and never re-truncates a path; moving the slider
// only switches which precomputed column is displayed.

import { ExplorerModel } from "./viewmodel.js";
import type { SweepRow, TraceEvent } from "./types.js";

const CHART_W = 460;
const CHART_H = 300;
const PAD = 40;

const COLUMNS: Array<keyof SweepRow> = [
  "ct",
  "micro_precision",
  "micro_recall",
  "macro_precision",
  "macro_recall",
  "mean_depth",
  "events",
  "excluded",
  "no_filtered",
];

function cell(value: number | null): string {
  return value === null ? "-" : String(value);
}

function esc(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

export class ExplorerView {
  readonly root: HTMLElement;
  private readonly slider: HTMLInputElement;
  private readonly sliderLabel: HTMLElement;
  private readonly chart: HTMLElement;
  private readonly tableBody: HTMLElement;
  private readonly trace: HTMLElement;

  constructor(private readonly model: ExplorerModel) {
    const template = document.createElement("template");
    template.innerHTML = `<section class="explorer">
      <div class="slider-row">
        <label for="ct-slider">confidence threshold</label>
        <input id="ct-slider" type="range" min="0" step="1">
        <span class="slider-value"></span>
      </div>
      <div class="panels">
        <div class="chart"></div>
        <div class="table-wrap">
          <table class="sweep-table">
            <thead><tr>${COLUMNS.map((c) => `<th>${c}</th>`).join("")}</tr></thead>
            <tbody></tbody>
          </table>
        </div>
      </div>
      <h3>sample events at this threshold</h3>
      <div class="trace"></div>
    </section>`;
    this.root = template.content.firstChild as HTMLElement;
    this.slider = this.root.querySelector("input")!;
    this.sliderLabel = this.root.querySelector(".slider-value")!;
    this.chart = this.root.querySelector(".chart")!;
    this.tableBody = this.root.querySelector("tbody")!;
    this.trace = this.root.querySelector(".trace")!;

    this.slider.max = String(this.model.cts.length - 1);
    this.slider.value = String(this.model.cts.indexOf(this.model.selectedCt));
    this.slider.addEventListener("input", () => {
      this.model.select(this.model.cts[Number(this.slider.value)]!);
      this.render();
    });
    this.render();
  }

  render(): void {
    this.slider.value = String(this.model.cts.indexOf(this.model.selectedCt));
    const row = this.model.selectedRow;
    this.sliderLabel.textContent =
      `ct=${row.ct}  mean depth ${row.mean_depth}` +
      (row.ct === this.model.payload.default_ct ? "  (default)" : "");
    this.renderChart();
    this.renderTable();
    this.renderTrace();
  }

  private x(recall: number): number {
    return PAD + recall * (CHART_W - 2 * PAD);
  }

  private y(precision: number): number {
    return CHART_H - PAD - precision * (CHART_H - 2 * PAD);
  }

  private renderChart(): void {
    const rows = this.model.payload.rows.filter(
      (r) => r.micro_precision !== null && r.micro_recall !== null,
    );
    const frontier = this.model.paretoFrontier();
    const line = frontier
      .map((r) => `${this.x(r.micro_recall!)},${this.y(r.micro_precision!)}`)
      .join(" ");
    const dots = rows
      .map((r) => {
        const selected = r.ct === this.model.selectedCt;
        return `<circle cx="${this.x(r.micro_recall!)}" cy="${this.y(r.micro_precision!)}"
          r="${selected ? 7 : 4}" class="${selected ? "dot selected" : "dot"}">
          <title>ct=${r.ct} p=${cell(r.micro_precision)} r=${cell(r.micro_recall)}</title>
        </circle>`;
      })
      .join("");
    this.chart.innerHTML = `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" role="img"
        aria-label="precision versus recall across thresholds">
      <line x1="${PAD}" y1="${CHART_H - PAD}" x2="${CHART_W - PAD}" y2="${CHART_H - PAD}" class="axis"/>
      <line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${CHART_H - PAD}" class="axis"/>
      <text x="${CHART_W / 2}" y="${CHART_H - 8}" class="axis-label">recall</text>
      <text x="12" y="${CHART_H / 2}" class="axis-label" transform="rotate(-90 12 ${CHART_H / 2})">precision</text>
      ${frontier.length > 1 ? `<polyline points="${line}" class="pareto"/>` : ""}
      ${dots}
    </svg>`;
  }

  private renderTable(): void {
    this.tableBody.innerHTML = "";
    for (const row of this.model.payload.rows) {
      const tr = document.createElement("tr");
      tr.dataset.ct = String(row.ct);
      if (row.ct === this.model.selectedCt) tr.classList.add("selected");
      for (const column of COLUMNS) {
        const td = document.createElement("td");
        td.dataset.column = column;
        td.textContent = cell(row[column]);
        tr.appendChild(td);
      }
      tr.addEventListener("click", () => {
        this.model.select(row.ct);
        this.render();
      });
      this.tableBody.appendChild(tr);
    }
  }

  private renderTrace(): void {
    this.trace.innerHTML = "";
    for (const event of this.model.payload.events) {
      this.trace.appendChild(this.renderEvent(event));
    }
  }

  private renderEvent(event: TraceEvent): HTMLElement {
    const kept = this.model.truncatedFor(event);
    const template = document.createElement("template");
    const nodes = event.path
      .map((label, i) => {
        const confident = i < kept.length;
        const gini = event.gini[i];
        return `<span class="node ${confident ? "kept" : "cut"}"
          title="gini ${gini}">${esc(label)}</span>`;
      })
      .join('<span class="sep">/</span>');
    template.innerHTML = `<div class="trace-event" data-event="${esc(event.event_id)}" data-depth="${kept.length}">
      <span class="trace-query">${esc(event.query)}</span>
      <span class="trace-path">${event.path.length ? nodes : '<span class="node cut">(no path generated)</span>'}</span>
      <span class="trace-kept">${kept.length ? `keeps ${kept.length} of ${event.path.length}` : "suggests nothing"}</span>
    </div>`;
    return template.content.firstChild as HTMLElement;
  }
}
