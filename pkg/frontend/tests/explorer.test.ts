// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { ExplorerView } from "../src/explorer.js";
import type { SweepPayload, SweepRow } from "../src/types.js";
import { ExplorerModel } from "../src/viewmodel.js";
import sweepFixture from "./fixtures/sweep.json";

const sweep = sweepFixture as unknown as SweepPayload;

function mount(): { view: ExplorerView; model: ExplorerModel } {
  const model = new ExplorerModel(sweep);
  const view = new ExplorerView(model);
  document.body.innerHTML = "";
  document.body.appendChild(view.root);
  return { view, model };
}

function cellText(root: HTMLElement, ct: number, column: keyof SweepRow): string {
  const cell = root.querySelector(`tr[data-ct="${ct}"] td[data-column="${column}"]`);
  expect(cell, `cell ${column} for ct=${ct}`).not.toBeNull();
  return cell!.textContent ?? "";
}

function moveSlider(view: ExplorerView, index: number): void {
  const slider = view.root.querySelector<HTMLInputElement>("input[type=range]")!;
  slider.value = String(index);
  slider.dispatchEvent(new Event("input"));
}

function traceDepths(view: ExplorerView): Map<string, number> {
  const depths = new Map<string, number>();
  for (const node of view.root.querySelectorAll<HTMLElement>(".trace-event")) {
    depths.set(node.dataset.event!, Number(node.dataset.depth));
  }
  return depths;
}

describe("ExplorerView table", () => {
  it("renders every sweep figure exactly as the service sent it", () => {
    const { view } = mount();
    expect(sweep.rows.length).toBeGreaterThanOrEqual(5);
    const columns: Array<keyof SweepRow> = [
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
    // spot-check five rows against the raw payload, digit for digit
    for (const row of sweep.rows.slice(0, 5)) {
      for (const column of columns) {
        const value = row[column];
        const expected = value === null ? "-" : String(value);
        expect(cellText(view.root, row.ct, column)).toBe(expected);
      }
    }
  });

  it("marks the default threshold as selected on load", () => {
    const { view } = mount();
    const selected = view.root.querySelector("tr.selected") as HTMLElement;
    expect(selected.dataset.ct).toBe(String(sweep.default_ct));
    expect(view.root.querySelector(".slider-value")!.textContent).toContain("(default)");
  });

  it("clicking a row selects its threshold", () => {
    const { view, model } = mount();
    const target = sweep.rows[0]!;
    view.root.querySelector<HTMLElement>(`tr[data-ct="${target.ct}"]`)!.click();
    expect(model.selectedCt).toBe(target.ct);
    expect(view.root.querySelector("tr.selected")!.textContent).toContain(String(target.ct));
  });
});

describe("ExplorerView slider", () => {
  it("never shows a shallower path when the threshold loosens", () => {
    const { view, model } = mount();
    // walk from the strictest threshold down; kept depth may only grow
    moveSlider(view, model.cts.length - 1);
    let previous = traceDepths(view);
    expect(previous.size).toBe(sweep.events.length);
    for (let index = model.cts.length - 2; index >= 0; index -= 1) {
      moveSlider(view, index);
      const current = traceDepths(view);
      for (const [eventId, depth] of current) {
        expect(depth).toBeGreaterThanOrEqual(previous.get(eventId)!);
      }
      previous = current;
    }
  });

  it("shows the loosest threshold's own mean depth after sliding to it", () => {
    const { view, model } = mount();
    moveSlider(view, 0);
    const loosest = model.cts[0]!;
    expect(model.selectedCt).toBe(loosest);
    const row = sweep.rows.find((r) => r.ct === loosest)!;
    const label = view.root.querySelector(".slider-value")!.textContent!;
    expect(label).toContain(`ct=${loosest}`);
    expect(label).toContain(`mean depth ${row.mean_depth}`);
    // no other row reaches deeper once every confidence clears the bar
    expect(Math.max(...sweep.rows.map((r) => r.mean_depth))).toBe(row.mean_depth);
  });

  it("draws a dot per measurable row and a pareto frontier", () => {
    const { view, model } = mount();
    const measurable = sweep.rows.filter(
      (r) => r.micro_precision !== null && r.micro_recall !== null,
    );
    expect(view.root.querySelectorAll("circle.dot").length).toBe(measurable.length);
    if (model.paretoFrontier().length > 1) {
      expect(view.root.querySelector("polyline.pareto")).not.toBeNull();
    }
  });
});
