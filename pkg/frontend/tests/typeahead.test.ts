// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { FacetPathApi } from "../src/api.js";
import type { FetchLike } from "../src/api.js";
import type { AugmentRequest, AugmentResponse, CatalogProduct } from "../src/types.js";
import { TypeaheadView } from "../src/typeahead.js";
import augmentFixture from "./fixtures/augment.json";

interface AugmentFixture {
  query: string;
  tops: string[];
  session_a: string[];
  session_b: string[];
  ct_ladder: number[];
  catalog: { products: CatalogProduct[]; total: number };
  responses: Record<string, AugmentResponse>;
}

const fixture = augmentFixture as unknown as AugmentFixture;

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

// replay the recorded service responses; the key mirrors how they were
// recorded: query | comma-joined session | ct override or "default"
const fetchFromFixtures: FetchLike = async (url, init) => {
  if (!url.endsWith("/augment")) throw new Error(`unexpected request ${url}`);
  const body = JSON.parse(init?.body as string) as AugmentRequest;
  const query = body.candidates[0]!;
  if (query === "boom") return jsonResponse({ detail: "candidate cannot be served" }, 400);
  const ct = body.ct_override !== undefined ? String(body.ct_override) : "default";
  const key = `${query}|${body.session_products.join(",")}|${ct}`;
  const recorded = fixture.responses[key];
  if (!recorded) throw new Error(`no recorded response for ${key}`);
  return jsonResponse(recorded);
};

function mount(): TypeaheadView {
  const api = new FacetPathApi("http://svc:8000", fetchFromFixtures);
  const view = new TypeaheadView(api, fixture.catalog.products, 0);
  document.body.innerHTML = "";
  document.body.appendChild(view.root);
  return view;
}

async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

function clickProduct(view: TypeaheadView, productId: string): void {
  const row = view.root.querySelector<HTMLButtonElement>(
    `button.catalog-row[data-product="${productId}"]`,
  );
  expect(row, `catalog row ${productId}`).not.toBeNull();
  row!.click();
}

async function setCt(view: TypeaheadView, ct: number | null): Promise<void> {
  const box = view.root.querySelector<HTMLInputElement>(".ct-box")!;
  box.value = ct === null ? "" : String(ct);
  box.dispatchEvent(new Event("change"));
  await settle();
}

async function type(view: TypeaheadView, text: string): Promise<void> {
  const box = view.root.querySelector<HTMLInputElement>(".search-box")!;
  box.value = text;
  box.dispatchEvent(new Event("input"));
  await settle();
}

function card(view: TypeaheadView): HTMLElement {
  return view.root.querySelector(".card") as HTMLElement;
}

function recordedPath(session: string[], ct: number | "default"): string[] {
  const key = `${fixture.query}|${session.join(",")}|${ct}`;
  return fixture.responses[key]!.results[0]!.path;
}

describe("TypeaheadView sessions", () => {
  it("suggests different facet paths for the same query under two sessions", async () => {
    const pathA = recordedPath(fixture.session_a, 0.9);
    const pathB = recordedPath(fixture.session_b, 0.9);
    expect(pathA).not.toEqual(pathB);

    const viewA = mount();
    for (const pid of fixture.session_a) clickProduct(viewA, pid);
    await setCt(viewA, 0.9);
    await type(viewA, fixture.query);
    const textA = card(viewA).querySelector(".card-path")!.textContent!;

    const viewB = mount();
    for (const pid of fixture.session_b) clickProduct(viewB, pid);
    await setCt(viewB, 0.9);
    await type(viewB, fixture.query);
    const textB = card(viewB).querySelector(".card-path")!.textContent!;

    for (const label of pathA) expect(textA).toContain(label);
    for (const label of pathB) expect(textB).toContain(label);
    expect(textA).not.toBe(textB);
    expect(card(viewA).dataset.depth).toBe(String(pathA.length));
    expect(card(viewB).dataset.depth).toBe(String(pathB.length));
  });

  it("renders each node with the service confidence, verbatim", async () => {
    const view = mount();
    for (const pid of fixture.session_a) clickProduct(view, pid);
    await setCt(view, 0.9);
    await type(view, fixture.query);
    const key = `${fixture.query}|${fixture.session_a.join(",")}|0.9`;
    const result = fixture.responses[key]!.results[0]!;
    const badges = Array.from(card(view).querySelectorAll(".badge"));
    expect(badges.map((b) => b.textContent?.trim())).toEqual(
      result.confidence.map((c) => String(c)),
    );
  });

  it("removing a basket chip resends without that product", async () => {
    const view = mount();
    clickProduct(view, fixture.session_a[0]!);
    expect(view.model.state.session).toEqual([fixture.session_a[0]]);
    const chip = view.root.querySelector<HTMLButtonElement>(".basket .chip")!;
    chip.click();
    await settle();
    expect(view.model.state.session).toEqual([]);
    expect(view.root.querySelector(".basket .empty")).not.toBeNull();
  });
});

describe("TypeaheadView threshold", () => {
  it("never shows a shallower path as ct decreases", async () => {
    const view = mount();
    for (const pid of fixture.session_a) clickProduct(view, pid);
    await type(view, fixture.query);

    const strictToLoose = [...fixture.ct_ladder].sort((a, b) => b - a);
    let previousDepth = -1;
    for (const ct of strictToLoose) {
      await setCt(view, ct);
      const depth = Number(card(view).dataset.depth);
      expect(depth).toBeGreaterThanOrEqual(previousDepth);
      previousDepth = depth;
    }
    const loosest = Math.min(...fixture.ct_ladder);
    expect(previousDepth).toBe(recordedPath(fixture.session_a, loosest).length);
  });

  it("shows the threshold the service applied", async () => {
    const view = mount();
    await setCt(view, 0.9);
    await type(view, fixture.query);
    const key = `${fixture.query}||0.9`;
    expect(card(view).querySelector(".card-meta")!.textContent).toContain(
      `ct ${fixture.responses[key]!.ct}`,
    );
  });
});

describe("TypeaheadView errors", () => {
  it("keeps the last good suggestion when the service rejects a request", async () => {
    const view = mount();
    await setCt(view, 0.5);
    await type(view, fixture.query);
    const goodPath = recordedPath([], 0.5);
    expect(card(view).dataset.depth).toBe(String(goodPath.length));

    await type(view, "boom");
    const error = view.root.querySelector<HTMLElement>(".error")!;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain("400");
    expect(card(view).dataset.depth).toBe(String(goodPath.length));
    expect(card(view).querySelector(".card-query")!.textContent).toBe(fixture.query);
  });

  it("clears the error once a request succeeds again", async () => {
    const view = mount();
    await setCt(view, 0.5);
    await type(view, "boom");
    expect(view.root.querySelector<HTMLElement>(".error")!.hidden).toBe(false);
    await type(view, fixture.query);
    expect(view.root.querySelector<HTMLElement>(".error")!.hidden).toBe(true);
  });
});
