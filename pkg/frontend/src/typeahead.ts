// Type-ahead demo: a search box wired to /augment, a session basket the
// user fills by clicking catalog products, and a suggestion card showing
// the facet path the service attached to the query.
//
// The card renders the path exactly as returned; depth decisions happen
// server-side. The basket is the whole point of the demo: the same query
// suggests different paths depending on which products sit in it.

import type { FacetPathApi } from "./api.js";
import type { CatalogProduct } from "./types.js";
import { Debouncer, TypeaheadModel } from "./viewmodel.js";

function esc(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

export class TypeaheadView {
  readonly root: HTMLElement;
  readonly model: TypeaheadModel;
  private readonly debouncer: Debouncer;
  private readonly input: HTMLInputElement;
  private readonly ctInput: HTMLInputElement;
  private readonly suggestion: HTMLElement;
  private readonly basket: HTMLElement;
  private readonly error: HTMLElement;
  private readonly catalogList: HTMLElement;

  constructor(
    api: FacetPathApi,
    private readonly catalog: CatalogProduct[],
    debounceMs = 150,
  ) {
    this.model = new TypeaheadModel(api, () => this.render());
    this.debouncer = new Debouncer(debounceMs);

    const template = document.createElement("template");
    template.innerHTML = `<section class="typeahead">
      <div class="search-row">
        <input class="search-box" type="search" placeholder="type a query"
          autocomplete="off" spellcheck="false">
        <label class="ct-override">ct
          <input class="ct-box" type="number" min="0" max="1" step="0.001" placeholder="default">
        </label>
      </div>
      <div class="error" hidden></div>
      <div class="suggestion"></div>
      <h3>session basket</h3>
      <div class="basket"><span class="empty">empty: suggestions use the query alone</span></div>
      <h3>catalog (click to browse a product)</h3>
      <div class="catalog-list"></div>
    </section>`;
    this.root = template.content.firstChild as HTMLElement;
    this.input = this.root.querySelector(".search-box")!;
    this.ctInput = this.root.querySelector(".ct-box")!;
    this.suggestion = this.root.querySelector(".suggestion")!;
    this.basket = this.root.querySelector(".basket")!;
    this.error = this.root.querySelector(".error")!;
    this.catalogList = this.root.querySelector(".catalog-list")!;

    this.input.addEventListener("input", () => {
      this.debouncer.schedule(() => void this.model.submit(this.input.value));
    });
    this.ctInput.addEventListener("change", () => {
      const raw = this.ctInput.value;
      this.model.setCtOverride(raw === "" ? null : Number(raw));
      if (this.input.value.trim()) void this.model.submit(this.input.value);
    });

    this.renderCatalog();
    this.render();
  }

  private renderCatalog(): void {
    this.catalogList.innerHTML = "";
    for (const product of this.catalog) {
      const row = document.createElement("button");
      row.type = "button";
      row.className = "catalog-row";
      row.dataset.product = product.product_id;
      row.innerHTML = `<span class="pid">${esc(product.product_id)}</span>
        <span class="ppath">${esc(product.path.join(" / "))}</span>`;
      row.addEventListener("click", () => {
        this.model.addProduct(product.product_id);
        if (this.input.value.trim()) void this.model.submit(this.input.value);
      });
      this.catalogList.appendChild(row);
    }
  }

  render(): void {
    const state = this.model.state;

    this.error.hidden = state.error === null;
    this.error.textContent = state.error ?? "";

    this.basket.innerHTML = "";
    if (!state.session.length) {
      this.basket.innerHTML = '<span class="empty">empty: suggestions use the query alone</span>';
    }
    for (const productId of state.session) {
      const chip = document.createElement("button");
      chip.type = "button";
      chip.className = "chip";
      chip.dataset.product = productId;
      chip.textContent = `${productId} ×`;
      chip.title = "remove from session";
      chip.addEventListener("click", () => {
        this.model.removeProduct(productId);
        if (this.input.value.trim()) void this.model.submit(this.input.value);
      });
      this.basket.appendChild(chip);
    }

    this.renderSuggestion();
  }

  private renderSuggestion(): void {
    const state = this.model.state;
    if (!state.response) {
      this.suggestion.innerHTML = state.pending
        ? '<div class="card pending">…</div>'
        : '<div class="card idle">suggestions appear here</div>';
      return;
    }
    const result = state.response.results[0];
    if (!result) {
      this.suggestion.innerHTML = '<div class="card idle">no result</div>';
      return;
    }
    const nodes = result.path
      .map(
        (label, i) =>
          `<span class="node kept">${esc(label)}
            <span class="badge">${result.confidence[i]}</span></span>`,
      )
      .join('<span class="sep">/</span>');
    this.suggestion.innerHTML = `<div class="card ${state.pending ? "pending" : ""}"
        data-depth="${result.path.length}">
      <div class="card-query">${esc(result.query)}</div>
      <div class="card-path">${result.path.length ? nodes : '<span class="node cut">no facet clears the threshold</span>'}</div>
      <div class="card-meta">model ${esc(result.model_id)} · ct ${state.response.ct}
        · ${result.cache_hit ? "cached" : `${result.latency_us} µs`}</div>
    </div>`;
  }
}
