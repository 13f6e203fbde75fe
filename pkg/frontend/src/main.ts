// App shell: connects to a running facetpath service, then mounts the
// threshold explorer and the type-ahead demo behind two tabs.
//
// Start the service first, e.g.
//   facetpath serve --model-dir runs/demo/model --port 8000
// then open this page (npx serve ., or any static file server).

import { ApiError, FacetPathApi } from "./api.js";
import { ExplorerView } from "./explorer.js";
import { ExplorerModel } from "./viewmodel.js";
import { TypeaheadView } from "./typeahead.js";

const DEFAULT_BASE = "http://127.0.0.1:8000";

function el<T extends HTMLElement>(selector: string): T {
  const node = document.querySelector<T>(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node;
}

async function connect(baseUrl: string): Promise<void> {
  const status = el<HTMLElement>("#status");
  const tabs = el<HTMLElement>("#tabs");
  const content = el<HTMLElement>("#content");
  status.textContent = `connecting to ${baseUrl}…`;
  status.className = "status";
  tabs.hidden = true;
  content.innerHTML = "";

  const api = new FacetPathApi(baseUrl);
  let health;
  try {
    health = await api.health();
  } catch (err) {
    status.textContent =
      err instanceof ApiError
        ? `service answered ${err.status}: ${err.message}`
        : `cannot reach ${baseUrl}: ${err instanceof Error ? err.message : String(err)}`;
    status.className = "status offline";
    return;
  }
  status.textContent =
    `connected · models ${health.models.join(", ")} · default ${health.default_model} · ct ${health.ct}`;
  status.className = "status online";

  const views: Record<string, HTMLElement> = {};

  try {
    const sweep = await api.sweep();
    views["explorer"] = new ExplorerView(new ExplorerModel(sweep)).root;
  } catch (err) {
    const note = document.createElement("p");
    note.className = "note";
    note.textContent =
      "no sweep loaded on this service (start it with --sweep-file to enable the explorer)";
    views["explorer"] = note;
  }

  let catalog;
  try {
    catalog = await api.catalog(200);
  } catch (err) {
    status.textContent = `catalog failed: ${err instanceof Error ? err.message : String(err)}`;
    status.className = "status offline";
    return;
  }
  views["typeahead"] = new TypeaheadView(api, catalog.products).root;

  tabs.hidden = false;
  const buttons = Array.from(tabs.querySelectorAll<HTMLButtonElement>("button"));
  const select = (name: string) => {
    content.innerHTML = "";
    content.appendChild(views[name]!);
    for (const b of buttons) b.classList.toggle("active", b.dataset.tab === name);
  };
  for (const button of buttons) {
    button.addEventListener("click", () => select(button.dataset.tab!));
  }
  select(views["explorer"]!.classList.contains("note") ? "typeahead" : "explorer");
}

export function boot(): void {
  const baseInput = el<HTMLInputElement>("#base-url");
  baseInput.value = DEFAULT_BASE;
  el<HTMLButtonElement>("#connect").addEventListener("click", () => {
    void connect(baseInput.value.replace(/\/+$/, ""));
  });
  void connect(DEFAULT_BASE);
}

boot();
