import { ApiClient, ApiError } from "./api.js";
import { DashboardBuilder, slugify } from "./builder.js";
import { DashboardController } from "./dashboard.js";
import { renderBuilderPanel, renderDashboard } from "./render.js";

/**
 * Wires the builder and dashboard state to the page. DOM events feed
 * `run`, which serializes the async work on one chain so a test (or a
 * fast clicker) can await `pending` and see the settled DOM.
 */
export class App {
  builder: DashboardBuilder | null = null;
  controller: DashboardController | null = null;
  pending: Promise<void> = Promise.resolve();

  private readonly statusEl: HTMLElement;
  private readonly builderEl: HTMLElement;
  private readonly dashboardEl: HTMLElement;

  constructor(
    readonly root: HTMLElement,
    private readonly client: ApiClient,
  ) {
    this.statusEl = document.createElement("p");
    this.statusEl.className = "status";
    this.builderEl = document.createElement("div");
    this.builderEl.className = "builder-slot";
    this.dashboardEl = document.createElement("div");
    this.dashboardEl.className = "dashboard-slot";
    root.replaceChildren(this.statusEl, this.builderEl, this.dashboardEl);
  }

  async start(): Promise<void> {
    try {
      this.builder = await DashboardBuilder.load(this.client);
    } catch (err) {
      // A fresh workspace has no bundle yet; serializing creates it.
      if (err instanceof ApiError && err.status === 404) {
        await this.client.serialize();
        this.builder = await DashboardBuilder.load(this.client);
      } else {
        this.fail(err);
        return;
      }
    }
    this.renderAll();
  }

  run(op: () => Promise<void>): Promise<void> {
    this.pending = this.pending.then(op).catch((err) => this.fail(err));
    return this.pending;
  }

  private fail(err: unknown): void {
    this.statusEl.textContent = err instanceof Error ? err.message : String(err);
    this.statusEl.classList.add("error");
  }

  private clearStatus(): void {
    this.statusEl.textContent = "";
    this.statusEl.classList.remove("error");
  }

  renderAll(): void {
    if (this.builder) {
      this.builderEl.replaceChildren(
        renderBuilderPanel(this.builder, {
          onDraftChange: (vizId, field, value) => this.editDraft(vizId, field, value),
          onAddCard: (title) => this.addCard(title),
          onGenerate: () => void this.generate(),
        }),
      );
    }
    if (this.controller) {
      this.dashboardEl.replaceChildren(
        renderDashboard(this.controller.spec, this.controller.results, this.controller.selection, {
          onBarClick: (vizId, key) => void this.select(vizId, key),
          onClearSelection: () => void this.clear(),
        }),
      );
    }
  }

  editDraft(vizId: string, field: string, value: string): void {
    if (!this.builder) return;
    if (field === "column") this.builder.updateDraft(vizId, { column: value });
    else if (field === "function") this.builder.updateDraft(vizId, { function: value });
    else return;
    // re-render so a validation error (or its fix) shows up right away
    this.renderAll();
  }

  addCard(title: string): void {
    if (!this.builder) return;
    const name = title.trim() || `card ${this.builder.drafts.length + 1}`;
    if (this.builder.drafts.some((d) => d.viz.id === slugify(name))) return;
    this.builder.addNumberCard(name);
    this.renderAll();
  }

  generate(): Promise<void> {
    return this.run(async () => {
      if (!this.builder) return;
      this.clearStatus();
      const spec = await this.builder.generate(this.client);
      this.controller = new DashboardController(this.client, spec);
      await this.controller.refresh();
      this.renderAll();
    });
  }

  select(vizId: string, key: string): Promise<void> {
    return this.run(async () => {
      if (!this.controller) return;
      this.clearStatus();
      await this.controller.select(vizId, key);
      this.renderAll();
    });
  }

  clear(): Promise<void> {
    return this.run(async () => {
      if (!this.controller) return;
      this.clearStatus();
      await this.controller.clearSelection();
      this.renderAll();
    });
  }
}

export async function bootstrap(root: HTMLElement, client: ApiClient): Promise<App> {
  const app = new App(root, client);
  await app.start();
  return app;
}

declare global {
  interface Window {
    cityforgeApp?: App;
  }
}

// Browser entry point; tests import bootstrap directly instead.
export function initFromDom(): void {
  const root = document.getElementById("app");
  if (!root) return;
  void bootstrap(root, new ApiClient("")).then((app) => {
    window.cityforgeApp = app;
  });
}
