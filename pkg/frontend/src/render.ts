import type { Manifest, QueryResult, VizSpec } from "./api.js";
import type { VizDraft } from "./builder.js";
import type { SelectionState } from "./dashboard.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const FUNCTIONS = ["count", "sum", "avg", "min", "max"];

// Chart geometry; labels need the margins
const W = 320;
const H = 190;
const TOP = 24;
const BOTTOM = 24;

export function formatValue(v: number): string {
  if (Number.isInteger(v)) return String(v);
  return String(Math.round(v * 100) / 100);
}

export interface VizHandlers {
  onBarClick?: (vizId: string, key: string) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function barSvg(
  viz: VizSpec,
  result: QueryResult,
  selection: SelectionState | null,
  handlers: VizHandlers,
): SVGElement {
  const groups = result.groups;
  const svg = svgEl("svg", { viewBox: `0 0 ${W} ${H}`, class: "chart" });
  if (groups.length === 0) return svg;

  const max = Math.max(...groups.map(([, v]) => v), 0);
  const slot = W / groups.length;
  const barWidth = Math.min(48, slot * 0.6);
  const floor = H - BOTTOM;

  groups.forEach(([key, value], i) => {
    const label = key ?? "(none)";
    const height = max > 0 ? (value / max) * (floor - TOP) : 0;
    const x = slot * i + (slot - barWidth) / 2;
    const selected = selection !== null && selection.vizId === viz.id && selection.key === key;

    const rect = svgEl("rect", {
      x,
      y: floor - height,
      width: barWidth,
      height,
      class: selected ? "bar selected" : "bar",
      "data-key": label,
    });
    if (key !== null && handlers.onBarClick) {
      rect.addEventListener("click", () => handlers.onBarClick!(viz.id, key));
    }
    svg.appendChild(rect);

    const mid = x + barWidth / 2;
    const valueText = svgEl("text", {
      x: mid,
      y: floor - height - 6,
      "text-anchor": "middle",
      class: "bar-value",
    });
    valueText.textContent = formatValue(value);
    svg.appendChild(valueText);

    const tick = svgEl("text", {
      x: mid,
      y: H - 6,
      "text-anchor": "middle",
      class: "bar-label",
    });
    tick.textContent = label;
    svg.appendChild(tick);
  });
  return svg;
}

function lineSvg(result: QueryResult): SVGElement {
  const groups = result.groups;
  const svg = svgEl("svg", { viewBox: `0 0 ${W} ${H}`, class: "chart" });
  if (groups.length === 0) return svg;

  const max = Math.max(...groups.map(([, v]) => v), 0);
  const step = groups.length > 1 ? W / (groups.length - 1) : 0;
  const floor = H - BOTTOM;
  const points = groups
    .map(([, v], i) => {
      const y = max > 0 ? floor - (v / max) * (floor - TOP) : floor;
      return `${step * i},${y}`;
    })
    .join(" ");
  svg.appendChild(svgEl("polyline", { points, class: "line", fill: "none" }));
  return svg;
}

export function renderViz(
  viz: VizSpec,
  result: QueryResult | null,
  selection: SelectionState | null,
  handlers: VizHandlers = {},
): HTMLElement {
  const section = el("section", "viz");
  section.dataset.vizId = viz.id;
  section.dataset.chartType = viz.chart_type;
  section.appendChild(el("h3", "viz-title", viz.title));

  if (result === null) {
    section.appendChild(el("p", "viz-empty", "not evaluated yet"));
    return section;
  }

  if (viz.chart_type === "number") {
    const value = result.groups.length > 0 ? formatValue(result.groups[0]![1]) : "no data";
    section.appendChild(el("div", "card-value", value));
  } else if (result.groups.length === 0) {
    section.appendChild(el("p", "viz-empty-result", "no matching rows"));
  } else if (viz.chart_type === "line") {
    section.appendChild(lineSvg(result));
  } else {
    section.appendChild(barSvg(viz, result, selection, handlers));
  }

  section.appendChild(
    el("p", "viz-total", `rows considered: ${formatValue(result.total_rows_considered)}`),
  );
  return section;
}

export interface DashboardHandlers extends VizHandlers {
  onClearSelection?: () => void;
}

export function renderDashboard(
  spec: { title: string; visualizations: VizSpec[] },
  results: Record<string, QueryResult> | null,
  selection: SelectionState | null,
  handlers: DashboardHandlers = {},
): HTMLElement {
  const root = el("div", "dashboard");
  const head = el("header", "dashboard-head");
  head.appendChild(el("h2", "dashboard-title", spec.title));
  if (selection !== null) {
    const clear = el("button", "clear-selection", `clear selection: ${selection.key}`);
    clear.type = "button";
    if (handlers.onClearSelection) clear.addEventListener("click", handlers.onClearSelection);
    head.appendChild(clear);
  }
  root.appendChild(head);

  if (spec.visualizations.length === 0) {
    root.appendChild(el("p", "dashboard-empty", "no visualizations to show"));
    return root;
  }

  const grid = el("div", "viz-grid");
  for (const viz of spec.visualizations) {
    grid.appendChild(renderViz(viz, results?.[viz.id] ?? null, selection, handlers));
  }
  root.appendChild(grid);
  return root;
}

export interface BuilderHandlers {
  onDraftChange?: (vizId: string, field: string, value: string) => void;
  onAddCard?: (title: string) => void;
  onGenerate?: () => void;
}

function draftFieldset(draft: VizDraft, handlers: BuilderHandlers): HTMLElement {
  const viz = draft.viz;
  const box = el("fieldset", draft.userAdded ? "draft user-added" : "draft");
  box.dataset.vizId = viz.id;
  const legend = document.createElement("legend");
  legend.textContent = `${viz.title} (${viz.chart_type})`;
  box.appendChild(legend);

  const field = (labelText: string, name: string, input: HTMLElement) => {
    const label = el("label", undefined, `${labelText} `);
    (input as HTMLInputElement).dataset.field = name;
    input.addEventListener("change", () => {
      handlers.onDraftChange?.(viz.id, name, (input as HTMLInputElement).value);
    });
    label.appendChild(input);
    box.appendChild(label);
  };

  const measureColumn = el("input");
  measureColumn.value = viz.measure_binding.column;
  field("measure column", "column", measureColumn);

  const fn = el("select");
  for (const name of FUNCTIONS) {
    const option = el("option", undefined, name);
    option.value = name;
    option.selected = name === viz.measure_binding.function;
    fn.appendChild(option);
  }
  fn.value = viz.measure_binding.function;
  field("function", "function", fn);

  if (viz.dimension_binding) {
    const dim = el("input");
    dim.value = viz.dimension_binding.column;
    dim.readOnly = true;
    field("grouped by", "dimension-column", dim);
  }
  if (viz.join_path) {
    const ref = el("input");
    ref.value = viz.join_path.reference_column;
    ref.readOnly = true;
    field("linked by", "reference-column", ref);
  }
  if (draft.error) {
    box.classList.add("invalid");
    box.appendChild(el("p", "draft-error", draft.error));
  }
  return box;
}

export function renderBuilderPanel(
  builder: { manifest: Manifest; drafts: VizDraft[] },
  handlers: BuilderHandlers = {},
): HTMLElement {
  const panel = el("div", "builder");

  const docs = el("ul", "documents");
  for (const doc of builder.manifest.documents) {
    const item = el("li", "document");
    item.appendChild(el("span", "doc-file", doc.file));
    item.append(" ");
    item.appendChild(el("span", "doc-rows", String(doc.rows)));
    item.append(" rows");
    docs.appendChild(item);
  }
  panel.appendChild(docs);

  const indicators = el("ul", "indicators");
  for (const indicator of builder.manifest.indicators) {
    indicators.appendChild(el("li", "indicator", indicator.label));
  }
  panel.appendChild(indicators);

  const drafts = el("div", "drafts");
  for (const draft of builder.drafts) drafts.appendChild(draftFieldset(draft, handlers));
  panel.appendChild(drafts);

  const actions = el("div", "builder-actions");
  const title = el("input", "card-title");
  title.placeholder = "card title";
  actions.appendChild(title);
  const add = el("button", "add-card", "add number card");
  add.type = "button";
  if (handlers.onAddCard) {
    add.addEventListener("click", () => handlers.onAddCard!(title.value));
  }
  actions.appendChild(add);
  const generate = el("button", "generate", "generate dashboard");
  generate.type = "button";
  if (handlers.onGenerate) generate.addEventListener("click", handlers.onGenerate);
  actions.appendChild(generate);
  panel.appendChild(actions);

  return panel;
}
