import type { ApiClient, DashboardSpec, Manifest, VizSpec } from "./api.js";

// A draft wraps one visualization in the builder. Generated drafts come
// from the service preview with columns and function already filled in;
// only user-added or user-edited drafts are sent back on generate, the
// server re-derives the untouched ones itself.
export interface VizDraft {
  viz: VizSpec;
  userAdded: boolean;
  dirty: boolean;
  error: string | null;
}

/** Checks an edit against the manifest so bad columns never reach the wire. */
export function validateViz(manifest: Manifest, viz: VizSpec): string | null {
  const doc = manifest.documents.find((d) => d.records_class === viz.measure_binding.document);
  if (!doc) return `no document for ${viz.measure_binding.document}`;
  if (!doc.header.includes(viz.measure_binding.column)) {
    return `${doc.file} has no column "${viz.measure_binding.column}"`;
  }
  if (viz.dimension_binding) {
    const dim = manifest.documents.find((d) => d.records_class === viz.dimension_binding!.document);
    if (!dim) return `no document for ${viz.dimension_binding.document}`;
    if (!dim.header.includes(viz.dimension_binding.column)) {
      return `${dim.file} has no column "${viz.dimension_binding.column}"`;
    }
  }
  return null;
}

export function slugify(text: string): string {
  return text
    .toLowerCase()
    .replace(/[^a-z0-9]+/g, "-")
    .replace(/^-+|-+$/g, "");
}

export class DashboardBuilder {
  private constructor(
    readonly manifest: Manifest,
    readonly preview: DashboardSpec,
    readonly drafts: VizDraft[],
  ) {}

  static async load(client: ApiClient): Promise<DashboardBuilder> {
    const manifest = await client.manifest();
    const preview = await client.previewDashboard();
    const drafts = preview.visualizations.map((viz) => ({
      viz: structuredClone(viz),
      userAdded: false,
      dirty: false,
      error: null,
    }));
    return new DashboardBuilder(manifest, preview, drafts);
  }

  draft(id: string): VizDraft {
    const found = this.drafts.find((d) => d.viz.id === id);
    if (!found) throw new Error(`no draft ${id}`);
    return found;
  }

  /**
   * Adds a number card counting the same records as an existing chart.
   * The measure binding is copied from `from` (default: the first
   * previewed visualization), so the card needs no further setup.
   */
  addNumberCard(title: string, from?: VizSpec): VizDraft {
    const source = from ?? this.drafts[0]?.viz;
    if (!source) throw new Error("no visualization to copy the measure from");
    const draft: VizDraft = {
      viz: {
        id: slugify(title),
        title,
        chart_type: "number",
        measure_binding: { ...source.measure_binding },
        dimension_binding: null,
        join_path: null,
      },
      userAdded: true,
      dirty: false,
      error: null,
    };
    this.drafts.push(draft);
    return draft;
  }

  updateDraft(id: string, patch: Partial<Pick<VizSpec, "title" | "chart_type">> & Partial<Pick<VizSpec["measure_binding"], "column" | "function">>): void {
    const draft = this.draft(id);
    if (patch.title !== undefined) draft.viz.title = patch.title;
    if (patch.chart_type !== undefined) draft.viz.chart_type = patch.chart_type;
    if (patch.column !== undefined) draft.viz.measure_binding.column = patch.column;
    if (patch.function !== undefined) draft.viz.measure_binding.function = patch.function;
    draft.dirty = true;
    draft.error = validateViz(this.manifest, draft.viz);
  }

  /** The visualizations that differ from what the server would generate. */
  edits(): VizSpec[] {
    return this.drafts.filter((d) => d.userAdded || d.dirty).map((d) => d.viz);
  }

  async generate(client: ApiClient): Promise<DashboardSpec> {
    const broken = this.drafts.find((d) => d.error);
    if (broken) throw new Error(`${broken.viz.id}: ${broken.error}`);
    return client.createDashboard({ visualizations: this.edits() });
  }
}
