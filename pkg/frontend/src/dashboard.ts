import type {
  ApiClient,
  DashboardSpec,
  FilterWire,
  QueryResult,
  SelectionResults,
  VizSpec,
} from "./api.js";

export interface SelectionState {
  vizId: string;
  key: string;
}

/**
 * Holds a saved dashboard plus the latest results for every chart.
 * A selection is a click on one bar; it becomes an equality filter on
 * the clicked chart's reference column and the service re-evaluates
 * every chart under it. All numbers displayed come from `results`.
 */
export class DashboardController {
  results: SelectionResults | null = null;
  selection: SelectionState | null = null;

  constructor(
    private readonly client: ApiClient,
    readonly spec: DashboardSpec,
  ) {}

  viz(vizId: string): VizSpec {
    const found = this.spec.visualizations.find((v) => v.id === vizId);
    if (!found) throw new Error(`no visualization ${vizId}`);
    return found;
  }

  resultFor(vizId: string): QueryResult | null {
    return this.results?.[vizId] ?? null;
  }

  selectionWire(): FilterWire | null {
    if (this.selection === null) return null;
    const viz = this.viz(this.selection.vizId);
    if (!viz.join_path) {
      throw new Error(`${viz.id} has no reference column to select on`);
    }
    return {
      target: {
        document: viz.measure_binding.document,
        column: viz.join_path.reference_column,
      },
      op: "eq",
      values: [this.selection.key],
    };
  }

  async refresh(): Promise<SelectionResults> {
    this.results = await this.client.applySelection(this.spec.id, this.selectionWire());
    return this.results;
  }

  /** Clicking the already selected bar toggles the selection off. */
  async select(vizId: string, key: string): Promise<SelectionResults> {
    if (this.selection && this.selection.vizId === vizId && this.selection.key === key) {
      return this.clearSelection();
    }
    this.selection = { vizId, key };
    return this.refresh();
  }

  async clearSelection(): Promise<SelectionResults> {
    this.selection = null;
    return this.refresh();
  }
}
