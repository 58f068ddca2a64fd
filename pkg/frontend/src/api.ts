// Typed client for the dashboard service. Shapes mirror the JSON the
// API emits; nothing here reinterprets values, charts render them as-is.

export interface ManifestDocument {
  file: string;
  records_class: string;
  header: string[];
  rows: number;
}

export interface IndicatorMeasure {
  entity_class: string;
  function: string;
  value_property: string | null;
}

export interface Indicator {
  iri: string;
  label: string;
  dimensions: { entity_class: string }[];
  measures: IndicatorMeasure[];
}

export interface Manifest {
  documents: ManifestDocument[];
  indicators: Indicator[];
  metadata: { studies: number; deployments: number; acquisitions: number };
}

export interface MeasureBinding {
  document: string;
  column: string;
  function: string;
}

export interface DimensionBinding {
  document: string;
  column: string;
}

export interface JoinPath {
  reference_column: string;
  identifier_column: string;
}

export interface VizSpec {
  id: string;
  title: string;
  chart_type: string;
  measure_binding: MeasureBinding;
  dimension_binding: DimensionBinding | null;
  join_path: JoinPath | null;
}

export interface DashboardSpec {
  id: string;
  title: string;
  visualizations: VizSpec[];
}

export interface DashboardRequest {
  id?: string;
  title?: string;
  visualizations: VizSpec[];
}

export interface FilterWire {
  target: { document: string; column: string };
  op: "eq" | "in" | "range";
  values: string[];
}

// One aggregated group: display value (null on number cards) and value.
export type GroupRow = [string | null, number];

export interface QueryResult {
  groups: GroupRow[];
  total_rows_considered: number;
}

export type SelectionResults = Record<string, QueryResult>;

export interface DatasetSummary {
  id: string;
  records_class: string;
  rows: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) {
      let error = "HttpError";
      let detail = res.statusText;
      try {
        const parsed = (await res.json()) as { error?: string; detail?: string };
        error = parsed.error ?? error;
        detail = parsed.detail ?? detail;
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(res.status, error, detail);
    }
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  listDatasets(): Promise<DatasetSummary[]> {
    return this.request("GET", "/datasets");
  }

  manifest(): Promise<Manifest> {
    return this.request("GET", "/kg/manifest");
  }

  /** Projects the graph to a bundle; the response is the manifest. */
  serialize(): Promise<Manifest> {
    return this.request("POST", "/kg/serialize");
  }

  previewDashboard(): Promise<DashboardSpec> {
    return this.request("GET", "/dashboards/preview");
  }

  createDashboard(body: DashboardRequest): Promise<DashboardSpec> {
    return this.request("POST", "/dashboards", body);
  }

  getDashboard(id: string): Promise<DashboardSpec> {
    return this.request("GET", `/dashboards/${id}`);
  }

  query(dashboardId: string, vizId: string, filters: FilterWire[]): Promise<QueryResult> {
    return this.request("POST", `/dashboards/${dashboardId}/query`, {
      viz_id: vizId,
      filters,
    });
  }

  /** Evaluates every visualization under one shared filter (or none). */
  applySelection(dashboardId: string, selection: FilterWire | null): Promise<SelectionResults> {
    return this.request("POST", `/dashboards/${dashboardId}/selection`, { selection });
  }
}
