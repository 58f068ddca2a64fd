"""Workspace: persistent pipeline state shared by the HTTP API and the CLI.

Everything lives in one data directory (inspectable plain files, no
database):

    kg.ttl               the accumulated knowledge graph
    datasets.json        ingestion log (id, class, row count, configs)
    ontology/*.ttl       extra ontologies layered over the built-ins
    catalogs/*.ttl       indicator catalogs (absent = built-in catalog)
    bundle/              emitted .ccsv files, discovered-indicators.ttl,
                         manifest.json (stored bytes, returned verbatim)
    dashboards/*.json    saved dashboard specs

Mutations run under a single writer lock and publish new state only
after their files are written.
"""

from __future__ import annotations

import json
import shutil
import threading
from pathlib import Path

from ..ccsv import CcsvBundle
from ..dashboard import (
    AggregateResult,
    DashboardSpec,
    DimensionBinding,
    FilterExpr,
    FilterTarget,
    JoinPath,
    MeasureBinding,
    UnknownColumnError,
    VizSpec,
    aggregate,
    apply_selection,
    generate_specs,
)
from ..ingest import characterize, load_dataset, load_rows, parse_mapping_config
from ..namespaces import HASCO, RDF, VSTOI, expand_curie
from ..rdf import Graph, parse_turtle, serialize_turtle
from ..serializer import read_bundle, serialize_and_discover, write_bundle
from ..vocab import (
    AggFunction,
    IndicatorDef,
    load_builtin_catalog,
    load_indicator_catalog,
    load_registry,
)
from ..ccsv import _ACQUISITION_CLASSES


class StateError(Exception):
    """The call needs state (a serialized bundle) that does not exist yet."""


class NotFoundError(Exception):
    pass


# --- wire conversion (plain dicts; the HTTP layer validates shapes first) ---

def viz_to_dict(v: VizSpec) -> dict:
    out: dict = {
        "id": v.id,
        "title": v.title,
        "chart_type": v.chart_type,
        "measure_binding": {
            "document": v.measure_binding.document.value,
            "column": v.measure_binding.column,
            "function": v.measure_binding.function.value,
        },
        "dimension_binding": None,
        "join_path": None,
    }
    if v.dimension_binding is not None:
        out["dimension_binding"] = {
            "document": v.dimension_binding.document.value,
            "column": v.dimension_binding.column,
        }
    if v.join_path is not None:
        out["join_path"] = {
            "reference_column": v.join_path.reference_column,
            "identifier_column": v.join_path.identifier_column,
        }
    return out


def viz_from_dict(data: dict) -> VizSpec:
    m = data["measure_binding"]
    dimension = None
    if data.get("dimension_binding"):
        d = data["dimension_binding"]
        dimension = DimensionBinding(expand_curie(d["document"]), d["column"])
    join = None
    if data.get("join_path"):
        j = data["join_path"]
        join = JoinPath(j["reference_column"], j["identifier_column"])
    return VizSpec(
        id=data["id"],
        title=data["title"],
        chart_type=data["chart_type"],
        measure_binding=MeasureBinding(
            expand_curie(m["document"]), m["column"], AggFunction(m["function"])
        ),
        dimension_binding=dimension,
        join_path=join,
    )


def dashboard_to_dict(spec: DashboardSpec) -> dict:
    return {
        "id": spec.id,
        "title": spec.title,
        "visualizations": [viz_to_dict(v) for v in spec.visualizations],
    }


def dashboard_from_dict(data: dict) -> DashboardSpec:
    return DashboardSpec(
        id=data["id"],
        title=data["title"],
        visualizations=[viz_from_dict(v) for v in data["visualizations"]],
    )


def filter_from_dict(data: dict) -> FilterExpr:
    t = data["target"]
    return FilterExpr(
        target=FilterTarget(expand_curie(t["document"]), t["column"]),
        op=data["op"],
        values=tuple(data["values"]),
    )


def result_to_dict(r: AggregateResult) -> dict:
    return {
        "groups": [[key, value] for key, value in r.groups],
        "total_rows_considered": r.total_rows_considered,
    }


def indicator_to_dict(d: IndicatorDef) -> dict:
    return {
        "iri": d.iri.value,
        "label": d.label,
        "dimensions": [{"entity_class": s.entity_class.value} for s in d.dimensions],
        "measures": [
            {
                "entity_class": m.entity_class.value,
                "function": m.function.value,
                "value_property": m.value_property.value if m.value_property else None,
            }
            for m in d.measures
        ],
    }


def _validate_viz(bundle: CcsvBundle, viz: VizSpec) -> None:
    """Check every referenced document and column before accepting an edit."""
    doc = bundle.document_for(viz.measure_binding.document)
    if doc is None:
        raise UnknownColumnError(f"no document for {viz.measure_binding.document.value}")
    if viz.measure_binding.column not in doc.header:
        raise UnknownColumnError(
            f"{doc.records_class.local_name()} has no column {viz.measure_binding.column!r}"
        )
    if viz.dimension_binding is not None:
        dim_doc = bundle.document_for(viz.dimension_binding.document)
        if dim_doc is None:
            raise UnknownColumnError(f"no document for {viz.dimension_binding.document.value}")
        if viz.dimension_binding.column not in dim_doc.header:
            raise UnknownColumnError(
                f"{dim_doc.records_class.local_name()} has no column "
                f"{viz.dimension_binding.column!r}"
            )
        if viz.join_path is not None:
            if viz.join_path.reference_column not in doc.header:
                raise UnknownColumnError(
                    f"{doc.records_class.local_name()} has no column "
                    f"{viz.join_path.reference_column!r}"
                )
            if viz.join_path.identifier_column not in dim_doc.header:
                raise UnknownColumnError(
                    f"{dim_doc.records_class.local_name()} has no column "
                    f"{viz.join_path.identifier_column!r}"
                )


class Workspace:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._load()

    # --- state loading -----------------------------------------------------

    def _load(self) -> None:
        extras = [
            parse_turtle(p.read_text(encoding="utf-8"))
            for p in sorted((self.data_dir / "ontology").glob("*.ttl"))
        ]
        self.registry = load_registry(extras)

        catalog_files = sorted((self.data_dir / "catalogs").glob("*.ttl"))
        if catalog_files:
            merged: list[IndicatorDef] = []
            for p in catalog_files:
                merged.extend(
                    load_indicator_catalog(parse_turtle(p.read_text(encoding="utf-8")), self.registry)
                )
            self.catalog = merged
        else:
            self.catalog = load_builtin_catalog(self.registry)

        kg_path = self.data_dir / "kg.ttl"
        if kg_path.exists():
            self.kg = parse_turtle(kg_path.read_text(encoding="utf-8"))
        else:
            self.kg = self.registry.merged()

        self.datasets: list[dict] = []
        ds_path = self.data_dir / "datasets.json"
        if ds_path.exists():
            self.datasets = json.loads(ds_path.read_text(encoding="utf-8"))

        self.bundle: CcsvBundle | None = None
        self.discovered: Graph | None = None
        self.manifest_bytes: bytes | None = None
        bundle_dir = self.data_dir / "bundle"
        if any(bundle_dir.glob("*.ccsv")):
            self.bundle, self.discovered = read_bundle(bundle_dir)
            manifest = bundle_dir / "manifest.json"
            if manifest.exists():
                self.manifest_bytes = manifest.read_bytes()

        self.dashboards: dict[str, DashboardSpec] = {}
        for p in sorted((self.data_dir / "dashboards").glob("*.json")):
            spec = dashboard_from_dict(json.loads(p.read_text(encoding="utf-8")))
            self.dashboards[spec.id] = spec

    # --- ingestion ----------------------------------------------------------

    def ingest_dataset(self, csv_text: str, mapping: dict, characterization: dict) -> dict:
        with self._lock:
            parsed_mapping = parse_mapping_config(mapping)
            ch = characterize(characterization)
            new_kg = load_dataset(csv_text, parsed_mapping, ch, self.kg)
            rows = len(load_rows(csv_text)[1])

            ds_id = f"ds{len(self.datasets) + 1:04d}-{parsed_mapping.records_class.local_name().lower()}"
            entry = {
                "id": ds_id,
                "records_class": parsed_mapping.records_class.value,
                "rows": rows,
                "mapping": mapping,
                "characterization": characterization,
            }

            (self.data_dir / "kg.ttl").write_text(serialize_turtle(new_kg), encoding="utf-8")
            datasets = self.datasets + [entry]
            (self.data_dir / "datasets.json").write_text(
                json.dumps(datasets, indent=2) + "\n", encoding="utf-8"
            )
            shutil.rmtree(self.data_dir / "bundle", ignore_errors=True)

            self.kg = new_kg
            self.datasets = datasets
            self.bundle = None
            self.discovered = None
            self.manifest_bytes = None
            return {"id": ds_id, "records_class": entry["records_class"], "rows": rows}

    def list_datasets(self) -> list[dict]:
        return [
            {"id": d["id"], "records_class": d["records_class"], "rows": d["rows"]}
            for d in self.datasets
        ]

    # --- serialization ------------------------------------------------------

    def serialize(self) -> bytes:
        with self._lock:
            if self.manifest_bytes is not None:
                return self.manifest_bytes

            bundle, discovered = serialize_and_discover(self.kg, self.registry, self.catalog)
            bundle_dir = self.data_dir / "bundle"
            write_bundle(bundle, bundle_dir, discovered)

            manifest = self._build_manifest(bundle, discovered)
            manifest_bytes = (json.dumps(manifest, indent=2) + "\n").encode("utf-8")
            (bundle_dir / "manifest.json").write_bytes(manifest_bytes)

            self.bundle = bundle
            self.discovered = discovered
            self.manifest_bytes = manifest_bytes
            return manifest_bytes

    def _build_manifest(self, bundle: CcsvBundle, discovered: Graph) -> dict:
        suitable = load_indicator_catalog(discovered)
        meta = bundle.shared_metadata
        acquisitions = {
            s for cls in _ACQUISITION_CLASSES for s in meta.subjects(RDF.type, cls)
        }
        return {
            "documents": [
                {
                    "file": f"{doc.records_class.local_name()}.ccsv",
                    "records_class": doc.records_class.value,
                    "header": doc.header,
                    "rows": len(doc.rows),
                }
                for doc in bundle.documents
            ],
            "indicators": [indicator_to_dict(d) for d in suitable],
            "metadata": {
                "studies": len(meta.subjects(RDF.type, HASCO.Study)),
                "deployments": len(meta.subjects(RDF.type, VSTOI.Deployment)),
                "acquisitions": len(acquisitions),
            },
        }

    def manifest(self) -> bytes:
        if self.manifest_bytes is None:
            raise NotFoundError("nothing serialized yet; POST /kg/serialize first")
        return self.manifest_bytes

    def discovered_payload(self) -> dict:
        if self.discovered is None:
            raise NotFoundError("nothing serialized yet; POST /kg/serialize first")
        return {
            "turtle": serialize_turtle(self.discovered),
            "indicators": [indicator_to_dict(d) for d in load_indicator_catalog(self.discovered)],
        }

    # --- dashboards -----------------------------------------------------------

    def _require_bundle(self) -> CcsvBundle:
        if self.bundle is None or self.discovered is None:
            raise StateError("no serialized bundle; POST /kg/serialize first")
        return self.bundle

    def preview_dashboard(self) -> DashboardSpec:
        bundle = self._require_bundle()
        return generate_specs(self.discovered, bundle)

    def create_dashboard(self, body: dict) -> DashboardSpec:
        with self._lock:
            bundle = self._require_bundle()
            base = generate_specs(self.discovered, bundle)

            merged: dict[str, VizSpec] = {v.id: v for v in base.visualizations}
            for raw in body.get("visualizations") or []:
                viz = viz_from_dict(raw)
                _validate_viz(bundle, viz)
                merged[viz.id] = viz  # user edits win on id collision

            dashboard_id = body.get("id") or f"db{len(self.dashboards) + 1:03d}"
            spec = DashboardSpec(
                id=dashboard_id,
                title=body.get("title") or base.title,
                visualizations=list(merged.values()),
            )

            out_dir = self.data_dir / "dashboards"
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / f"{dashboard_id}.json").write_text(
                json.dumps(dashboard_to_dict(spec), indent=2) + "\n", encoding="utf-8"
            )
            self.dashboards[dashboard_id] = spec
            return spec

    def get_dashboard(self, dashboard_id: str) -> DashboardSpec:
        spec = self.dashboards.get(dashboard_id)
        if spec is None:
            raise NotFoundError(f"no dashboard {dashboard_id!r}")
        return spec

    def query(self, dashboard_id: str, viz_id: str, filters: list[FilterExpr]) -> AggregateResult:
        spec = self.get_dashboard(dashboard_id)
        viz = next((v for v in spec.visualizations if v.id == viz_id), None)
        if viz is None:
            raise NotFoundError(f"dashboard {dashboard_id!r} has no visualization {viz_id!r}")
        return aggregate(self._require_bundle(), viz, filters)

    def selection(self, dashboard_id: str, selection: FilterExpr | None) -> dict[str, AggregateResult]:
        spec = self.get_dashboard(dashboard_id)
        return apply_selection(self._require_bundle(), spec, selection)
