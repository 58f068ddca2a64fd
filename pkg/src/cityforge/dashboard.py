"""Dashboard spec generation and filterable aggregation over a bundle.

A visualization binds one measure column (with its function) and at most
one dimension. When the dimension lives in another document, a join path
names the reference column on the measure side and the identifier column
on the dimension side. Aggregation is a plain group-by: filter measure
rows, group them by the joined dimension display value, apply the
function per group.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .ccsv import CcsvBundle, CcsvDocument, split_multi_value
from .discovery import coverage_from_graph, spec_nodes
from .rdf import Graph, Iri
from .vocab import AggFunction, IndicatorDef, load_indicator_catalog

UNLINKED = "(unlinked)"

# Decimal with optional sign and exponent; deliberately narrower than
# float() (no inf/nan/underscores).
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

CHART_TYPES = ("bar", "line", "table", "number")
_TIME_WORDS = ("time", "date", "month", "year", "day", "week", "hour", "minute", "timestamp")


class UnresolvableBindingError(Exception):
    pass


class UnknownColumnError(Exception):
    pass


class NonNumericCellError(Exception):
    def __init__(self, row: int, column: str, cell: str):
        self.row = row
        self.column = column
        self.cell = cell
        super().__init__(f"row {row}, column {column!r}: {cell!r} is not numeric")


@dataclass(frozen=True)
class DimensionBinding:
    document: Iri  # records class of the document holding the display column
    column: str


@dataclass(frozen=True)
class MeasureBinding:
    document: Iri
    column: str
    function: AggFunction


@dataclass(frozen=True)
class JoinPath:
    reference_column: str
    identifier_column: str


@dataclass(frozen=True)
class VizSpec:
    id: str
    title: str
    chart_type: str
    measure_binding: MeasureBinding
    dimension_binding: DimensionBinding | None = None
    join_path: JoinPath | None = None

    def __post_init__(self) -> None:
        if self.chart_type not in CHART_TYPES:
            raise ValueError(f"unknown chart type {self.chart_type!r}")
        if (self.chart_type == "number") != (self.dimension_binding is None):
            raise ValueError("number charts have no dimension; all others need one")
        if self.dimension_binding is None:
            if self.join_path is not None:
                raise ValueError("join path without a dimension")
        else:
            cross = self.dimension_binding.document != self.measure_binding.document
            if cross and self.join_path is None:
                raise ValueError("dimension in another document requires a join path")
            if not cross and self.join_path is not None:
                raise ValueError("same-document dimension must not carry a join path")


@dataclass
class DashboardSpec:
    id: str
    title: str
    visualizations: list[VizSpec] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [v.id for v in self.visualizations]
        if len(ids) != len(set(ids)):
            raise ValueError("visualization ids must be unique")


@dataclass(frozen=True)
class FilterTarget:
    document: Iri
    column: str


@dataclass(frozen=True)
class FilterExpr:
    target: FilterTarget
    op: str  # "eq" | "in" | "range"
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.op == "eq":
            if len(self.values) != 1:
                raise ValueError("eq takes exactly one value")
        elif self.op == "in":
            pass
        elif self.op == "range":
            if len(self.values) != 2:
                raise ValueError("range takes exactly two bounds")
            lo, hi = self.values
            if not (_NUMBER.match(lo) and _NUMBER.match(hi)):
                raise ValueError("range bounds must be numeric")
            if float(lo) > float(hi):
                raise ValueError("range bounds must be ordered")
        else:
            raise ValueError(f"unknown filter op {self.op!r}")


@dataclass
class AggregateResult:
    groups: list[tuple[str | None, float]]
    total_rows_considered: int


def _plural(entity_class: Iri) -> str:
    word = re.split(r"[-_]", entity_class.local_name())[-1].lower()
    return word if word.endswith("s") else word + "s"


def _display_column(doc: CcsvDocument) -> str:
    label = doc.binding_for("label")
    if label is not None and label.role == "attribute":
        return "label"
    return doc.identifier_binding().name


def _is_timelike(entity_class: Iri) -> bool:
    local = entity_class.local_name().lower()
    return any(w in local for w in _TIME_WORDS)


def _measure_column(doc: CcsvDocument, measure) -> str:
    if measure.value_property is None:
        return doc.identifier_binding().name
    for b in doc.bindings:
        if b.role == "attribute" and b.property == measure.value_property:
            return b.name
    raise UnresolvableBindingError(
        f"no column of {doc.records_class.local_name()} holds {measure.value_property.value}"
    )


def _unique_id(title: str, taken: set[str]) -> str:
    base = re.sub(r"[^a-z0-9]+", "-", title.lower()).strip("-") or "viz"
    candidate = base
    n = 1
    while candidate in taken:
        n += 1
        candidate = f"{base}-{n}"
    taken.add(candidate)
    return candidate


def generate_specs(discovered: Graph, bundle: CcsvBundle) -> DashboardSpec:
    """One candidate visualization per (measure, dimension, linking column).

    A dimension reachable through several reference columns yields one
    chart per column, titled after the column so the variants stay
    distinguishable.
    """
    catalog = load_indicator_catalog(discovered)
    coverage = coverage_from_graph(discovered)

    vizzes: list[VizSpec] = []
    taken: set[str] = set()
    for d in catalog:
        providers = dict(spec_nodes(d))  # node -> entity class (fallback)
        for node in providers:
            providers[node] = coverage.get(node, providers[node])

        measure_nodes = [
            (Iri(f"{d.iri.value}-msr{i}"), m) for i, m in enumerate(d.measures, start=1)
        ]
        dimension_nodes = [
            (Iri(f"{d.iri.value}-dim{i}"), dim) for i, dim in enumerate(d.dimensions, start=1)
        ]

        for m_node, measure in measure_nodes:
            m_doc = bundle.document_for(providers[m_node])
            if m_doc is None:
                raise UnresolvableBindingError(
                    f"{d.label!r}: no document carries records of {providers[m_node].value}"
                )
            m_col = _measure_column(m_doc, measure)
            m_binding = MeasureBinding(m_doc.records_class, m_col, measure.function)
            word = _plural(measure.entity_class)
            if measure.function is AggFunction.COUNT:
                subject = word
            else:
                prop_local = measure.value_property.local_name()
                subject = f"{measure.function.value} {prop_local} of {word}"

            if not dimension_nodes:
                title = f"total {word}" if measure.function is AggFunction.COUNT else subject
                vizzes.append(
                    VizSpec(
                        id=_unique_id(title, taken),
                        title=title,
                        chart_type="number",
                        measure_binding=m_binding,
                    )
                )
                continue

            for dim_node, dim in dimension_nodes:
                d_class = providers[dim_node]
                d_doc = bundle.document_for(d_class)
                if d_doc is None:
                    raise UnresolvableBindingError(
                        f"{d.label!r}: no document carries records of {d_class.value}"
                    )
                chart = "line" if _is_timelike(dim.entity_class) else "bar"

                if d_doc.records_class == m_doc.records_class:
                    column = _display_column(m_doc)
                    title = f"{subject} by {dim.entity_class.local_name().lower()}"
                    vizzes.append(
                        VizSpec(
                            id=_unique_id(title, taken),
                            title=title,
                            chart_type=chart,
                            measure_binding=m_binding,
                            dimension_binding=DimensionBinding(m_doc.records_class, column),
                        )
                    )
                    continue

                ref_columns = [
                    b for b in m_doc.bindings
                    if b.role == "reference" and b.target_class == d_class
                ]
                if not ref_columns:
                    raise UnresolvableBindingError(
                        f"{d.label!r}: no column of {m_doc.records_class.local_name()} "
                        f"references {d_class.value}"
                    )
                for ref in ref_columns:
                    title = f"{subject} by {ref.name}"
                    vizzes.append(
                        VizSpec(
                            id=_unique_id(title, taken),
                            title=title,
                            chart_type=chart,
                            measure_binding=m_binding,
                            dimension_binding=DimensionBinding(
                                d_doc.records_class, _display_column(d_doc)
                            ),
                            join_path=JoinPath(ref.name, d_doc.identifier_binding().name),
                        )
                    )

    return DashboardSpec(id="dashboard", title="Generated dashboard", visualizations=vizzes)


def _column_index(doc: CcsvDocument, name: str) -> int:
    try:
        return doc.header.index(name)
    except ValueError:
        raise UnknownColumnError(
            f"{doc.records_class.local_name()} has no column {name!r}"
        ) from None


def _row_passes(row: list[str], f: FilterExpr, idx: int) -> bool:
    cell = row[idx]
    if f.op == "eq":
        return cell == f.values[0]
    if f.op == "in":
        return cell in f.values
    lo, hi = float(f.values[0]), float(f.values[1])
    if not _NUMBER.match(cell):
        return False
    return lo <= float(cell) <= hi


def _numeric(cell: str, row: int, column: str) -> float:
    if not _NUMBER.match(cell):
        raise NonNumericCellError(row, column, cell)
    return float(cell)


def aggregate(bundle: CcsvBundle, viz: VizSpec, filters: list[FilterExpr]) -> AggregateResult:
    doc = bundle.document_for(viz.measure_binding.document)
    if doc is None:
        raise UnknownColumnError(
            f"bundle has no document for {viz.measure_binding.document.value}"
        )
    measure_idx = _column_index(doc, viz.measure_binding.column)
    function = viz.measure_binding.function

    filter_idx: list[tuple[FilterExpr, int]] = []
    for f in filters:
        if f.target.document != doc.records_class:
            raise UnknownColumnError(
                f"filter targets {f.target.document.value}, but the measure document is "
                f"{doc.records_class.value}"
            )
        filter_idx.append((f, _column_index(doc, f.target.column)))

    # The identifier column counts rows; any other column counts its
    # non-empty cells and feeds the numeric functions.
    count_rows = viz.measure_binding.column == doc.identifier_binding().name

    dim_lookup: dict[str, str] | None = None
    join_idx: int | None = None
    same_doc_idx: int | None = None
    join_delim = None
    if viz.dimension_binding is not None:
        if viz.join_path is not None:
            dim_doc = bundle.document_for(viz.dimension_binding.document)
            if dim_doc is None:
                raise UnknownColumnError(
                    f"bundle has no document for {viz.dimension_binding.document.value}"
                )
            ref_binding = doc.binding_for(viz.join_path.reference_column)
            join_idx = _column_index(doc, viz.join_path.reference_column)
            join_delim = ref_binding.multi_value_delimiter if ref_binding else None
            id_idx = _column_index(dim_doc, viz.join_path.identifier_column)
            disp_idx = _column_index(dim_doc, viz.dimension_binding.column)
            dim_lookup = {r[id_idx]: r[disp_idx] for r in dim_doc.rows}
        else:
            same_doc_idx = _column_index(doc, viz.dimension_binding.column)

    grouped: dict[str | None, list[float]] = {}
    kept = 0
    for n, row in enumerate(doc.rows, start=1):
        if not all(_row_passes(row, f, idx) for f, idx in filter_idx):
            continue
        kept += 1

        if viz.dimension_binding is None:
            keys: list[str | None] = [None]
        elif same_doc_idx is not None:
            keys = [row[same_doc_idx]]
        else:
            cell = row[join_idx]
            if cell == "":
                keys = [UNLINKED]
            else:
                parts = split_multi_value(cell) if join_delim else [cell]
                keys = [dim_lookup.get(p, p) for p in parts]

        cell = row[measure_idx]
        for key in keys:
            bucket = grouped.setdefault(key, [])
            if function is AggFunction.COUNT:
                if count_rows or cell != "":
                    bucket.append(1.0)
            elif cell != "":
                bucket.append(_numeric(cell, n, viz.measure_binding.column))

    if viz.dimension_binding is None and function is AggFunction.COUNT and None not in grouped:
        grouped[None] = []

    groups: list[tuple[str | None, float]] = []
    for key in sorted(grouped, key=lambda k: (k is not None, k)):
        values = grouped[key]
        if function is AggFunction.COUNT:
            groups.append((key, len(values)))
        elif not values:
            continue  # nothing numeric to aggregate; the group is absent
        elif function is AggFunction.SUM:
            groups.append((key, math.fsum(values)))
        elif function is AggFunction.AVG:
            groups.append((key, math.fsum(values) / len(values)))
        elif function is AggFunction.MIN:
            groups.append((key, min(values)))
        else:
            groups.append((key, max(values)))

    return AggregateResult(groups=groups, total_rows_considered=kept)


def apply_selection(
    bundle: CcsvBundle,
    specs: DashboardSpec,
    selection: FilterExpr | None,
) -> dict[str, AggregateResult]:
    filters = [selection] if selection is not None else []
    return {viz.id: aggregate(bundle, viz, filters) for viz in specs.visualizations}
