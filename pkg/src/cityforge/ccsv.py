"""Contextualized CSV: a Turtle preamble, a `---` separator line, a CSV body.

The preamble binds columns to graph entities with a small vocabulary under
http://hadatac.org/ont/ccsv#:

    <dataset> ccsv:containsRecordsOf <class> ;
              ccsv:hasColumn _:c .
    _:c ccsv:columnIndex 1 ;            # 1-based header position
        ccsv:columnName "id" ;
        ccsv:isIdentifierFor <class> .  # or isAttributeOf <property>
                                        # or references <other class>

Layout is bit-exact: UTF-8, the first line equal to `---` ends the
preamble, then one CSV header row and data rows with RFC-4180-style
quoting. Cells may contain commas, quotes, and newlines.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .namespaces import CCSV, HACITO, HASCO, PREFIXES, RDF, VSTOI, XSD
from .rdf import Graph, Iri, Literal, Term, Triple, merge, parse_turtle, serialize_turtle

SEPARATOR = "---"
MULTI_VALUE_DELIMITER = "|"


class CcsvError(Exception):
    """Base class for format and bundle violations."""


class MissingSeparatorError(CcsvError):
    def __init__(self) -> None:
        super().__init__(f"no line equal to {SEPARATOR!r} found")


class BindingError(CcsvError):
    pass


class RowWidthError(CcsvError):
    def __init__(self, row: int, expected: int, actual: int):
        self.row = row
        self.expected = expected
        self.actual = actual
        super().__init__(f"row {row} has {actual} cells, header has {expected}")


class BundleError(CcsvError):
    pass


class DanglingReferenceError(CcsvError):
    def __init__(self, document: str, column: str, row: int, missing_id: str):
        self.document = document
        self.column = column
        self.row = row
        self.missing_id = missing_id
        super().__init__(
            f"{document} row {row}, column {column!r}: no record with id {missing_id!r}"
        )


class ProvenanceShapeError(CcsvError):
    def __init__(self, missing: str):
        self.missing = missing
        super().__init__(f"shared metadata lacks {missing}")


@dataclass(frozen=True)
class ColumnBinding:
    """Ties one CSV column to the graph.

    Exactly one of the three roles applies: an identifier column names the
    instance of entity_class each row describes, an attribute column holds
    literal values of `property`, a reference column holds identifiers of
    target_class instances.
    """

    index: int
    name: str
    role: str  # "identifier" | "attribute" | "reference"
    entity_class: Iri | None = None
    property: Iri | None = None
    target_class: Iri | None = None
    multi_value_delimiter: str | None = None

    def __post_init__(self) -> None:
        if self.role not in ("identifier", "attribute", "reference"):
            raise ValueError(f"unknown column role: {self.role!r}")
        if self.index < 1:
            raise ValueError("column index is 1-based")
        needed = {"identifier": self.entity_class, "attribute": self.property, "reference": self.target_class}
        if needed[self.role] is None:
            raise ValueError(f"{self.role} column {self.name!r} lacks its target IRI")


@dataclass
class CcsvDocument:
    preamble: Graph
    dataset_iri: Iri
    records_class: Iri
    bindings: list[ColumnBinding]
    header: list[str]
    rows: list[list[str]]

    def binding_for(self, name: str) -> ColumnBinding | None:
        for b in self.bindings:
            if b.name == name:
                return b
        return None

    def identifier_binding(self) -> ColumnBinding:
        for b in self.bindings:
            if b.role == "identifier":
                return b
        raise BindingError("document has no identifier column")

    def column_values(self, name: str) -> list[str]:
        try:
            idx = self.header.index(name)
        except ValueError:
            raise BindingError(f"no column named {name!r}") from None
        return [row[idx] for row in self.rows]


@dataclass
class CcsvBundle:
    documents: list[CcsvDocument]
    shared_metadata: Graph

    def document_for(self, records_class: Iri) -> CcsvDocument | None:
        for doc in self.documents:
            if doc.records_class == records_class:
                return doc
        return None


def join_multi_value(values: Sequence[str]) -> str:
    """Join several values into one cell, escaping the delimiter."""
    return MULTI_VALUE_DELIMITER.join(
        v.replace("\\", "\\\\").replace(MULTI_VALUE_DELIMITER, "\\" + MULTI_VALUE_DELIMITER)
        for v in values
    )


def split_multi_value(cell: str) -> list[str]:
    values: list[str] = []
    current: list[str] = []
    i = 0
    while i < len(cell):
        ch = cell[i]
        if ch == "\\" and i + 1 < len(cell):
            current.append(cell[i + 1])
            i += 2
        elif ch == MULTI_VALUE_DELIMITER:
            values.append("".join(current))
            current = []
            i += 1
        else:
            current.append(ch)
            i += 1
    values.append("".join(current))
    return values


def _binding_triples(dataset_iri: Iri, b: ColumnBinding, col_node: Term) -> list[Triple]:
    out = [
        Triple(dataset_iri, CCSV.hasColumn, col_node),
        Triple(col_node, CCSV.columnIndex, Literal(str(b.index), datatype=XSD.integer)),
        Triple(col_node, CCSV.columnName, Literal(b.name)),
    ]
    if b.role == "identifier":
        out.append(Triple(col_node, CCSV.isIdentifierFor, b.entity_class))
    elif b.role == "attribute":
        out.append(Triple(col_node, CCSV.isAttributeOf, b.property))
    else:
        out.append(Triple(col_node, CCSV.references, b.target_class))
    if b.multi_value_delimiter is not None:
        out.append(Triple(col_node, CCSV.multiValueDelimiter, Literal(b.multi_value_delimiter)))
    return out


def make_document(
    dataset_iri: Iri,
    records_class: Iri,
    bindings: Sequence[ColumnBinding],
    header: Sequence[str],
    rows: Iterable[Sequence[str]],
    metadata: Graph | None = None,
    prefixes: dict[str, str] | None = None,
) -> CcsvDocument:
    """Build a document whose preamble matches its bindings.

    This is the safe constructor: read_ccsv re-derives bindings from the
    preamble, so hand-assembled documents must keep the two in step.
    """
    bindings = sorted(bindings, key=lambda b: b.index)
    _check_bindings(bindings, list(header))

    g = Graph()
    for label, ns in (prefixes or PREFIXES).items():
        g.bind(label, ns)
    g.add_spo(dataset_iri, CCSV.containsRecordsOf, records_class)
    for b in bindings:
        col = g.fresh_blank()
        for t in _binding_triples(dataset_iri, b, col):
            g.add(t)
    if metadata is not None:
        g = merge(g, metadata)

    row_list = [list(r) for r in rows]
    for n, row in enumerate(row_list, start=1):
        if len(row) != len(header):
            raise RowWidthError(n, len(header), len(row))
    return CcsvDocument(
        preamble=g,
        dataset_iri=dataset_iri,
        records_class=records_class,
        bindings=list(bindings),
        header=list(header),
        rows=row_list,
    )


def _check_bindings(bindings: Sequence[ColumnBinding], header: list[str]) -> None:
    identifiers = [b for b in bindings if b.role == "identifier"]
    if len(identifiers) != 1:
        raise BindingError(f"expected exactly one identifier column, found {len(identifiers)}")
    seen: set[int] = set()
    for b in bindings:
        if b.index in seen:
            raise BindingError(f"duplicate column index {b.index}")
        seen.add(b.index)
        if b.index > len(header):
            raise BindingError(f"column index {b.index} exceeds header width {len(header)}")
        if header[b.index - 1] != b.name:
            raise BindingError(
                f"column {b.index} is named {header[b.index - 1]!r} in the header but {b.name!r} in the preamble"
            )


def _literal_text(term: Term, what: str) -> str:
    if not isinstance(term, Literal):
        raise BindingError(f"{what} must be a literal")
    return term.lexical


def _extract_bindings(g: Graph) -> tuple[Iri, Iri, list[ColumnBinding]]:
    datasets = [s for s in g.subjects(CCSV.containsRecordsOf)]
    if len(datasets) != 1:
        raise BindingError(f"expected exactly one ccsv:containsRecordsOf subject, found {len(datasets)}")
    dataset = datasets[0]
    if not isinstance(dataset, Iri):
        raise BindingError("dataset node must be an IRI")
    classes = g.objects(dataset, CCSV.containsRecordsOf)
    if len(classes) != 1 or not isinstance(classes[0], Iri):
        raise BindingError("ccsv:containsRecordsOf must have exactly one IRI object")
    records_class = classes[0]

    bindings: list[ColumnBinding] = []
    for col in g.objects(dataset, CCSV.hasColumn):
        idx_terms = g.objects(col, CCSV.columnIndex)
        if len(idx_terms) != 1:
            raise BindingError("column needs exactly one ccsv:columnIndex")
        try:
            index = int(_literal_text(idx_terms[0], "ccsv:columnIndex"))
        except ValueError:
            raise BindingError(f"ccsv:columnIndex is not an integer: {idx_terms[0]!r}") from None
        name_terms = g.objects(col, CCSV.columnName)
        if len(name_terms) != 1:
            raise BindingError("column needs exactly one ccsv:columnName")
        name = _literal_text(name_terms[0], "ccsv:columnName")

        delim = None
        delim_terms = g.objects(col, CCSV.multiValueDelimiter)
        if delim_terms:
            delim = _literal_text(delim_terms[0], "ccsv:multiValueDelimiter")

        ident = [o for o in g.objects(col, CCSV.isIdentifierFor) if isinstance(o, Iri)]
        attr = [o for o in g.objects(col, CCSV.isAttributeOf) if isinstance(o, Iri)]
        ref = [o for o in g.objects(col, CCSV.references) if isinstance(o, Iri)]
        roles = sum(1 for group in (ident, attr, ref) if group)
        if roles != 1:
            raise BindingError(f"column {name!r} must have exactly one role, found {roles}")
        if ident:
            b = ColumnBinding(index, name, "identifier", entity_class=ident[0], multi_value_delimiter=delim)
        elif attr:
            b = ColumnBinding(index, name, "attribute", property=attr[0], multi_value_delimiter=delim)
        else:
            b = ColumnBinding(index, name, "reference", target_class=ref[0], multi_value_delimiter=delim)
        bindings.append(b)

    bindings.sort(key=lambda b: b.index)
    return dataset, records_class, bindings


def read_ccsv(text: str) -> CcsvDocument:
    lines = text.split("\n")
    sep_at = None
    for i, line in enumerate(lines):
        if line == SEPARATOR:
            sep_at = i
            break
    if sep_at is None:
        raise MissingSeparatorError()

    preamble = parse_turtle("\n".join(lines[:sep_at]))
    body = "\n".join(lines[sep_at + 1:])

    # Blank lines carry no cells; tolerate them (trailing newlines included).
    records = [r for r in csv.reader(io.StringIO(body, newline="")) if r != []]
    if not records:
        raise BindingError("CSV body has no header row")
    header, data = records[0], records[1:]

    dataset, records_class, bindings = _extract_bindings(preamble)
    _check_bindings(bindings, header)
    for n, row in enumerate(data, start=1):
        if len(row) != len(header):
            raise RowWidthError(n, len(header), len(row))

    return CcsvDocument(
        preamble=preamble,
        dataset_iri=dataset,
        records_class=records_class,
        bindings=bindings,
        header=header,
        rows=data,
    )


def csv_body(doc: CcsvDocument) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(doc.header)
    writer.writerows(doc.rows)
    return buf.getvalue()


def write_ccsv(doc: CcsvDocument) -> str:
    return serialize_turtle(doc.preamble) + SEPARATOR + "\n" + csv_body(doc)


def documents_equal(d1: CcsvDocument, d2: CcsvDocument) -> bool:
    """Equality up to blank-node relabeling in the preambles."""
    from .rdf import isomorphic

    return (
        d1.dataset_iri == d2.dataset_iri
        and d1.records_class == d2.records_class
        and d1.bindings == d2.bindings
        and d1.header == d2.header
        and d1.rows == d2.rows
        and isomorphic(d1.preamble, d2.preamble)
    )


_ACQUISITION_CLASSES = (HASCO.DataAcquisition, HACITO.ManualDataAnnotation)


def _check_provenance_shape(metadata: Graph) -> None:
    studies = metadata.subjects(RDF.type, HASCO.Study)
    if not studies:
        raise ProvenanceShapeError("a hasco:Study instance")
    deployments = metadata.subjects(RDF.type, VSTOI.Deployment)
    if not deployments:
        raise ProvenanceShapeError("a vstoi:Deployment instance")
    acquisitions = [
        s for cls in _ACQUISITION_CLASSES for s in metadata.subjects(RDF.type, cls)
    ]
    if not acquisitions:
        raise ProvenanceShapeError("a data acquisition activity instance")

    # The Listing-1 chain: acquisition -> deployment and acquisition -> study.
    chained = [
        a
        for a in acquisitions
        if any(d in deployments for d in metadata.objects(a, HASCO.inDeployment))
        and any(s in studies for s in metadata.objects(a, HASCO.partOfStudy))
    ]
    if not chained:
        raise ProvenanceShapeError("an acquisition chained to its deployment and study")


def validate_bundle(docs: Sequence[CcsvDocument], shared_metadata: Graph) -> CcsvBundle:
    """Check cross-document references and the provenance shape.

    Documents are ordered by records class, so any permutation of the
    input yields an equal bundle.
    """
    by_class: dict[Iri, CcsvDocument] = {}
    for doc in docs:
        if doc.records_class in by_class:
            raise BundleError(f"two documents carry records of {doc.records_class.value}")
        by_class[doc.records_class] = doc

    for doc in by_class.values():
        for b in doc.bindings:
            if b.role != "reference":
                continue
            target = by_class.get(b.target_class)
            if target is None:
                # No document identifies the target class; the link stays
                # symbolic and row-level checks do not apply.
                continue
            known = set(target.column_values(target.identifier_binding().name))
            for n, cell in enumerate(doc.column_values(b.name), start=1):
                if cell == "":
                    continue
                values = split_multi_value(cell) if b.multi_value_delimiter else [cell]
                for v in values:
                    if v not in known:
                        raise DanglingReferenceError(
                            doc.records_class.local_name(), b.name, n, v
                        )

    _check_provenance_shape(shared_metadata)

    ordered = sorted(by_class.values(), key=lambda d: d.records_class.value)
    return CcsvBundle(documents=ordered, shared_metadata=shared_metadata)
