"""Raw CSV ingestion into the city knowledge graph.

A dataset enters the graph only after its metadata is characterized in
four aspects: the data source (which ICT system produced it, and what
annotates it), the kind of acquisition, the study it belongs to, and the
time frame it covers. Loading then materializes one typed instance per
row plus the provenance scaffolding linking every instance to the
acquisition activity that produced it.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from urllib.parse import quote

from .ccsv import ColumnBinding, RowWidthError, split_multi_value
from .namespaces import CITY, HACITO, HASCO, PROV, QOE_M, RDF, RDFS, VSTOI, XSD
from .rdf import Graph, Iri, Literal

ACQUISITION_KINDS = ("native", "manual_annotation")


class IngestError(Exception):
    pass


class IncompleteCharacterizationError(IngestError):
    def __init__(self, aspect: str, detail: str = "missing"):
        self.aspect = aspect
        super().__init__(f"characterization aspect {aspect!r}: {detail}")


class InvalidTimeFrameError(IngestError):
    pass


class HeaderMismatchError(IngestError):
    pass


class UnknownPropertyError(IngestError):
    def __init__(self, prop: Iri):
        self.property = prop
        super().__init__(f"attribute property not declared in the ontology: {prop.value}")


class DuplicateIdentifierError(IngestError):
    def __init__(self, identifier: str, first_row: int, second_row: int):
        self.identifier = identifier
        super().__init__(
            f"identifier {identifier!r} appears in rows {first_row} and {second_row}"
        )


class EmptyIdentifierError(IngestError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} has an empty identifier cell")


class MappingConfigError(IngestError):
    pass


@dataclass(frozen=True)
class DataSource:
    platform_iri: Iri
    platform_label: str
    annotator_label: str


@dataclass(frozen=True)
class TimeFrame:
    start: str
    end: str


@dataclass(frozen=True)
class DatasetCharacterization:
    data_source: DataSource
    acquisition_kind: str
    study_iri: Iri
    study_label: str
    time_frame: TimeFrame


@dataclass
class IngestMapping:
    records_class: Iri
    columns: list[ColumnBinding]

    def __post_init__(self) -> None:
        identifiers = [b for b in self.columns if b.role == "identifier"]
        if len(identifiers) != 1:
            raise ValueError(f"mapping needs exactly one identifier column, found {len(identifiers)}")
        for b in self.columns:
            if b.role == "reference" and re.search(r"\s", b.name):
                raise ValueError(f"reference column name {b.name!r} is not IRI-safe")

    def identifier(self) -> ColumnBinding:
        return next(b for b in self.columns if b.role == "identifier")


def slugify(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return slug or "x"


def mint_instance_iri(entity_class: Iri, identifier: str) -> Iri:
    """Deterministic instance IRI; identical input always maps to the same node."""
    return Iri(f"{CITY.base}inst/{entity_class.local_name()}/{quote(identifier, safe='')}")


def reference_property(column_name: str) -> Iri:
    return Iri(QOE_M.base + column_name)


def _parse_instant(text: str, aspect: str) -> datetime:
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise InvalidTimeFrameError(f"{aspect} is not an ISO-8601 instant: {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def characterize(answers: dict) -> DatasetCharacterization:
    """Validate the four-aspect interview answers.

    Expected shape (all four keys required)::

        {"data_source": {"platform_label": ..., "annotator_label": ...,
                         "platform_iri": optional},
         "acquisition_kind": "native" | "manual_annotation",
         "study": {"label": ..., "iri": optional},
         "time_frame": {"start": ISO-8601, "end": ISO-8601}}
    """
    source = answers.get("data_source")
    if not isinstance(source, dict):
        raise IncompleteCharacterizationError("data_source")
    platform_label = source.get("platform_label")
    annotator_label = source.get("annotator_label")
    if not platform_label:
        raise IncompleteCharacterizationError("data_source", "missing platform_label")
    if not annotator_label:
        raise IncompleteCharacterizationError("data_source", "missing annotator_label")
    platform_iri = source.get("platform_iri")
    if platform_iri is None:
        platform_iri = f"{CITY.base}inst/InformationSystem/{slugify(platform_label)}"

    kind = answers.get("acquisition_kind")
    if not kind:
        raise IncompleteCharacterizationError("acquisition_kind")
    if kind not in ACQUISITION_KINDS:
        raise IncompleteCharacterizationError(
            "acquisition_kind", f"must be one of {ACQUISITION_KINDS}, got {kind!r}"
        )

    study = answers.get("study")
    if not isinstance(study, dict) or not study.get("label"):
        raise IncompleteCharacterizationError("study")
    study_label = study["label"]
    study_iri = study.get("iri") or f"{CITY.base}inst/Study/{slugify(study_label)}"

    frame = answers.get("time_frame")
    if not isinstance(frame, dict) or not frame.get("start") or not frame.get("end"):
        raise IncompleteCharacterizationError("time_frame")
    start, end = frame["start"], frame["end"]
    if _parse_instant(start, "start") > _parse_instant(end, "end"):
        raise InvalidTimeFrameError(f"start {start!r} is after end {end!r}")

    return DatasetCharacterization(
        data_source=DataSource(Iri(platform_iri), platform_label, annotator_label),
        acquisition_kind=kind,
        study_iri=Iri(study_iri),
        study_label=study_label,
        time_frame=TimeFrame(start, end),
    )


def load_rows(csv_text: str) -> tuple[list[str], list[list[str]]]:
    records = [r for r in csv.reader(io.StringIO(csv_text, newline="")) if r != []]
    if not records:
        raise HeaderMismatchError("CSV has no header row")
    return records[0], records[1:]


def _check_header(mapping: IngestMapping, header: list[str]) -> None:
    for b in mapping.columns:
        if b.index > len(header):
            raise HeaderMismatchError(
                f"mapping binds column {b.index} but the header has {len(header)} columns"
            )
        if header[b.index - 1] != b.name:
            raise HeaderMismatchError(
                f"column {b.index} is {header[b.index - 1]!r} in the file, {b.name!r} in the mapping"
            )


def _instant_literal(text: str) -> Literal:
    return Literal(text, datatype=XSD.dateTime)


def add_scaffolding(g: Graph, ch: DatasetCharacterization, records_class: Iri) -> Iri:
    """Platform, instrument, deployment, study, and the acquisition activity.

    All IRIs are deterministic functions of the characterization, so
    loading a second dataset with the same answers reuses the same nodes
    and only adds a second acquisition (one per records class).
    """
    manual = ch.acquisition_kind == "manual_annotation"
    source = ch.data_source

    g.add_spo(source.platform_iri, RDF.type, HACITO.InformationSystem)
    g.add_spo(source.platform_iri, RDFS.label, Literal(source.platform_label))

    instrument_class = HACITO.AnnotatorSoftware if manual else VSTOI.Instrument
    instrument = Iri(
        f"{CITY.base}inst/{instrument_class.local_name()}/{slugify(source.annotator_label)}"
    )
    g.add_spo(instrument, RDF.type, instrument_class)
    g.add_spo(instrument, RDFS.label, Literal(source.annotator_label))

    deployment = Iri(
        f"{CITY.base}inst/Deployment/{slugify(source.platform_label)}-{ch.time_frame.start[:10]}"
    )
    g.add_spo(deployment, RDF.type, VSTOI.Deployment)
    g.add_spo(deployment, VSTOI.deployedInstrument, instrument)
    g.add_spo(deployment, VSTOI.deployedOnPlatform, source.platform_iri)
    g.add_spo(deployment, PROV.startedAtTime, _instant_literal(ch.time_frame.start))

    g.add_spo(ch.study_iri, RDF.type, HASCO.Study)
    g.add_spo(ch.study_iri, RDFS.label, Literal(ch.study_label))

    acquisition_class = HACITO.ManualDataAnnotation if manual else HASCO.DataAcquisition
    acquisition = Iri(
        f"{CITY.base}inst/{acquisition_class.local_name()}/{records_class.local_name()}"
    )
    g.add_spo(acquisition, RDF.type, acquisition_class)
    g.add_spo(acquisition, RDF.type, PROV.Activity)
    g.add_spo(acquisition, PROV.startedAtTime, _instant_literal(ch.time_frame.start))
    g.add_spo(acquisition, PROV.endedAtTime, _instant_literal(ch.time_frame.end))
    g.add_spo(acquisition, HASCO.inDeployment, deployment)
    g.add_spo(acquisition, HASCO.partOfStudy, ch.study_iri)
    return acquisition


def load_dataset(
    csv_text: str,
    mapping: IngestMapping,
    ch: DatasetCharacterization,
    kg: Graph,
) -> Graph:
    """Return kg plus the dataset's instances, attributes, links, and provenance.

    The input graph is left untouched.
    """
    header, rows = load_rows(csv_text)
    _check_header(mapping, header)

    out = Graph(kg, prefixes=kg.prefixes)

    declared = {s for s in out.subjects(RDF.type, RDF.Property) if isinstance(s, Iri)}
    for b in mapping.columns:
        if b.role == "attribute" and b.property not in declared:
            raise UnknownPropertyError(b.property)

    acquisition = add_scaffolding(out, ch, mapping.records_class)

    identifier_index = mapping.identifier().index - 1
    seen: dict[str, int] = {}
    for n, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise RowWidthError(n, len(header), len(row))
        rid = row[identifier_index]
        if rid == "":
            raise EmptyIdentifierError(n)
        if rid in seen:
            raise DuplicateIdentifierError(rid, seen[rid], n)
        seen[rid] = n

        inst = mint_instance_iri(mapping.records_class, rid)
        out.add_spo(inst, RDF.type, mapping.records_class)
        out.add_spo(inst, PROV.wasGeneratedBy, acquisition)

        for b in mapping.columns:
            if b.role == "identifier":
                continue
            cell = row[b.index - 1]
            if cell == "":
                continue
            values = split_multi_value(cell) if b.multi_value_delimiter else [cell]
            if b.role == "attribute":
                for v in values:
                    if v != "":
                        out.add_spo(inst, b.property, Literal(v))
            else:
                prop = reference_property(b.name)
                for v in values:
                    if v != "":
                        out.add_spo(inst, prop, mint_instance_iri(b.target_class, v))

    return out


def mapping_from_document(doc) -> IngestMapping:
    """Derive the re-ingestion mapping of an emitted document from its own bindings."""
    return IngestMapping(records_class=doc.records_class, columns=list(doc.bindings))


def parse_mapping_config(data: dict) -> IngestMapping:
    """Build a mapping from the documented key-value schema.

    Column entries: {"index": int, "name": str, "role": str, and per role
    "entity_class"/"property"/"target_class" holding an IRI or a known
    CURIE}. The identifier's class defaults to records_class.
    """
    from .namespaces import expand_curie

    if not isinstance(data, dict) or "records_class" not in data:
        raise MappingConfigError("mapping needs a records_class")
    try:
        records_class = expand_curie(data["records_class"])
        columns = []
        for c in data.get("columns", []):
            role = c["role"]
            kwargs = {}
            if role == "identifier":
                kwargs["entity_class"] = expand_curie(c.get("entity_class") or records_class.value)
            elif role == "attribute":
                kwargs["property"] = expand_curie(c["property"])
            elif role == "reference":
                kwargs["target_class"] = expand_curie(c["target_class"])
            if c.get("multi_value_delimiter"):
                kwargs["multi_value_delimiter"] = c["multi_value_delimiter"]
            columns.append(ColumnBinding(index=c["index"], name=c["name"], role=role, **kwargs))
        return IngestMapping(records_class=records_class, columns=columns)
    except (KeyError, TypeError, ValueError) as exc:
        raise MappingConfigError(f"bad column mapping: {exc}") from exc
