"""Projection of the knowledge graph into a CCSV bundle.

One document per instantiated domain class: the identifier column first,
then one column per predicate observed on that class's instances, sorted
by column name. Literal-object predicates become attribute columns,
IRI-object predicates become reference columns whose cells hold the
target's identifier. Every document's preamble also carries the shared
study/deployment/acquisition subgraph, and discovery runs only after the
bundle validates.
"""

from __future__ import annotations

from pathlib import Path
from urllib.parse import unquote

from .ccsv import (
    MULTI_VALUE_DELIMITER,
    CcsvBundle,
    CcsvDocument,
    ColumnBinding,
    join_multi_value,
    make_document,
    read_ccsv,
    validate_bundle,
    write_ccsv,
)
from .discovery import discover, export_discovered, extract_facts
from .namespaces import (
    CITY,
    METADATA_NAMESPACES,
    PREFIXES,
    PROVENANCE_NAMESPACES,
    QOE_M,
    RDF,
    RDFS,
    namespace_of,
)
from .rdf import BlankNode, Graph, Iri, Literal, Term, parse_turtle, serialize_turtle
from .vocab import IndicatorDef, VocabularyRegistry

DISCOVERED_FILENAME = "discovered-indicators.ttl"


class SerializationError(Exception):
    pass


class EmptyKgError(SerializationError):
    def __init__(self) -> None:
        super().__init__("the graph contains no typed domain instances")


class MixedObjectTypesError(SerializationError):
    def __init__(self, predicate: Iri):
        self.predicate = predicate
        super().__init__(
            f"{predicate.value} has both literal and IRI objects; cannot pick a column role"
        )


class MixedReferenceTargetsError(SerializationError):
    def __init__(self, predicate: Iri, a: Iri, b: Iri):
        self.predicate = predicate
        super().__init__(
            f"{predicate.value} links to instances of both {a.value} and {b.value}"
        )


def domain_namespace_bases(reg: VocabularyRegistry) -> set[str]:
    """The mobility namespace plus any class namespaces from extra ontologies."""
    meta = {ns.base for ns in METADATA_NAMESPACES}
    bases = {QOE_M.base}
    for name, g in reg.ontologies.items():
        if not name.startswith("extra"):
            continue
        for s in g.subjects(RDF.type, RDFS.Class):
            if isinstance(s, Iri):
                b = namespace_of(s)
                if b not in meta:
                    bases.add(b)
    return bases


def _identifier_of(inst: Iri, cls: Iri) -> str:
    prefix = f"{CITY.base}inst/{cls.local_name()}/"
    if not inst.value.startswith(prefix):
        raise SerializationError(
            f"{inst.value} does not follow the {prefix}{{id}} instance convention"
        )
    return unquote(inst.value[len(prefix):])


def _class_by_local_name(local: str, reg: VocabularyRegistry, bases: set[str]) -> Iri:
    matches = sorted(
        (c for c in reg.declared_classes() if c.local_name() == local and namespace_of(c) in bases),
        key=lambda c: c.value,
    )
    if len(matches) != 1:
        raise SerializationError(
            f"cannot resolve referenced class {local!r}: {len(matches)} declared candidates"
        )
    return matches[0]


def provenance_subgraph(kg: Graph) -> Graph:
    """Triples about study/deployment/acquisition/platform/instrument nodes."""
    prov_bases = {ns.base for ns in PROVENANCE_NAMESPACES}
    nodes = {
        t.subject
        for t in kg
        if t.predicate == RDF.type
        and isinstance(t.object, Iri)
        and namespace_of(t.object) in prov_bases
    }
    g = Graph(prefixes=PREFIXES)
    for t in kg:
        if t.subject in nodes:
            g.add(t)
    return g


def domain_subgraph(kg: Graph, reg: VocabularyRegistry) -> Graph:
    """The instance-level triples a lossless projection must preserve."""
    bases = domain_namespace_bases(reg)
    meta = {ns.base for ns in METADATA_NAMESPACES}
    typed = {
        t.subject
        for t in kg
        if t.predicate == RDF.type and isinstance(t.object, Iri) and namespace_of(t.object) in bases
    }
    g = Graph(prefixes=kg.prefixes)
    for t in kg:
        if t.subject not in typed:
            continue
        if t.predicate == RDF.type:
            if isinstance(t.object, Iri) and namespace_of(t.object) in bases:
                g.add(t)
        elif namespace_of(t.predicate) not in meta:
            g.add(t)
    return g


def _collect_instances(kg: Graph, bases: set[str]) -> tuple[dict[Iri, list[Iri]], dict[Iri, Iri]]:
    by_class: dict[Iri, list[Iri]] = {}
    inst_class: dict[Iri, Iri] = {}
    for t in kg:
        if t.predicate != RDF.type or not isinstance(t.object, Iri):
            continue
        if namespace_of(t.object) not in bases:
            continue
        if isinstance(t.subject, BlankNode):
            raise SerializationError("domain instances must be IRIs, found a blank node")
        s = t.subject
        assert isinstance(s, Iri)
        if s in inst_class:
            if inst_class[s] != t.object:
                raise SerializationError(f"{s.value} is typed with more than one domain class")
            continue
        inst_class[s] = t.object
        by_class.setdefault(t.object, []).append(s)
    return by_class, inst_class


def serialize_kg(kg: Graph, reg: VocabularyRegistry) -> CcsvBundle:
    bases = domain_namespace_bases(reg)
    by_class, inst_class = _collect_instances(kg, bases)
    if not inst_class:
        raise EmptyKgError()

    meta_bases = {ns.base for ns in METADATA_NAMESPACES}
    shared = provenance_subgraph(kg)

    documents = []
    for cls in sorted(by_class, key=lambda c: c.value):
        instances = by_class[cls]
        ids = {inst: _identifier_of(inst, cls) for inst in instances}

        # predicate -> instance -> object list
        observed: dict[Iri, dict[Iri, list[Term]]] = {}
        for inst in instances:
            for t in kg.triples_for_subject(inst):
                if t.predicate == RDF.type or namespace_of(t.predicate) in meta_bases:
                    continue
                observed.setdefault(t.predicate, {}).setdefault(inst, []).append(t.object)

        columns = []  # (name, role, target iri, cells, multi)
        used_names = {"id"}
        for pred in sorted(observed, key=lambda p: p.local_name()):
            name = pred.local_name()
            if name in used_names:
                raise SerializationError(
                    f"two columns of {cls.local_name()} would both be named {name!r}"
                )
            used_names.add(name)
            objmap = observed[pred]
            flat = [o for objs in objmap.values() for o in objs]
            if any(isinstance(o, BlankNode) for o in flat):
                raise SerializationError(f"{pred.value} has a blank-node object")
            has_literal = any(isinstance(o, Literal) for o in flat)
            has_iri = any(isinstance(o, Iri) for o in flat)
            if has_literal and has_iri:
                raise MixedObjectTypesError(pred)
            multi = any(len(objs) > 1 for objs in objmap.values())

            if has_literal:
                cells = {}
                for inst, objs in objmap.items():
                    values = sorted(o.lexical for o in objs)
                    cells[inst] = join_multi_value(values) if multi else values[0]
                columns.append((name, "attribute", pred, cells, multi))
            else:
                target: Iri | None = None
                per_inst: dict[Iri, list[str]] = {}
                for inst, objs in objmap.items():
                    values = []
                    for o in objs:
                        assert isinstance(o, Iri)
                        target_cls = inst_class.get(o)
                        if target_cls is None:
                            segments = o.value[len(f"{CITY.base}inst/"):].split("/") if o.value.startswith(f"{CITY.base}inst/") else []
                            if len(segments) != 2:
                                raise SerializationError(
                                    f"referenced node {o.value} is untyped and off-convention"
                                )
                            target_cls = _class_by_local_name(segments[0], reg, bases)
                        if target is None:
                            target = target_cls
                        elif target != target_cls:
                            raise MixedReferenceTargetsError(pred, target, target_cls)
                        values.append(_identifier_of(o, target_cls))
                    per_inst[inst] = sorted(values)
                cells = {
                    inst: join_multi_value(vals) if multi else vals[0]
                    for inst, vals in per_inst.items()
                }
                columns.append((name, "reference", target, cells, multi))

        bindings = [ColumnBinding(1, "id", "identifier", entity_class=cls)]
        for j, (name, role, target, _cells, multi) in enumerate(columns, start=2):
            delim = MULTI_VALUE_DELIMITER if multi else None
            if role == "attribute":
                bindings.append(ColumnBinding(j, name, "attribute", property=target, multi_value_delimiter=delim))
            else:
                bindings.append(ColumnBinding(j, name, "reference", target_class=target, multi_value_delimiter=delim))

        header = ["id"] + [name for name, *_ in columns]
        rows = [
            [ids[inst]] + [cells.get(inst, "") for _, _, _, cells, _ in columns]
            for inst in sorted(instances, key=lambda i: ids[i])
        ]
        documents.append(
            make_document(
                Iri(f"{CITY.base}dataset/{cls.local_name()}"),
                cls,
                bindings,
                header,
                rows,
                metadata=shared,
                prefixes=PREFIXES,
            )
        )

    return validate_bundle(documents, shared)


def serialize_and_discover(
    kg: Graph,
    reg: VocabularyRegistry,
    catalog: list[IndicatorDef],
) -> tuple[CcsvBundle, Graph]:
    bundle = serialize_kg(kg, reg)
    results = discover(extract_facts(bundle, catalog, reg))
    return bundle, export_discovered(results)


def write_bundle(bundle: CcsvBundle, out_dir: str | Path, discovered: Graph | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for doc in bundle.documents:
        path = out / f"{doc.records_class.local_name()}.ccsv"
        path.write_text(write_ccsv(doc), encoding="utf-8")
        written.append(path)
    if discovered is not None:
        path = out / DISCOVERED_FILENAME
        path.write_text(serialize_turtle(discovered), encoding="utf-8")
        written.append(path)
    return written


def read_bundle(in_dir: str | Path) -> tuple[CcsvBundle, Graph | None]:
    src = Path(in_dir)
    documents = [
        read_ccsv(path.read_text(encoding="utf-8"))
        for path in sorted(src.glob("*.ccsv"))
    ]
    shared = Graph(prefixes=PREFIXES)
    for doc in documents:
        for t in provenance_subgraph(doc.preamble):
            shared.add(t)
    bundle = validate_bundle(documents, shared)
    discovered = None
    ttl = src / DISCOVERED_FILENAME
    if ttl.exists():
        discovered = parse_turtle(ttl.read_text(encoding="utf-8"))
    return bundle, discovered
