"""Indicator suitability inference over a serialized bundle.

An indicator is suitable when every one of its dimensions and measures
is covered: some document in the bundle carries records of a class that
is a reflexive-transitive subclass of the entity class the dimension or
measure asks for. The facts mirror the three inputs (catalog, bundle,
class hierarchy) and the closure is computed by forward chaining to a
fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ccsv import CcsvBundle
from .namespaces import CCSV
from .rdf import Graph, Iri
from .vocab import IndicatorDef, VocabularyRegistry, catalog_to_graph

BUNDLE_ID = "bundle"


def spec_nodes(d: IndicatorDef) -> list[tuple[Iri, Iri]]:
    """(node, entity class) pairs naming each spec, in catalog export order."""
    out = []
    for i, dim in enumerate(d.dimensions, start=1):
        out.append((Iri(f"{d.iri.value}-dim{i}"), dim.entity_class))
    for i, m in enumerate(d.measures, start=1):
        out.append((Iri(f"{d.iri.value}-msr{i}"), m.entity_class))
    return out


@dataclass
class FactBase:
    defined_by: set[tuple[Iri, Iri]]
    associated_thing: set[tuple[Iri, Iri]]
    contains_records_of: set[tuple[str, Iri]]
    subclass: set[tuple[Iri, Iri]]
    catalog: list[IndicatorDef] = field(default_factory=list)


@dataclass
class SuitabilityResult:
    indicator: IndicatorDef
    covered: dict[Iri, tuple[Iri, Iri]]  # spec node -> (providing class, document records class)
    suitable: bool


def extract_facts(
    bundle: CcsvBundle,
    catalog: list[IndicatorDef],
    reg: VocabularyRegistry,
) -> FactBase:
    defined_by: set[tuple[Iri, Iri]] = set()
    associated_thing: set[tuple[Iri, Iri]] = set()
    for d in catalog:
        for node, entity in spec_nodes(d):
            defined_by.add((d.iri, node))
            associated_thing.add((node, entity))
    contains = {(BUNDLE_ID, doc.records_class) for doc in bundle.documents}
    return FactBase(
        defined_by=defined_by,
        associated_thing=associated_thing,
        contains_records_of=contains,
        subclass=set(reg.subclass_axioms),
        catalog=list(catalog),
    )


def _reachability_fixpoint(facts: FactBase) -> set[tuple[Iri, Iri]]:
    """All (class, ancestor) pairs, derived by iterating the subclass rule."""
    mentioned: set[Iri] = set()
    for child, parent in facts.subclass:
        mentioned.add(child)
        mentioned.add(parent)
    for _, cls in facts.contains_records_of:
        mentioned.add(cls)
    for _, cls in facts.associated_thing:
        mentioned.add(cls)

    reach = {(c, c) for c in mentioned}
    reach |= facts.subclass
    while True:
        new = {
            (a, c)
            for (a, b) in reach
            for (b2, c) in facts.subclass
            if b == b2 and (a, c) not in reach
        }
        if not new:
            return reach
        reach |= new


def discover(facts: FactBase) -> list[SuitabilityResult]:
    reach = _reachability_fixpoint(facts)
    record_classes = sorted((cls for _, cls in facts.contains_records_of), key=lambda c: c.value)

    results = []
    for d in facts.catalog:
        covered: dict[Iri, tuple[Iri, Iri]] = {}
        suitable = True
        for node, entity in spec_nodes(d):
            provider = next((r for r in record_classes if (r, entity) in reach), None)
            if provider is None:
                suitable = False
            else:
                covered[node] = (provider, provider)
        results.append(SuitabilityResult(indicator=d, covered=covered, suitable=suitable))
    return results


def export_discovered(results: list[SuitabilityResult]) -> Graph:
    """Suitable indicators as a reloadable catalog graph with coverage notes.

    Each spec node additionally links to the records class that satisfied
    it via ccsv:providedByRecordsOf.
    """
    suitable = [r for r in results if r.suitable]
    g = catalog_to_graph([r.indicator for r in suitable])
    g.bind("ccsv", CCSV.base)
    for r in suitable:
        for node, _entity in spec_nodes(r.indicator):
            provider, _doc = r.covered[node]
            g.add_spo(node, CCSV.providedByRecordsOf, provider)
    return g


def coverage_from_graph(g: Graph) -> dict[Iri, Iri]:
    """Inverse of the export annotation: spec node -> providing records class."""
    out: dict[Iri, Iri] = {}
    for t in g:
        if t.predicate == CCSV.providedByRecordsOf and isinstance(t.object, Iri) and isinstance(t.subject, Iri):
            out[t.subject] = t.object
    return out
