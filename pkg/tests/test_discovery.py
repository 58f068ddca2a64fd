from __future__ import annotations

import random

from cityforge.ccsv import CcsvBundle, ColumnBinding, make_document
from cityforge.discovery import (
    coverage_from_graph,
    discover,
    export_discovered,
    extract_facts,
    spec_nodes,
)
from cityforge.namespaces import QOE_M
from cityforge.rdf import Graph, Iri, parse_turtle
from cityforge.serializer import serialize_kg
from cityforge.vocab import (
    AggFunction,
    DimensionSpec,
    IndicatorDef,
    MeasureSpec,
    load_indicator_catalog,
    load_registry,
)

EX = "http://example.org/"


def exi(local: str) -> Iri:
    return Iri(EX + local)


def oracle_covers(axioms, record_class, entity) -> bool:
    """Brute force: walk every superclass of the record class."""
    seen = {record_class}
    frontier = [record_class]
    while frontier:
        current = frontier.pop()
        for child, parent in axioms:
            if child == current and parent not in seen:
                seen.add(parent)
                frontier.append(parent)
    return entity in seen


def oracle_suitable(axioms, record_classes, indicator) -> bool:
    return all(
        any(oracle_covers(axioms, r, entity) for r in record_classes)
        for _, entity in spec_nodes(indicator)
    )


def class_graph(axioms, classes) -> Graph:
    text = "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
    for c in classes:
        text += f"<{c.value}> a rdfs:Class .\n"
    for child, parent in axioms:
        text += f"<{child.value}> rdfs:subClassOf <{parent.value}> .\n"
    return parse_turtle(text)


def document_of(records_class: Iri):
    bindings = [ColumnBinding(index=1, name="id", role="identifier", entity_class=records_class)]
    return make_document(
        Iri(f"{EX}dataset/{records_class.local_name()}"), records_class, bindings, ["id"], []
    )


def bundle_of(*record_classes: Iri) -> CcsvBundle:
    return CcsvBundle(
        documents=[document_of(c) for c in record_classes], shared_metadata=Graph()
    )


def count_indicator(name: str, dim_class: Iri | None, measure_class: Iri) -> IndicatorDef:
    return IndicatorDef(
        iri=exi(name),
        label=name,
        dimensions=[DimensionSpec(dim_class)] if dim_class else [],
        measures=[MeasureSpec(measure_class, AggFunction.COUNT)],
    )


def test_exact_class_match_is_suitable():
    reg = load_registry([class_graph([], [exi("A"), exi("B")])])
    indicator = count_indicator("I", exi("A"), exi("B"))
    facts = extract_facts(bundle_of(exi("A"), exi("B")), [indicator], reg)
    results = discover(facts)
    assert [r.suitable for r in results] == [True]


def test_uncovered_measure_blocks_suitability():
    reg = load_registry([class_graph([], [exi("A"), exi("B")])])
    indicator = count_indicator("I", exi("A"), exi("B"))
    facts = extract_facts(bundle_of(exi("A")), [indicator], reg)
    results = discover(facts)
    assert [r.suitable for r in results] == [False]
    # the covered map still records the dimension that was satisfied
    dim_node = spec_nodes(indicator)[0][0]
    assert dim_node in results[0].covered


def test_subclass_records_cover_a_superclass_spec():
    axioms = [(exi("Sub"), exi("Super"))]
    reg = load_registry([class_graph(axioms, [exi("Sub"), exi("Super")])])
    indicator = count_indicator("I", None, exi("Super"))
    facts = extract_facts(bundle_of(exi("Sub")), [indicator], reg)
    assert discover(facts)[0].suitable


def test_superclass_records_do_not_cover_a_subclass_spec():
    axioms = [(exi("Sub"), exi("Super"))]
    reg = load_registry([class_graph(axioms, [exi("Sub"), exi("Super")])])
    indicator = count_indicator("I", None, exi("Sub"))
    facts = extract_facts(bundle_of(exi("Super")), [indicator], reg)
    assert not discover(facts)[0].suitable


def test_transitivity_across_a_chain_of_three():
    axioms = [(exi("A"), exi("B")), (exi("B"), exi("C")), (exi("C"), exi("D"))]
    reg = load_registry([class_graph(axioms, [exi(x) for x in "ABCD"])])
    indicator = count_indicator("I", None, exi("D"))
    facts = extract_facts(bundle_of(exi("A")), [indicator], reg)
    result = discover(facts)[0]
    assert result.suitable
    node = spec_nodes(indicator)[0][0]
    assert result.covered[node][0] == exi("A")


def test_fixture_bundle_discovers_the_departure_station_indicator(registry, fixture_kg, catalog):
    bundle = serialize_kg(fixture_kg, registry)
    results = discover(extract_facts(bundle, catalog, registry))
    suitable = [r.indicator.label for r in results if r.suitable]
    assert suitable == ["Trips by departure station"]


def test_export_round_trips_through_the_catalog_loader(registry, fixture_kg, catalog):
    bundle = serialize_kg(fixture_kg, registry)
    results = discover(extract_facts(bundle, catalog, registry))
    exported = export_discovered(results)

    reloaded = load_indicator_catalog(exported, registry)
    assert [d.label for d in reloaded] == ["Trips by departure station"]

    coverage = coverage_from_graph(exported)
    trips = reloaded[0]
    by_node = {node: entity for node, entity in spec_nodes(trips)}
    assert set(coverage) == set(by_node)
    assert coverage[spec_nodes(trips)[0][0]] == QOE_M.term("Bicycle-Share_Station")


def random_case(rng: random.Random):
    n_classes = rng.randint(2, 10)
    classes = [exi(f"C{i}") for i in range(n_classes)]
    # edges only from lower to higher index: acyclic by construction
    axioms = []
    for i in range(n_classes):
        for j in range(i + 1, n_classes):
            if rng.random() < 0.25:
                axioms.append((classes[i], classes[j]))

    record_classes = rng.sample(classes, rng.randint(1, min(4, n_classes)))
    indicators = []
    for k in range(rng.randint(1, 5)):
        dims = [DimensionSpec(rng.choice(classes)) for _ in range(rng.randint(0, 2))]
        measures = [
            MeasureSpec(rng.choice(classes), AggFunction.COUNT)
            for _ in range(rng.randint(1, 2))
        ]
        indicators.append(
            IndicatorDef(iri=exi(f"I{k}"), label=f"I{k}", dimensions=dims, measures=measures)
        )
    reg = load_registry([class_graph(axioms, classes)])
    return axioms, record_classes, indicators, reg


def test_discovery_matches_brute_force_oracle_on_random_cases():
    rng = random.Random(37120)
    for _ in range(100):
        axioms, record_classes, indicators, reg = random_case(rng)
        facts = extract_facts(bundle_of(*record_classes), indicators, reg)
        got = [r.suitable for r in discover(facts)]
        want = [oracle_suitable(axioms, record_classes, d) for d in indicators]
        assert got == want
