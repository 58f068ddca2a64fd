"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line (run with -s to see them on a green
run). Randomized checks compare the implementation against brute-force
oracles defined in the sibling module tests; timings use wall-clock
budgets generous enough for slow CI machines but tight enough to catch
accidental quadratic blowups.
"""

from __future__ import annotations

import contextlib
import json
import random
import time

from fastapi.testclient import TestClient

from cityforge.ccsv import (
    CcsvBundle,
    ColumnBinding,
    documents_equal,
    make_document,
    read_ccsv,
    write_ccsv,
)
from cityforge.dashboard import (
    FilterExpr,
    FilterTarget,
    MeasureBinding,
    VizSpec,
    aggregate,
    generate_specs,
)
from cityforge.discovery import discover, extract_facts, spec_nodes
from cityforge.ingest import add_scaffolding, characterize, load_dataset, mapping_from_document, mint_instance_iri
from cityforge.namespaces import HACITO, HASCO, QOE_M, RDF, VSTOI
from cityforge.rdf import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    Triple,
    isomorphic,
    match,
    parse_turtle,
    serialize_turtle,
)
from cityforge.ccsv import csv_body
from cityforge.serializer import domain_subgraph, serialize_and_discover, serialize_kg
from cityforge.service.app import create_app
from cityforge.vocab import AggFunction, load_registry

from helpers import build_fixture_kg, fixture_csv, load_config
from test_dashboard import bundle_with_join, joined_viz, oracle_aggregate
from test_discovery import bundle_of, class_graph, count_indicator, oracle_suitable
from test_discovery import random_case as discovery_case
from test_match import as_set, oracle_match
from test_match import random_case as match_case

STATION = QOE_M.term("Bicycle-Share_Station")
TRIP = QOE_M.term("Bicycle-Share_Trip")


@contextlib.contextmanager
def criterion(name: str):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"FAIL  {name}")
        raise
    print(f"PASS  {name} ({time.monotonic() - started:.1f}s)")


# --- 1. CCSV round-trip ------------------------------------------------------

ADVERSARIAL_CELLS = [
    "plain",
    "comma, inside",
    'quote " inside',
    "line\nbreak",
    'both, "at\nonce"',
    "pipe|and\\slash",
    "---",
    "  padded  ",
    "uñícöde",
    "",
]


def random_document(rng: random.Random, n: int):
    records_class = Iri(f"http://example.org/Class{rng.randint(0, 9)}")
    width = rng.randint(0, 6)
    header = ["id"] + [f"col{i}" for i in range(width)]
    bindings = [ColumnBinding(index=1, name="id", role="identifier", entity_class=records_class)]
    for i in range(width):
        if rng.random() < 0.3:
            bindings.append(
                ColumnBinding(
                    index=i + 2, name=f"col{i}", role="reference",
                    target_class=Iri(f"http://example.org/Target{i}"),
                    multi_value_delimiter="|" if rng.random() < 0.5 else None,
                )
            )
        else:
            bindings.append(
                ColumnBinding(
                    index=i + 2, name=f"col{i}", role="attribute",
                    property=Iri(f"http://example.org/prop{i}"),
                )
            )
    rows = [
        [f"r{r}"] + [rng.choice(ADVERSARIAL_CELLS) for _ in range(width)]
        for r in range(rng.randint(0, 200))
    ]
    return make_document(Iri(f"http://example.org/dataset/{n}"), records_class, bindings, header, rows)


def test_ccsv_round_trip_1000_documents():
    with criterion("CCSV round-trip, 1000 randomized documents"):
        rng = random.Random(1)
        started = time.monotonic()
        for n in range(1000):
            doc = random_document(rng, n)
            assert documents_equal(read_ccsv(write_ccsv(doc)), doc)
        assert time.monotonic() - started < 60


# --- 2. Turtle round-trip ----------------------------------------------------


def random_graph(rng: random.Random) -> Graph:
    g = Graph()
    g.bind("ex", "http://example.org/")
    iris = [Iri(f"http://example.org/n{i}") for i in range(30)]
    blanks = [BlankNode(f"x{i}") for i in range(12)]
    predicates = [Iri(f"http://example.org/p{i}") for i in range(8)]
    for _ in range(rng.randint(0, 300)):
        s = rng.choice(iris + blanks)
        p = rng.choice(predicates)
        kind = rng.random()
        if kind < 0.4:
            o = rng.choice(iris + blanks)
        elif kind < 0.7:
            o = Literal(rng.choice(ADVERSARIAL_CELLS))
        elif kind < 0.85:
            o = Literal(str(rng.randint(-99, 99)), datatype=Iri("http://example.org/dt"))
        else:
            o = Literal(rng.choice(ADVERSARIAL_CELLS), language="pt")
        g.add(Triple(s, p, o))
    return g


def test_turtle_round_trip_500_graphs():
    with criterion("Turtle round-trip, 500 random graphs"):
        rng = random.Random(2)
        started = time.monotonic()
        for _ in range(500):
            g = random_graph(rng)
            assert isomorphic(parse_turtle(serialize_turtle(g)), g)
        assert time.monotonic() - started < 30


# --- 3. BGP matcher vs nested-loop oracle -------------------------------------


def test_bgp_matcher_equals_oracle_200_cases():
    with criterion("BGP matcher equals nested-loop oracle, 200 cases"):
        rng = random.Random(3)
        for _ in range(200):
            g, patterns = match_case(rng)
            assert as_set(match(g, patterns)) == as_set(oracle_match(g, patterns))


# --- 4. Discovery vs brute-force closure --------------------------------------


def test_discovery_equals_oracle_500_cases_with_forced_chain():
    with criterion("discovery equals closure oracle, 500 cases + chain of 3"):
        ex = "http://example.org/"
        chain = [(Iri(f"{ex}A"), Iri(f"{ex}B")), (Iri(f"{ex}B"), Iri(f"{ex}C")),
                 (Iri(f"{ex}C"), Iri(f"{ex}D"))]
        reg = load_registry([class_graph(chain, [Iri(f"{ex}{x}") for x in "ABCD"])])
        indicator = count_indicator("Chain", None, Iri(f"{ex}D"))
        facts = extract_facts(bundle_of(Iri(f"{ex}A")), [indicator], reg)
        results = discover(facts)
        assert [r.suitable for r in results] == [True]
        assert oracle_suitable(chain, [Iri(f"{ex}A")], indicator)

        rng = random.Random(4)
        for _ in range(500):
            axioms, record_classes, indicators, case_reg = discovery_case(rng)
            facts = extract_facts(bundle_of(*record_classes), indicators, case_reg)
            got = [r.suitable for r in discover(facts)]
            want = [oracle_suitable(axioms, record_classes, d) for d in indicators]
            assert got == want


# --- 5. Fixture pipeline -------------------------------------------------------


def test_fixture_pipeline_end_to_end():
    with criterion("fixture pipeline: ingest, serialize, discover, aggregate"):
        started = time.monotonic()
        registry = load_registry()
        kg = build_fixture_kg(registry)

        from cityforge.vocab import load_builtin_catalog

        bundle, discovered = serialize_and_discover(kg, registry, load_builtin_catalog(registry))
        assert len(bundle.documents) == 2

        meta = bundle.shared_metadata
        assert len(meta.subjects(RDF.type, HASCO.Study)) == 1
        assert len(meta.subjects(RDF.type, VSTOI.Deployment)) == 1
        assert len(meta.subjects(RDF.type, HACITO.ManualDataAnnotation)) == 2

        from cityforge.vocab import load_indicator_catalog

        assert [d.label for d in load_indicator_catalog(discovered)] == [
            "Trips by departure station"
        ]

        spec = generate_specs(discovered, bundle)
        departure = next(
            v for v in spec.visualizations
            if v.join_path and v.join_path.reference_column == "origin_station_id"
        )
        assert aggregate(bundle, departure, []).groups == [("s1", 3), ("s2", 1), ("s3", 1)]

        card = VizSpec(
            id="total", title="total trips", chart_type="number",
            measure_binding=MeasureBinding(TRIP, "id", AggFunction.COUNT),
        )
        assert aggregate(bundle, card, []).groups == [(None, 5)]

        flt = FilterExpr(FilterTarget(TRIP, "user_id"), "eq", ("u1",))
        assert aggregate(bundle, departure, [flt]).groups == [("s1", 2)]

        assert time.monotonic() - started < 5


# --- 6. Lossless projection ----------------------------------------------------

DOMAIN_CLASSES = (
    STATION,
    TRIP,
    QOE_M.User,
    QOE_M.term("Transport_Mode"),
    QOE_M.term("Commute_Trip"),
)
ATTRIBUTE_PROPS = (QOE_M.label, QOE_M.lat, QOE_M.long, QOE_M.distance, QOE_M.length_km)
ID_PIECES = ("a", "b", "c 1", "x/y", "50%", "ü", "-")
VALUE_PIECES = ("v", "1.5", "a|b", "c\\d", 'q"q', "multi\nline", ", ")


def replay_characterization():
    return characterize(
        {
            "data_source": {"platform_label": "generator", "annotator_label": "generator"},
            "acquisition_kind": "native",
            "study": {"label": "generated"},
            "time_frame": {"start": "2016-01-01T00:00:00Z", "end": "2016-12-31T23:59:59Z"},
        }
    )


def random_domain_kg(rng: random.Random, registry) -> Graph:
    kg = registry.merged()
    add_scaffolding(kg, replay_characterization(), STATION)

    classes = rng.sample(DOMAIN_CLASSES, rng.randint(1, 3))
    budget = rng.randint(1, 50)
    ids_by_class: dict[Iri, list[str]] = {}
    for cls in classes:
        n = max(1, budget // len(classes))
        ids = [f"{rng.choice(ID_PIECES)}{i}" for i in range(n)]
        ids_by_class[cls] = ids
        for identifier in ids:
            kg.add_spo(mint_instance_iri(cls, identifier), RDF.type, cls)

    for cls in classes:
        for prop in rng.sample(ATTRIBUTE_PROPS, rng.randint(0, 3)):
            for identifier in ids_by_class[cls]:
                for _ in range(rng.choice((0, 1, 1, 2))):
                    kg.add_spo(
                        mint_instance_iri(cls, identifier),
                        prop,
                        Literal(f"{rng.choice(VALUE_PIECES)}{rng.randint(0, 9)}"),
                    )

    for cls in classes:
        for target in classes:
            if target == cls or rng.random() < 0.5:
                continue
            ref = Iri(f"{QOE_M.base}ref_{target.local_name().lower().replace('-', '_')}")
            for identifier in ids_by_class[cls]:
                for target_id in rng.sample(
                    ids_by_class[target], rng.randint(0, min(2, len(ids_by_class[target])))
                ):
                    kg.add_spo(
                        mint_instance_iri(cls, identifier),
                        ref,
                        mint_instance_iri(target, target_id),
                    )
    return kg


def test_lossless_projection_100_kgs():
    with criterion("lossless projection on 100 random knowledge graphs"):
        registry = load_registry()
        rng = random.Random(6)
        for _ in range(100):
            kg = random_domain_kg(rng, registry)
            bundle = serialize_kg(kg, registry)

            replayed = registry.merged()
            ch = replay_characterization()
            for doc in bundle.documents:
                replayed = load_dataset(csv_body(doc), mapping_from_document(doc), ch, replayed)

            assert isomorphic(
                domain_subgraph(replayed, registry), domain_subgraph(kg, registry)
            )


# --- 7. Aggregation oracle -------------------------------------------------------


def test_aggregation_equals_oracle_300_bundles():
    with criterion("aggregation equals brute-force oracle, 300 bundles"):
        rng = random.Random(7)
        functions = list(AggFunction)
        for case in range(300):
            n_stations = rng.randint(1, 5)
            station_rows = [[f"d{i}", f"Station {i % 3}"] for i in range(n_stations)]
            ref_pool = [f"d{j}" for j in range(n_stations)] + ["", "d404"]
            trip_rows = [
                [
                    f"t{i}",
                    rng.choice(ref_pool),
                    rng.choice(("", "-2", "0.5", "3", "3.25", "10", "2e2", ".5", "1e-3")),
                ]
                for i in range(rng.randint(0, 1000))
            ]
            bundle = bundle_with_join(trip_rows, station_rows)

            function = functions[case % len(functions)]
            column = "id" if function is AggFunction.COUNT and case % 2 else "value"
            viz = joined_viz(function, column)

            filters = []
            if case % 3 == 0:
                filters.append(
                    FilterExpr(FilterTarget(TRIP, "origin"), "in", ("d0", "d1", "d404"))
                )
            if case % 5 == 0:
                filters.append(FilterExpr(FilterTarget(TRIP, "value"), "range", ("0", "10")))

            got = aggregate(bundle, viz, filters)
            want = oracle_aggregate(bundle, viz, filters)
            assert [k for k, _ in got.groups] == [k for k, _ in want.groups]
            for (_, a), (_, b) in zip(got.groups, want.groups):
                if function in (AggFunction.COUNT, AggFunction.MIN, AggFunction.MAX):
                    assert a == b
                else:
                    assert a == b or abs(a - b) <= 1e-9 * max(abs(a), abs(b))
            assert got.total_rows_considered == want.total_rows_considered


# --- 8. HTTP contract --------------------------------------------------------------


def test_http_contract_full_fixture_flow(tmp_path):
    with criterion("HTTP contract: fixture flow through endpoints only"):
        client = TestClient(create_app(tmp_path / "data"), raise_server_exceptions=False)

        for csv_name, config_name in (
            ("stations.csv", "stations-config.yaml"),
            ("trips.csv", "trips-config.yaml"),
        ):
            config = load_config(config_name)
            r = client.post(
                "/datasets",
                json={
                    "csv": fixture_csv(csv_name),
                    "mapping": config["mapping"],
                    "characterization": config["characterization"],
                },
            )
            assert r.status_code == 201

        first = client.post("/kg/serialize")
        assert first.status_code == 200
        assert client.post("/kg/serialize").content == first.content

        manifest = json.loads(first.content)
        assert [d["rows"] for d in manifest["documents"]] == [3, 5]
        assert [i["label"] for i in manifest["indicators"]] == ["Trips by departure station"]

        db = client.post("/dashboards", json={}).json()
        departure = next(
            v for v in db["visualizations"]
            if v["join_path"] and v["join_path"]["reference_column"] == "origin_station_id"
        )
        r = client.post(
            f"/dashboards/{db['id']}/query", json={"viz_id": departure["id"], "filters": []}
        )
        assert r.json()["groups"] == [["s1", 3], ["s2", 1], ["s3", 1]]

        flt = {
            "target": {"document": "qoe-m:Bicycle-Share_Trip", "column": "user_id"},
            "op": "eq",
            "values": ["u1"],
        }
        r = client.post(
            f"/dashboards/{db['id']}/query",
            json={"viz_id": departure["id"], "filters": [flt]},
        )
        assert r.json()["groups"] == [["s1", 2]]

        selection = {
            "selection": {
                "target": {"document": "qoe-m:Bicycle-Share_Trip", "column": "origin_station_id"},
                "op": "eq",
                "values": ["s1"],
            }
        }
        results = client.post(f"/dashboards/{db['id']}/selection", json=selection).json()
        assert results[departure["id"]]["groups"] == [["s1", 3]]
