from __future__ import annotations

import pytest

from cityforge.ingest import (
    DuplicateIdentifierError,
    EmptyIdentifierError,
    HeaderMismatchError,
    IncompleteCharacterizationError,
    InvalidTimeFrameError,
    MappingConfigError,
    UnknownPropertyError,
    characterize,
    load_dataset,
    mint_instance_iri,
    parse_mapping_config,
    reference_property,
)
from cityforge.namespaces import HACITO, HASCO, PROV, QOE_M, RDF, VSTOI
from cityforge.rdf import Iri, Literal

from helpers import fixture_csv, load_config

STATION = QOE_M.term("Bicycle-Share_Station")
TRIP = QOE_M.term("Bicycle-Share_Trip")


def answers(**overrides) -> dict:
    base = {
        "data_source": {
            "platform_label": "BikeShare-DB",
            "annotator_label": "CityForge Annotator",
        },
        "acquisition_kind": "manual_annotation",
        "study": {"label": "Fortaleza Mobility"},
        "time_frame": {"start": "2016-07-01T00:00:00Z", "end": "2016-07-31T23:59:59Z"},
    }
    base.update(overrides)
    return base


def test_characterize_accepts_complete_answers():
    ch = characterize(answers())
    assert ch.acquisition_kind == "manual_annotation"
    assert ch.study_label == "Fortaleza Mobility"
    # defaults are minted deterministically from the labels
    assert ch.data_source.platform_iri.value.endswith("/InformationSystem/bikeshare-db")
    assert ch.study_iri.value.endswith("/Study/fortaleza-mobility")


@pytest.mark.parametrize("aspect", ["data_source", "acquisition_kind", "study", "time_frame"])
def test_characterize_rejects_each_missing_aspect(aspect):
    incomplete = answers()
    del incomplete[aspect]
    with pytest.raises(IncompleteCharacterizationError) as err:
        characterize(incomplete)
    assert err.value.aspect == aspect


def test_characterize_rejects_unknown_acquisition_kind():
    with pytest.raises(IncompleteCharacterizationError):
        characterize(answers(acquisition_kind="telepathy"))


def test_characterize_rejects_inverted_time_frame():
    bad = answers(time_frame={"start": "2016-08-01T00:00:00Z", "end": "2016-07-01T00:00:00Z"})
    with pytest.raises(InvalidTimeFrameError):
        characterize(bad)


def test_characterize_rejects_unparseable_instants():
    bad = answers(time_frame={"start": "July 2016", "end": "2016-07-31T00:00:00Z"})
    with pytest.raises(InvalidTimeFrameError):
        characterize(bad)


def test_instance_iris_are_deterministic_and_percent_encoded():
    assert mint_instance_iri(STATION, "s1") == mint_instance_iri(STATION, "s1")
    spaced = mint_instance_iri(STATION, "praça 2/5")
    assert " " not in spaced.value
    assert spaced.value.endswith("/Bicycle-Share_Station/pra%C3%A7a%202%2F5")


def test_reference_property_uses_the_column_name():
    assert reference_property("origin_station_id") == Iri(QOE_M.base + "origin_station_id")


def station_mapping():
    return parse_mapping_config(load_config("stations-config.yaml")["mapping"])


def trip_mapping():
    return parse_mapping_config(load_config("trips-config.yaml")["mapping"])


def test_parse_mapping_config_expands_curies():
    mapping = station_mapping()
    assert mapping.records_class == STATION
    labels = {b.name: b for b in mapping.columns}
    assert labels["station_label"].property == QOE_M.label
    assert labels["station_id"].role == "identifier"


@pytest.mark.parametrize(
    "broken",
    [
        {},  # no records_class
        {"records_class": "qoe-m:User", "columns": [{"index": 1, "name": "id"}]},  # no role
        {"records_class": "qoe-m:User", "columns": []},  # no identifier
        {
            "records_class": "qoe-m:User",
            "columns": [{"index": "one", "name": "id", "role": "identifier"}],
        },
    ],
)
def test_parse_mapping_config_rejects_malformed_input(broken):
    with pytest.raises(MappingConfigError):
        parse_mapping_config(broken)


def load_stations(registry, kg=None):
    kg = kg if kg is not None else registry.merged()
    return load_dataset(fixture_csv("stations.csv"), station_mapping(), characterize(answers()), kg)


def test_load_dataset_types_every_row_instance(registry):
    kg = load_stations(registry)
    stations = kg.subjects(RDF.type, STATION)
    assert sorted(s.value for s in stations) == [
        mint_instance_iri(STATION, x).value for x in ["s1", "s2", "s3"]
    ]


def test_load_dataset_materializes_attribute_values(registry):
    kg = load_stations(registry)
    s1 = mint_instance_iri(STATION, "s1")
    assert kg.objects(s1, QOE_M.label) == [Literal("s1")]
    assert kg.objects(s1, QOE_M.lat) == [Literal("-3.7319")]


def test_load_dataset_builds_the_provenance_scaffolding(registry):
    kg = load_stations(registry)
    platforms = kg.subjects(RDF.type, HACITO.InformationSystem)
    deployments = kg.subjects(RDF.type, VSTOI.Deployment)
    acquisitions = kg.subjects(RDF.type, HACITO.ManualDataAnnotation)
    assert len(platforms) == 1
    assert len(deployments) == 1
    assert len(acquisitions) == 1

    acq = acquisitions[0]
    assert kg.objects(acq, HASCO.inDeployment) == deployments
    assert kg.objects(acq, HASCO.partOfStudy) == kg.subjects(RDF.type, HASCO.Study)
    # the annotator is an instrument of the deployment
    annotators = kg.subjects(RDF.type, HACITO.AnnotatorSoftware)
    assert kg.objects(deployments[0], VSTOI.deployedInstrument) == annotators


def test_every_instance_is_generated_by_the_acquisition(registry):
    kg = load_stations(registry)
    acq = kg.subjects(RDF.type, HACITO.ManualDataAnnotation)[0]
    for x in ["s1", "s2", "s3"]:
        inst = mint_instance_iri(STATION, x)
        assert kg.objects(inst, PROV.wasGeneratedBy) == [acq]


def test_second_dataset_reuses_the_shared_scaffolding(registry, fixture_kg):
    # same characterization: one platform, one deployment, one study,
    # but one acquisition per records class
    assert len(fixture_kg.subjects(RDF.type, HACITO.InformationSystem)) == 1
    assert len(fixture_kg.subjects(RDF.type, VSTOI.Deployment)) == 1
    assert len(fixture_kg.subjects(RDF.type, HASCO.Study)) == 1
    assert len(fixture_kg.subjects(RDF.type, HACITO.ManualDataAnnotation)) == 2


def test_load_dataset_does_not_mutate_its_input(registry):
    kg = registry.merged()
    before = len(kg)
    load_stations(registry, kg)
    assert len(kg) == before


def test_reference_columns_mint_target_instances(registry, fixture_kg):
    t1 = mint_instance_iri(TRIP, "t1")
    origin = fixture_kg.objects(t1, reference_property("origin_station_id"))
    assert origin == [mint_instance_iri(STATION, "s1")]
    user = fixture_kg.objects(t1, reference_property("user_id"))
    assert user == [mint_instance_iri(QOE_M.User, "u1")]


def test_triple_count_matches_hand_tally(registry):
    # scaffolding: platform 2 + instrument 2 + deployment 4 + study 2 +
    # acquisition 6 = 16; rows: 3 stations x (type + generatedBy + 3 attrs) = 15
    base = registry.merged()
    kg = load_stations(registry)
    assert len(kg) - len(base) == 31


def test_unknown_attribute_property_rejected(registry):
    mapping_config = load_config("stations-config.yaml")["mapping"]
    mapping_config = {
        **mapping_config,
        "columns": [
            mapping_config["columns"][0],
            {**mapping_config["columns"][1], "property": "qoe-m:undeclared"},
        ],
    }
    with pytest.raises(UnknownPropertyError):
        load_dataset(
            "station_id,station_label\ns1,x\n",
            parse_mapping_config(mapping_config),
            characterize(answers()),
            registry.merged(),
        )


def test_header_mismatch_rejected(registry):
    with pytest.raises(HeaderMismatchError):
        load_dataset(
            "wrong,header,entirely,here\ns1,a,b,c\n",
            station_mapping(),
            characterize(answers()),
            registry.merged(),
        )


def test_duplicate_identifier_rejected(registry):
    csv_text = (
        "station_id,station_label,latitude,longitude\n"
        "s1,a,0,0\ns2,b,0,0\ns1,c,0,0\n"
    )
    with pytest.raises(DuplicateIdentifierError) as err:
        load_dataset(csv_text, station_mapping(), characterize(answers()), registry.merged())
    assert err.value.identifier == "s1"


def test_empty_identifier_rejected(registry):
    csv_text = "station_id,station_label,latitude,longitude\n,a,0,0\n"
    with pytest.raises(EmptyIdentifierError):
        load_dataset(csv_text, station_mapping(), characterize(answers()), registry.merged())
