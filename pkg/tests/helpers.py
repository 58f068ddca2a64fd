"""Shared helpers for loading the desk-scale fixture data."""

from __future__ import annotations

from pathlib import Path

import yaml

from cityforge.ingest import characterize, load_dataset, parse_mapping_config
from cityforge.rdf import Graph

FIXTURES = Path(__file__).parent / "fixtures"


def load_config(name: str) -> dict:
    return yaml.safe_load((FIXTURES / name).read_text(encoding="utf-8"))


def fixture_csv(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def build_fixture_kg(registry) -> Graph:
    """Ingest the station registry and the trip log into a fresh graph."""
    kg = registry.merged()
    for csv_name, config_name in (
        ("stations.csv", "stations-config.yaml"),
        ("trips.csv", "trips-config.yaml"),
    ):
        config = load_config(config_name)
        kg = load_dataset(
            fixture_csv(csv_name),
            parse_mapping_config(config["mapping"]),
            characterize(config["characterization"]),
            kg,
        )
    return kg
