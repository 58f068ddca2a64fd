"""cityforge: city data to knowledge graph, contextualized CSV, and dashboards."""

__version__ = "0.1.0"
