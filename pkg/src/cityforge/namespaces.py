"""Namespace constants shared across the pipeline.

The hadatac.org ontologies are addressed with a '#' fragment separator;
instance data minted at ingestion lives under the CITY namespace.
"""

from __future__ import annotations

from cityforge.rdf.model import Iri


class Namespace:
    """IRI factory: `NS.Local` or `NS.term("Hyphenated-Local")`."""

    def __init__(self, base: str):
        self.base = base

    def term(self, local: str) -> Iri:
        return Iri(self.base + local)

    def __getattr__(self, local: str) -> Iri:
        if local.startswith("_"):
            raise AttributeError(local)
        return Iri(self.base + local)

    def __contains__(self, iri: Iri) -> bool:
        return iri.value.startswith(self.base)

    def __repr__(self) -> str:
        return f"Namespace({self.base})"


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
PROV = Namespace("http://www.w3.org/ns/prov#")
VSTOI = Namespace("http://hadatac.org/ont/vstoi#")
HASCO = Namespace("http://hadatac.org/ont/hasco#")
HACITO = Namespace("http://hadatac.org/ont/hacito#")
QOE = Namespace("http://hadatac.org/ont/qoe#")
QOE_M = Namespace("http://hadatac.org/ont/qoe-m#")
CCSV = Namespace("http://hadatac.org/ont/ccsv#")
CITY = Namespace("http://hadatac.org/city/")

PREFIXES: dict[str, str] = {
    "rdf": RDF.base,
    "rdfs": RDFS.base,
    "xsd": XSD.base,
    "prov": PROV.base,
    "vstoi": VSTOI.base,
    "hasco": HASCO.base,
    "hacito": HACITO.base,
    "qoe": QOE.base,
    "qoe-m": QOE_M.base,
    "ccsv": CCSV.base,
    "city": CITY.base,
}

# Namespaces whose classes and properties are pipeline metadata, never
# domain rows.
METADATA_NAMESPACES = (RDF, RDFS, XSD, PROV, VSTOI, HASCO, HACITO, QOE, CCSV)


def expand_curie(text: str | Iri) -> Iri:
    """Resolve `qoe-m:label` style names against PREFIXES; full IRIs pass through."""
    if isinstance(text, Iri):
        return text
    if "://" in text:
        return Iri(text)
    label, sep, local = text.partition(":")
    if sep and label in PREFIXES:
        return Iri(PREFIXES[label] + local)
    return Iri(text)


def namespace_of(iri: Iri) -> str:
    """The base up to and including the '#' or final '/'."""
    v = iri.value
    if "#" in v:
        return v[: v.index("#") + 1]
    return v[: v.rfind("/") + 1]


# Classes in these namespaces mark provenance/metadata instances (studies,
# deployments, acquisition activities, platforms, instruments).
PROVENANCE_NAMESPACES = (PROV, VSTOI, HASCO, HACITO)
