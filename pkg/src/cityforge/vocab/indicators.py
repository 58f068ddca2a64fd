"""Indicator catalog: parsing, validation, and Turtle export.

An indicator is a named definition of a computation: one or more measures
(an entity class plus an aggregation function, and a value property for
everything except count) over zero or more dimensions (entity classes to
group by). Catalogs are plain graphs using the qoe vocabulary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from ..namespaces import QOE, QOE_M, RDF, RDFS
from ..rdf import Graph, Iri, Literal, merge, parse_turtle
from .registry import VocabularyRegistry, builtin_graph

BUILTIN_CATALOGS = ("catalog-qoe", "catalog-iso37120")


class AggFunction(str, enum.Enum):
    COUNT = "count"
    SUM = "sum"
    AVG = "avg"
    MIN = "min"
    MAX = "max"


_FUNCTION_BY_IRI = {
    QOE.Count: AggFunction.COUNT,
    QOE.Sum: AggFunction.SUM,
    QOE.Avg: AggFunction.AVG,
    QOE.Min: AggFunction.MIN,
    QOE.Max: AggFunction.MAX,
}
_IRI_BY_FUNCTION = {f: iri for iri, f in _FUNCTION_BY_IRI.items()}


class MalformedIndicatorError(Exception):
    """A catalog entry is missing a required triple or uses an unknown term."""

    def __init__(self, subject: Iri, detail: str):
        self.subject = subject
        self.detail = detail
        super().__init__(f"{subject.value}: {detail}")


@dataclass(frozen=True)
class DimensionSpec:
    entity_class: Iri


@dataclass(frozen=True)
class MeasureSpec:
    entity_class: Iri
    function: AggFunction
    value_property: Iri | None = None


@dataclass
class IndicatorDef:
    iri: Iri
    label: str
    dimensions: list[DimensionSpec] = field(default_factory=list)
    measures: list[MeasureSpec] = field(default_factory=list)


def _first_label(g: Graph, subject: Iri) -> str | None:
    for obj in g.objects(subject, RDFS.label):
        if isinstance(obj, Literal):
            return obj.lexical
    return None


def _resolve_entity(g: Graph, node: Iri, reg: VocabularyRegistry | None) -> Iri:
    things = [o for o in g.objects(node, QOE.hasAssociatedThing) if isinstance(o, Iri)]
    if not things:
        raise MalformedIndicatorError(node, "missing qoe:hasAssociatedThing")
    entity = things[0]
    if reg is not None and not reg.has_class(entity):
        raise MalformedIndicatorError(node, f"associated thing {entity.value} is not a known class")
    return entity


def load_indicator_catalog(g: Graph, reg: VocabularyRegistry | None = None) -> list[IndicatorDef]:
    """Extract every qoe:QoE_Indicator in g as an IndicatorDef.

    Passing a registry additionally checks that each associated entity
    class is declared; omit it when reloading a previously exported
    catalog on its own.
    """
    defs: list[IndicatorDef] = []
    indicators = [s for s in g.subjects(RDF.type, QOE.QoE_Indicator)]
    for ind in sorted(indicators, key=lambda s: getattr(s, "value", "")):
        if not isinstance(ind, Iri):
            raise MalformedIndicatorError(QOE.QoE_Indicator, "indicator must be named by an IRI")
        label = _first_label(g, ind)
        if label is None:
            raise MalformedIndicatorError(ind, "missing rdfs:label")

        dims: list[DimensionSpec] = []
        measures: list[MeasureSpec] = []
        for node in g.objects(ind, QOE.definedBy):
            if not isinstance(node, Iri):
                raise MalformedIndicatorError(ind, "qoe:definedBy must point at an IRI")
            types = set(g.objects(node, RDF.type))
            if QOE.Dimension in types:
                dims.append(DimensionSpec(entity_class=_resolve_entity(g, node, reg)))
            elif QOE.Measure in types:
                entity = _resolve_entity(g, node, reg)
                funcs = [o for o in g.objects(node, QOE.hasFunction) if isinstance(o, Iri)]
                if not funcs:
                    raise MalformedIndicatorError(node, "missing qoe:hasFunction")
                if funcs[0] not in _FUNCTION_BY_IRI:
                    raise MalformedIndicatorError(node, f"unknown function {funcs[0].value}")
                function = _FUNCTION_BY_IRI[funcs[0]]
                props = [o for o in g.objects(node, QOE.onProperty) if isinstance(o, Iri)]
                value_property = props[0] if props else None
                if function is not AggFunction.COUNT and value_property is None:
                    raise MalformedIndicatorError(node, "missing qoe:onProperty for non-count function")
                measures.append(MeasureSpec(entity_class=entity, function=function, value_property=value_property))
            else:
                raise MalformedIndicatorError(node, "neither a qoe:Measure nor a qoe:Dimension")

        if not measures:
            raise MalformedIndicatorError(ind, "indicator has no measure")

        dims.sort(key=lambda d: d.entity_class.value)
        measures.sort(key=lambda m: (m.entity_class.value, m.function.value, m.value_property.value if m.value_property else ""))
        defs.append(IndicatorDef(iri=ind, label=label, dimensions=dims, measures=measures))
    return defs


def catalog_to_graph(defs: Iterable[IndicatorDef]) -> Graph:
    """Render definitions back to a graph in the shape load_indicator_catalog reads."""
    g = Graph()
    g.bind("rdf", RDF.base)
    g.bind("rdfs", RDFS.base)
    g.bind("qoe", QOE.base)
    g.bind("qoe-m", QOE_M.base)

    for d in defs:
        g.add_spo(d.iri, RDF.type, QOE.QoE_Indicator)
        g.add_spo(d.iri, RDFS.label, Literal(d.label))
        for i, dim in enumerate(d.dimensions, start=1):
            node = Iri(f"{d.iri.value}-dim{i}")
            g.add_spo(d.iri, QOE.definedBy, node)
            g.add_spo(node, RDF.type, QOE.Dimension)
            g.add_spo(node, QOE.hasAssociatedThing, dim.entity_class)
        for i, m in enumerate(d.measures, start=1):
            node = Iri(f"{d.iri.value}-msr{i}")
            g.add_spo(d.iri, QOE.definedBy, node)
            g.add_spo(node, RDF.type, QOE.Measure)
            g.add_spo(node, QOE.hasAssociatedThing, m.entity_class)
            g.add_spo(node, QOE.hasFunction, _IRI_BY_FUNCTION[m.function])
            if m.value_property is not None:
                g.add_spo(node, QOE.onProperty, m.value_property)
    return g


def builtin_catalog_graph() -> Graph:
    out = Graph()
    for name in BUILTIN_CATALOGS:
        out = merge(out, builtin_graph(name))
    return out


def load_builtin_catalog(reg: VocabularyRegistry | None = None) -> list[IndicatorDef]:
    return load_indicator_catalog(builtin_catalog_graph(), reg)
