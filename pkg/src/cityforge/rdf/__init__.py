"""Minimal RDF data model with a Turtle-subset codec and a BGP matcher."""

from cityforge.rdf.model import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
    TriplePattern,
    Var,
    isomorphic,
    merge,
)
from cityforge.rdf.turtle import TurtleSyntaxError, UnknownPrefixError, parse_turtle, serialize_turtle
from cityforge.rdf.match import match

__all__ = [
    "BlankNode",
    "Graph",
    "Iri",
    "Literal",
    "Term",
    "Triple",
    "TriplePattern",
    "TurtleSyntaxError",
    "UnknownPrefixError",
    "Var",
    "isomorphic",
    "match",
    "merge",
    "parse_turtle",
    "serialize_turtle",
]
