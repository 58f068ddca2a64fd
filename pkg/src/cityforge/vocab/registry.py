"""Built-in vocabularies and RDFS subclass reasoning over them.

The registry bundles the metadata ontologies (instruments, studies,
annotation activities, provenance) together with the indicator and
mobility-domain vocabularies, all shipped as Turtle files under
``cityforge/vocab/data/``. Callers may layer extra ontologies on top;
the combined subclass relation must stay acyclic.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..namespaces import RDF, RDFS
from ..rdf import Graph, Iri, merge, parse_turtle

BUILTIN_ONTOLOGIES = ("vstoi", "hasco", "hacito", "prov", "qoe", "qoe-m", "ccsv")


class CyclicHierarchyError(Exception):
    """The combined subclass relation contains a cycle."""

    def __init__(self, member: Iri):
        self.member = member
        super().__init__(f"subclass hierarchy is cyclic at {member.value}")


class UnknownClassError(Exception):
    def __init__(self, iri: Iri):
        self.iri = iri
        super().__init__(f"class not declared in any loaded vocabulary: {iri.value}")


def builtin_graph(name: str) -> Graph:
    text = (
        resources.files("cityforge.vocab")
        .joinpath("data")
        .joinpath(f"{name}.ttl")
        .read_text(encoding="utf-8")
    )
    return parse_turtle(text)


@dataclass
class VocabularyRegistry:
    ontologies: dict[str, Graph]
    subclass_axioms: set[tuple[Iri, Iri]]

    def merged(self) -> Graph:
        """All ontology graphs combined, built-ins first."""
        out = Graph()
        for g in self.ontologies.values():
            out = merge(out, g)
        return out

    def declared_classes(self) -> set[Iri]:
        found: set[Iri] = set()
        for g in self.ontologies.values():
            for s in g.subjects(RDF.type, RDFS.Class):
                if isinstance(s, Iri):
                    found.add(s)
        for child, parent in self.subclass_axioms:
            found.add(child)
            found.add(parent)
        return found

    def declared_properties(self) -> set[Iri]:
        found: set[Iri] = set()
        for g in self.ontologies.values():
            for s in g.subjects(RDF.type, RDF.Property):
                if isinstance(s, Iri):
                    found.add(s)
        return found

    def has_class(self, iri: Iri) -> bool:
        return iri in self.declared_classes()


def _check_acyclic(axioms: set[tuple[Iri, Iri]]) -> None:
    parents: dict[Iri, list[Iri]] = {}
    for child, parent in sorted(axioms, key=lambda a: (a[0].value, a[1].value)):
        parents.setdefault(child, []).append(parent)

    # Iterative DFS; a node revisited while still on the stack closes a cycle.
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[Iri, int] = {}
    for start in parents:
        if color.get(start, WHITE) != WHITE:
            continue
        stack: list[tuple[Iri, int]] = [(start, 0)]
        color[start] = GRAY
        while stack:
            node, idx = stack[-1]
            succ = parents.get(node, [])
            if idx < len(succ):
                stack[-1] = (node, idx + 1)
                nxt = succ[idx]
                state = color.get(nxt, WHITE)
                if state == GRAY:
                    raise CyclicHierarchyError(nxt)
                if state == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                stack.pop()


def load_registry(extra_ontologies: list[Graph] | None = None) -> VocabularyRegistry:
    """Load the built-in vocabularies, merge extras, and validate the hierarchy."""
    ontologies: dict[str, Graph] = {name: builtin_graph(name) for name in BUILTIN_ONTOLOGIES}
    for i, g in enumerate(extra_ontologies or [], start=1):
        ontologies[f"extra{i}"] = g

    axioms: set[tuple[Iri, Iri]] = set()
    for g in ontologies.values():
        for t in g:
            if t.predicate == RDFS.subClassOf and isinstance(t.subject, Iri) and isinstance(t.object, Iri):
                axioms.add((t.subject, t.object))

    _check_acyclic(axioms)
    return VocabularyRegistry(ontologies=ontologies, subclass_axioms=axioms)


def subclass_closure(reg: VocabularyRegistry, c: Iri) -> set[Iri]:
    """Reflexive-transitive superclass set of c."""
    if not reg.has_class(c):
        raise UnknownClassError(c)

    parents: dict[Iri, set[Iri]] = {}
    for child, parent in reg.subclass_axioms:
        parents.setdefault(child, set()).add(parent)

    closure = {c}
    frontier = [c]
    while frontier:
        node = frontier.pop()
        for parent in parents.get(node, ()):
            if parent not in closure:
                closure.add(parent)
                frontier.append(parent)
    return closure
