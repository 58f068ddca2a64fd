"""Basic graph pattern evaluation over a Graph.

This is the query mechanism behind every metadata lookup in the
pipeline: a conjunction of triple patterns sharing variables expresses a
join. No OPTIONAL, FILTER, or aggregate forms exist at this layer.
"""

from __future__ import annotations

from cityforge.rdf.model import Graph, Term, Triple, TriplePattern, Var

Binding = dict[str, Term]


def _substitute(pattern: TriplePattern, binding: Binding) -> TriplePattern:
    def sub(slot):
        if isinstance(slot, Var) and slot.name in binding:
            return binding[slot.name]
        return slot

    return TriplePattern(sub(pattern.subject), sub(pattern.predicate), sub(pattern.object))


def _unify(pattern: TriplePattern, triple: Triple, binding: Binding) -> Binding | None:
    out = dict(binding)
    for slot, value in (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    ):
        if isinstance(slot, Var):
            bound = out.get(slot.name)
            if bound is None:
                out[slot.name] = value
            elif bound != value:
                return None
        elif slot != value:
            return None
    return out


def match(graph: Graph, patterns: list[TriplePattern]) -> list[Binding]:
    """All bindings under which every pattern is a triple of the graph.

    Results carry no duplicates; their order is deterministic for a fixed
    graph and pattern list. An unmatched pattern set yields [].
    """
    if not patterns:
        raise ValueError("patterns must be non-empty")

    # Index by predicate; predicates are almost always ground here.
    by_predicate: dict[Term, list[Triple]] = {}
    triples = list(graph)
    for t in triples:
        by_predicate.setdefault(t.predicate, []).append(t)

    bindings: list[Binding] = [{}]
    for pattern in patterns:
        next_bindings: list[Binding] = []
        for binding in bindings:
            grounded = _substitute(pattern, binding)
            if isinstance(grounded.predicate, Var):
                candidates = triples
            else:
                candidates = by_predicate.get(grounded.predicate, [])
            for triple in candidates:
                extended = _unify(grounded, triple, binding)
                if extended is not None:
                    next_bindings.append(extended)
        bindings = next_bindings
        if not bindings:
            return []

    seen: set[frozenset] = set()
    unique: list[Binding] = []
    for binding in bindings:
        key = frozenset(binding.items())
        if key not in seen:
            seen.add(key)
            unique.append(binding)
    return unique
