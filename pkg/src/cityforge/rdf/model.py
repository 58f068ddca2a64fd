"""RDF terms, triples, graphs, and triple patterns.

Graphs have set semantics over triples but keep a deterministic
(insertion) iteration order so that matching and serialization are
reproducible run to run.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

_WHITESPACE = re.compile(r"\s")
_PREFIX_LABEL = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")


@dataclass(frozen=True)
class Iri:
    """An absolute IRI. Must be non-empty and contain no whitespace."""

    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("IRI must be non-empty")
        if _WHITESPACE.search(self.value):
            raise ValueError(f"IRI contains whitespace: {self.value!r}")

    def local_name(self) -> str:
        """Fragment after '#', else the last path segment."""
        if "#" in self.value:
            return self.value.rsplit("#", 1)[1]
        return self.value.rstrip("/").rsplit("/", 1)[-1]

    def __repr__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True)
class Literal:
    """A literal with at most one of datatype or language tag."""

    lexical: str
    datatype: Iri | None = None
    language: str | None = None

    def __post_init__(self) -> None:
        if self.datatype is not None and self.language is not None:
            raise ValueError("literal cannot carry both a datatype and a language tag")

    def __repr__(self) -> str:
        if self.datatype:
            return f'"{self.lexical}"^^<{self.datatype.value}>'
        if self.language:
            return f'"{self.lexical}"@{self.language}'
        return f'"{self.lexical}"'


@dataclass(frozen=True)
class BlankNode:
    """A blank node identified by a graph-scoped label."""

    label: str

    def __repr__(self) -> str:
        return f"_:{self.label}"


Term = Union[Iri, Literal, BlankNode]


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject cannot be a literal")
        if not isinstance(self.predicate, Iri):
            raise ValueError("triple predicate must be an IRI")

    def __repr__(self) -> str:
        return f"({self.subject!r} {self.predicate!r} {self.object!r})"


@dataclass(frozen=True)
class Var:
    """A named variable slot inside a TriplePattern."""

    name: str


PatternTerm = Union[Iri, Literal, BlankNode, Var]


@dataclass(frozen=True)
class TriplePattern:
    """A triple where any position may be a variable."""

    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> set[str]:
        return {t.name for t in (self.subject, self.predicate, self.object) if isinstance(t, Var)}


def term_sort_key(term: Term) -> tuple[int, str, str, str]:
    """Total order over terms used for deterministic output."""
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    if isinstance(term, BlankNode):
        return (1, term.label, "", "")
    return (2, term.lexical, term.datatype.value if term.datatype else "", term.language or "")


def triple_sort_key(t: Triple) -> tuple:
    return (term_sort_key(t.subject), term_sort_key(t.predicate), term_sort_key(t.object))


class Graph:
    """A set of triples plus a prefix map.

    Insertion of a duplicate triple leaves the size unchanged. A graph is
    built single-threaded and treated as immutable once published; `merge`
    returns a new graph.
    """

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: dict[str, str] | None = None,
    ) -> None:
        self._triples: dict[Triple, None] = {}
        self.prefixes: dict[str, str] = {}
        if prefixes:
            for label, ns in prefixes.items():
                self.bind(label, ns)
        self._blank_counter = 0
        for t in triples:
            self.add(t)

    def bind(self, label: str, namespace: str) -> None:
        if not _PREFIX_LABEL.match(label) and label != "":
            raise ValueError(f"invalid prefix label: {label!r}")
        self.prefixes[label] = namespace

    def add(self, triple: Triple) -> None:
        self._triples.setdefault(triple, None)

    def add_spo(self, subject: Term, predicate: Iri, obj: Term) -> None:
        self.add(Triple(subject, predicate, obj))

    def discard(self, triple: Triple) -> None:
        self._triples.pop(triple, None)

    def fresh_blank(self) -> BlankNode:
        """A blank node with a label unused so far in this graph."""
        while True:
            label = f"b{self._blank_counter}"
            self._blank_counter += 1
            if not any(
                isinstance(part, BlankNode) and part.label == label
                for t in self._triples
                for part in (t.subject, t.object)
            ):
                return BlankNode(label)

    def blank_labels(self) -> set[str]:
        labels: set[str] = set()
        for t in self._triples:
            if isinstance(t.subject, BlankNode):
                labels.add(t.subject.label)
            if isinstance(t.object, BlankNode):
                labels.add(t.object.label)
        return labels

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __len__(self) -> int:
        return len(self._triples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return set(self._triples) == set(other._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self)} triples, {len(self.prefixes)} prefixes)"

    def subjects(self, predicate: Iri | None = None, obj: Term | None = None) -> list[Term]:
        out: dict[Term, None] = {}
        for t in self._triples:
            if predicate is not None and t.predicate != predicate:
                continue
            if obj is not None and t.object != obj:
                continue
            out.setdefault(t.subject, None)
        return list(out)

    def objects(self, subject: Term | None = None, predicate: Iri | None = None) -> list[Term]:
        out: dict[Term, None] = {}
        for t in self._triples:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            out.setdefault(t.object, None)
        return list(out)

    def triples_for_subject(self, subject: Term) -> list[Triple]:
        return [t for t in self._triples if t.subject == subject]


def merge(g1: Graph, g2: Graph) -> Graph:
    """Union of two graphs with disjoint blank-node scopes.

    Prefix maps are merged with g1 winning label conflicts. Blank nodes of
    g2 that collide with labels used in g1 are relabeled, so ground triples
    deduplicate while blank-scoped statements never capture each other.
    """
    out = Graph()
    for label, ns in g2.prefixes.items():
        out.bind(label, ns)
    for label, ns in g1.prefixes.items():
        out.bind(label, ns)
    for t in g1:
        out.add(t)

    used = g1.blank_labels()
    mapping: dict[str, BlankNode] = {}
    counter = 0

    def rename(term: Term) -> Term:
        nonlocal counter
        if not isinstance(term, BlankNode):
            return term
        if term.label not in mapping:
            if term.label in used:
                while True:
                    candidate = f"m{counter}"
                    counter += 1
                    if candidate not in used and candidate not in g2.blank_labels():
                        mapping[term.label] = BlankNode(candidate)
                        used.add(candidate)
                        break
            else:
                mapping[term.label] = term
                used.add(term.label)
        return mapping[term.label]

    for t in g2:
        out.add(Triple(rename(t.subject), t.predicate, rename(t.object)))
    return out


def isomorphic(g1: Graph, g2: Graph) -> bool:
    """True iff a blank-node bijection maps g1 exactly onto g2."""
    if len(g1) != len(g2):
        return False

    def split(g: Graph) -> tuple[set[Triple], list[Triple]]:
        ground, blank = set(), []
        for t in g:
            if isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode):
                blank.append(t)
            else:
                ground.add(t)
        return ground, blank

    ground1, blank1 = split(g1)
    ground2, blank2 = split(g2)
    if ground1 != ground2 or len(blank1) != len(blank2):
        return False
    if not blank1:
        return True

    def signature(triples: list[Triple]) -> dict[str, list[tuple]]:
        # Per-blank fingerprint over the ground parts of incident triples.
        sig: dict[str, list[tuple]] = {}
        for t in triples:
            s_blank = isinstance(t.subject, BlankNode)
            o_blank = isinstance(t.object, BlankNode)
            if s_blank:
                other = ("b",) if o_blank else ("g", term_sort_key(t.object))
                sig.setdefault(t.subject.label, []).append(("s", t.predicate.value, other))
            if o_blank:
                other = ("b",) if s_blank else ("g", term_sort_key(t.subject))
                sig.setdefault(t.object.label, []).append(("o", t.predicate.value, other))
        return {k: sorted(v) for k, v in sig.items()}

    sig1, sig2 = signature(blank1), signature(blank2)
    if len(sig1) != len(sig2):
        return False
    if sorted(map(tuple, sig1.values())) != sorted(map(tuple, sig2.values())):
        return False

    labels1 = sorted(sig1, key=lambda l: (len(sig1[l]), sig1[l]))
    candidates = {
        l1: [l2 for l2 in sig2 if sig2[l2] == sig1[l1]]
        for l1 in labels1
    }
    blank2_set = set(blank2)

    def substitute(t: Triple, mapping: dict[str, str]) -> Triple | None:
        def sub(term: Term) -> Term | None:
            if isinstance(term, BlankNode):
                mapped = mapping.get(term.label)
                return BlankNode(mapped) if mapped is not None else None
            return term

        s, o = sub(t.subject), sub(t.object)
        if s is None or o is None:
            return None
        return Triple(s, t.predicate, o)

    def consistent(mapping: dict[str, str]) -> bool:
        for t in blank1:
            image = substitute(t, mapping)
            if image is not None and image not in blank2_set:
                return False
        return True

    def backtrack(i: int, mapping: dict[str, str], taken: set[str]) -> bool:
        if i == len(labels1):
            return True
        l1 = labels1[i]
        for l2 in candidates[l1]:
            if l2 in taken:
                continue
            mapping[l1] = l2
            taken.add(l2)
            if consistent(mapping) and backtrack(i + 1, mapping, taken):
                return True
            del mapping[l1]
            taken.discard(l2)
        return False

    return backtrack(0, {}, set())
