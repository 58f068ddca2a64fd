"""Turtle-subset parser and serializer.

Supported grammar: `@prefix` declarations, IRIs in angle brackets,
prefixed names, the `a` keyword, blank nodes `_:label`, double-quoted
single-line literals with `\\`-escapes, `^^` datatypes, `@lang` tags,
bare integers (shorthand for xsd:integer), predicate lists with `;`,
object lists with `,`, statements terminated by `.`, and `#` comments.
Collections, anonymous blank nodes `[]`, and `@base` are not supported.

The serializer emits a deterministic document: prefixes sorted by label,
triples sorted by subject, predicate, and object lexical form, prefixed
names used wherever a declared namespace applies and the local part is
safe to write. Blank nodes are relabeled `_:b0, _:b1, ...` in emission
order, so round trips are isomorphic rather than label-identical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from cityforge.rdf.model import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
    term_sort_key,
)

XSD_INTEGER = Iri("http://www.w3.org/2001/XMLSchema#integer")

_INTEGER_LEXICAL = re.compile(r"^[+-]?[0-9]+$")
_SAFE_LOCAL = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.-]*$")
_PNAME = re.compile(r"(?:[A-Za-z_][A-Za-z0-9_-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?")
_BLANK = re.compile(r"_:([A-Za-z_][A-Za-z0-9_-]*)")
_INTEGER = re.compile(r"[+-]?[0-9]+")
_LANGTAG = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")


class TurtleSyntaxError(Exception):
    """Raised on malformed input, carrying a 1-based position."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.line = line
        self.column = column
        self.token = token
        detail = f"line {line}, column {column}: {message}"
        if token:
            detail += f" (at {token!r})"
        super().__init__(detail)


class UnknownPrefixError(Exception):
    """Raised when a prefixed name uses an undeclared prefix."""

    def __init__(self, prefix: str, line: int, column: int):
        self.prefix = prefix
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: undeclared prefix {prefix + ':'!r}")


@dataclass
class _Token:
    kind: str  # IRIREF PNAME BLANK STRING INTEGER LANGTAG DTYPE DOT SEMI COMMA PREFIX A EOF
    value: str
    line: int
    column: int


_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _error(self, message: str, token: str = "") -> TurtleSyntaxError:
        return TurtleSyntaxError(message, self.line, self.col, token)

    def _skip_trivia(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif ch == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                return

    def _read_unicode_escape(self, width: int) -> str:
        start = self.pos
        digits = self.text[start : start + width]
        if len(digits) < width or not all(c in "0123456789abcdefABCDEF" for c in digits):
            raise self._error(f"bad \\{'u' if width == 4 else 'U'} escape", digits)
        self._advance(width)
        return chr(int(digits, 16))

    def _read_iriref(self) -> _Token:
        line, col = self.line, self.col
        self._advance()  # '<'
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self._error("unterminated IRI")
            ch = self.text[self.pos]
            if ch == ">":
                self._advance()
                return _Token("IRIREF", "".join(out), line, col)
            if ch == "\n":
                raise self._error("newline inside IRI")
            if ch == "\\":
                self._advance()
                esc = self.text[self.pos : self.pos + 1]
                if esc == "u":
                    self._advance()
                    out.append(self._read_unicode_escape(4))
                elif esc == "U":
                    self._advance()
                    out.append(self._read_unicode_escape(8))
                else:
                    raise self._error("bad escape in IRI", esc)
            else:
                out.append(ch)
                self._advance()

    def _read_string(self) -> _Token:
        line, col = self.line, self.col
        self._advance()  # '"'
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self._error("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self._advance()
                return _Token("STRING", "".join(out), line, col)
            if ch == "\n":
                raise self._error("newline inside string literal")
            if ch == "\\":
                self._advance()
                esc = self.text[self.pos : self.pos + 1]
                if esc in _ESCAPES:
                    out.append(_ESCAPES[esc])
                    self._advance()
                elif esc == "u":
                    self._advance()
                    out.append(self._read_unicode_escape(4))
                elif esc == "U":
                    self._advance()
                    out.append(self._read_unicode_escape(8))
                else:
                    raise self._error("bad escape in string", esc)
            else:
                out.append(ch)
                self._advance()

    def tokens(self) -> list[_Token]:
        out: list[_Token] = []
        while True:
            self._skip_trivia()
            if self.pos >= len(self.text):
                out.append(_Token("EOF", "", self.line, self.col))
                return out
            ch = self.text[self.pos]
            line, col = self.line, self.col
            if ch == "<":
                out.append(self._read_iriref())
            elif ch == '"':
                out.append(self._read_string())
            elif ch == "@":
                m = _LANGTAG.match(self.text, self.pos)
                if not m:
                    raise self._error("bad '@' token", ch)
                word = m.group(1)
                self._advance(len(m.group(0)))
                if word == "prefix":
                    out.append(_Token("PREFIX", word, line, col))
                else:
                    out.append(_Token("LANGTAG", word, line, col))
            elif self.text.startswith("_:", self.pos):
                m = _BLANK.match(self.text, self.pos)
                if not m:
                    raise self._error("bad blank node label")
                self._advance(len(m.group(0)))
                out.append(_Token("BLANK", m.group(1), line, col))
            elif self.text.startswith("^^", self.pos):
                self._advance(2)
                out.append(_Token("DTYPE", "^^", line, col))
            elif ch == ".":
                self._advance()
                out.append(_Token("DOT", ".", line, col))
            elif ch == ";":
                self._advance()
                out.append(_Token("SEMI", ";", line, col))
            elif ch == ",":
                self._advance()
                out.append(_Token("COMMA", ",", line, col))
            else:
                m = _INTEGER.match(self.text, self.pos)
                if m and not _PNAME.match(self.text, self.pos):
                    self._advance(len(m.group(0)))
                    out.append(_Token("INTEGER", m.group(0), line, col))
                    continue
                m = _PNAME.match(self.text, self.pos)
                if m:
                    self._advance(len(m.group(0)))
                    out.append(_Token("PNAME", m.group(0), line, col))
                    continue
                m = _WORD.match(self.text, self.pos)
                if m and m.group(0) == "a":
                    self._advance(1)
                    out.append(_Token("A", "a", line, col))
                    continue
                raise self._error("unexpected token", m.group(0) if m else ch)


class _Parser:
    RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")

    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0
        self.graph = Graph()
        self._blank_map: dict[str, BlankNode] = {}
        self._blank_seq = 0

    def _peek(self) -> _Token:
        return self.tokens[self.i]

    def _next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, kind: str, what: str) -> _Token:
        tok = self._next()
        if tok.kind != kind:
            raise TurtleSyntaxError(f"expected {what}", tok.line, tok.column, tok.value or tok.kind)
        return tok

    def _fresh_blank(self, label: str) -> BlankNode:
        # Labels from the document are freshened to graph-scoped ones.
        if label not in self._blank_map:
            self._blank_map[label] = BlankNode(f"b{self._blank_seq}")
            self._blank_seq += 1
        return self._blank_map[label]

    def _resolve_pname(self, tok: _Token) -> Iri:
        prefix, local = tok.value.split(":", 1)
        if prefix not in self.graph.prefixes:
            raise UnknownPrefixError(prefix, tok.line, tok.column)
        return Iri(self.graph.prefixes[prefix] + local)

    def _iri(self, tok: _Token) -> Iri:
        if tok.kind == "IRIREF":
            try:
                return Iri(tok.value)
            except ValueError as exc:
                raise TurtleSyntaxError(str(exc), tok.line, tok.column, tok.value) from None
        if tok.kind == "PNAME":
            return self._resolve_pname(tok)
        raise TurtleSyntaxError("expected an IRI", tok.line, tok.column, tok.value or tok.kind)

    def _object(self, tok: _Token) -> Term:
        if tok.kind in ("IRIREF", "PNAME"):
            return self._iri(tok)
        if tok.kind == "BLANK":
            return self._fresh_blank(tok.value)
        if tok.kind == "INTEGER":
            return Literal(tok.value, XSD_INTEGER)
        if tok.kind == "STRING":
            nxt = self._peek()
            if nxt.kind == "DTYPE":
                self._next()
                dtype = self._iri(self._next())
                return Literal(tok.value, dtype)
            if nxt.kind == "LANGTAG":
                self._next()
                return Literal(tok.value, language=nxt.value)
            return Literal(tok.value)
        raise TurtleSyntaxError("expected an object term", tok.line, tok.column, tok.value or tok.kind)

    def _prefix_decl(self) -> None:
        tok = self._expect("PNAME", "a prefix name ending in ':'")
        prefix, local = tok.value.split(":", 1)
        if local:
            raise TurtleSyntaxError("prefix declaration must end in ':'", tok.line, tok.column, tok.value)
        iri_tok = self._expect("IRIREF", "a namespace IRI")
        self._expect("DOT", "'.'")
        self.graph.bind(prefix, iri_tok.value)

    def _statement(self) -> None:
        tok = self._next()
        if tok.kind == "BLANK":
            subject: Term = self._fresh_blank(tok.value)
        else:
            subject = self._iri(tok)
        while True:
            verb_tok = self._next()
            if verb_tok.kind == "A":
                predicate = self.RDF_TYPE
            else:
                predicate = self._iri(verb_tok)
            while True:
                self.graph.add(Triple(subject, predicate, self._object(self._next())))
                if self._peek().kind == "COMMA":
                    self._next()
                    continue
                break
            nxt = self._next()
            if nxt.kind == "SEMI":
                # Tolerate a dangling ';' before the final '.'.
                if self._peek().kind == "DOT":
                    self._next()
                    return
                continue
            if nxt.kind == "DOT":
                return
            raise TurtleSyntaxError("expected ';' or '.'", nxt.line, nxt.column, nxt.value or nxt.kind)

    def parse(self) -> Graph:
        while True:
            tok = self._peek()
            if tok.kind == "EOF":
                return self.graph
            if tok.kind == "PREFIX":
                self._next()
                self._prefix_decl()
            else:
                self._statement()


def parse_turtle(text: str) -> Graph:
    """Parse a Turtle-subset document into a Graph.

    Raises TurtleSyntaxError with a 1-based line and column on malformed
    input and UnknownPrefixError for prefixed names whose prefix was never
    declared.
    """
    return _Parser(_Lexer(text).tokens()).parse()


def _escape_literal(value: str) -> str:
    out: list[str] = []
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _escape_iri(value: str) -> str:
    out: list[str] = []
    for ch in value:
        if ch in '<>"{}|^`\\' or ord(ch) <= 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


class _Writer:
    def __init__(self, graph: Graph):
        self.graph = graph
        # Longest namespace wins when several prefixes share a stem.
        self.namespaces = sorted(graph.prefixes.items(), key=lambda kv: -len(kv[1]))
        self.blank_out: dict[str, str] = {}

    def _blank_label(self, label: str) -> str:
        if label not in self.blank_out:
            self.blank_out[label] = f"b{len(self.blank_out)}"
        return self.blank_out[label]

    def _iri(self, iri: Iri) -> str:
        for label, ns in self.namespaces:
            if iri.value.startswith(ns) and len(iri.value) > len(ns):
                local = iri.value[len(ns) :]
                if _SAFE_LOCAL.match(local) and not local.endswith("."):
                    return f"{label}:{local}"
        return f"<{_escape_iri(iri.value)}>"

    def _term(self, term: Term) -> str:
        if isinstance(term, Iri):
            return self._iri(term)
        if isinstance(term, BlankNode):
            return f"_:{self._blank_label(term.label)}"
        if term.datatype == XSD_INTEGER and _INTEGER_LEXICAL.match(term.lexical):
            return term.lexical
        base = f'"{_escape_literal(term.lexical)}"'
        if term.datatype:
            return f"{base}^^{self._iri(term.datatype)}"
        if term.language:
            return f"{base}@{term.language}"
        return base

    def write(self) -> str:
        lines: list[str] = []
        for label, ns in sorted(self.graph.prefixes.items()):
            lines.append(f"@prefix {label}: <{_escape_iri(ns)}> .")
        if lines:
            lines.append("")

        ordered = sorted(self.graph, key=lambda t: (
            term_sort_key(t.subject),
            term_sort_key(t.predicate),
            term_sort_key(t.object),
        ))
        i = 0
        while i < len(ordered):
            subject = ordered[i].subject
            group = []
            while i < len(ordered) and ordered[i].subject == subject:
                group.append(ordered[i])
                i += 1
            parts: list[str] = []
            j = 0
            while j < len(group):
                predicate = group[j].predicate
                objs = []
                while j < len(group) and group[j].predicate == predicate:
                    objs.append(self._term(group[j].object))
                    j += 1
                pred_text = "a" if predicate == _Parser.RDF_TYPE else self._iri(predicate)
                parts.append(f"{pred_text} {', '.join(objs)}")
            subject_text = self._term(subject)
            if len(parts) == 1:
                lines.append(f"{subject_text} {parts[0]} .")
            else:
                joined = f" ;\n{' ' * (len(subject_text) + 1)}".join(parts)
                lines.append(f"{subject_text} {joined} .")
        return "\n".join(lines) + ("\n" if lines else "")


def serialize_turtle(graph: Graph) -> str:
    """Serialize a Graph to deterministic Turtle-subset text.

    The output reparses (via parse_turtle) to a graph isomorphic to the
    input; blank nodes are relabeled in emission order.
    """
    return _Writer(graph).write()
