"""In-memory RDF triple store with N-Triples and Turtle serialization.

Terms are immutable; a Graph keeps three orderings (subject-, predicate-,
and object-keyed) so a pattern with any bound position is answered from an
index instead of a full scan.  A Graph supports one writer or many
concurrent readers, never both; serialization and matching are read-only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import MalformedTermError, NTriplesParseError
from .ns import PREFIXES, RDF_TYPE, XSD_STRING

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_IRI_FORBIDDEN_RE = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_BLANK_LABEL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")
# scanning form: no anchor, and the label may not end with '.'
_BLANK_SCAN_RE = re.compile(r"[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?")
_LANG_TAG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")
# Conservative subset of Turtle's PN_LOCAL: good enough for every local
# name this toolkit mints; anything else falls back to <...> form.
_PN_LOCAL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_\-.]*$")


@dataclass(frozen=True)
class IRI:
    value: str

    def __post_init__(self):
        if not _SCHEME_RE.match(self.value):
            raise MalformedTermError(f"not an absolute IRI (missing scheme): {self.value!r}")
        if _IRI_FORBIDDEN_RE.search(self.value):
            raise MalformedTermError(f"IRI contains forbidden character: {self.value!r}")

    def __repr__(self):
        return f"IRI({self.value!r})"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: Optional[str] = None

    def __post_init__(self):
        if self.language is not None and not _LANG_TAG_RE.match(self.language):
            raise MalformedTermError(f"bad language tag: {self.language!r}")

    def __repr__(self):
        if self.language:
            return f"Literal({self.lexical!r}, lang={self.language!r})"
        if self.datatype != XSD_STRING:
            return f"Literal({self.lexical!r}, datatype={self.datatype!r})"
        return f"Literal({self.lexical!r})"


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __post_init__(self):
        if not _BLANK_LABEL_RE.match(self.label):
            raise MalformedTermError(f"bad blank node label: {self.label!r}")

    def __repr__(self):
        return f"BlankNode({self.label!r})"


Term = Union[IRI, Literal, BlankNode]

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def term_to_ntriples(term: Term) -> str:
    """Render one term in N-Triples lexical form."""
    if isinstance(term, IRI):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if isinstance(term, Literal):
        out = f'"{_escape(term.lexical)}"'
        if term.language:
            return out + f"@{term.language}"
        if term.datatype != XSD_STRING:
            return out + f"^^<{term.datatype}>"
        return out
    raise MalformedTermError(f"not an RDF term: {term!r}")


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, (IRI, BlankNode)):
            raise MalformedTermError(f"subject must be an IRI or blank node: {self.subject!r}")
        if not isinstance(self.predicate, IRI):
            raise MalformedTermError(f"predicate must be an IRI: {self.predicate!r}")
        if not isinstance(self.object, (IRI, BlankNode, Literal)):
            raise MalformedTermError(f"object is not an RDF term: {self.object!r}")

    def sort_key(self) -> tuple[str, str, str]:
        return (
            term_to_ntriples(self.subject),
            term_to_ntriples(self.predicate),
            term_to_ntriples(self.object),
        )


def triple_to_line(t: Triple) -> str:
    return (
        f"{term_to_ntriples(t.subject)} {term_to_ntriples(t.predicate)} "
        f"{term_to_ntriples(t.object)} ."
    )


class Graph:
    """A set of triples plus SPO/POS/OSP indexes and a prefix table.

    Two graphs compare equal when they hold the same triple set; prefixes
    are serialization state and do not take part in equality.
    """

    def __init__(self, prefixes: Optional[dict[str, str]] = None):
        self._triples: set[Triple] = set()
        self._spo: dict[Term, dict[Term, set[Term]]] = {}
        self._pos: dict[Term, dict[Term, set[Term]]] = {}
        self._osp: dict[Term, dict[Term, set[Term]]] = {}
        self.prefixes: dict[str, str] = dict(PREFIXES if prefixes is None else prefixes)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def bind(self, prefix: str, namespace: str) -> None:
        self.prefixes[prefix] = namespace

    def insert(self, t: Triple) -> bool:
        """Add a triple; returns False when it was already present."""
        if not isinstance(t, Triple):
            raise MalformedTermError(f"not a triple: {t!r}")
        if t in self._triples:
            return False
        self._triples.add(t)
        self._spo.setdefault(t.subject, {}).setdefault(t.predicate, set()).add(t.object)
        self._pos.setdefault(t.predicate, {}).setdefault(t.object, set()).add(t.subject)
        self._osp.setdefault(t.object, {}).setdefault(t.subject, set()).add(t.predicate)
        return True

    def insert_all(self, triples) -> int:
        return sum(1 for t in triples if self.insert(t))

    def match(
        self,
        s: Optional[Term] = None,
        p: Optional[Term] = None,
        o: Optional[Term] = None,
    ) -> list[Triple]:
        """All triples matching the bound positions, in canonical order.

        The lookup is served from the index keyed on the leftmost bound
        position (subject, then predicate, then object).
        """
        found: list[Triple]
        if s is not None:
            by_p = self._spo.get(s, {})
            if p is not None:
                objs = by_p.get(p, ())
                found = [Triple(s, p, obj) for obj in objs if o is None or obj == o]
            else:
                found = [
                    Triple(s, pred, obj)
                    for pred, objs in by_p.items()
                    for obj in objs
                    if o is None or obj == o
                ]
        elif p is not None:
            by_o = self._pos.get(p, {})
            if o is not None:
                subs = by_o.get(o, ())
                found = [Triple(sub, p, o) for sub in subs]
            else:
                found = [Triple(sub, p, obj) for obj, subs in by_o.items() for sub in subs]
        elif o is not None:
            by_s = self._osp.get(o, {})
            found = [Triple(sub, pred, o) for sub, preds in by_s.items() for pred in preds]
        else:
            found = list(self._triples)
        found.sort(key=Triple.sort_key)
        return found

    def subjects(self) -> list[Term]:
        """Distinct subjects, in canonical order."""
        return sorted(self._spo, key=term_to_ntriples)

    def types_of(self, subject: Term) -> list[Term]:
        return [t.object for t in self.match(s=subject, p=IRI(RDF_TYPE))]


def serialize_ntriples(graph: Graph) -> str:
    """Canonical N-Triples: one sorted line per triple, UTF-8 text."""
    lines = sorted(triple_to_line(t) for t in graph)
    return "".join(line + "\n" for line in lines)


class _LineCursor:
    """Single-line scanner for the N-Triples grammar."""

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, message: str):
        raise NTriplesParseError(message, self.lineno)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text) or self.text[self.pos] == "#"

    def take_term(self) -> Term:
        self.skip_ws()
        if self.pos >= len(self.text):
            self.error("unexpected end of line, expected a term")
        ch = self.text[self.pos]
        if ch == "<":
            return self._take_iri()
        if ch == '"':
            return self._take_literal()
        if ch == "_":
            return self._take_blank()
        self.error(f"expected IRI, literal, or blank node at column {self.pos + 1}")

    def _take_iri(self) -> IRI:
        end = self.text.find(">", self.pos + 1)
        if end == -1:
            self.error("unterminated IRI")
        raw = self.text[self.pos + 1 : end]
        self.pos = end + 1
        try:
            return IRI(raw)
        except MalformedTermError as exc:
            self.error(str(exc))

    def _take_blank(self) -> BlankNode:
        if not self.text.startswith("_:", self.pos):
            self.error("expected '_:' blank node")
        m = _BLANK_SCAN_RE.match(self.text, self.pos + 2)
        if not m:
            self.error("bad blank node label")
        label = m.group(0)
        self.pos = m.end()
        return BlankNode(label)

    def _take_literal(self) -> Literal:
        chars: list[str] = []
        i = self.pos + 1
        text = self.text
        while True:
            if i >= len(text):
                self.error("unterminated literal")
            ch = text[i]
            if ch == '"':
                i += 1
                break
            if ch == "\\":
                if i + 1 >= len(text):
                    self.error("unterminated escape in literal")
                esc = text[i + 1]
                if esc in _UNESCAPES:
                    chars.append(_UNESCAPES[esc])
                    i += 2
                elif esc == "u" or esc == "U":
                    width = 4 if esc == "u" else 8
                    hexpart = text[i + 2 : i + 2 + width]
                    if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                        self.error(f"bad \\{esc} escape in literal")
                    chars.append(chr(int(hexpart, 16)))
                    i += 2 + width
                else:
                    self.error(f"unknown escape '\\{esc}' in literal")
            else:
                chars.append(ch)
                i += 1
        self.pos = i
        lexical = "".join(chars)
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != "<":
                self.error("expected datatype IRI after '^^'")
            dt = self._take_iri()
            return Literal(lexical, datatype=dt.value)
        if self.pos < len(self.text) and self.text[self.pos] == "@":
            m = re.match(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)", self.text[self.pos :])
            if not m:
                self.error("bad language tag")
            self.pos += m.end()
            return Literal(lexical, language=m.group(1))
        return Literal(lexical)

    def take_dot(self) -> None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ".":
            self.error("missing terminating '.'")
        self.pos += 1


def parse_ntriples(text: str) -> Graph:
    """Parse N-Triples text (with '#' comments and blank lines) into a Graph."""
    graph = Graph()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cur = _LineCursor(raw, lineno)
        subject = cur.take_term()
        predicate = cur.take_term()
        obj = cur.take_term()
        cur.take_dot()
        if not cur.at_end():
            cur.error("unexpected trailing content after '.'")
        try:
            graph.insert(Triple(subject, predicate, obj))
        except MalformedTermError as exc:
            raise NTriplesParseError(str(exc), lineno) from exc
    return graph


def _turtle_iri(value: str, prefixes: dict[str, str], predicate: bool = False) -> str:
    # 'a' is the rdf:type shorthand and is legal only as a predicate
    if predicate and value == RDF_TYPE:
        return "a"
    best = None
    for prefix, namespace in prefixes.items():
        if value.startswith(namespace) and (best is None or len(namespace) > len(prefixes[best])):
            local = value[len(namespace) :]
            if _PN_LOCAL_RE.match(local) and not local.endswith("."):
                best = prefix
    if best is not None:
        return f"{best}:{value[len(prefixes[best]):]}"
    return f"<{value}>"


def _turtle_term(term: Term, prefixes: dict[str, str], predicate: bool = False) -> str:
    if isinstance(term, IRI):
        return _turtle_iri(term.value, prefixes, predicate)
    return term_to_ntriples(term)


def serialize_turtle(graph: Graph) -> str:
    """Turtle output: @prefix header, then subject blocks with ';' grouping."""
    out = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(graph.prefixes.items())]
    body: list[str] = []
    triples = sorted(graph, key=Triple.sort_key)
    by_subject: dict[Term, list[Triple]] = {}
    for t in triples:
        by_subject.setdefault(t.subject, []).append(t)
    for subject in sorted(by_subject, key=term_to_ntriples):
        pairs = [
            f"{_turtle_term(t.predicate, graph.prefixes, predicate=True)} "
            f"{_turtle_term(t.object, graph.prefixes)}"
            for t in by_subject[subject]
        ]
        subj = _turtle_term(subject, graph.prefixes)
        block = f"{subj} " + " ;\n    ".join(pairs) + " ."
        body.append(block)
    text = "\n".join(out) + "\n"
    if body:
        text += "\n" + "\n\n".join(body) + "\n"
    return text
