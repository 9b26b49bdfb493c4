"""Reader and writer for the N3 subset used by device descriptions and rule packs.

Supported: ``@prefix``, triples with ``;`` and ``,`` abbreviations, ``a``,
``[ ... ]`` anonymous nodes, ``( ... )`` lists, typed and numeric literals,
``true``/``false``, ``#`` comments and top-level rules ``{ ... } => { ... } .``
with ``?var`` variables. Everything else is a positioned :class:`ParseError`.
See ``docs/n3-subset.md`` for the grammar.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import ParseError, UnknownPrefix
from .terms import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Iri,
    ListTerm,
    Literal,
    Term,
    Triple,
    Variable,
    canonical_literal,
    escape_string,
    term_key,
    variables_of,
)


@dataclass(frozen=True)
class Rule:
    """``premise => conclusion``; both are tuples of triple patterns."""

    premise: tuple[Triple, ...]
    conclusion: tuple[Triple, ...]

    def variables(self) -> set[Variable]:
        out: set[Variable] = set()
        for t in self.premise:
            for x in t:
                out |= variables_of(x)
        return out

    def key(self) -> tuple:
        return (
            tuple(sorted(t.key() for t in self.premise)),
            tuple(sorted(t.key() for t in self.conclusion)),
        )


Statement = Union[Triple, Rule]


@dataclass
class Document:
    prefixes: dict[str, str] = field(default_factory=dict)
    statements: list[Statement] = field(default_factory=list)

    @property
    def triples(self) -> list[Triple]:
        return [s for s in self.statements if isinstance(s, Triple)]

    @property
    def rules(self) -> list[Rule]:
        return [s for s in self.statements if isinstance(s, Rule)]


# ---------------------------------------------------------------------------
# lexer

_PN_LOCAL = r"[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?"
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<iri><(?:[^<>"{}|^`\\\x00-\x20]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*>)
  | (?P<implies>=>)
  | (?P<dtype>\^\^)
  | (?P<directive>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
  | (?P<lstring>\"\"\"(?:[^"\\]|\\.|"(?!""))*\"\"\"|'''(?:[^'\\]|\\.|'(?!''))*''')
  | (?P<string>"(?:[^"\\\n\r]|\\.)*"|'(?:[^'\\\n\r]|\\.)*')
  | (?P<number>[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+|\d*\.\d+|\d+))
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<blank>_:"""
    + _PN_LOCAL
    + r""")
  | (?P<pname>(?:[A-Za-z](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?:(?:"""
    + _PN_LOCAL
    + r""")?)
  | (?P<word>[A-Za-z][A-Za-z0-9_-]*)
  | (?P<punct>[.;,()\[\]{}])
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def where(self, pos: int) -> tuple[int, int]:
        line = bisect.bisect_right(self._line_starts, pos)
        return line, pos - self._line_starts[line - 1] + 1

    def error(self, pos: int, message: str) -> ParseError:
        line, col = self.where(pos)
        return ParseError(line, col, message)

    def tokens(self) -> list[_Tok]:
        out = []
        pos, n = 0, len(self.text)
        while pos < n:
            m = _TOKEN_RE.match(self.text, pos)
            if m is None or m.end() == pos:
                raise self.error(pos, f"unexpected character {self.text[pos]!r}")
            kind = m.lastgroup
            if kind != "ws":
                out.append(_Tok(kind, m.group(), pos))
            pos = m.end()
        out.append(_Tok("eof", "", n))
        return out


def _unescape(body: str, lexer: _Lexer, pos: int) -> str:
    if "\\" not in body:
        return body
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1] if i + 1 < len(body) else ""
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt in ("u", "U"):
            width = 4 if nxt == "u" else 8
            digits = body[i + 2:i + 2 + width]
            if len(digits) != width or not all(c in "0123456789abcdefABCDEF" for c in digits):
                raise lexer.error(pos, "bad unicode escape")
            code = int(digits, 16)
            if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
                raise lexer.error(pos, "unicode escape out of range")
            out.append(chr(code))
            i += 2 + width
        else:
            raise lexer.error(pos, f"bad escape sequence \\{nxt}")
    return "".join(out)


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.lexer = _Lexer(text)
        self.toks = self.lexer.tokens()
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.statements: list[Statement] = []
        self.anon = 0
        # None at top level, "premise" or "conclusion" inside a rule formula
        self.scope: str | None = None
        self.out: list[Triple] = []

    # token helpers
    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, tok: _Tok, message: str) -> ParseError:
        return self.lexer.error(tok.pos, message)

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text or tok.kind not in ("punct", "implies"):
            raise self.error(tok, f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "implies") and tok.text == text

    # grammar
    def document(self) -> Document:
        while self.peek().kind != "eof":
            self.statement()
        return Document(self.prefixes, self.statements)

    def statement(self) -> None:
        tok = self.peek()
        if tok.kind == "directive":
            self.directive()
            return
        if tok.kind == "word" and tok.text.upper() == "PREFIX":
            self.next()
            self.prefix_decl(tok)
            return
        if self.at("{"):
            self.rule()
            return
        self.out = []
        self.triples()
        self.expect(".")
        self.statements.extend(self.out)

    def directive(self) -> None:
        tok = self.next()
        if tok.text != "@prefix":
            raise self.error(tok, f"unsupported directive {tok.text}")
        self.prefix_decl(tok)
        self.expect(".")

    def prefix_decl(self, at: _Tok) -> None:
        name = self.next()
        if name.kind != "pname" or not name.text.endswith(":") or name.text.count(":") != 1:
            raise self.error(name, "expected a prefix name like 'ex:'")
        iri_tok = self.next()
        if iri_tok.kind != "iri":
            raise self.error(iri_tok, "expected <namespace IRI>")
        ns = self.iri_value(iri_tok)
        self.prefixes[name.text[:-1]] = ns

    def iri_value(self, tok: _Tok) -> str:
        value = _unescape(tok.text[1:-1], self.lexer, tok.pos)
        if ":" not in value:
            raise self.error(tok, f"relative IRI <{value}> (no base IRI support)")
        return value

    def rule(self) -> None:
        start = self.peek()
        premise = self.formula("premise")
        if not self.at("=>"):
            if self.peek().text == "<=":
                raise self.error(self.peek(), "backward rules are not supported")
            raise self.error(self.peek(), "a formula must be followed by '=>'")
        self.next()
        conclusion = self.formula("conclusion")
        self.expect(".")
        if not premise:
            raise self.error(start, "rule premise is empty")
        if not conclusion:
            raise self.error(start, "rule conclusion is empty")
        rule = Rule(tuple(premise), tuple(conclusion))
        bound = rule.variables()
        for t in conclusion:
            for x in t:
                free = variables_of(x) - bound
                if free:
                    names = ", ".join(sorted("?" + v.name for v in free))
                    raise self.error(start, f"conclusion variable {names} does not occur in the premise")
        self.statements.append(rule)

    def formula(self, scope: str) -> list[Triple]:
        tok = self.expect("{")
        if self.scope is not None:
            raise self.error(tok, "nested formulae are not supported")
        self.scope = scope
        self.out = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.error(self.peek(), "unterminated formula")
            self.triples()
            if self.at("."):
                self.next()
            elif not self.at("}"):
                raise self.error(self.peek(), f"expected '.' or '}}', found {self.peek().text!r}")
        self.next()
        self.scope = None
        out, self.out = self.out, []
        # keep first occurrence order, drop duplicates
        return list(dict.fromkeys(out))

    def triples(self) -> None:
        tok = self.peek()
        if self.at("["):
            subject = self.anon_node()
            if self.at(".") or self.at("}"):
                return
        else:
            subject = self.term("subject")
            if self.scope is None and subject.__class__ not in (Iri, BlankNode):
                raise self.error(tok, "subject must be an IRI or blank node")
        self.predicate_object_list(subject)

    def predicate_object_list(self, subject: Term) -> None:
        while True:
            verb = self.verb()
            self.object_list(subject, verb)
            if not self.at(";"):
                return
            while self.at(";"):
                self.next()
            if self.at(".") or self.at("]") or self.at("}"):
                return

    def object_list(self, subject: Term, verb: Term) -> None:
        while True:
            obj = self.term("object")
            self.emit(subject, verb, obj)
            if not self.at(","):
                return
            self.next()

    def emit(self, s: Term, p: Term, o: Term) -> None:
        self.out.append(Triple(s, p, o))

    def verb(self) -> Term:
        tok = self.peek()
        if tok.kind == "word" and tok.text == "a":
            self.next()
            return RDF_TYPE
        term = self.term("predicate")
        if term.__class__ not in (Iri, Variable):
            raise self.error(tok, "predicate must be an IRI")
        return term

    def fresh_anon(self) -> Term:
        self.anon += 1
        if self.scope == "premise":
            return Variable(f"_anon{self.anon}")
        return BlankNode(f"anon-{self.anon}")

    def anon_node(self) -> Term:
        self.expect("[")
        node = self.fresh_anon()
        if not self.at("]"):
            self.predicate_object_list(node)
        self.expect("]")
        return node

    def term(self, position: str) -> Term:
        tok = self.peek()
        kind = tok.kind
        if kind == "iri":
            self.next()
            return Iri(self.iri_value(tok))
        if kind == "pname":
            self.next()
            return Iri(self.expand(tok))
        if kind == "blank":
            self.next()
            label = tok.text[2:]
            if self.scope == "premise":
                return Variable("_" + re.sub(r"[^A-Za-z0-9_]", "_", label))
            return BlankNode(label)
        if kind == "var":
            self.next()
            if self.scope is None:
                raise self.error(tok, "variables may only appear inside rules")
            return Variable(tok.text[1:])
        if kind in ("string", "lstring"):
            return self.literal(position)
        if kind == "number":
            self.next()
            return self.number(tok)
        if kind == "word" and tok.text in ("true", "false"):
            self.next()
            if position == "subject" and self.scope is None:
                raise self.error(tok, "literal in subject position")
            return Literal(tok.text, XSD_BOOLEAN)
        if kind == "punct" and tok.text == "(":
            return self.collection(position)
        if kind == "punct" and tok.text == "[":
            if position == "predicate":
                raise self.error(tok, "predicate must be an IRI")
            return self.anon_node()
        if kind == "punct" and tok.text == "{":
            raise self.error(tok, "nested formulae are not supported")
        raise self.error(tok, f"unexpected {tok.text or 'end of input'!r}")

    def collection(self, position: str) -> ListTerm:
        tok = self.expect("(")
        if self.scope is None and position == "subject":
            raise self.error(tok, "lists in subject position are only allowed inside rules")
        items = []
        while not self.at(")"):
            if self.peek().kind == "eof":
                raise self.error(self.peek(), "unterminated list")
            items.append(self.term("object"))
        self.next()
        return ListTerm(items)

    def literal(self, position: str) -> Literal:
        tok = self.next()
        if position == "subject" and self.scope is None:
            raise self.error(tok, "literal in subject position")
        if position == "predicate":
            raise self.error(tok, "predicate must be an IRI")
        quote = 3 if tok.kind == "lstring" else 1
        lexical = _unescape(tok.text[quote:-quote], self.lexer, tok.pos)
        nxt = self.peek()
        if nxt.kind == "directive":
            raise self.error(nxt, "language-tagged literals are not supported")
        if nxt.kind == "dtype":
            self.next()
            dt_tok = self.next()
            if dt_tok.kind == "iri":
                datatype = self.iri_value(dt_tok)
            elif dt_tok.kind == "pname":
                datatype = self.expand(dt_tok)
            else:
                raise self.error(dt_tok, "expected a datatype IRI after '^^'")
            return canonical_literal(lexical, datatype)
        return Literal(lexical, XSD_STRING)

    def number(self, tok: _Tok) -> Literal:
        text = tok.text
        if "e" in text or "E" in text:
            datatype = XSD_DOUBLE
        elif "." in text:
            datatype = XSD_DECIMAL
        else:
            datatype = XSD_INTEGER
        return canonical_literal(text, datatype)

    def expand(self, tok: _Tok) -> str:
        prefix, _, local = tok.text.partition(":")
        ns = self.prefixes.get(prefix)
        if ns is None:
            line, col = self.lexer.where(tok.pos)
            raise UnknownPrefix(prefix, line, col)
        return ns + local


def parse(text: str) -> Document:
    """Parse N3 source text into a :class:`Document`."""
    return _Parser(text).document()


def parse_file(path) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# serializer

_LOCAL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")
_BARE_NUMBER = {
    XSD_INTEGER: re.compile(r"[+-]?\d+\Z"),
    XSD_DECIMAL: re.compile(r"[+-]?\d*\.\d+\Z"),
    XSD_DOUBLE: re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)[eE][+-]?\d+\Z"),
}
_PREFIX_RE = re.compile(r"(?:[A-Za-z](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?\Z")
_BLANK_RE = re.compile(_PN_LOCAL + r"\Z")
_VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _iriref(value: str) -> str:
    escaped = "".join(c if c > " " and c not in '<>"{}|^`\\' else f"\\u{ord(c):04X}" for c in value)
    return f"<{escaped}>"


class _Writer:
    def __init__(self, prefixes: dict[str, str]):
        # longest namespace first so the most specific prefix wins
        self.prefixes = sorted(
            ((p, ns) for p, ns in prefixes.items() if _PREFIX_RE.match(p)),
            key=lambda item: (-len(item[1]), item[0]),
        )

    def iri(self, value: str) -> str:
        for prefix, ns in self.prefixes:
            if value.startswith(ns) and _LOCAL_RE.match(value[len(ns):]):
                return f"{prefix}:{value[len(ns):]}"
        return _iriref(value)

    def term(self, t: Term) -> str:
        cls = t.__class__
        if cls is Iri:
            return self.iri(t.value)
        if cls is Literal:
            return self.literal(t)
        if cls is BlankNode:
            if not _BLANK_RE.match(t.label):
                raise ValueError(f"blank node label cannot be written: {t.label!r}")
            return f"_:{t.label}"
        if cls is Variable:
            if not _VAR_RE.match(t.name):
                raise ValueError(f"variable name cannot be written: {t.name!r}")
            return f"?{t.name}"
        if cls is ListTerm:
            if not t.items:
                return "()"
            return "( " + " ".join(self.term(x) for x in t.items) + " )"
        raise TypeError(f"not a term: {t!r}")

    def literal(self, lit: Literal) -> str:
        dt = lit.datatype
        if dt == XSD_STRING:
            return f'"{escape_string(lit.lexical)}"'
        if dt == XSD_BOOLEAN and lit.lexical in ("true", "false"):
            return lit.lexical
        bare = _BARE_NUMBER.get(dt)
        if bare is not None and bare.match(lit.lexical) and canonical_literal(lit.lexical, dt) == lit:
            return lit.lexical
        return f'"{escape_string(lit.lexical)}"^^{self.iri(dt)}'

    def triple(self, t: Triple) -> str:
        p = "a" if t.p == RDF_TYPE else self.term(t.p)
        return f"{self.term(t.s)} {p} {self.term(t.o)} ."


def serialize(doc: Document) -> str:
    """Canonical text for ``doc``: sorted prefixes, then sorted triples, then sorted rules."""
    w = _Writer(doc.prefixes)
    lines = [f"@prefix {p}: {_iriref(ns)} ." for p, ns in sorted(doc.prefixes.items()) if _PREFIX_RE.match(p)]
    triples = sorted(set(doc.triples), key=Triple.key)
    rules = sorted(set(doc.rules), key=Rule.key)
    if lines and (triples or rules):
        lines.append("")
    lines.extend(w.triple(t) for t in triples)
    for rule in rules:
        if lines and lines[-1] != "":
            lines.append("")
        lines.append("{")
        lines.extend("    " + w.triple(t) for t in sorted(rule.premise, key=Triple.key))
        lines.append("} => {")
        lines.extend("    " + w.triple(t) for t in sorted(rule.conclusion, key=Triple.key))
        lines.append("} .")
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_triples(triples: Iterable[Triple], prefixes: dict[str, str] | None = None) -> str:
    return serialize(Document(dict(prefixes or {}), list(triples)))


def format_term(t: Term, prefixes: dict[str, str] | None = None) -> str:
    return _Writer(prefixes or {}).term(t)


def sort_statements(statements: Iterable[Statement]) -> list[Statement]:
    triples = [s for s in statements if isinstance(s, Triple)]
    rules = [s for s in statements if isinstance(s, Rule)]
    return sorted(triples, key=Triple.key) + sorted(rules, key=Rule.key)


__all__ = [
    "Document",
    "Rule",
    "Statement",
    "format_term",
    "parse",
    "parse_file",
    "serialize",
    "serialize_triples",
    "term_key",
]
