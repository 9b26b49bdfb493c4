"""RDF terms, triples, exact numerics and graph isomorphism.

Terms are small immutable value objects. Equality is structural and
class-sensitive, so ``Iri("x") != BlankNode("x")``. A total order over
terms is given by :func:`term_key`: IRIs sort before blank nodes, blank
nodes before literals, literals before lists and lists before variables.
"""

from __future__ import annotations

import math
from collections import defaultdict
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Union

from .errors import NonNumericLiteral

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
OWL = "http://www.w3.org/2002/07/owl#"

XSD_STRING = XSD + "string"
XSD_BOOLEAN = XSD + "boolean"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_DOUBLE = XSD + "double"
XSD_FLOAT = XSD + "float"
OWL_RATIONAL = OWL + "rational"

_INTEGER_TYPES = frozenset(
    XSD + name
    for name in (
        "integer", "int", "long", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "nonPositiveInteger", "negativeInteger",
        "unsignedLong", "unsignedInt", "unsignedShort", "unsignedByte",
    )
)
_DOUBLE_TYPES = frozenset((XSD_DOUBLE, XSD_FLOAT))
NUMERIC_TYPES = _INTEGER_TYPES | _DOUBLE_TYPES | {XSD_DECIMAL, OWL_RATIONAL}

# ExactInteger, ExactDecimal, Double
Number = Union[int, Fraction, float]


class Term:
    __slots__ = ()
    ground = True

    def key(self) -> tuple:
        raise NotImplementedError

    def __lt__(self, other: Term) -> bool:
        return self.key() < other.key()

    def __le__(self, other: Term) -> bool:
        return self.key() <= other.key()

    def __gt__(self, other: Term) -> bool:
        return self.key() > other.key()

    def __ge__(self, other: Term) -> bool:
        return self.key() >= other.key()


class Iri(Term):
    __slots__ = ("value", "_hash")

    def __init__(self, value: str):
        self.value = value
        self._hash = hash(("I", value))

    def __eq__(self, other):
        return other.__class__ is Iri and other.value == self.value

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Iri({self.value!r})"

    def key(self):
        return (0, self.value)

    def n3(self) -> str:
        return f"<{self.value}>"


class BlankNode(Term):
    __slots__ = ("label", "_hash")

    def __init__(self, label: str):
        self.label = label
        self._hash = hash(("B", label))

    def __eq__(self, other):
        return other.__class__ is BlankNode and other.label == self.label

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"BlankNode({self.label!r})"

    def key(self):
        return (1, self.label)

    def n3(self) -> str:
        return f"_:{self.label}"


class Literal(Term):
    __slots__ = ("lexical", "datatype", "_hash")

    def __init__(self, lexical: str, datatype: str = XSD_STRING):
        self.lexical = lexical
        self.datatype = datatype
        self._hash = hash(("L", lexical, datatype))

    def __eq__(self, other):
        return (
            other.__class__ is Literal
            and other.lexical == self.lexical
            and other.datatype == self.datatype
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Literal({self.lexical!r}, {self.datatype!r})"

    def key(self):
        return (2, self.lexical, self.datatype)

    @property
    def is_numeric(self) -> bool:
        return self.datatype in NUMERIC_TYPES

    def n3(self) -> str:
        return f'"{escape_string(self.lexical)}"^^<{self.datatype}>'

    @classmethod
    def of(cls, value) -> Literal:
        """Build a literal from a Python str, bool, int, Fraction or float."""
        if isinstance(value, bool):
            return cls("true" if value else "false", XSD_BOOLEAN)
        if isinstance(value, str):
            return cls(value, XSD_STRING)
        return format_numeric(value)


class ListTerm(Term):
    __slots__ = ("items", "ground", "_hash")

    def __init__(self, items: Iterable[Term] = ()):
        self.items = tuple(items)
        self.ground = all(t.ground for t in self.items)
        self._hash = hash(("T", self.items))

    def __eq__(self, other):
        return other.__class__ is ListTerm and other.items == self.items

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __repr__(self):
        return f"ListTerm({list(self.items)!r})"

    def key(self):
        return (3, tuple(t.key() for t in self.items))

    def n3(self) -> str:
        return "(" + "".join(" " + t.n3() for t in self.items) + " )"


class Variable(Term):
    __slots__ = ("name", "_hash")
    ground = False

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))

    def __eq__(self, other):
        return other.__class__ is Variable and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Variable({self.name!r})"

    def key(self):
        return (4, self.name)

    def n3(self) -> str:
        return f"?{self.name}"


class Triple(NamedTuple):
    s: Term
    p: Term
    o: Term

    def key(self) -> tuple:
        return (self.s.key(), self.p.key(), self.o.key())

    @property
    def ground(self) -> bool:
        return self.s.ground and self.p.ground and self.o.ground

    def n3(self) -> str:
        return f"{self.s.n3()} {self.p.n3()} {self.o.n3()} ."


RDF_TYPE = Iri(RDF_NS + "type")


def term_key(t: Term) -> tuple:
    return t.key()


def term_compare(a: Term, b: Term) -> int:
    """Three-way comparison under the canonical term order."""
    ka, kb = a.key(), b.key()
    return (ka > kb) - (ka < kb)


def triple_sort(triples: Iterable[Triple]) -> list[Triple]:
    return sorted(triples, key=Triple.key)


def escape_string(s: str) -> str:
    out = []
    for ch in s:
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
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


# ---------------------------------------------------------------------------
# numerics


def parse_numeric(lit: Literal) -> Number:
    """Integer literals give ``int``, decimals ``Fraction`` and doubles ``float``."""
    if not isinstance(lit, Literal) or lit.datatype not in NUMERIC_TYPES:
        raise NonNumericLiteral(f"not a numeric literal: {lit!r}")
    lex = lit.lexical.strip()
    try:
        if lit.datatype in _INTEGER_TYPES:
            return int(lex)
        if lit.datatype == XSD_DECIMAL:
            if not lex or any(c in lex for c in "eE/_ ") or lex.lower() in ("inf", "nan"):
                raise ValueError(lex)
            return Fraction(lex)
        if lit.datatype == OWL_RATIONAL:
            if "." in lex or "e" in lex.lower():
                raise ValueError(lex)
            return Fraction(lex)
        if lex in ("INF", "+INF"):
            return math.inf
        if lex == "-INF":
            return -math.inf
        if lex == "NaN":
            return math.nan
        if lex.lower().lstrip("+-") in ("inf", "infinity", "nan"):
            raise ValueError(lex)
        return float(lex)
    except (ValueError, ZeroDivisionError) as exc:
        raise NonNumericLiteral(f"bad lexical form {lit.lexical!r} for {lit.datatype}") from exc


def try_numeric(term: Term) -> Number | None:
    if term.__class__ is Literal and term.datatype in NUMERIC_TYPES:
        try:
            return parse_numeric(term)
        except NonNumericLiteral:
            return None
    return None


def _decimal_lexical(q: Fraction) -> str | None:
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return None
    k = max(twos, fives)
    scaled = q.numerator * 10**k // q.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled))
    if k == 0:
        return f"{sign}{digits}.0"
    digits = digits.rjust(k + 1, "0")
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def _double_lexical(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "INF" if x > 0 else "-INF"
    if x == 0:
        return "-0.0E0" if math.copysign(1.0, x) < 0 else "0.0E0"
    sign, digits, exp = Decimal(repr(x)).as_tuple()
    exponent = exp + len(digits) - 1
    digits = list(digits)
    while len(digits) > 1 and digits[-1] == 0:
        digits.pop()
    mantissa = str(digits[0]) + "." + ("".join(map(str, digits[1:])) or "0")
    return f"{'-' if sign else ''}{mantissa}E{exponent}"


def format_numeric(value: Number) -> Literal:
    """Canonical literal for a numeric value; inverse of :func:`parse_numeric`."""
    if isinstance(value, bool):
        raise NonNumericLiteral("booleans are not numeric")
    if isinstance(value, int):
        return Literal(str(value), XSD_INTEGER)
    if isinstance(value, Fraction):
        lex = _decimal_lexical(value)
        if lex is None:
            return Literal(f"{value.numerator}/{value.denominator}", OWL_RATIONAL)
        return Literal(lex, XSD_DECIMAL)
    if isinstance(value, float):
        return Literal(_double_lexical(value), XSD_DOUBLE)
    raise NonNumericLiteral(f"cannot format {value!r}")


def canonical_literal(lexical: str, datatype: str) -> Literal:
    """Normalise the lexical form of numeric literals, keeping the datatype.

    Invalid lexical forms are kept verbatim; :func:`parse_numeric` reports them.
    """
    if datatype in NUMERIC_TYPES:
        try:
            value = parse_numeric(Literal(lexical, datatype))
        except NonNumericLiteral:
            return Literal(lexical, datatype)
        if datatype in _INTEGER_TYPES:
            return Literal(str(value), datatype)
        if datatype in _DOUBLE_TYPES:
            return Literal(_double_lexical(value), datatype)
        lit = format_numeric(value)
        if datatype == OWL_RATIONAL and lit.datatype == XSD_DECIMAL:
            # owl:rational has no decimal point syntax
            return Literal(f"{value.numerator}/{value.denominator}" if value.denominator != 1
                           else str(value.numerator), OWL_RATIONAL)
        if datatype == XSD_DECIMAL and lit.datatype != XSD_DECIMAL:
            return Literal(lexical, datatype)
        return Literal(lit.lexical, datatype)
    if datatype == XSD_BOOLEAN and lexical in ("1", "0"):
        return Literal("true" if lexical == "1" else "false", datatype)
    return Literal(lexical, datatype)


# ---------------------------------------------------------------------------
# bindings


Binding = dict  # Variable -> Term


def substitute(t: Term, b: Binding) -> Term:
    cls = t.__class__
    if cls is Variable:
        return b.get(t, t)
    if cls is ListTerm and not t.ground:
        return ListTerm(substitute(x, b) for x in t.items)
    return t


def unify_into(pattern: Term, term: Term, b: Binding) -> bool:
    """Match ``pattern`` against ground ``term``, extending ``b`` in place."""
    cls = pattern.__class__
    if cls is Variable:
        bound = b.get(pattern)
        if bound is None:
            b[pattern] = term
            return True
        return bound == term
    if cls is ListTerm and not pattern.ground:
        if term.__class__ is not ListTerm or len(term.items) != len(pattern.items):
            return False
        for p, x in zip(pattern.items, term.items):
            if not unify_into(p, x, b):
                return False
        return True
    return pattern == term


def variables_of(t: Term) -> set[Variable]:
    if t.__class__ is Variable:
        return {t}
    if t.__class__ is ListTerm and not t.ground:
        out: set[Variable] = set()
        for x in t.items:
            out |= variables_of(x)
        return out
    return set()


def map_blanks(t: Term, fn: Callable[[BlankNode], Term]) -> Term:
    cls = t.__class__
    if cls is BlankNode:
        return fn(t)
    if cls is ListTerm:
        return ListTerm(map_blanks(x, fn) for x in t.items)
    return t


def blanks_of(t: Term) -> Iterable[BlankNode]:
    cls = t.__class__
    if cls is BlankNode:
        yield t
    elif cls is ListTerm:
        for x in t.items:
            yield from blanks_of(x)


# ---------------------------------------------------------------------------
# isomorphism modulo blank-node labels


def _paint(t: Term, colors: dict) -> str:
    cls = t.__class__
    if cls is BlankNode:
        return f"#{colors[t]}"
    if cls is ListTerm:
        return "(" + " ".join(_paint(x, colors) for x in t.items) + ")"
    return t.n3()


def _occurrences(t: Term, path: tuple, out: list) -> None:
    cls = t.__class__
    if cls is BlankNode:
        out.append((t, path))
    elif cls is ListTerm:
        for i, x in enumerate(t.items):
            _occurrences(x, path + (i,), out)


class _Graph:
    def __init__(self, rows: Iterable[tuple]):
        self.rows = list(set(tuple(r) for r in rows))
        self.occ: list[list] = []
        self.blanks: set[BlankNode] = set()
        for row in self.rows:
            occ: list = []
            for i, t in enumerate(row):
                _occurrences(t, (i,), occ)
            self.occ.append(occ)
            self.blanks.update(b for b, _ in occ)

    def refine(self, colors: dict) -> dict:
        sig: dict = defaultdict(list)
        for row, occ in zip(self.rows, self.occ):
            if not occ:
                continue
            shape = tuple(_paint(t, colors) for t in row)
            for b, path in occ:
                sig[b].append((path, shape))
        return {b: hash((colors[b], tuple(sorted(sig[b])))) for b in self.blanks}

    def painted(self, colors: dict) -> set:
        return {tuple(_paint(t, colors) for t in row) for row in self.rows}


def _stable(g1: _Graph, g2: _Graph, c1: dict, c2: dict) -> tuple[dict, dict]:
    while True:
        n1, n2 = g1.refine(c1), g2.refine(c2)
        before = len(set(c1.values())) + len(set(c2.values()))
        after = len(set(n1.values())) + len(set(n2.values()))
        c1, c2 = n1, n2
        if after == before:
            return c1, c2


def _histogram(colors: dict) -> dict:
    h: dict = defaultdict(int)
    for c in colors.values():
        h[c] += 1
    return h


def _search(g1: _Graph, g2: _Graph, c1: dict, c2: dict) -> bool:
    c1, c2 = _stable(g1, g2, c1, c2)
    h1, h2 = _histogram(c1), _histogram(c2)
    if h1 != h2:
        return False
    if all(n == 1 for n in h1.values()):
        return g1.painted(c1) == g2.painted(c2)
    # branch on the smallest non-singleton color class
    target = min((c for c, n in h1.items() if n > 1), key=lambda c: (h1[c], c))
    b1 = next(b for b in sorted(g1.blanks, key=term_key) if c1[b] == target)
    marker = hash(("split", target))
    d1 = dict(c1)
    d1[b1] = marker
    for b2 in sorted((b for b in g2.blanks if c2[b] == target), key=term_key):
        d2 = dict(c2)
        d2[b2] = marker
        if _search(g1, g2, d1, d2):
            return True
    return False


def isomorphic(a: Iterable[tuple], b: Iterable[tuple]) -> bool:
    """True when two sets of term tuples are equal up to blank-node relabeling."""
    g1, g2 = _Graph(a), _Graph(b)
    if len(g1.rows) != len(g2.rows) or len(g1.blanks) != len(g2.blanks):
        return False
    ground1 = {r for r, occ in zip(g1.rows, g1.occ) if not occ}
    ground2 = {r for r, occ in zip(g2.rows, g2.occ) if not occ}
    if ground1 != ground2:
        return False
    return _search(g1, g2, {x: 0 for x in g1.blanks}, {x: 0 for x in g2.blanks})
