"""Forward-chaining rule evaluation to a fixpoint.

Rules are evaluated semi-naively: after a rule has seen the whole store
once, later evaluations only consider bindings in which at least one
premise pattern matches a triple added since the rule last ran. Rules are
visited in order, each one saturated before the next, and a round repeats
until it derives nothing.

Blank nodes in a conclusion are skolemized from the rule text plus the
values of the conclusion's variables, so deriving the same conclusion
twice produces the same nodes.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .errors import BuiltinTypeError, DivisionByZero, RuleError
from .n3 import Document, Rule, serialize
from .store import Store, plan_join
from .terms import (
    BlankNode,
    Iri,
    ListTerm,
    Literal,
    Term,
    Triple,
    Variable,
    format_numeric,
    substitute,
    try_numeric,
    unify_into,
    variables_of,
)

log = logging.getLogger(__name__)

MATH = "http://www.w3.org/2000/10/swap/math#"
LIST = "http://www.w3.org/2000/10/swap/list#"
LOG = "http://www.w3.org/2000/10/swap/log#"
RDF_LIST = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#List")

DEFAULT_MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class Builtin:
    """A premise predicate computed rather than looked up.

    ``fn(subject, object)`` receives the substituted subject and object and
    returns candidate object terms; each is unified with the object pattern.
    Functional builtins only need a ground subject, tests (``both=True``)
    need both sides ground.
    """

    predicate: Iri
    fn: Callable[[Term, Term], Iterable[Term]]
    both: bool = False

    def inputs(self, s: Term, o: Term) -> set[Variable]:
        return variables_of(s) | variables_of(o) if self.both else variables_of(s)


# ---------------------------------------------------------------------------
# builtin implementations


def _numbers(pred: str, lst: Term) -> list:
    if lst.__class__ is not ListTerm:
        raise BuiltinTypeError(pred, lst, "expected a list")
    out = []
    for x in lst.items:
        v = try_numeric(x)
        if v is None:
            raise BuiltinTypeError(pred, x, "expected a numeric literal")
        out.append(v)
    return out


def _num(pred: str, t: Term):
    v = try_numeric(t)
    if v is None:
        raise BuiltinTypeError(pred, t, "expected a numeric literal")
    return v


def _divide(a, b):
    if b == 0:
        raise DivisionByZero(f"division of {a} by zero")
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    return Fraction(a) / b


def _product(s, o):
    acc = 1
    for v in _numbers(MATH + "product", s):
        acc = acc * v
    return [format_numeric(acc)]


def _sum(s, o):
    acc = 0
    for v in _numbers(MATH + "sum", s):
        acc = acc + v
    return [format_numeric(acc)]


def _difference(s, o):
    vals = _numbers(MATH + "difference", s)
    if not vals:
        raise BuiltinTypeError(MATH + "difference", s, "empty list")
    acc = vals[0]
    for v in vals[1:]:
        acc = acc - v
    return [format_numeric(acc)]


def _quotient(s, o):
    vals = _numbers(MATH + "quotient", s)
    if not vals:
        raise BuiltinTypeError(MATH + "quotient", s, "empty list")
    acc = vals[0]
    for v in vals[1:]:
        acc = _divide(acc, v)
    return [format_numeric(acc)]


def _comparison(name: str, test: Callable) -> Callable:
    def fn(s, o):
        return [o] if test(_num(MATH + name, s), _num(MATH + name, o)) else []

    return fn


def _as_list(pred: str, t: Term) -> ListTerm:
    if t.__class__ is not ListTerm:
        raise BuiltinTypeError(pred, t, "expected a list")
    return t


def _member(s, o):
    return _as_list(LIST + "member", s).items


def _append(s, o):
    out: list[Term] = []
    for part in _as_list(LIST + "append", s).items:
        out.extend(_as_list(LIST + "append", part).items)
    return [ListTerm(out)]


def _length(s, o):
    return [format_numeric(len(_as_list(LIST + "length", s).items))]


def _first(s, o):
    items = _as_list(LIST + "first", s).items
    return items[:1]


def _rest(s, o):
    items = _as_list(LIST + "rest", s).items
    return [ListTerm(items[1:])] if items else []


def _raw_type(s, o):
    if s.__class__ is Literal:
        return [Iri(LOG + "Literal")]
    if s.__class__ is ListTerm:
        return [RDF_LIST]
    return [Iri(LOG + "Other")]


DEFAULT_BUILTINS: dict[Iri, Builtin] = {
    b.predicate: b
    for b in (
        Builtin(Iri(MATH + "product"), _product),
        Builtin(Iri(MATH + "sum"), _sum),
        Builtin(Iri(MATH + "difference"), _difference),
        Builtin(Iri(MATH + "quotient"), _quotient),
        Builtin(Iri(MATH + "greaterThan"), _comparison("greaterThan", lambda a, b: a > b), both=True),
        Builtin(Iri(MATH + "lessThan"), _comparison("lessThan", lambda a, b: a < b), both=True),
        Builtin(Iri(MATH + "notGreaterThan"), _comparison("notGreaterThan", lambda a, b: a <= b), both=True),
        Builtin(Iri(MATH + "notLessThan"), _comparison("notLessThan", lambda a, b: a >= b), both=True),
        Builtin(Iri(MATH + "equalTo"), _comparison("equalTo", lambda a, b: a == b), both=True),
        Builtin(Iri(MATH + "notEqualTo"), _comparison("notEqualTo", lambda a, b: a != b), both=True),
        Builtin(Iri(LIST + "member"), _member),
        Builtin(Iri(LIST + "append"), _append),
        Builtin(Iri(LIST + "length"), _length),
        Builtin(Iri(LIST + "first"), _first),
        Builtin(Iri(LIST + "rest"), _rest),
        Builtin(Iri(LOG + "rawType"), _raw_type),
        Builtin(Iri(LOG + "equalTo"), lambda s, o: [s]),
        Builtin(Iri(LOG + "notEqualTo"), lambda s, o: [] if s == o else [o], both=True),
    )
}


# ---------------------------------------------------------------------------
# rule compilation


class _BuiltinStep:
    __slots__ = ("builtin", "s", "o")

    def __init__(self, builtin: Builtin, s: Term, o: Term):
        self.builtin = builtin
        self.s = s
        self.o = o

    def run(self, b: dict) -> Iterator[dict]:
        s = substitute(self.s, b)
        o = substitute(self.o, b)
        if not s.ground or (self.builtin.both and not o.ground):
            return  # inputs never became ground: derive nothing
        for result in self.builtin.fn(s, o):
            nb = dict(b)
            if unify_into(o, result, nb):
                yield nb


def rule_text(rule: Rule) -> str:
    return serialize(Document({}, [rule]))


def rule_id(rule: Rule) -> str:
    """Stable identifier of a rule: a digest of its canonical text."""
    return hashlib.sha1(rule_text(rule).encode()).hexdigest()[:16]


def conclusion_variables(rule: Rule) -> list[Variable]:
    """Variables of the conclusion, sorted by name; skolem nodes depend on these."""
    cvars: set[Variable] = set()
    for t in rule.conclusion:
        for x in t:
            cvars |= variables_of(x)
    return sorted(cvars, key=lambda v: v.name)


def skolem_node(rid: str, values: Sequence[Term], label: str) -> BlankNode:
    """The blank node minted for conclusion blank ``label`` of rule ``rid``.

    ``values`` are the terms bound to :func:`conclusion_variables`, in order.
    """
    base = rid + "|" + "|".join(x.n3() for x in values) + "|" + label
    return BlankNode("sk" + hashlib.sha1(base.encode()).hexdigest()[:20])


class CompiledRule:
    def __init__(self, rule: Rule, builtins: dict[Iri, Builtin], store: Store):
        self.rule = rule
        self.text = rule_text(rule)
        self.rid = rule_id(rule)
        for t in rule.conclusion:
            if t.p in builtins:
                raise RuleError(f"builtin {t.p.value} in a rule conclusion:\n{self.text}")
        self.patterns: list[tuple] = []
        self.steps: list[_BuiltinStep] = []
        for t in rule.premise:
            b = builtins.get(t.p)
            if b is None:
                self.patterns.append(tuple(t))
            else:
                self.steps.append(_BuiltinStep(b, t.s, t.o))
        self.replan(store)
        self.cvars = conclusion_variables(rule)
        self.has_blanks = any(x.__class__ is BlankNode or (x.__class__ is ListTerm and _has_blank(x))
                              for t in rule.conclusion for x in t)

    def replan(self, store: Store) -> None:
        """Choose join orders from the current index sizes of ``store``."""
        self.planned_at = len(store)
        self.full_plan = self._plan(store, self.patterns, self.steps, set())
        self.delta_plans = []
        for i, atom in enumerate(self.patterns):
            rest = self.patterns[:i] + self.patterns[i + 1:]
            bound = set().union(*(variables_of(x) for x in atom))
            self.delta_plans.append((atom, self._plan(store, rest, self.steps, bound)))

    def _plan(self, store: Store, patterns: list, steps: list, bound: set) -> list:
        bound = set(bound)
        remaining = list(patterns)
        pending = list(steps)
        plan: list = []
        while remaining or pending:
            # fully bound patterns are pure filters: apply them before builtins see the bindings
            filters = [a for a in remaining if all(variables_of(x) <= bound for x in a)]
            if filters:
                for atom in filters:
                    plan.append(atom)
                    remaining.remove(atom)
                continue
            ready = [st for st in pending if not (st.builtin.inputs(st.s, st.o) - bound)]
            if ready:
                for st in ready:
                    plan.append(st)
                    pending.remove(st)
                    bound |= variables_of(st.o)
                continue
            if not remaining:
                plan.extend(self._dead_steps(pending, bound))
                break
            atom = plan_join(store, remaining, bound)[0]
            remaining.remove(atom)
            plan.append(atom)
            for x in atom:
                bound |= variables_of(x)
        return plan

    def _dead_steps(self, pending: list, bound: set) -> list:
        """Builtins whose inputs nothing can bind; they run last and derive nothing.

        Builtins left waiting on each other's outputs form a cycle, which
        is a compilation error.
        """
        pending = list(pending)
        dead = []
        while True:
            produced = set().union(*(variables_of(st.o) for st in pending))
            stuck = [st for st in pending if (st.builtin.inputs(st.s, st.o) - bound) - produced]
            if not stuck:
                break
            for st in stuck:
                pending.remove(st)
                dead.append(st)
        if pending:
            names = sorted(v.name for st in pending for v in st.builtin.inputs(st.s, st.o) - bound)
            raise RuleError(f"builtins wait on each other ({', '.join('?' + n for n in names)}):\n{self.text}")
        log.debug("builtin inputs can never be bound; rule derives nothing:\n%s", self.text)
        return dead

    @staticmethod
    def _run(store: Store, plan: list, bindings: list[dict]) -> list[dict]:
        for step in plan:
            if step.__class__ is _BuiltinStep:
                bindings = [nb for b in bindings for nb in step.run(b)]
            else:
                bindings = [nb for b in bindings for nb in store.extend(step, b)]
            if not bindings:
                break
        return bindings

    def evaluate(self, store: Store, delta: Sequence[Triple] | None = None) -> set[Triple]:
        """Conclusion triples for all bindings (``delta=None``) or delta-driven bindings."""
        if len(store) > 1.5 * self.planned_at + 16:
            # derived predicates were empty or small when the plan was made
            self.replan(store)
        if delta is None:
            bindings = self._run(store, self.full_plan, [{}])
        else:
            by_pred: dict = {}
            for t in delta:
                by_pred.setdefault(t.p, []).append(t)
            bindings = []
            for atom, plan in self.delta_plans:
                p = atom[1]
                candidates = by_pred.get(p, ()) if p.ground else delta
                seeds = []
                for t in candidates:
                    b: dict = {}
                    if unify_into(atom[0], t.s, b) and unify_into(p, t.p, b) and unify_into(atom[2], t.o, b):
                        seeds.append(b)
                if seeds:
                    bindings.extend(self._run(store, plan, seeds))
        return self.instantiate(bindings)

    def instantiate(self, bindings: Iterable[dict]) -> set[Triple]:
        out: set[Triple] = set()
        seen: set = set()
        for b in bindings:
            proj = tuple(b[v] for v in self.cvars)
            if proj in seen:
                continue
            seen.add(proj)
            if self.has_blanks:
                minted: dict = {}

                def skolem(node: BlankNode) -> BlankNode:
                    got = minted.get(node.label)
                    if got is None:
                        got = minted[node.label] = skolem_node(self.rid, proj, node.label)
                    return got
            for t in self.rule.conclusion:
                s, p, o = (_ground(x, b, skolem if self.has_blanks else None) for x in t)
                if p.__class__ is not Iri or s.__class__ not in (Iri, BlankNode):
                    log.debug("dropping ill-formed derivation %s %s %s", s, p, o)
                    continue
                out.add(Triple(s, p, o))
        return out


def _has_blank(t: ListTerm) -> bool:
    return any(x.__class__ is BlankNode or (x.__class__ is ListTerm and _has_blank(x)) for x in t.items)


def _ground(t: Term, b: dict, skolem) -> Term:
    cls = t.__class__
    if cls is Variable:
        return b[t]
    if cls is BlankNode:
        return skolem(t)
    if cls is ListTerm and (not t.ground or (skolem is not None and _has_blank(t))):
        return ListTerm(_ground(x, b, skolem) for x in t.items)
    return t


# ---------------------------------------------------------------------------
# rule sets and fixpoint


@dataclass
class RuleSet:
    """Ordered rules, the builtins they may use, and facts asserted before evaluation."""

    rules: list[Rule] = field(default_factory=list)
    builtins: dict[Iri, Builtin] = field(default_factory=lambda: dict(DEFAULT_BUILTINS))
    facts: list[Triple] = field(default_factory=list)

    @classmethod
    def from_documents(cls, docs: Iterable[Document], scope: str = "") -> RuleSet:
        rs = cls()
        for doc in docs:
            rs.extend(doc, scope)
        return rs

    def extend(self, doc: Document, scope: str = "") -> None:
        from .terms import map_blanks

        suffix = f"_{scope}" if scope else ""
        rename = lambda node: BlankNode(node.label + suffix)  # noqa: E731
        for st in doc.statements:
            if isinstance(st, Rule):
                if st not in self.rules:
                    self.rules.append(st)
            else:
                t = Triple(*(map_blanks(x, rename) for x in st)) if suffix else st
                if t not in self.facts:
                    self.facts.append(t)

    def compile(self, store: Store) -> list[CompiledRule]:
        return [CompiledRule(r, self.builtins, store) for r in self.rules]


@dataclass(frozen=True)
class FixpointReport:
    iterations: int
    derived: int
    elapsed_ms: float
    capped: bool


def apply_rule_once(store: Store, rule: Rule, builtins: dict[Iri, Builtin] | None = None) -> set[Triple]:
    """Evaluate ``rule`` once against the whole store and insert what is new."""
    compiled = CompiledRule(rule, DEFAULT_BUILTINS if builtins is None else builtins, store)
    new = {t for t in compiled.evaluate(store) if t not in store}
    store.insert_batch(sorted(new, key=Triple.key))
    return new


def fixpoint(store: Store, ruleset: RuleSet, max_iterations: int = DEFAULT_MAX_ITERATIONS) -> FixpointReport:
    """Apply ``ruleset`` until nothing new is derived or ``max_iterations`` rounds ran.

    The whole run is one mutation batch. A builtin error rolls the store
    back and propagates.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    start = time.perf_counter()
    before = len(store)
    iterations = 0
    capped = False
    with store.transaction():
        if ruleset.facts:
            store.insert_batch(ruleset.facts)
        compiled = ruleset.compile(store)
        seen: list[int | None] = [None] * len(compiled)
        while True:
            iterations += 1
            round_new = 0
            for k, rule in enumerate(compiled):
                passes = 0
                while True:
                    position = len(store)
                    last = seen[k]
                    if last is None:
                        derived = rule.evaluate(store)
                    elif last == position:
                        break
                    else:
                        derived = rule.evaluate(store, store.triples_since(last))
                    seen[k] = position
                    new = [t for t in derived if t not in store]
                    if not new:
                        break
                    new.sort(key=Triple.key)
                    store.insert_batch(new)
                    round_new += len(new)
                    passes += 1
                    if passes >= max_iterations:
                        capped = True
                        break
                if capped:
                    break
            if capped or round_new == 0:
                break
            if iterations >= max_iterations:
                capped = True
                break
    elapsed = (time.perf_counter() - start) * 1000.0
    if capped:
        log.warning("fixpoint hit the iteration cap (%d)", max_iterations)
    return FixpointReport(iterations, len(store) - before, elapsed, capped)
