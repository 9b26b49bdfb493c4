"""Translation of application-level QoS constraints into SDN configuration.

There are two independent ways to run a translation:

* :func:`translate_all` evaluates every target specification directly in
  Python and writes the network-level result;
* :func:`translate_rules` loads the N3 rule packs and runs the forward
  chainer to a fixpoint.

Both read the same translation definitions (the facts shipped in each pack)
and must produce isomorphic network subgraphs, which
:func:`compare_paths` checks.

Pack layout: ``calculation-core`` holds the generic calculation machinery,
each other pack declares which device properties and constraint parameters
it reads, the ``qos:translatesTo`` targets of its constraint class, and the
rule that assembles flow filters.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Union

from .engine import (
    DEFAULT_BUILTINS,
    MATH,
    FixpointReport,
    RuleSet,
    conclusion_variables,
    fixpoint,
    rule_id,
    skolem_node,
)
from .errors import RuleError, UnknownPack, UnresolvedReference
from .n3 import Document, parse
from .store import Store
from .terms import (
    RDF_TYPE,
    BlankNode,
    Iri,
    ListTerm,
    Literal,
    Term,
    Triple,
    isomorphic,
    term_key,
)
from .vocab import QOS, RCP, SDN, SDN_NS

TGT_NS = "https://sdnqos.example/ns/target#"

CORE_PACK = "calculation-core"
TRANSLATION_PACKS = ("camera-framerate", "audio-bitrate", "qcc", "timeliness")
PACKS = (CORE_PACK,) + TRANSLATION_PACKS

OPERATORS = {
    QOS.productOf: DEFAULT_BUILTINS[Iri(MATH + "product")],
    QOS.sumOf: DEFAULT_BUILTINS[Iri(MATH + "sum")],
    QOS.differenceOf: DEFAULT_BUILTINS[Iri(MATH + "difference")],
    QOS.quotientOf: DEFAULT_BUILTINS[Iri(MATH + "quotient")],
}
_TRUE = Literal("true", "http://www.w3.org/2001/XMLSchema#boolean")
_PROVENANCE = (QOS.derivedFrom, QOS.translation)


# ---------------------------------------------------------------------------
# calculations


@dataclass(frozen=True)
class DevicePropertyRef:
    property: Iri


@dataclass(frozen=True)
class ParameterRef:
    parameter: Iri


Argument = Union[Literal, DevicePropertyRef, ParameterRef, "CalculationNode"]


@dataclass(frozen=True)
class CalculationNode:
    """An operator applied to an ordered argument list.

    ``resolved_value`` is only set on nodes returned by :func:`resolve`, and
    then on every nested node as well.
    """

    operator: Iri  # or the local name, e.g. "productOf"
    arguments: tuple
    resolved_value: Literal | None = None

    def __post_init__(self):
        if isinstance(self.operator, str):
            object.__setattr__(self, "operator", QOS[self.operator])
        if self.operator not in OPERATORS:
            raise ValueError(f"unknown operator {self.operator}")

    def references(self) -> list:
        """Device property and parameter references, depth first."""
        out = []
        for a in self.arguments:
            if isinstance(a, CalculationNode):
                out.extend(a.references())
            elif isinstance(a, (DevicePropertyRef, ParameterRef)):
                out.append(a)
        return out


def _as_literal(value) -> Literal:
    return value if isinstance(value, Literal) else Literal.of(value)


def _lookup(ref, profile: Mapping, params: Mapping):
    if isinstance(ref, DevicePropertyRef):
        return profile.get(ref.property)
    return params.get(ref.parameter)


def resolve(calc: CalculationNode, profile: Mapping, params: Mapping) -> CalculationNode:
    """Evaluate ``calc`` bottom up and return it with every value filled in.

    ``profile`` maps device properties and ``params`` constraint parameters
    to literals (plain Python numbers are accepted too). Arithmetic is exact
    for exact inputs.
    """
    missing = [r for r in calc.references() if _lookup(r, profile, params) is None]
    if missing:
        names = [r.property if isinstance(r, DevicePropertyRef) else r.parameter for r in missing]
        raise UnresolvedReference(names[0], missing=names)
    return _resolve(calc, profile, params)


def _resolve(calc: CalculationNode, profile: Mapping, params: Mapping) -> CalculationNode:
    args = []
    values = []
    for a in calc.arguments:
        if isinstance(a, CalculationNode):
            a = _resolve(a, profile, params)
            values.append(a.resolved_value)
        elif isinstance(a, (DevicePropertyRef, ParameterRef)):
            values.append(_as_literal(_lookup(a, profile, params)))
        else:
            values.append(_as_literal(a))
        args.append(a)
    (value,) = OPERATORS[calc.operator].fn(ListTerm(values), None)
    return replace(calc, arguments=tuple(args), resolved_value=value)


def resolve_calculation(calc: CalculationNode, profile: Mapping, params: Mapping) -> Literal:
    """The canonical numeric literal ``calc`` evaluates to."""
    return resolve(calc, profile, params).resolved_value


def read_calculation(store: Store, node: Term) -> CalculationNode:
    """Rebuild the calculation rooted at ``node`` from its triples."""
    found = [(op, args) for op in OPERATORS for args in store.objects(node, op)]
    if len(found) != 1 or not isinstance(found[0][1], ListTerm):
        raise RuleError(f"{node.n3()} is not a calculation node")
    op, items = found[0]
    args = []
    for a in items:
        if isinstance(a, Literal):
            args.append(a)
        elif any(store.objects(a, o) for o in OPERATORS):
            args.append(read_calculation(store, a))
        elif store.has_type(a, QOS.DeviceProperty):
            args.append(DevicePropertyRef(a))
        elif store.has_type(a, QOS.Parameter):
            args.append(ParameterRef(a))
        else:
            raise RuleError(f"calculation argument {a.n3()} is neither a literal, a calculation, "
                            "a qos:DeviceProperty nor a qos:Parameter")
    return CalculationNode(op, tuple(args))


# ---------------------------------------------------------------------------
# translation targets


@dataclass(frozen=True)
class TranslationTargetSpec:
    """How one application constraint class yields one network constraint.

    Flow filters built from a spec match IP traffic from the interaction's
    source device address to its destination device address.
    """

    iri: Iri
    source_class: Iri
    produces: Iri
    value_property: Iri
    unit: Iri
    value: CalculationNode | ParameterRef
    optional: bool = False
    match: Iri = SDN.IpMatch

    def evaluate(self, profile: Mapping, params: Mapping) -> Literal:
        if isinstance(self.value, ParameterRef):
            v = params.get(self.value.parameter)
            if v is None:
                raise UnresolvedReference(self.value.parameter)
            return _as_literal(v)
        return resolve_calculation(self.value, profile, params)


def _required(store: Store, s: Term, p: Iri) -> Term:
    v = store.value(s, p)
    if v is None:
        raise RuleError(f"translation target {s.n3()} has no {p.n3()}")
    return v


def target_specs(store: Store, pairs: Iterable[tuple[Iri, Iri]] | None = None) -> list[TranslationTargetSpec]:
    """Translation target specifications stated in ``store``.

    ``pairs`` restricts the result to given (source class, target) pairs.
    """
    if pairs is None:
        pairs = [(t.s, t.o) for t in store.match(None, QOS.translatesTo, None)]
    specs = []
    for cls, t in sorted(set(pairs), key=lambda x: (term_key(x[0]), term_key(x[1]))):
        value = _required(store, t, QOS.value)
        if any(store.objects(value, op) for op in OPERATORS):
            value = read_calculation(store, value)
        elif store.has_type(value, QOS.Parameter):
            value = ParameterRef(value)
        else:
            raise RuleError(f"value of {t.n3()} is neither a calculation nor a qos:Parameter")
        specs.append(TranslationTargetSpec(
            iri=t,
            source_class=cls,
            produces=_required(store, t, QOS.produces),
            value_property=_required(store, t, QOS.valueProperty),
            unit=_required(store, t, QOS.unit),
            value=value,
            optional=_TRUE in store.objects(t, QOS.optional),
        ))
    return specs


# ---------------------------------------------------------------------------
# packs


def _pack_names(packs: Iterable[str] | None) -> list[str]:
    names = list(TRANSLATION_PACKS if packs is None else packs)
    for n in names:
        if n not in PACKS:
            raise UnknownPack(n)
    return names


@lru_cache(maxsize=None)
def pack_text(name: str) -> str:
    if name not in PACKS:
        raise UnknownPack(name)
    return resources.files("sdnqos").joinpath("packs").joinpath(f"{name}.n3").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def pack_document(name: str) -> Document:
    return parse(pack_text(name))


def rule_packs(names: Iterable[str] | None = None) -> RuleSet:
    """calculation-core followed by the named packs (default: all of them)."""
    rs = RuleSet()
    for name in [CORE_PACK] + [n for n in _pack_names(names) if n != CORE_PACK]:
        rs.extend(pack_document(name), scope=name)
    return rs


def rule_pack(name: str) -> RuleSet:
    """The rule set for one pack, including the calculation-core machinery it relies on."""
    return rule_packs([name])


def _pack_pairs(ruleset: RuleSet) -> list[tuple[Iri, Iri]]:
    return [(t.s, t.o) for t in ruleset.facts if t.p == QOS.translatesTo]


# ---------------------------------------------------------------------------
# direct path


@dataclass(frozen=True)
class Skipped:
    constraint: Term
    reason: str


@dataclass
class TranslationReport:
    constraints: int = 0
    filters: int = 0
    skipped: list[Skipped] = field(default_factory=list)
    added: int = 0

    def __str__(self) -> str:
        lines = [f"network constraints: {self.constraints}", f"flow filters: {self.filters}",
                 f"triples added: {self.added}"]
        lines += [f"skipped {s.constraint.n3()}: {s.reason}" for s in self.skipped]
        return "\n".join(lines)


def _blank(kind: str, *parts: Term) -> BlankNode:
    text = kind + "|" + "|".join(p.n3() for p in parts)
    return BlankNode("d_" + hashlib.sha1(text.encode()).hexdigest()[:20])


class _Naming:
    """Names direct-path nodes exactly as the mirrored pack rule would.

    The application rule of calculation-core and each pack's flow-filter
    rule are located by their conclusions. When a rule's conclusion
    variables are all known to the direct path, its skolem function is
    used, so both paths write term-identical triples and running one after
    the other adds nothing. Otherwise a private digest label is used.
    """

    def __init__(self, ruleset: RuleSet):
        self.rules: dict = {}
        for rule in ruleset.rules:
            concl = rule.conclusion
            if any(t.p == RDF_TYPE and t.o == SDN.Application and isinstance(t.s, BlankNode) for t in concl):
                self.rules.setdefault("app", rule)
            if any(t.p == SDN.hasFlowFilter for t in concl):
                for t in rule.premise:
                    if t.p == RDF_TYPE and isinstance(t.o, Iri):
                        self.rules.setdefault(("filter", t.o), rule)
        self._cache: dict = {}

    def _info(self, key):
        if key not in self._cache:
            rule = self.rules.get(key)
            self._cache[key] = None if rule is None else (
                rule_id(rule), conclusion_variables(rule),
                {x.label for t in rule.conclusion for x in t if isinstance(x, BlankNode)})
        return self._cache[key]

    def node(self, key, label: str, binding: dict[str, Term]) -> BlankNode:
        info = self._info(key)
        if info is not None:
            rid, cvars, labels = info
            if label in labels and all(v.name in binding for v in cvars):
                return skolem_node(rid, [binding[v.name] for v in cvars], label)
        return _blank(label, *(binding[k] for k in sorted(binding)))


def _literal_map(store: Store, node: Term) -> dict[Iri, Literal]:
    """Newest literal per property of ``node``."""
    out = {}
    for p in store.predicates(node):
        v = store.value(node, p, Literal)
        if v is not None:
            out[p] = v
    return out


def _recipes_of(store: Store, c: Term) -> list[Term]:
    return sorted({r for i in store.subjects(RCP.hasConstraint, c) for r in store.subjects(RCP.hasInteraction, i)},
                  key=term_key)


def translate_all(store: Store, packs: Iterable[str] | None = None) -> TranslationReport:
    """Translate every endpoint-complete application constraint, evaluating directly.

    Constraints without both ``rcp:interactionFrom`` and ``rcp:interactionTo``
    are reported as skipped. The run is one mutation batch; re-running it
    adds nothing.
    """
    ruleset = rule_packs(packs)
    report = TranslationReport()
    out: set[Triple] = set()
    with store.transaction():
        store.insert_batch(ruleset.facts)
        specs = target_specs(store, _pack_pairs(ruleset))
        naming = _Naming(ruleset)
        skipped: dict[Term, str] = {}
        requirements: set = set()
        filters: set = set()
        for spec in specs:
            for c in sorted(store.subjects(RDF_TYPE, spec.source_class), key=term_key):
                srcs = store.objects(c, RCP.interactionFrom)
                dsts = store.objects(c, RCP.interactionTo)
                if not srcs or not dsts:
                    skipped.setdefault(c, "no interactionFrom/interactionTo (recipe still abstract)")
                    continue
                recipes = _recipes_of(store, c)
                if not recipes:
                    skipped.setdefault(c, "not attached to an interaction of any recipe")
                    continue
                params = _literal_map(store, c)
                for src in srcs:
                    try:
                        value = spec.evaluate(_literal_map(store, src), params)
                    except UnresolvedReference as exc:
                        if spec.optional:
                            report.skipped.append(Skipped(c, f"optional target {spec.iri.n3()} unresolved: {exc}"))
                            continue
                        raise UnresolvedReference(exc.ref, c, exc.missing) from None
                    built = _emit(store, out, naming, spec, c, src, dsts, recipes, value)
                    requirements |= built[0]
                    filters |= built[1]
                    if not built[1]:
                        skipped.setdefault(c, "endpoints lack an address or interface")
        report.skipped.extend(Skipped(c, why) for c, why in sorted(skipped.items(), key=lambda x: term_key(x[0])))
        report.constraints = len(requirements)
        report.filters = len(filters)
        report.added = store.insert_batch(sorted(out, key=Triple.key))
    return report


def _emit(store: Store, out: set, naming: _Naming, spec: TranslationTargetSpec, c: Term, src: Term, dsts: list,
          recipes: list, value: Literal) -> tuple[set, set]:
    requirements, filters = set(), set()
    for r in recipes:
        for iface in store.objects(src, SDN.hasInterface):
            names = {"r": r, "src": src, "if": iface}
            app = naming.node("app", "app", names)
            vp = naming.node("app", "vp", names)
            out.update((
                Triple(r, RDF_TYPE, SDN.Tenant),
                Triple(app, RDF_TYPE, SDN.Application),
                Triple(app, SDN.tenant, r),
                Triple(app, SDN.component, src),
                Triple(app, SDN.interface, iface),
                Triple(app, SDN.validity, vp),
                Triple(vp, RDF_TYPE, SDN.ValidityPeriod),
            ))
            out.update(Triple(vp, SDN.start, s) for s in store.objects(r, RCP.validFrom))
            out.update(Triple(vp, SDN.end, e) for e in store.objects(r, RCP.validUntil))
            for sip in store.objects(src, RCP.deviceAddress):
                for dst in dsts:
                    for dip in store.objects(dst, RCP.deviceAddress):
                        for dif in store.objects(dst, SDN.hasInterface):
                            names = {"app": app, "c": c, "t": spec.iri, "dif": dif, "sip": sip, "dip": dip,
                                     "cls": spec.produces, "vp": spec.value_property, "v": value, "u": spec.unit}
                            key = ("filter", spec.source_class)
                            ff, m, q = (naming.node(key, label, names) for label in ("ff", "m", "q"))
                            out.update((
                                Triple(app, SDN.hasFlowFilter, ff),
                                Triple(ff, RDF_TYPE, SDN.FlowFilter),
                                Triple(ff, QOS.derivedFrom, c),
                                Triple(ff, QOS.translation, spec.iri),
                                Triple(ff, SDN.destination, dif),
                                Triple(ff, SDN.hasCondition, m),
                                Triple(ff, SDN.hasRequirement, q),
                                Triple(m, RDF_TYPE, spec.match),
                                Triple(m, SDN.srcIp, sip),
                                Triple(m, SDN.dstIp, dip),
                                Triple(q, RDF_TYPE, spec.produces),
                                Triple(q, spec.value_property, value),
                                Triple(q, SDN.unit, spec.unit),
                            ))
                            requirements.add(q)
                            filters.add(ff)
    return requirements, filters


# ---------------------------------------------------------------------------
# rule path and comparison


def translate_rules(store: Store, packs: Iterable[str] | None = None, **kwargs) -> FixpointReport:
    """Translate by running the forward chainer over the rule packs."""
    return fixpoint(store, rule_packs(packs), **kwargs)


def network_subgraph(store: Store) -> set[Triple]:
    """SDN-level triples reachable from ``sdn:Application`` nodes.

    Follows ``sdn:`` predicates plus the ``qos:derivedFrom``/``qos:translation``
    provenance links, and keeps ``rdf:type`` triples naming ``sdn:`` classes.
    """
    out: set[Triple] = set()
    seen: set[Term] = set()
    todo = list(store.subjects(RDF_TYPE, SDN.Application))
    while todo:
        node = todo.pop()
        if node in seen:
            continue
        seen.add(node)
        for t in store.match(node, None, None):
            if t.p == RDF_TYPE:
                keep = isinstance(t.o, Iri) and t.o.value.startswith(SDN_NS)
            else:
                keep = t.p.value.startswith(SDN_NS) or t.p in _PROVENANCE
            if keep:
                out.add(t)
                if t.p != RDF_TYPE and isinstance(t.o, (Iri, BlankNode)):
                    todo.append(t.o)
    return out


@dataclass(frozen=True)
class DualPathResult:
    equivalent: bool
    direct: frozenset
    rules: frozenset
    report: TranslationReport
    fixpoint: FixpointReport


def compare_paths(store: Store, packs: Iterable[str] | None = None) -> DualPathResult:
    """Run both translation paths on copies of ``store`` and compare the results."""
    packs = None if packs is None else list(packs)
    a, b = store.copy(), store.copy()
    report = translate_all(a, packs)
    fp = translate_rules(b, packs)
    direct, rules = network_subgraph(a), network_subgraph(b)
    return DualPathResult(isomorphic(direct, rules), frozenset(direct), frozenset(rules), report, fp)
