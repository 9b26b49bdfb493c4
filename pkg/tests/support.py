"""Shared helpers for the test suite: fixture loading, generators and oracles."""

from __future__ import annotations

import random
from fractions import Fraction
from importlib import resources
from pathlib import Path

from hypothesis import strategies as st

from sdnqos.n3 import Document, Rule, parse
from sdnqos.store import Store
from sdnqos.terms import (
    XSD_BOOLEAN,
    XSD_STRING,
    BlankNode,
    Iri,
    ListTerm,
    Literal,
    Triple,
    Variable,
    canonical_literal,
    isomorphic,
    unify_into,
)

ACCEPTANCE_LINES: list[tuple[int, str]] = []
FIXTURES = Path(str(resources.files("sdnqos").joinpath("fixtures")))
FIXTURE_NAMES = ("camera", "audio", "qcc", "timeliness")
EX = "https://sdnqos.example/data/"


def fixture_text(name: str) -> str:
    return (FIXTURES / f"{name}.n3").read_text(encoding="utf-8")


def fixture_store(name: str) -> Store:
    store = Store()
    store.load_document(parse(fixture_text(name)))
    return store


def ex(name: str) -> Iri:
    return Iri(EX + name)


# ---------------------------------------------------------------------------
# random documents

NS = "http://ex.org/"
_LOCALS = ("a", "b", "c", "knows", "x-1", "p.q", "_u", "Z9")
_ODD_IRIS = ("http://ex.org/with space", "urn:isbn:123", "http://other.org/#frag", "http://ex.org/a/b?c=d")
_DATATYPES = ("http://ex.org/dt", "http://www.w3.org/2001/XMLSchema#date")

iris = st.one_of(st.sampled_from(_LOCALS).map(lambda s: Iri(NS + s)), st.sampled_from(_ODD_IRIS).map(Iri))
blanks = st.sampled_from(("b0", "b1", "b2", "node-3")).map(BlankNode)
variables = st.sampled_from(("x", "y", "z", "w")).map(Variable)
_text = st.text(max_size=12)

literals = st.one_of(
    _text.map(lambda s: Literal(s, XSD_STRING)),
    st.integers(-10**30, 10**30).map(Literal.of),
    st.builds(lambda n, k: Literal.of(Fraction(n, 10**k)), st.integers(-10**9, 10**9), st.integers(0, 6)),
    st.floats(allow_nan=True, allow_infinity=True).map(Literal.of),
    st.booleans().map(lambda b: Literal("true" if b else "false", XSD_BOOLEAN)),
    st.builds(lambda s, dt: canonical_literal(s, dt), _text, st.sampled_from(_DATATYPES)),
    st.builds(lambda n, d: canonical_literal(f"{n}/{d}", "http://www.w3.org/2002/07/owl#rational"),
              st.integers(-99, 99), st.integers(1, 12)),
)


def _lists(leaf):
    return st.recursive(leaf, lambda inner: st.lists(inner, max_size=3).map(ListTerm), max_leaves=6)


data_objects = _lists(st.one_of(iris, blanks, literals))


@st.composite
def data_triples(draw):
    return Triple(draw(st.one_of(iris, blanks)), draw(iris), draw(data_objects))


@st.composite
def rules(draw):
    premise = draw(st.lists(
        st.builds(Triple, st.one_of(variables, iris), st.one_of(iris, variables),
                  _lists(st.one_of(variables, iris, literals))),
        min_size=1, max_size=3))
    bound = sorted({v for t in premise for x in t for v in _vars(x)}, key=lambda v: v.name)
    concl_terms = st.one_of(iris, literals, blanks, *( [st.sampled_from(bound)] if bound else []))
    conclusion = draw(st.lists(
        st.builds(Triple, st.one_of(iris, blanks, *([st.sampled_from(bound)] if bound else [])), iris,
                  _lists(concl_terms)),
        min_size=1, max_size=3))
    return Rule(tuple(dict.fromkeys(premise)), tuple(dict.fromkeys(conclusion)))


def _vars(t):
    if isinstance(t, Variable):
        yield t
    elif isinstance(t, ListTerm):
        for x in t.items:
            yield from _vars(x)


@st.composite
def documents(draw):
    prefixes = draw(st.dictionaries(st.sampled_from(("ex", "o", "x2")),
                                    st.sampled_from((NS, "http://other.org/#", "urn:isbn:")), max_size=3))
    statements = draw(st.lists(st.one_of(data_triples(), rules()), max_size=8))
    return Document(prefixes, statements)


# ---------------------------------------------------------------------------
# document equivalence


_PREMISE, _CONCLUSION = Iri("urn:test:premise"), Iri("urn:test:conclusion")


def _rule_rows(rule: Rule) -> set[tuple]:
    return {(_PREMISE,) + tuple(t) for t in rule.premise} | {(_CONCLUSION,) + tuple(t) for t in rule.conclusion}


def documents_isomorphic(a: Document, b: Document) -> bool:
    """Same prefixes, isomorphic data graphs and a one-to-one match of isomorphic rules.

    Blank nodes are scoped per rule, so each rule is compared on its own.
    """
    if a.prefixes != b.prefixes or not isomorphic(set(a.triples), set(b.triples)):
        return False
    left, right = list(dict.fromkeys(a.rules)), list(dict.fromkeys(b.rules))
    if len(left) != len(right):
        return False
    for rule in left:
        match = next((r for r in right if isomorphic(_rule_rows(rule), _rule_rows(r))), None)
        if match is None:
            return False
        right.remove(match)
    return True


# ---------------------------------------------------------------------------
# oracles


def nested_loop_match(triples, premise) -> set[frozenset]:
    """Every binding satisfying ``premise``, by scanning all triples per atom."""
    triples = list(triples)
    bindings = [{}]
    for atom in premise:
        nxt = []
        for b in bindings:
            for t in triples:
                nb = dict(b)
                if all(unify_into(x, y, nb) for x, y in zip(atom, t)):
                    nxt.append(nb)
        bindings = nxt
    return {frozenset(b.items()) for b in bindings}


def naive_closure(triples, rule_list) -> set[Triple]:
    """Naive forward chaining for builtin-free rules without conclusion blanks."""
    closure = set(triples)
    while True:
        new = set()
        for rule in rule_list:
            for b in nested_loop_match(closure, rule.premise):
                binding = dict(b)
                for t in rule.conclusion:
                    inst = Triple(*(binding.get(x, x) for x in t))
                    if isinstance(inst.s, Literal):
                        continue  # not a valid triple; the engine drops it too
                    if inst not in closure:
                        new.add(inst)
        if not new:
            return closure
        closure |= new


def random_graph(rng: random.Random, size: int, entities: int = 8, predicates: int = 4) -> list[Triple]:
    ents = [Iri(f"{NS}e{k}") for k in range(entities)]
    preds = [Iri(f"{NS}p{k}") for k in range(predicates)]
    lits = [Literal.of(k) for k in range(3)]
    out = set()
    while len(out) < size:
        o = rng.choice(ents) if rng.random() < 0.8 else rng.choice(lits)
        out.add(Triple(rng.choice(ents), rng.choice(preds), o))
    return sorted(out, key=Triple.key)


# ---------------------------------------------------------------------------
# parser fuzzing

_FUZZ_TOKENS = (
    "@prefix", "ex:", "<http://ex.org/>", ".", ";", ",", "(", ")", "[", "]", "{", "}", "=>", "<=",
    "?x", "_:b", "a", '"', '"""', "'", "^^", "@en", "#", "\\", "\\u00", "1.5e", "-", "+", ".5",
    "true", "false", "\n", " ", "\x00", "é", "\U0001F600", ":", "_:", "?", "<", ">",
)


def corpus() -> list[str]:
    """Valid N3 texts that mutations start from."""
    from sdnqos.translator import PACKS, pack_text

    texts = [fixture_text(n) for n in FIXTURE_NAMES + ("intrusion-detection",)]
    texts += [pack_text(n) for n in PACKS]
    return texts


def mutate(rng: random.Random, text: str) -> str:
    """Apply a handful of random edits: deletions, insertions, swaps, truncation."""
    chars = list(text)
    for _ in range(rng.randint(1, 8)):
        op = rng.random()
        pos = rng.randint(0, len(chars))
        if op < 0.3 and chars:
            del chars[min(pos, len(chars) - 1):min(pos + rng.randint(1, 12), len(chars))]
        elif op < 0.6:
            chars[pos:pos] = list(rng.choice(_FUZZ_TOKENS))
        elif op < 0.75:
            chars[pos:pos] = [chr(rng.randint(0, 0x2FF))]
        elif op < 0.9 and len(chars) > 2:
            a, b = sorted(rng.sample(range(len(chars)), 2))
            chars[a:b] = chars[a:b][::-1]
        else:
            chars = chars[:pos]
    return "".join(chars)


def random_text(rng: random.Random) -> str:
    return "".join(rng.choice(_FUZZ_TOKENS) if rng.random() < 0.7 else chr(rng.randint(0, 0x7F))
                   for _ in range(rng.randint(0, 60)))


# ---------------------------------------------------------------------------
# random translation scenarios

XSD_DATETIME = "http://www.w3.org/2001/XMLSchema#dateTime"


def _scenario_vocab():
    from sdnqos.vocab import RCP, SDN

    return RCP, SDN


def scenario_triples(rng: random.Random, devices: int, constraints: int, tag: str = "") -> list[Triple]:
    """A recipe with ``devices`` endpoint-bound devices and a random mix of constraints."""
    from sdnqos.terms import RDF_TYPE

    RCP, SDN = _scenario_vocab()
    recipe, switch = ex("ScenarioRecipe"), ex("ScenarioSwitch")
    out = [
        Triple(recipe, RDF_TYPE, RCP.Recipe),
        Triple(recipe, RCP.validFrom, Literal("2024-01-01T00:00:00Z", XSD_DATETIME)),
        Triple(recipe, RCP.validUntil, Literal("2024-06-30T00:00:00Z", XSD_DATETIME)),
        Triple(switch, RDF_TYPE, SDN.NetworkNode),
    ]
    devs = []
    for k in range(devices):
        dev, port = ex(f"Dev{k}"), ex(f"Dev{k}Port")
        out += [
            Triple(dev, RDF_TYPE, RCP.Device),
            Triple(dev, RCP.deviceAddress, Literal(f"10.9.0.{k + 1}")),
            Triple(dev, RCP.resolutionX, Literal.of(rng.choice((640, 1280, 1920)))),
            Triple(dev, RCP.resolutionY, Literal.of(rng.choice((480, 720, 1080)))),
            Triple(dev, RCP.videoEfficiency, Literal.of(Fraction(rng.randint(50, 99), 100))),
            Triple(dev, SDN.hasInterface, port),
            Triple(port, RDF_TYPE, SDN.Interface),
            Triple(port, SDN.node, switch),
            Triple(port, SDN.port, Literal.of(k + 1)),
        ]
        devs.append(dev)
    for j in range(constraints):
        out += constraint_triples(rng, rng.choice(devs), rng.choice(devs), f"{tag}{j}")
    return out


def constraint_triples(rng: random.Random, src: Iri, dst: Iri, name: str) -> list[Triple]:
    from sdnqos.terms import RDF_TYPE

    RCP, _ = _scenario_vocab()
    recipe = ex("ScenarioRecipe")
    i, c = ex(f"Flow{name}"), ex(f"Constraint{name}")
    kind = rng.randrange(4)
    if kind == 0:
        params = [(RDF_TYPE, RCP.FrameRateConstraint), (RCP.framesPerSecond, Literal.of(rng.choice((15, 25, 30))))]
    elif kind == 1:
        params = [(RDF_TYPE, RCP.AudioBitrateConstraint), (RCP.minBitrate, Literal.of(rng.choice((64000, 128000))))]
    elif kind == 2:
        params = [(RDF_TYPE, RCP.TimelinessConstraint), (RCP.maxDeliveryTime, Literal.of(rng.randint(1, 500)))]
    else:
        params = [(RDF_TYPE, RCP.QccTrafficSpec), (RCP.maxFramesPerInterval, Literal.of(rng.randint(0, 20))),
                  (RCP.maxFrameBytes, Literal.of(rng.choice((64, 1500))))]
        if rng.random() < 0.5:
            params.append((RCP.intervalSeconds, Literal.of(Fraction(1, rng.choice((1000, 250))))))
    return [
        Triple(recipe, RCP.hasInteraction, i),
        Triple(i, RDF_TYPE, RCP.Interaction),
        Triple(i, RCP.interactionFrom, src),
        Triple(i, RCP.interactionTo, dst),
        Triple(i, RCP.hasConstraint, c),
        Triple(c, RCP.interactionFrom, src),
        Triple(c, RCP.interactionTo, dst),
    ] + [Triple(c, p, o) for p, o in params]


def scenario_pair(rng: random.Random) -> tuple[Store, Store]:
    """Two translated stores: a base scenario and a randomly evolved copy of it."""
    from sdnqos.translator import translate_all

    RCP, _ = _scenario_vocab()
    devices = rng.randint(1, 4)
    base = Store(scenario_triples(rng, devices, rng.randint(0, 5)))
    translate_all(base)
    evolved = base.copy()
    for step in range(rng.randint(1, 3)):
        kind = rng.randrange(3)
        devs = [ex(f"Dev{k}") for k in range(devices)]
        if kind == 0:
            evolved.insert_batch(constraint_triples(rng, rng.choice(devs), rng.choice(devs), f"new{step}"))
        elif kind == 1:
            dev = rng.choice(devs)
            evolved.insert_batch([Triple(dev, RCP.videoEfficiency, Literal.of(Fraction(rng.randint(0, 99), 100)))])
        else:
            k = devices + step
            evolved.insert_batch(scenario_triples(rng, 0, 0) + [
                Triple(ex(f"Dev{k}"), t.p, t.o) for t in scenario_triples(random.Random(k), 1, 0)
                if t.s == ex("Dev0")])
        translate_all(evolved)
    return base, evolved
