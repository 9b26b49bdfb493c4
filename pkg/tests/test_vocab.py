from __future__ import annotations

import pytest

from sdnqos.errors import UnknownDevice
from sdnqos.n3 import parse
from sdnqos.store import Store
from sdnqos.terms import RDF_TYPE, BlankNode, Iri, ListTerm, Literal, Triple
from sdnqos.translator import PACKS, pack_document, translate_all
from sdnqos.vocab import QOS, RCP, SDN, declared_terms, device_profile, owned, validate, vocab_document
from tests.support import ex, fixture_store


@pytest.fixture
def translated():
    store = fixture_store("camera")
    translate_all(store)
    return store


def _one(store, cls):
    (node,) = store.subjects(RDF_TYPE, cls)
    return node


def _without(store, pred, subject=None):
    return Store(t for t in store if not (t.p == pred and (subject is None or t.s == subject)))


def _with(store, *triples):
    out = store.copy()
    out.insert_batch(triples)
    return out


def test_fixtures_are_well_formed(translated):
    assert validate(translated) == []
    for name in ("audio", "qcc", "timeliness", "intrusion-detection"):
        store = fixture_store(name)
        translate_all(store)
        assert validate(store) == [], name


MUTATIONS = {
    "video-efficiency": lambda s: _with(s, Triple(ex("CameraOne"), RCP.videoEfficiency, Literal.of(1.2))),
    "resolution": lambda s: _with(s, Triple(ex("CameraOne"), RCP.resolutionX, Literal.of(-4))),
    "parameter-range": lambda s: _with(s, Triple(ex("CameraFrameRate"), RCP.framesPerSecond, Literal.of(-1))),
    "filter-conditions": lambda s: _without(s, SDN.hasCondition),
    "filter-requirement": lambda s: _with(s, Triple(_one(s, SDN.FlowFilter), SDN.hasRequirement, BlankNode("q2"))),
    "filter-destination": lambda s: _without(s, SDN.destination),
    "application-tenant": lambda s: _with(s, Triple(_one(s, SDN.Application), SDN.tenant, ex("Other"))),
    "application-validity": lambda s: _without(s, SDN.validity),
    "application-interface": lambda s: _with(s, Triple(_one(s, SDN.Application), SDN.interface, ex("AnalyzerPort"))),
    "interface-node": lambda s: _without(s, SDN.node, ex("AnalyzerPort")),
    "interface-port": lambda s: _with(s, Triple(ex("AnalyzerPort"), SDN.port, Literal.of(8))),
    "bandwidth-range": lambda s: _with(s, Triple(_one(s, SDN.BandwidthConstraint), SDN.minBandwidth, Literal.of(-1))),
    "delay-range": lambda s: _with(s, Triple(BlankNode("d"), RDF_TYPE, SDN.DelayConstraint),
                                   Triple(BlankNode("d"), SDN.maxDelay, Literal.of(0))),
    "protect-degree": lambda s: _with(s, Triple(BlankNode("p"), RDF_TYPE, SDN.ProtectConstraint),
                                      Triple(BlankNode("p"), SDN.redundancyDegree, Literal.of(1))),
}


@pytest.mark.parametrize("rule", sorted(MUTATIONS))
def test_each_mutation_breaks_one_invariant(translated, rule):
    violations = validate(MUTATIONS[rule](translated))
    assert [v.rule for v in violations] == [rule]
    assert violations[0].severity == "error"


def test_zero_interval_is_rejected():
    store = fixture_store("qcc")
    store.insert_batch([Triple(ex("ControlStream"), RCP.intervalSeconds, Literal.of(0))])
    assert [v.rule for v in validate(store)] == ["parameter-range"]


def test_negative_efficiency_is_accepted(translated):
    assert validate(_with(translated, Triple(ex("CameraOne"), RCP.videoEfficiency, Literal.of(-0.5)))) == []


def test_several_addresses_warn(translated):
    (v,) = validate(_with(translated, Triple(ex("CameraOne"), RCP.deviceAddress, Literal("10.0.0.4"))))
    assert (v.rule, v.severity) == ("multiple-addresses", "warning")


def test_validate_does_not_mutate(translated):
    before = (translated.generation, translated.triples())
    validate(translated)
    assert (translated.generation, translated.triples()) == before


def test_device_profile():
    store = fixture_store("camera")
    profile = device_profile(store, ex("CameraOne"))
    assert profile == {
        RCP.resolutionX: Literal.of(1920), RCP.resolutionY: Literal.of(1080),
        RCP.videoEfficiency: parse("<http://a> <http://b> 0.95 .").triples[0].o,
        RCP.deviceAddress: Literal("10.0.0.5"),
    }
    store.insert_batch([Triple(ex("Bare"), RDF_TYPE, RCP.Device)])
    assert device_profile(store, ex("Bare")) == {}
    with pytest.raises(UnknownDevice):
        device_profile(store, ex("Nobody"))


def test_namespaces_are_closed():
    with pytest.raises(AttributeError):
        RCP.frameRate  # noqa: B018
    assert SDN.minBandwidth in SDN and QOS.walk in QOS


def test_vocab_document_declares_every_term():
    doc = vocab_document()
    subjects = {t.s for t in doc.triples}
    assert declared_terms() <= subjects
    assert {t.s for t in doc.triples if owned(t.s)} <= declared_terms()


def _iris(term):
    if isinstance(term, Iri):
        yield term
    elif isinstance(term, ListTerm):
        for x in term.items:
            yield from _iris(x)


@pytest.mark.parametrize("pack", PACKS)
def test_packs_use_declared_terms_only(pack):
    doc = pack_document(pack)
    triples = list(doc.triples) + [t for r in doc.rules for t in r.premise + r.conclusion]
    used = {i for t in triples for x in t for i in _iris(x) if owned(i)}
    assert used and used <= declared_terms(), used - declared_terms()
