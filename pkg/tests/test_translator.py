from __future__ import annotations

from fractions import Fraction

import pytest

from sdnqos.engine import fixpoint
from sdnqos.errors import DivisionByZero, UnknownPack, UnresolvedReference
from sdnqos.northbound import extract
from sdnqos.store import Store
from sdnqos.terms import RDF_TYPE, Literal, Triple, parse_numeric
from sdnqos.translator import (
    PACKS,
    CalculationNode,
    DevicePropertyRef,
    ParameterRef,
    compare_paths,
    network_subgraph,
    resolve_calculation,
    rule_pack,
    translate_all,
    translate_rules,
)
from sdnqos.vocab import QOS, RCP, SDN
from tests.support import FIXTURE_NAMES, ex, fixture_store

CAMERA_CALC = CalculationNode("productOf", (
    CalculationNode("differenceOf", (Literal.of(1), DevicePropertyRef(RCP.videoEfficiency))),
    DevicePropertyRef(RCP.resolutionX), DevicePropertyRef(RCP.resolutionY), ParameterRef(RCP.framesPerSecond),
))
CAMERA_PROFILE = {RCP.resolutionX: Literal.of(1920), RCP.resolutionY: Literal.of(1080),
                  RCP.videoEfficiency: Literal.of(Fraction("0.95"))}


def values(store: Store, cls, prop):
    return sorted(parse_numeric(store.value(q, prop)) for q in store.subjects(RDF_TYPE, cls))


def test_resolve_camera_formula():
    got = resolve_calculation(CAMERA_CALC, CAMERA_PROFILE, {RCP.framesPerSecond: Literal.of(30)})
    assert parse_numeric(got) == 3110400


def test_resolve_qcc_product():
    calc = CalculationNode("productOf", (ParameterRef(RCP.maxFramesPerInterval), ParameterRef(RCP.maxFrameBytes)))
    got = resolve_calculation(calc, {}, {RCP.maxFramesPerInterval: Literal.of(10), RCP.maxFrameBytes: Literal.of(1500)})
    assert parse_numeric(got) == 15000


def test_full_efficiency_annihilates():
    profile = {**CAMERA_PROFILE, RCP.videoEfficiency: Literal.of(1)}
    assert parse_numeric(resolve_calculation(CAMERA_CALC, profile, {RCP.framesPerSecond: Literal.of(30)})) == 0


def test_missing_reference():
    profile = {k: v for k, v in CAMERA_PROFILE.items() if k != RCP.resolutionX}
    with pytest.raises(UnresolvedReference) as err:
        resolve_calculation(CAMERA_CALC, profile, {})
    assert set(err.value.missing) == {RCP.resolutionX, RCP.framesPerSecond}


def test_quotient_by_zero():
    calc = CalculationNode("quotientOf", (Literal.of(1), ParameterRef(RCP.intervalSeconds)))
    with pytest.raises(DivisionByZero):
        resolve_calculation(calc, {}, {RCP.intervalSeconds: Literal.of(0)})


def test_camera_translation():
    store = fixture_store("camera")
    report = translate_all(store)
    assert (report.constraints, report.filters, report.skipped) == (1, 1, [])
    (ff,) = store.subjects(RDF_TYPE, SDN.FlowFilter)
    (m,) = store.objects(ff, SDN.hasCondition)
    assert store.has_type(m, SDN.IpMatch)
    assert store.value(m, SDN.srcIp) == Literal("10.0.0.5")
    assert store.value(m, SDN.dstIp) == Literal("10.0.0.9")
    (q,) = store.objects(ff, SDN.hasRequirement)
    assert store.has_type(q, SDN.BandwidthConstraint)
    assert parse_numeric(store.value(q, SDN.minBandwidth)) == 3110400
    assert store.value(q, SDN.unit) == SDN.BitsPerSecond
    assert store.value(ff, SDN.destination) == ex("AnalyzerPort")
    assert store.value(ff, QOS.derivedFrom) == ex("CameraFrameRate")


def test_timeliness_translation():
    store = fixture_store("timeliness")
    translate_all(store)
    assert values(store, SDN.DelayConstraint, SDN.maxDelay) == [50]


def test_audio_translation():
    store = fixture_store("audio")
    translate_all(store)
    assert values(store, SDN.BandwidthConstraint, SDN.minBandwidth) == [128000]


def test_missing_endpoint_is_skipped():
    full = fixture_store("camera")
    store = Store(t for t in full if not (t.s == ex("CameraFrameRate") and t.p == RCP.interactionTo))
    report = translate_all(store)
    assert report.filters == 0 and [s.constraint for s in report.skipped] == [ex("CameraFrameRate")]
    assert translate_rules(store.copy()).derived >= 0
    assert not store.subjects(RDF_TYPE, SDN.FlowFilter)


def test_unresolved_reference_names_constraint():
    full = fixture_store("camera")
    store = Store(t for t in full if t.p != RCP.resolutionX)
    gen = store.generation
    with pytest.raises(UnresolvedReference) as err:
        translate_all(store)
    assert err.value.constraint == ex("CameraFrameRate")
    assert store.generation == gen


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_translate_all_is_idempotent(name):
    store = fixture_store(name)
    translate_all(store)
    snapshot = store.triples()
    assert translate_all(store).added == 0
    assert store.triples() == snapshot


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_rules_after_direct_add_nothing_to_network(name):
    store = fixture_store(name)
    translate_all(store)
    before = network_subgraph(store)
    translate_rules(store)
    assert network_subgraph(store) == before


def test_qcc_with_no_frames():
    full = fixture_store("qcc")
    store = Store(t for t in full if t.p != RCP.maxFramesPerInterval)
    store.insert_batch([Triple(ex("ControlStream"), RCP.maxFramesPerInterval, Literal.of(0))])
    translate_rules(store)
    assert values(store, SDN.BandwidthConstraint, SDN.minBandwidth) == [0, 0]


def test_qcc_without_interval_gives_per_interval_only():
    full = fixture_store("qcc")
    store = Store(t for t in full if t.p != RCP.intervalSeconds)
    report = translate_all(store)
    assert values(store, SDN.BandwidthConstraint, SDN.minBandwidth) == [15000]
    (q,) = store.subjects(RDF_TYPE, SDN.BandwidthConstraint)
    assert store.value(q, SDN.unit) == SDN.BytesPerInterval
    assert len(report.skipped) == 1
    assert compare_paths(store).equivalent


def test_unknown_pack():
    with pytest.raises(UnknownPack):
        rule_pack("video-magic")


def test_core_pack_alone_derives_only_its_facts():
    store = Store()
    core = rule_pack("calculation-core")
    report = fixpoint(store, core)
    assert report.derived == len(core.facts)
    assert store.triples() == set(core.facts)


@pytest.mark.parametrize("pack", PACKS)
def test_every_pack_loads(pack):
    assert rule_pack(pack).rules


def test_reevaluation_uses_newest_value():
    store = fixture_store("camera")
    translate_all(store)
    store.insert_batch([Triple(ex("CameraOne"), RCP.videoEfficiency, Literal.of(Fraction("0.9")))])
    report = translate_all(store)
    assert report.filters == 1
    assert values(store, SDN.BandwidthConstraint, SDN.minBandwidth) == [3110400, 6220800]
    (f,) = extract(store).flow_filters
    assert f.requirement == ("bandwidthBps", 6220800)


def test_several_addresses_pick_lowest():
    store = fixture_store("camera")
    store.insert_batch([Triple(ex("CameraOne"), RCP.deviceAddress, Literal("10.0.0.4"))])
    translate_all(store)
    (f,) = extract(store).flow_filters
    assert f.conditions == ('{"ip":{"dstIp":"10.0.0.9","srcIp":"10.0.0.4"}}',)
    assert compare_paths(fixture_store("camera")).equivalent


def test_dual_path_on_random_scenarios():
    import random

    from tests.support import scenario_triples

    for seed in range(5):
        store = Store(scenario_triples(random.Random(seed), 3, 6))
        result = compare_paths(store)
        assert result.equivalent and result.direct, seed
