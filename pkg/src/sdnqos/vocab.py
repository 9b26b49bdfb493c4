"""The recipe model, the SDN configuration model and the translation vocabulary.

Three namespaces are owned by this package:

``rcp:``  recipes, ingredients, interactions, offerings/devices and the
          application-level constraints attached to interactions;
``sdn:``  tenants, applications, flow filters, match conditions and the
          network-level delay/bandwidth/protect requirements;
``qos:``  the calculation machinery rule packs use to get from one to the other.

Each namespace is closed: asking for an undeclared name raises
``AttributeError``. ``vocab.n3`` (shipped next to this module) declares the
same terms as RDF.

Units: bandwidth in bits/s, delay in milliseconds, interval lengths in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable

from .errors import UnknownDevice
from .n3 import Document, parse
from .store import Store
from .terms import RDF_TYPE, Iri, Literal, Term, term_key, try_numeric

RCP_NS = "https://sdnqos.example/ns/recipe#"
SDN_NS = "https://sdnqos.example/ns/sdn#"
QOS_NS = "https://sdnqos.example/ns/qos#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"


class Namespace:
    def __init__(self, base: str, classes: Iterable[str], properties: Iterable[str]):
        self._base = base
        self._classes = tuple(classes)
        self._properties = tuple(properties)
        self._terms = {name: Iri(base + name) for name in self._classes + self._properties}

    def __getattr__(self, name: str) -> Iri:
        try:
            return self._terms[name]
        except KeyError:
            raise AttributeError(f"{name!r} is not declared in {self._base}") from None

    def __getitem__(self, name: str) -> Iri:
        return getattr(self, name)

    def __contains__(self, iri) -> bool:
        return isinstance(iri, Iri) and iri.value.startswith(self._base) and iri.value[len(self._base):] in self._terms

    @property
    def base(self) -> str:
        return self._base

    @property
    def classes(self) -> tuple[Iri, ...]:
        return tuple(self._terms[n] for n in self._classes)

    @property
    def properties(self) -> tuple[Iri, ...]:
        return tuple(self._terms[n] for n in self._properties)


RCP = Namespace(
    RCP_NS,
    classes=(
        "Recipe", "Ingredient", "Interaction", "Offering", "Device",
        "ApplicationConstraint", "FrameRateConstraint", "AudioBitrateConstraint",
        "TimelinessConstraint", "QccTrafficSpec",
    ),
    properties=(
        "hasIngredient", "hasInteraction", "fromIngredient", "toIngredient",
        "interactionFrom", "interactionTo", "boundTo",
        "hasInput", "hasOutput", "hasCategory", "hasConstraint",
        "validFrom", "validUntil",
        "deviceAddress", "resolutionX", "resolutionY", "videoEfficiency", "bitsPerPixel",
        "framesPerSecond", "minBitrate", "maxDeliveryTime",
        "maxFramesPerInterval", "maxFrameBytes", "intervalSeconds",
    ),
)

SDN = Namespace(
    SDN_NS,
    classes=(
        "Tenant", "Application", "ValidityPeriod", "Interface", "NetworkNode", "FlowFilter",
        "EthernetMatch", "IpMatch", "TcpMatch", "UdpMatch",
        "DelayConstraint", "BandwidthConstraint", "ProtectConstraint",
        "BitsPerSecond", "BytesPerInterval", "Milliseconds",
    ),
    properties=(
        "tenant", "component", "interface", "validity", "start", "end",
        "hasInterface", "node", "port",
        "hasFlowFilter", "destination", "hasCondition", "hasRequirement",
        "srcMac", "dstMac", "ethertype", "srcIp", "dstIp", "srcPort", "dstPort",
        "maxDelay", "minBandwidth", "redundancyDegree", "unit",
    ),
)

QOS = Namespace(
    QOS_NS,
    classes=("Operator", "DeviceProperty", "Parameter", "TranslationTarget", "Evaluation"),
    properties=(
        "translatesTo", "value", "produces", "valueProperty", "unit", "optional",
        "productOf", "sumOf", "differenceOf", "quotientOf",
        "needs", "context", "calc", "argValue", "walk", "result", "targetValue",
        "derivedFrom", "translation",
    ),
)

NAMESPACES = {"rcp": RCP, "sdn": SDN, "qos": QOS}
PREFIXES = {
    "rcp": RCP_NS,
    "sdn": SDN_NS,
    "qos": QOS_NS,
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": RDFS_NS,
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "math": "http://www.w3.org/2000/10/swap/math#",
    "list": "http://www.w3.org/2000/10/swap/list#",
    "log": "http://www.w3.org/2000/10/swap/log#",
}

APPLICATION_CONSTRAINT_CLASSES = (
    RCP.FrameRateConstraint, RCP.AudioBitrateConstraint, RCP.TimelinessConstraint, RCP.QccTrafficSpec,
)
CONSTRAINT_PARAMETERS = (
    RCP.framesPerSecond, RCP.minBitrate, RCP.maxDeliveryTime,
    RCP.maxFramesPerInterval, RCP.maxFrameBytes, RCP.intervalSeconds,
)
MATCH_CLASSES = (SDN.EthernetMatch, SDN.IpMatch, SDN.TcpMatch, SDN.UdpMatch)
REQUIREMENT_CLASSES = (SDN.DelayConstraint, SDN.BandwidthConstraint, SDN.ProtectConstraint)
DEVICE_CLASSES = (RCP.Device, RCP.Offering)


def vocab_document() -> Document:
    """The shipped ``vocab.n3`` declarations."""
    text = resources.files("sdnqos").joinpath("vocab.n3").read_text(encoding="utf-8")
    return parse(text)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    subject: Term
    rule: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        subject = self.subject.value if isinstance(self.subject, Iri) else self.subject.n3()
        return f"{self.severity}: {self.rule}: {subject}: {self.message}"


def _instances(store: Store, cls: Iri) -> list[Term]:
    return store.subjects(RDF_TYPE, cls)


def _numbers(store: Store, s: Term, p: Iri, out: list, rule: str, what: str):
    """Numeric values of ``(s, p, ?)``; non-numeric objects are reported."""
    values = []
    for o in store.objects(s, p):
        v = try_numeric(o)
        if v is None:
            out.append(Violation(s, rule, f"{what} must be numeric, got {o.n3()}"))
        else:
            values.append(v)
    return values


def _exactly_one(store: Store, s: Term, p: Iri, out: list, rule: str, what: str) -> None:
    n = len(store.objects(s, p))
    if n != 1:
        out.append(Violation(s, rule, f"needs exactly one {what}, found {n}"))


def validate(store: Store) -> list[Violation]:
    """Every structural problem in ``store``; an empty list means well-formed.

    Severity ``"warning"`` marks data that is accepted but ambiguous.
    """
    out: list[Violation] = []

    for dev in sorted(set(_instances(store, RCP.Device)) | set(_instances(store, RCP.Offering)), key=term_key):
        for e in _numbers(store, dev, RCP.videoEfficiency, out, "video-efficiency", "videoEfficiency"):
            if e > 1:
                out.append(Violation(dev, "video-efficiency", f"videoEfficiency {e} exceeds 1"))
        for prop in (RCP.resolutionX, RCP.resolutionY):
            for o in store.objects(dev, prop):
                v = try_numeric(o)
                if not isinstance(v, int) or v <= 0:
                    out.append(Violation(dev, "resolution", f"{prop.value.rsplit('#', 1)[1]} must be a positive integer, got {o.n3()}"))
        addresses = store.objects(dev, RCP.deviceAddress)
        if len(addresses) > 1:
            out.append(Violation(dev, "multiple-addresses",
                                 f"{len(addresses)} addresses; the lowest one wins", "warning"))

    for cls in APPLICATION_CONSTRAINT_CLASSES:
        for c in _instances(store, cls):
            for prop in CONSTRAINT_PARAMETERS:
                for v in _numbers(store, c, prop, out, "parameter-range", prop.value.rsplit("#", 1)[1]):
                    if v != v or v in (float("inf"), float("-inf")):
                        out.append(Violation(c, "parameter-range", f"{prop.value.rsplit('#', 1)[1]} must be finite"))
                    elif v < 0:
                        out.append(Violation(c, "parameter-range", f"{prop.value.rsplit('#', 1)[1]} must be non-negative"))
            for v in _numbers(store, c, RCP.intervalSeconds, [], "", ""):
                if v == 0:
                    out.append(Violation(c, "parameter-range", "intervalSeconds must be positive"))

    for ff in _instances(store, SDN.FlowFilter):
        conditions = store.objects(ff, SDN.hasCondition)
        if not conditions:
            out.append(Violation(ff, "filter-conditions", "flow filter has no conditions"))
        _exactly_one(store, ff, SDN.hasRequirement, out, "filter-requirement", "QoS requirement")
        _exactly_one(store, ff, SDN.destination, out, "filter-destination", "destination interface")

    for app in _instances(store, SDN.Application):
        _exactly_one(store, app, SDN.tenant, out, "application-tenant", "tenant")
        _exactly_one(store, app, SDN.validity, out, "application-validity", "validity period")
        _exactly_one(store, app, SDN.interface, out, "application-interface", "interface")

    for iface in _instances(store, SDN.Interface):
        _exactly_one(store, iface, SDN.node, out, "interface-node", "network node")
        ports = store.objects(iface, SDN.port)
        if len(ports) != 1 or not isinstance(try_numeric(ports[0]), int):
            out.append(Violation(iface, "interface-port", "needs exactly one integer port"))

    for q in _instances(store, SDN.DelayConstraint):
        for v in _numbers(store, q, SDN.maxDelay, out, "delay-range", "maxDelay"):
            if not v > 0:
                out.append(Violation(q, "delay-range", f"maxDelay must be positive, got {v}"))
    for q in _instances(store, SDN.BandwidthConstraint):
        for v in _numbers(store, q, SDN.minBandwidth, out, "bandwidth-range", "minBandwidth"):
            if not v >= 0:
                out.append(Violation(q, "bandwidth-range", f"minBandwidth must be non-negative, got {v}"))
    for q in _instances(store, SDN.ProtectConstraint):
        for o in store.objects(q, SDN.redundancyDegree):
            v = try_numeric(o)
            if not isinstance(v, int) or v < 2:
                out.append(Violation(q, "protect-degree", f"redundancyDegree must be an integer >= 2, got {o.n3()}"))

    return sorted(out, key=lambda v: (v.subject.key(), v.rule, v.message))


# ---------------------------------------------------------------------------
# device views


def is_device(store: Store, node: Term) -> bool:
    return any(store.has_type(node, cls) for cls in DEVICE_CLASSES)


def device_profile(store: Store, device: Term) -> dict[Iri, Literal]:
    """Literal-valued properties of ``device``.

    When a property has several values the one from the newest store
    generation is returned.
    """
    if not is_device(store, device):
        raise UnknownDevice(f"not a device or offering: {device}")
    profile = {}
    for p in store.predicates(device):
        lit = store.value(device, p, Literal)
        if lit is not None:
            profile[p] = lit
    return profile


def declared_terms() -> set[Iri]:
    return {t for ns in NAMESPACES.values() for t in ns.classes + ns.properties}


def owned(iri: Term) -> bool:
    """True when ``iri`` lies in one of this package's namespaces."""
    return isinstance(iri, Iri) and iri.value.startswith((RCP_NS, SDN_NS, QOS_NS))


__all__ = [
    "QOS", "RCP", "SDN", "PREFIXES", "Namespace", "Violation",
    "device_profile", "validate", "vocab_document",
]
