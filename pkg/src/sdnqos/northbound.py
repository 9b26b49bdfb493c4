"""Northbound configuration documents for an SDN controller.

:func:`extract` projects the SDN-level part of a store into a
:class:`NorthboundConfig`, :func:`emit` writes it as canonical JSON, and
:class:`Watcher` re-emits whenever the store changes in a way that alters
the configuration. The JSON layout is documented in
``docs/northbound-schema.md``.

Numeric values are written as JSON integers when integral, otherwise as the
canonical lexical form in a string (``"0.5"``, ``"1/3"``), so no precision
is lost to floating point.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, BinaryIO, Callable, Union

from .errors import AmbiguousTenant, IncompleteConfig, SinkError
from .store import Store
from .terms import RDF_TYPE, BlankNode, Iri, Literal, Term, Triple, format_numeric, term_key, try_numeric
from .vocab import QOS, SDN

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_INTERVAL = 5.0
XSD_DATETIME = "http://www.w3.org/2001/XMLSchema#dateTime"

# requirement tag -> (class, value property, unit)
REQUIREMENTS = {
    "bandwidthBps": (SDN.BandwidthConstraint, SDN.minBandwidth, SDN.BitsPerSecond),
    "bytesPerInterval": (SDN.BandwidthConstraint, SDN.minBandwidth, SDN.BytesPerInterval),
    "delayMs": (SDN.DelayConstraint, SDN.maxDelay, SDN.Milliseconds),
    "protectDegree": (SDN.ProtectConstraint, SDN.redundancyDegree, None),
}
# condition tag -> (class, fields)
CONDITIONS = {
    "ethernet": (SDN.EthernetMatch, ("srcMac", "dstMac", "ethertype")),
    "ip": (SDN.IpMatch, ("srcIp", "dstIp")),
    "tcp": (SDN.TcpMatch, ("srcPort", "dstPort")),
    "udp": (SDN.UdpMatch, ("srcPort", "dstPort")),
}
_DEFAULT_UNIT = {SDN.BandwidthConstraint: SDN.BitsPerSecond, SDN.DelayConstraint: SDN.Milliseconds}


# ---------------------------------------------------------------------------
# configuration model


@dataclass(frozen=True)
class InterfaceConfig:
    id: str
    node: str
    port: int

    def to_dict(self) -> dict:
        return {"id": self.id, "node": self.node, "port": self.port}

    @classmethod
    def from_dict(cls, d: dict) -> InterfaceConfig:
        return cls(d["id"], d["node"], d["port"])


@dataclass(frozen=True)
class FlowFilterConfig:
    destination: InterfaceConfig
    conditions: tuple  # of {tag: {field: value}} dicts, frozen as JSON text
    requirement: tuple  # (tag, value)
    constraint: str | None = None
    translation: str | None = None

    def key(self) -> str:
        """Identity used for de-duplication and diffing."""
        if self.constraint is not None:
            return json.dumps([self.constraint, self.translation])
        return canonical_json(self.to_dict())

    def to_dict(self) -> dict:
        origin = None
        if self.constraint is not None:
            origin = {"constraint": self.constraint, "translation": self.translation}
        return {
            "origin": origin,
            "destination": self.destination.to_dict(),
            "conditions": [json.loads(c) for c in self.conditions],
            "requirement": {self.requirement[0]: self.requirement[1]},
        }

    @classmethod
    def from_dict(cls, d: dict) -> FlowFilterConfig:
        origin = d.get("origin") or {}
        ((tag, value),) = d["requirement"].items()
        return cls(
            destination=InterfaceConfig.from_dict(d["destination"]),
            conditions=tuple(sorted(canonical_json(c) for c in d["conditions"])),
            requirement=(tag, value),
            constraint=origin.get("constraint"),
            translation=origin.get("translation"),
        )


@dataclass(frozen=True)
class AppConfig:
    app_id: str
    interface: InterfaceConfig
    start: str | None = None
    end: str | None = None
    flow_filters: tuple = ()

    def key(self) -> str:
        return json.dumps([self.app_id, self.interface.id])

    def header(self) -> dict:
        return {"appId": self.app_id, "interface": self.interface.to_dict(),
                "validity": {"start": self.start, "end": self.end}}

    def to_dict(self) -> dict:
        d = self.header()
        d["flowFilters"] = [f.to_dict() for f in self.flow_filters]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> AppConfig:
        filters = sorted((FlowFilterConfig.from_dict(f) for f in d.get("flowFilters", [])), key=_filter_order)
        validity = d.get("validity") or {}
        return cls(d["appId"], InterfaceConfig.from_dict(d["interface"]),
                   validity.get("start"), validity.get("end"), tuple(filters))


@dataclass(frozen=True)
class NorthboundConfig:
    tenant: str | None = None
    applications: tuple = ()

    def to_dict(self) -> dict:
        return {"nbSchema": SCHEMA_VERSION, "tenant": self.tenant,
                "applications": [a.to_dict() for a in self.applications]}

    @classmethod
    def from_dict(cls, d: dict) -> NorthboundConfig:
        if d.get("nbSchema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported nbSchema {d.get('nbSchema')!r}")
        apps = sorted((AppConfig.from_dict(a) for a in d.get("applications", [])), key=_app_order)
        return cls(d.get("tenant"), tuple(apps))

    def to_bytes(self) -> bytes:
        return canonical_json(self.to_dict()).encode("utf-8") + b"\n"

    @property
    def flow_filters(self) -> list[FlowFilterConfig]:
        return [f for a in self.applications for f in a.flow_filters]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _filter_order(f: FlowFilterConfig):
    return (f.key(), canonical_json(f.to_dict()))


def _app_order(a: AppConfig):
    return (a.app_id, a.interface.id)


# ---------------------------------------------------------------------------
# extraction


def _name(t: Term) -> str:
    if isinstance(t, Iri):
        return t.value
    if isinstance(t, BlankNode):
        return "_:" + t.label
    return t.lexical if isinstance(t, Literal) else t.n3()


def json_value(t: Term):
    """JSON form of a term: integral numbers as ints, other numbers as canonical strings."""
    v = try_numeric(t)
    if v is None or isinstance(v, bool):
        return _name(t)
    if isinstance(v, float):
        if v == v and v not in (float("inf"), float("-inf")) and v.is_integer():
            return int(v)
        return format_numeric(v).lexical
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v if isinstance(v, int) else format_numeric(v).lexical


def _one(store: Store, s: Term, p: Iri) -> Term:
    values = store.objects(s, p)
    if len(values) != 1:
        raise IncompleteConfig(_name(s), p.n3())
    return values[0]


def _interface(store: Store, iface: Term) -> InterfaceConfig:
    node = _one(store, iface, SDN.node)
    port = _one(store, iface, SDN.port)
    if not isinstance(try_numeric(port), int):
        raise IncompleteConfig(_name(iface), SDN.port.n3())
    return InterfaceConfig(_name(iface), _name(node), try_numeric(port))


def _condition(store: Store, m: Term) -> str:
    for tag, (cls, fields) in CONDITIONS.items():
        if store.has_type(m, cls):
            body = {}
            for f in fields:
                v = store.value(m, SDN[f])
                if v is not None:
                    body[f] = json_value(v)
            return canonical_json({tag: body})
    raise IncompleteConfig(_name(m), "match class (rdf:type)")


def _requirement(store: Store, q: Term) -> tuple[str, Any]:
    for tag, (cls, prop, unit) in REQUIREMENTS.items():
        if not store.has_type(q, cls):
            continue
        got_unit = store.value(q, SDN.unit) or _DEFAULT_UNIT.get(cls)
        if got_unit != unit:
            continue
        v = store.value(q, prop)
        if v is None or try_numeric(v) is None:
            raise IncompleteConfig(_name(q), prop.n3())
        return tag, json_value(v)
    raise IncompleteConfig(_name(q), "requirement class/unit")


def _generation(store: Store, nodes: list[Term]) -> int:
    return max((store.generation_of(t) or 0 for n in nodes for t in store.match(n, None, None)), default=0)


def _flow_filter(store: Store, ff: Term) -> tuple[FlowFilterConfig, int]:
    dest = _interface(store, _one(store, ff, SDN.destination))
    matches = store.objects(ff, SDN.hasCondition)
    if not matches:
        raise IncompleteConfig(_name(ff), SDN.hasCondition.n3())
    q = _one(store, ff, SDN.hasRequirement)
    origin = store.value(ff, QOS.derivedFrom)
    translation = store.value(ff, QOS.translation)
    config = FlowFilterConfig(
        destination=dest,
        conditions=tuple(sorted(_condition(store, m) for m in matches)),
        requirement=_requirement(store, q),
        constraint=None if origin is None else _name(origin),
        translation=None if translation is None else _name(translation),
    )
    return config, _generation(store, [ff, q] + matches)


def extract(store: Store) -> NorthboundConfig:
    """Project every SDN application and flow filter in ``store``.

    Several filters derived from the same (constraint, translation) pair
    are reduced to the one written in the newest store generation; ties go
    to the lowest entry in canonical order. Raises :class:`IncompleteConfig`
    for SDN instances missing a required field and :class:`AmbiguousTenant`
    when applications belong to more than one tenant.
    """
    apps = sorted(store.subjects(RDF_TYPE, SDN.Application), key=term_key)
    tenants = set(store.subjects(RDF_TYPE, SDN.Tenant))
    configs = []
    for app in apps:
        tenants.add(_one(store, app, SDN.tenant))
        component = _one(store, app, SDN.component)
        iface = _interface(store, _one(store, app, SDN.interface))
        vp = _one(store, app, SDN.validity)
        start, end = store.value(vp, SDN.start), store.value(vp, SDN.end)
        best: dict[str, tuple] = {}
        for ff in store.objects(app, SDN.hasFlowFilter):
            config, gen = _flow_filter(store, ff)
            rank = (-gen, canonical_json(config.to_dict()))
            k = config.key()
            if k not in best or rank < best[k][0]:
                best[k] = (rank, config)
        filters = sorted((c for _, c in best.values()), key=_filter_order)
        configs.append(AppConfig(_name(component), iface, None if start is None else _name(start),
                                 None if end is None else _name(end), tuple(filters)))
    if len(tenants) > 1:
        raise AmbiguousTenant("applications of several tenants: " + ", ".join(sorted(_name(t) for t in tenants)))
    tenant = _name(next(iter(tenants))) if tenants else None
    merged: dict[str, AppConfig] = {}
    for a in configs:
        prev = merged.get(a.key())
        if prev is not None:
            # the same component and interface reached through two application nodes
            joined = {f.key(): f for f in prev.flow_filters + a.flow_filters}
            a = AppConfig(a.app_id, a.interface, prev.start or a.start, prev.end or a.end,
                          tuple(sorted(joined.values(), key=_filter_order)))
        merged[a.key()] = a
    return NorthboundConfig(tenant, tuple(sorted(merged.values(), key=_app_order)))


# ---------------------------------------------------------------------------
# reconstruction


def _term_of(value) -> Term:
    if isinstance(value, str):
        if value.startswith("_:"):
            return BlankNode(value[2:])
        if "://" in value or value.startswith("urn:"):
            return Iri(value)
    return _literal_of(value)


def _literal_of(value) -> Literal:
    if isinstance(value, str):
        return Literal(value)
    return Literal.of(value)


def _number_of(value) -> Literal:
    if isinstance(value, int):
        return Literal.of(value)
    if "/" in value:
        n, d = value.split("/")
        return Literal.of(Fraction(int(n), int(d)))
    return Literal.of(Fraction(value))


def to_triples(config: NorthboundConfig) -> set[Triple]:
    """Triples that :func:`extract` would read back as ``config``.

    Blank nodes are freshly labelled; numeric literals come back in
    canonical form, so compare with :func:`numeric_normal_form` applied to
    both sides.
    """
    out: set[Triple] = set()
    counter = iter(range(1 << 62))
    fresh = lambda kind: BlankNode(f"nb{kind}{next(counter)}")  # noqa: E731
    tenant = None if config.tenant is None else _term_of(config.tenant)
    if tenant is not None:
        out.add(Triple(tenant, RDF_TYPE, SDN.Tenant))

    def interface(i: InterfaceConfig) -> Term:
        t = _term_of(i.id)
        node = _term_of(i.node)
        out.update((Triple(t, RDF_TYPE, SDN.Interface), Triple(t, SDN.node, node),
                    Triple(t, SDN.port, Literal.of(i.port)), Triple(node, RDF_TYPE, SDN.NetworkNode)))
        return t

    for a in config.applications:
        app, vp = fresh("app"), fresh("vp")
        out.update((Triple(app, RDF_TYPE, SDN.Application), Triple(app, SDN.component, _term_of(a.app_id)),
                    Triple(app, SDN.interface, interface(a.interface)), Triple(app, SDN.validity, vp),
                    Triple(vp, RDF_TYPE, SDN.ValidityPeriod)))
        if tenant is not None:
            out.add(Triple(app, SDN.tenant, tenant))
        if a.start is not None:
            out.add(Triple(vp, SDN.start, Literal(a.start, XSD_DATETIME)))
        if a.end is not None:
            out.add(Triple(vp, SDN.end, Literal(a.end, XSD_DATETIME)))
        for f in a.flow_filters:
            ff, q = fresh("ff"), fresh("q")
            out.update((Triple(app, SDN.hasFlowFilter, ff), Triple(ff, RDF_TYPE, SDN.FlowFilter),
                        Triple(ff, SDN.destination, interface(f.destination)), Triple(ff, SDN.hasRequirement, q)))
            if f.constraint is not None:
                out.add(Triple(ff, QOS.derivedFrom, _term_of(f.constraint)))
            if f.translation is not None:
                out.add(Triple(ff, QOS.translation, _term_of(f.translation)))
            for c in f.conditions:
                ((tag, body),) = json.loads(c).items()
                m = fresh("m")
                out.update((Triple(ff, SDN.hasCondition, m), Triple(m, RDF_TYPE, CONDITIONS[tag][0])))
                out.update(Triple(m, SDN[k], _literal_of(v)) for k, v in body.items())
            tag, value = f.requirement
            cls, prop, unit = REQUIREMENTS[tag]
            out.update((Triple(q, RDF_TYPE, cls), Triple(q, prop, _number_of(value))))
            if unit is not None:
                out.add(Triple(q, SDN.unit, unit))
    return out


def sdn_projection(store: Store) -> set[Triple]:
    """The triples :func:`extract` reads, for the round-trip check."""
    out: set[Triple] = set()

    def take(s: Term, *preds: Iri):
        for p in preds:
            out.update(store.match(s, p, None))

    def interface(i: Term):
        take(i, SDN.node, SDN.port)
        out.update(t for t in store.match(i, RDF_TYPE, SDN.Interface))
        for n in store.objects(i, SDN.node):
            out.update(store.match(n, RDF_TYPE, SDN.NetworkNode))

    for t in store.subjects(RDF_TYPE, SDN.Tenant):
        out.add(Triple(t, RDF_TYPE, SDN.Tenant))
    for app in store.subjects(RDF_TYPE, SDN.Application):
        out.add(Triple(app, RDF_TYPE, SDN.Application))
        take(app, SDN.tenant, SDN.component, SDN.interface, SDN.validity, SDN.hasFlowFilter)
        for i in store.objects(app, SDN.interface):
            interface(i)
        for vp in store.objects(app, SDN.validity):
            out.update(store.match(vp, RDF_TYPE, SDN.ValidityPeriod))
            take(vp, SDN.start, SDN.end)
        for ff in store.objects(app, SDN.hasFlowFilter):
            out.update(store.match(ff, RDF_TYPE, SDN.FlowFilter))
            take(ff, SDN.destination, SDN.hasCondition, SDN.hasRequirement, QOS.derivedFrom, QOS.translation)
            for d in store.objects(ff, SDN.destination):
                interface(d)
            for m in store.objects(ff, SDN.hasCondition):
                for tag, (cls, fields) in CONDITIONS.items():
                    if store.has_type(m, cls):
                        out.add(Triple(m, RDF_TYPE, cls))
                        take(m, *(SDN[f] for f in fields))
            for q in store.objects(ff, SDN.hasRequirement):
                for tag, (cls, prop, unit) in REQUIREMENTS.items():
                    if store.has_type(q, cls):
                        out.add(Triple(q, RDF_TYPE, cls))
                        take(q, prop, SDN.unit)
    return out


def numeric_normal_form(triples) -> set[Triple]:
    """Replace numeric literals by the canonical literal of their value (integral values as integers)."""
    out = set()
    for t in triples:
        o = t.o
        if try_numeric(o) is not None:
            o = _number_of(json_value(o))
        out.add(Triple(t.s, t.p, o))
    return out


# ---------------------------------------------------------------------------
# deltas


def _flatten(config: NorthboundConfig) -> dict[tuple, str]:
    flat = {("tenant",): canonical_json(config.tenant)}
    for a in config.applications:
        flat[("app", a.key())] = canonical_json(a.header())
        for f in a.flow_filters:
            flat[("filter", a.key(), f.key())] = canonical_json(f.to_dict())
    return flat


def _unflatten(flat: dict[tuple, str]) -> NorthboundConfig:
    apps: dict[str, dict] = {}
    for k, v in flat.items():
        if k[0] == "app":
            d = json.loads(v)
            d.setdefault("flowFilters", [])
            apps[k[1]] = d
    for k, v in flat.items():
        if k[0] == "filter":
            apps[k[1]]["flowFilters"].append(json.loads(v))
    return NorthboundConfig.from_dict({"nbSchema": SCHEMA_VERSION, "tenant": json.loads(flat[("tenant",)]),
                                       "applications": list(apps.values())})


@dataclass(frozen=True)
class ConfigDelta:
    """Entries added, removed and changed between two configurations.

    Keys are ``("tenant",)``, ``("app", app key)`` and
    ``("filter", app key, filter key)``; values are canonical JSON text.
    """

    added: dict = field(default_factory=dict)
    removed: dict = field(default_factory=dict)
    changed: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.added or self.removed or self.changed)

    def __len__(self) -> int:
        return len(self.added) + len(self.removed) + len(self.changed)

    def filters(self, kind: str) -> list[tuple]:
        return [k for k in getattr(self, kind) if k[0] == "filter"]

    def summary(self) -> str:
        parts = []
        for kind in ("added", "removed", "changed"):
            entries = getattr(self, kind)
            if entries:
                parts.append(f"{kind} " + ", ".join(" ".join(k) for k in sorted(entries)))
        return "; ".join(parts) or "no change"


def diff(old: NorthboundConfig, new: NorthboundConfig) -> ConfigDelta:
    a, b = _flatten(old), _flatten(new)
    return ConfigDelta(
        added={k: b[k] for k in sorted(b.keys() - a.keys())},
        removed={k: a[k] for k in sorted(a.keys() - b.keys())},
        changed={k: b[k] for k in sorted(a.keys() & b.keys()) if a[k] != b[k]},
    )


def apply_delta(config: NorthboundConfig, delta: ConfigDelta) -> NorthboundConfig:
    """Patch ``config``; ``apply_delta(a, diff(a, b)) == b``."""
    flat = _flatten(config)
    for k in delta.removed:
        flat.pop(k, None)
    flat.update(delta.added)
    flat.update(delta.changed)
    return _unflatten(flat)


# ---------------------------------------------------------------------------
# sinks


class FileSink:
    """Replaces the file at ``path`` with every emission."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)

    def write(self, data: bytes) -> int:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".nb-")
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, self.path)
        except OSError as exc:
            raise SinkError(f"cannot write {self.path}: {exc}") from exc
        return len(data)

    def __repr__(self):
        return f"FileSink({str(self.path)!r})"


class HttpSink:
    """POSTs each emission as ``application/json``; non-2xx answers are errors."""

    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url
        self.timeout = timeout

    def write(self, data: bytes) -> int:
        req = urllib.request.Request(self.url, data=data, method="POST",
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                status = resp.status
        except urllib.error.HTTPError as exc:
            raise SinkError(f"POST {self.url}: HTTP {exc.code}") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise SinkError(f"POST {self.url}: {exc}") from exc
        log.info("POST %s -> %s", self.url, status)
        if not 200 <= status < 300:
            raise SinkError(f"POST {self.url}: HTTP {status}")
        return len(data)

    def __repr__(self):
        return f"HttpSink({self.url!r})"


Sink = Union[FileSink, HttpSink]


def open_sink(target: str | os.PathLike) -> Sink:
    text = str(target)
    if text.startswith(("http://", "https://")):
        return HttpSink(text)
    return FileSink(text)


def emit(config: NorthboundConfig, out: Sink | BinaryIO | str | os.PathLike) -> int:
    """Write ``config`` as canonical JSON; returns the number of bytes written."""
    data = config.to_bytes()
    if isinstance(out, (str, os.PathLike)):
        out = open_sink(out)
    if isinstance(out, (FileSink, HttpSink)):
        return out.write(data)
    try:
        out.write(data)
    except OSError as exc:
        raise SinkError(str(exc)) from exc
    return len(data)


# ---------------------------------------------------------------------------
# watching


class Watcher:
    """Emits the configuration when it differs from the last successful emission.

    The first successful tick always emits. A failed emission is retried on
    the next tick even if the store did not change in between.
    """

    def __init__(self, sink, logger: logging.Logger | None = None):
        self.sink = sink
        self.log = logger or log
        self.last: NorthboundConfig | None = None
        self.emissions = 0
        self._seen: tuple | None = None

    def tick(self, store: Store) -> ConfigDelta | None:
        """One poll; returns the emitted delta, or ``None`` when nothing was sent."""
        version = (store, store.generation)
        if self._seen is not None and self._seen[0] is store and self._seen[1] == store.generation:
            return None
        config = extract(store.snapshot())
        delta = diff(self.last or NorthboundConfig(), config)
        if self.last is not None and not delta:
            self._seen = version
            return None
        try:
            emit(config, self.sink)
        except SinkError as exc:
            self.log.warning("emission failed, retrying next tick: %s", exc)
            return None
        self.last = config
        self._seen = version
        self.emissions += 1
        self.log.info("emitted configuration: %s", delta.summary())
        return delta


def watch(store: Store | Callable[[], Store], interval: float = DEFAULT_INTERVAL, sink=None,
          max_ticks: int | None = None, sleep: Callable[[float], None] = time.sleep) -> Watcher:
    """Poll ``store`` every ``interval`` seconds until ``max_ticks`` (forever if ``None``).

    ``store`` may be a callable returning the current store, which lets a
    caller reload a store directory between ticks.
    """
    if interval < 1:
        raise ValueError("watch interval must be at least 1 second")
    if sink is None:
        raise ValueError("a sink is required")
    watcher = Watcher(sink)
    ticks = 0
    while max_ticks is None or ticks < max_ticks:
        current = store() if callable(store) else store
        try:
            watcher.tick(current)
        except (IncompleteConfig, AmbiguousTenant) as exc:
            log.error("store does not yield a valid configuration: %s", exc)
        ticks += 1
        if max_ticks is None or ticks < max_ticks:
            sleep(interval)
    return watcher
