"""Translation of application-level IoT QoS constraints into SDN configurations.

Typical use::

    from sdnqos import Store, parse_file, translate_all, extract, emit

    store = Store()
    store.load_document(parse_file("camera.n3"))
    translate_all(store)
    emit(extract(store), "config.json")
"""

from .engine import Builtin, FixpointReport, RuleSet, apply_rule_once, fixpoint
from .errors import QosError
from .instantiator import BindingPlan, InstantiationReport, instantiate
from .n3 import Document, Rule, parse, parse_file, serialize
from .northbound import ConfigDelta, NorthboundConfig, Watcher, apply_delta, diff, emit, extract, watch
from .store import Store, load_store, save_triples
from .terms import BlankNode, Iri, ListTerm, Literal, Triple, Variable, isomorphic
from .translator import (
    CalculationNode,
    DevicePropertyRef,
    ParameterRef,
    TranslationReport,
    compare_paths,
    resolve_calculation,
    rule_pack,
    translate_all,
    translate_rules,
)
from .vocab import QOS, RCP, SDN, device_profile, validate

__version__ = "0.1.0"

__all__ = [
    "BindingPlan", "BlankNode", "Builtin", "CalculationNode", "ConfigDelta", "DevicePropertyRef",
    "Document", "FixpointReport", "InstantiationReport", "Iri", "ListTerm", "Literal",
    "NorthboundConfig", "ParameterRef", "QOS", "QosError", "RCP", "Rule", "RuleSet", "SDN", "Store",
    "TranslationReport", "Triple", "Variable", "Watcher", "apply_delta", "apply_rule_once",
    "compare_paths", "device_profile", "diff", "emit", "extract", "fixpoint", "instantiate",
    "isomorphic", "load_store", "parse", "parse_file", "resolve_calculation", "rule_pack",
    "save_triples", "serialize", "translate_all", "translate_rules", "validate", "watch",
]
