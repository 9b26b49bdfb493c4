"""Binding abstract recipes to concrete offerings.

A recipe stays abstract until each ingredient is bound to an offering.
Instantiation then states, for every interaction A -> B, which offerings
play the source and destination role (``rcp:interactionFrom`` /
``rcp:interactionTo``) on the interaction and on each of its constraints,
and runs the translation. Both happen in one store transaction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    AlreadyInstantiated,
    ParseError,
    UnboundIngredient,
    UnknownOffering,
    UnknownRecipe,
)
from .store import Store
from .terms import Iri, Term, Triple, term_key
from .translator import TranslationReport, translate_all
from .vocab import RCP, is_device


@dataclass(frozen=True)
class BindingPlan:
    recipe: Iri
    bindings: Mapping[Iri, Iri]


@dataclass
class InstantiationReport:
    recipe: Iri
    interactions: list[Term] = field(default_factory=list)
    translation: TranslationReport = field(default_factory=TranslationReport)

    def __str__(self) -> str:
        lines = [f"recipe: {self.recipe.value}", f"interactions concretized: {len(self.interactions)}"]
        lines += [f"  {i.n3()}" for i in self.interactions]
        return "\n".join(lines) + "\n" + str(self.translation)


def ingredients_of(store: Store, recipe: Term) -> list[Term]:
    """Ingredients named by ``rcp:hasIngredient`` or used by an interaction."""
    found = set(store.objects(recipe, RCP.hasIngredient))
    for i in store.objects(recipe, RCP.hasInteraction):
        found.update(store.objects(i, RCP.fromIngredient))
        found.update(store.objects(i, RCP.toIngredient))
    return sorted(found, key=term_key)


def check_plan(store: Store, plan: BindingPlan) -> None:
    """Raise if ``plan`` cannot be applied to ``store``; never mutates."""
    if not store.has_type(plan.recipe, RCP.Recipe):
        raise UnknownRecipe(f"no rcp:Recipe {plan.recipe.value}")
    for ing in ingredients_of(store, plan.recipe):
        if ing not in plan.bindings:
            raise UnboundIngredient(f"ingredient {ing.n3()} is not bound")
    for ing, off in sorted(plan.bindings.items(), key=lambda kv: term_key(kv[0])):
        if not is_device(store, off):
            raise UnknownOffering(f"{off.n3()} (bound to {ing.n3()}) is not an rcp:Offering or rcp:Device")
    for i in store.objects(plan.recipe, RCP.hasInteraction):
        nodes = [i] + store.objects(i, RCP.hasConstraint)
        if any(store.objects(n, RCP.interactionFrom) or store.objects(n, RCP.interactionTo) for n in nodes):
            raise AlreadyInstantiated(f"recipe {plan.recipe.value} already has bound interaction {i.n3()}")


def endpoint_triples(store: Store, plan: BindingPlan) -> tuple[list[Term], list[Triple]]:
    interactions = []
    out = [Triple(ing, RCP.boundTo, off) for ing, off in plan.bindings.items()]
    for i in sorted(store.objects(plan.recipe, RCP.hasInteraction), key=term_key):
        srcs = store.objects(i, RCP.fromIngredient)
        dsts = store.objects(i, RCP.toIngredient)
        if not srcs or not dsts:
            continue
        interactions.append(i)
        for node in [i] + store.objects(i, RCP.hasConstraint):
            out += [Triple(node, RCP.interactionFrom, plan.bindings[a]) for a in srcs]
            out += [Triple(node, RCP.interactionTo, plan.bindings[b]) for b in dsts]
    return interactions, sorted(set(out), key=Triple.key)


def instantiate(store: Store, plan: BindingPlan, packs: Iterable[str] | None = None) -> InstantiationReport:
    """Bind the recipe's ingredients and translate its constraints.

    On any error the store is left exactly as it was.
    """
    check_plan(store, plan)
    with store.transaction():
        interactions, triples = endpoint_triples(store, plan)
        store.insert_batch(triples)
        report = translate_all(store, packs)
    return InstantiationReport(plan.recipe, interactions, report)


# ---------------------------------------------------------------------------
# binding files

_PREFIX = re.compile(r"@prefix\s+([A-Za-z][\w.-]*)?:\s*<([^>]*)>\s*\.?\s*$")


def _strip_comment(line: str) -> str:
    depth = 0
    for k, ch in enumerate(line):
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth = max(0, depth - 1)
        elif ch == "#" and not depth:
            return line[:k]
    return line


def _term(text: str, prefixes: dict[str, str], lineno: int) -> Iri:
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    if ":" in text:
        pfx, local = text.split(":", 1)
        if pfx in prefixes:
            return Iri(prefixes[pfx] + local)
        if "//" in local:
            return Iri(text)
    raise ParseError(lineno, 1, f"cannot read IRI {text!r}")


def parse_bindings(text: str, prefixes: Mapping[str, str] | None = None) -> dict[Iri, Iri]:
    """Read ``ingredient = offering`` lines.

    IRIs are written ``<...>``, as prefixed names, or as absolute IRIs.
    ``@prefix`` lines declare prefixes; ``#`` starts a comment.
    """
    pfx = dict(prefixes or {})
    out: dict[Iri, Iri] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _PREFIX.match(line)
        if m:
            pfx[m.group(1) or ""] = m.group(2)
            continue
        if "=" not in line:
            raise ParseError(lineno, 1, "expected 'ingredient = offering'")
        left, right = line.split("=", 1)
        ing, off = _term(left, pfx, lineno), _term(right, pfx, lineno)
        if ing in out and out[ing] != off:
            raise ParseError(lineno, 1, f"{ing.value} bound twice")
        out[ing] = off
    return out


def load_plan(recipe: Iri, sources: Iterable[str], prefixes: Mapping[str, str] | None = None) -> BindingPlan:
    """Binding plan from files and/or inline ``ingredient=offering`` items."""
    bindings: dict[Iri, Iri] = {}
    for src in sources:
        text = Path(src).read_text(encoding="utf-8") if "=" not in src and Path(src).exists() else src
        bindings.update(parse_bindings(text, prefixes))
    return BindingPlan(recipe, bindings)
