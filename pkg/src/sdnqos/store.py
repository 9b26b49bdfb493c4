"""In-memory triple store with SPO/POS/OSP indexes and a generation counter.

The store is append-only. Every mutation batch that adds at least one
triple bumps :attr:`Store.generation` by one, and each triple remembers the
generation that introduced it. Readers that need a stable view take a
:meth:`Store.snapshot`.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import VariableInData
from .n3 import Document, parse, serialize
from .terms import (
    BlankNode,
    Iri,
    ListTerm,
    Term,
    Triple,
    Variable,
    map_blanks,
    substitute,
    term_key,
    unify_into,
    variables_of,
)

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def binding_key(b: dict) -> tuple:
    return tuple(sorted((v.name, t.key()) for v, t in b.items()))


class Store:
    """Deduplicated triple set with three hash indexes."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._spo: dict = {}
        self._pos: dict = {}
        self._osp: dict = {}
        self._pcount: dict = {}
        self._psubjects: dict = {}
        self._log: list[Triple] = []
        self._gen: dict[Triple, int] = {}
        self.generation = 0
        self.prefixes: dict[str, str] = {}
        self.read_only = False
        self._lock = threading.RLock()
        self._depth = 0
        self._txn_start = 0
        self._docs = 0
        triples = list(triples)
        if triples:
            self.insert_batch(triples)

    # -- basic container protocol --------------------------------------
    def __len__(self) -> int:
        return len(self._log)

    def __contains__(self, t: Triple) -> bool:
        return t in self._gen

    def __iter__(self) -> Iterator[Triple]:
        return iter(list(self._log))

    def triples(self) -> set[Triple]:
        return set(self._log)

    def generation_of(self, t: Triple) -> int | None:
        return self._gen.get(t)

    def triples_since(self, position: int) -> list[Triple]:
        """Triples in insertion order starting at log ``position``."""
        return self._log[position:]

    # -- mutation -------------------------------------------------------
    @contextmanager
    def transaction(self):
        """Group insertions into one mutation batch; rolled back on error."""
        with self._lock:
            if self.read_only:
                raise PermissionError("store snapshot is read-only")
            if self._depth:
                self._depth += 1
                try:
                    yield self
                finally:
                    self._depth -= 1
                return
            self._depth = 1
            self._txn_start = len(self._log)
            try:
                yield self
            except BaseException:
                self._rollback(self._txn_start)
                raise
            else:
                if len(self._log) > self._txn_start:
                    self.generation += 1
            finally:
                self._depth = 0

    def insert_batch(self, triples: Iterable[Triple]) -> int:
        """Set-union ``triples`` into the store; return how many were new."""
        with self.transaction():
            pending = self.generation + 1
            added = 0
            for t in triples:
                if t in self._gen:
                    continue
                self._check(t)
                self._add(t, pending)
                added += 1
            return added

    def _check(self, t: Triple) -> None:
        if not (t.s.ground and t.p.ground and t.o.ground):
            raise VariableInData(f"variable in asserted triple {t}")
        if t.p.__class__ is not Iri:
            raise ValueError(f"predicate must be an IRI: {t}")
        if t.s.__class__ not in (Iri, BlankNode):
            raise ValueError(f"subject must be an IRI or blank node: {t}")

    def _add(self, t: Triple, generation: int) -> None:
        s, p, o = t
        pm = self._spo.setdefault(s, {})
        if p not in pm:
            self._psubjects[p] = self._psubjects.get(p, 0) + 1
        pm.setdefault(p, set()).add(o)
        self._pos.setdefault(p, {}).setdefault(o, set()).add(s)
        self._osp.setdefault(o, {}).setdefault(s, set()).add(p)
        self._pcount[p] = self._pcount.get(p, 0) + 1
        self._gen[t] = generation
        self._log.append(t)

    def _rollback(self, position: int) -> None:
        for t in reversed(self._log[position:]):
            s, p, o = t
            for index, a, b, c in ((self._spo, s, p, o), (self._pos, p, o, s), (self._osp, o, s, p)):
                inner = index[a]
                inner[b].discard(c)
                if not inner[b]:
                    del inner[b]
                    if index is self._spo:
                        self._psubjects[p] -= 1
                if not inner:
                    del index[a]
            self._pcount[p] -= 1
            if not self._pcount[p]:
                del self._pcount[p]
            del self._gen[t]
        del self._log[position:]

    # -- documents ------------------------------------------------------
    def load_document(self, doc: Document, scope: str | None = None) -> int:
        """Insert the data triples of ``doc`` as one batch.

        Blank node labels get a ``_<scope>`` suffix so that documents loaded
        side by side never share blank nodes by accident. ``scope=None``
        picks a fresh per-store document number; pass ``scope=""`` to keep
        labels verbatim (documents written by :func:`save_triples`).
        """
        if scope is None:
            self._docs += 1
            scope = f"d{self._docs}"
        triples = doc.triples
        if scope:
            suffix = "_" + re.sub(r"[^A-Za-z0-9_-]", "_", scope)
            rename = lambda b: BlankNode(b.label + suffix)  # noqa: E731
            triples = [Triple(*(map_blanks(x, rename) for x in t)) for t in triples]
        self.prefixes.update(doc.prefixes)
        return self.insert_batch(triples)

    # -- snapshots ------------------------------------------------------
    def copy(self) -> Store:
        with self._lock:
            other = Store()
            other._docs = self._docs
            other.prefixes = dict(self.prefixes)
            for t in self._log:
                other._add(t, self._gen[t])
            other.generation = self.generation
            return other

    def snapshot(self) -> Store:
        """Read-only copy holding exactly the triples present now."""
        snap = self.copy()
        snap.read_only = True
        return snap

    # -- queries --------------------------------------------------------
    def match(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> list[Triple]:
        """Triples matching a pattern, sorted in canonical term order.

        ``None`` and :class:`Variable` positions are wildcards; a variable
        used twice must match the same term in both places.
        """
        pattern = tuple(Variable(f"__{i}") if x is None else x for i, x in enumerate((s, p, o)))
        out = [Triple(*(substitute(x, b) for x in pattern)) for b in self.extend(pattern, {})]
        return sorted(out, key=Triple.key)

    def objects(self, s: Term, p: Term) -> list[Term]:
        return sorted(self._spo.get(s, {}).get(p, ()), key=term_key)

    def subjects(self, p: Term, o: Term) -> list[Term]:
        return sorted(self._pos.get(p, {}).get(o, ()), key=term_key)

    def predicates(self, s: Term) -> list[Term]:
        return sorted(self._spo.get(s, {}), key=term_key)

    def outgoing(self, s: Term) -> dict:
        return self._spo.get(s, {})

    def value(self, s: Term, p: Term, kind: type | None = None) -> Term | None:
        """The newest object of ``(s, p, ?)``; ties go to the smallest term.

        ``kind`` restricts candidates to one term class (e.g. ``Literal``).
        """
        objs = self._spo.get(s, {}).get(p)
        if objs and kind is not None:
            objs = [o for o in objs if o.__class__ is kind]
        if not objs:
            return None
        return max(objs, key=lambda o: (self._gen[Triple(s, p, o)], _neg_key(o)))

    def has_type(self, s: Term, cls: Term) -> bool:
        return cls in self._spo.get(s, {}).get(_RDF_TYPE, ())

    def estimate(self, atom: Sequence[Term], bound: set) -> float:
        """Expected number of matches of ``atom`` once the variables in ``bound`` are known.

        Uses the index sizes of the store as it is now; a bound variable
        counts as an average value of its position.
        """
        s, p, o = atom
        sg = not (variables_of(s) - bound)
        pg = not (variables_of(p) - bound)
        og = not (variables_of(o) - bound)
        total = len(self._log) or 1
        if pg and p.ground:
            count = self._pcount.get(p, 0)
            if sg and og:
                return 0.5
            if sg:
                return count / max(self._psubjects.get(p, 0), 1)
            if og:
                objs = self._pos.get(p, {})
                if o.ground and o.__class__ is not ListTerm:
                    return len(objs.get(o, ()))
                return count / max(len(objs), 1)
            return count
        if sg and og:
            return 1
        if sg:
            return total / max(len(self._spo), 1)
        if og:
            return total / max(len(self._osp), 1)
        return total + 1

    def extend(self, atom: Sequence[Term], b: dict) -> Iterator[dict]:
        """Yield every extension of binding ``b`` that maps ``atom`` onto a stored triple."""
        s, p, o = atom
        if not s.ground:
            s = substitute(s, b)
        if not p.ground:
            p = substitute(p, b)
        if not o.ground:
            o = substitute(o, b)
        sg, pg, og = s.ground, p.ground, o.ground
        if sg:
            pm = self._spo.get(s)
            if pm is None:
                return
            if pg:
                objs = pm.get(p)
                if not objs:
                    return
                if og:
                    if o in objs:
                        yield b
                    return
                for x in objs:
                    nb = dict(b)
                    if unify_into(o, x, nb):
                        yield nb
                return
            if og:
                preds = self._osp.get(o, {}).get(s)
                if not preds:
                    return
                for y in preds:
                    nb = dict(b)
                    if unify_into(p, y, nb):
                        yield nb
                return
            for y, objs in pm.items():
                for x in objs:
                    nb = dict(b)
                    if unify_into(p, y, nb) and unify_into(o, x, nb):
                        yield nb
            return
        if pg:
            om = self._pos.get(p)
            if om is None:
                return
            if og:
                subs = om.get(o)
                if not subs:
                    return
                for z in subs:
                    nb = dict(b)
                    if unify_into(s, z, nb):
                        yield nb
                return
            for x, subs in om.items():
                for z in subs:
                    nb = dict(b)
                    if unify_into(o, x, nb) and unify_into(s, z, nb):
                        yield nb
            return
        if og:
            sm = self._osp.get(o)
            if sm is None:
                return
            for z, preds in sm.items():
                for y in preds:
                    nb = dict(b)
                    if unify_into(s, z, nb) and unify_into(p, y, nb):
                        yield nb
            return
        for t in self._log:
            nb = dict(b)
            if unify_into(s, t.s, nb) and unify_into(p, t.p, nb) and unify_into(o, t.o, nb):
                yield nb

    def match_graph(self, premise: Sequence[Sequence[Term]]) -> list[dict]:
        """All bindings under which every premise pattern is a stored triple.

        Patterns are joined most-selective-first; the result is sorted so
        enumeration order does not depend on hashing.
        """
        if not premise:
            raise ValueError("premise must be non-empty")
        order = plan_join(self, list(premise), set())
        bindings = [{}]
        for atom in order:
            bindings = [nb for b in bindings for nb in self.extend(atom, b)]
            if not bindings:
                return []
        unique = {binding_key(b): b for b in bindings}
        return [unique[k] for k in sorted(unique)]


_RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


def _neg_key(t: Term):
    # max() with this key prefers the smallest term among equal generations
    return _Reversed(t.key())


class _Reversed:
    __slots__ = ("k",)

    def __init__(self, k):
        self.k = k

    def __lt__(self, other):
        return self.k > other.k

    def __eq__(self, other):
        return self.k == other.k


def plan_join(store: Store, atoms: list, bound: set) -> list:
    """Greedy join order: fewest unbound positions first, then smallest bucket."""
    remaining = list(atoms)
    bound = set(bound)
    order = []
    while remaining:
        def score(item):
            idx, atom = item
            unbound = sum(1 for x in atom if variables_of(x) - bound)
            return (unbound, store.estimate(atom, bound), idx)

        idx, best = min(enumerate(remaining), key=score)
        order.append(best)
        for x in best:
            bound |= variables_of(x)
        remaining.pop(idx)
    return order


# ---------------------------------------------------------------------------
# store directories


def _manifest_entries(root: Path) -> list[dict]:
    manifest = root / MANIFEST
    if manifest.exists():
        data = json.loads(manifest.read_text(encoding="utf-8"))
        return list(data.get("documents", []))
    return [{"file": p.name, "scoped": False} for p in sorted(root.glob("*.n3"))]


def load_store(path: str | os.PathLike) -> Store:
    """Load a store directory: ``manifest.json`` plus one ``.n3`` file per document.

    Without a manifest every ``*.n3`` file is loaded in name order. Each
    document is one mutation batch, so generations follow load order.
    """
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"store directory not found: {root}")
    store = Store()
    for entry in _manifest_entries(root):
        doc = parse((root / entry["file"]).read_text(encoding="utf-8"))
        scope = "" if entry.get("scoped") else Path(entry["file"]).stem
        store.load_document(doc, scope=scope)
    return store


def save_triples(path: str | os.PathLike, triples: Iterable[Triple], stem: str,
                 prefixes: dict[str, str] | None = None) -> Path | None:
    """Append a document holding ``triples`` to the store directory at ``path``.

    The directory is created if needed. Blank labels are written verbatim
    and the manifest marks the file as already scoped. Returns ``None`` (and writes nothing) when ``triples``
    is empty.
    """
    triples = list(triples)
    if not triples:
        return None
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = _manifest_entries(root)
    used = {e["file"] for e in entries}
    n = len(entries)
    name = f"{n:03d}-{stem}.n3"
    while name in used:
        n += 1
        name = f"{n:03d}-{stem}.n3"
    (root / name).write_text(serialize(Document(dict(prefixes or {}), triples)), encoding="utf-8")
    entries.append({"file": name, "scoped": True})
    (root / MANIFEST).write_text(json.dumps({"documents": entries}, indent=2) + "\n", encoding="utf-8")
    return root / name
