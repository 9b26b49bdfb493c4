"""Command-line entry point: ``sdnqos <command> ...``.

Exit codes: 0 success, 1 parse or validation failure, 2 translation error,
3 I/O error, 4 bad arguments.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import bench as bench_mod
from .errors import (
    AmbiguousTenant,
    BuiltinTypeError,
    DivisionByZero,
    IncompleteConfig,
    InstantiationError,
    ParseError,
    RuleError,
    SinkError,
    UnknownPack,
    UnresolvedReference,
    VariableInData,
)
from .instantiator import instantiate, load_plan
from .n3 import parse, serialize
from .northbound import DEFAULT_INTERVAL, emit, extract, open_sink, watch
from .store import MANIFEST, Store, load_store, save_triples
from .terms import Iri
from .translator import PACKS, compare_paths, translate_all, translate_rules
from .vocab import PREFIXES, validate

OK, FAILED, TRANSLATION, IO, USAGE = 0, 1, 2, 3, 4

log = logging.getLogger("sdnqos")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, UsageError):
        return USAGE
    if isinstance(exc, (UnresolvedReference, DivisionByZero, BuiltinTypeError, RuleError, UnknownPack)):
        return TRANSLATION
    if isinstance(exc, (ParseError, VariableInData, InstantiationError, IncompleteConfig, AmbiguousTenant)):
        return FAILED
    if isinstance(exc, (OSError, SinkError)):
        return IO
    return FAILED


def _iri(text: str, prefixes: dict) -> Iri:
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    if "://" in text or text.startswith("urn:"):
        return Iri(text)
    pfx, _, local = text.partition(":")
    if pfx in prefixes:
        return Iri(prefixes[pfx] + local)
    raise UsageError(f"cannot resolve IRI {text!r}")


def _packs(text: str | None) -> list[str] | None:
    if not text:
        return None
    names = [n.strip() for n in text.split(",") if n.strip()]
    for n in names:
        if n not in PACKS:
            raise UsageError(f"unknown pack {n!r}; choose from {', '.join(PACKS)}")
    return names


def _store(path: str) -> Store:
    if not Path(path).is_dir():
        raise FileNotFoundError(f"store directory not found: {path}")
    return load_store(path)


def _persist(path: str, store: Store, since: int, stem: str) -> None:
    new = store.triples_since(since)
    written = save_triples(path, new, stem, {**PREFIXES, **store.prefixes})
    if written is not None:
        print(f"wrote {len(new)} triples to {written}")


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args) -> int:
    status = OK
    for name in args.files:
        text = Path(name).read_text(encoding="utf-8")
        try:
            doc = parse(text)
        except ParseError as exc:
            print(f"{name}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
            status = FAILED
            continue
        if args.dump:
            sys.stdout.write(serialize(doc))
        else:
            print(f"{name}: {len(doc.triples)} triples, {len(doc.rules)} rules")
    return status


def cmd_validate(args) -> int:
    store = _store(args.store)
    violations = validate(store)
    for v in violations:
        print(v, file=sys.stderr)
    errors = [v for v in violations if v.severity == "error"]
    print(f"{len(errors)} errors, {len(violations) - len(errors)} warnings")
    return FAILED if errors else OK


def cmd_instantiate(args) -> int:
    store = _store(args.store)
    prefixes = {**PREFIXES, **store.prefixes}
    plan = load_plan(_iri(args.recipe, prefixes), args.bind, prefixes)
    before = len(store)
    report = instantiate(store, plan, _packs(args.packs))
    print(report)
    _persist(args.store, store, before, "instantiate")
    return OK


def cmd_translate(args) -> int:
    store = _store(args.store)
    packs = _packs(args.packs)
    before = len(store)
    if args.engine == "both":
        result = compare_paths(store, packs)
        print(result.report)
        print(f"rule engine: {result.fixpoint.iterations} iterations, {result.fixpoint.derived} derived, "
              f"{result.fixpoint.elapsed_ms:.1f} ms")
        if not result.equivalent:
            print(f"divergence: direct path {len(result.direct)} triples, rule path {len(result.rules)} triples",
                  file=sys.stderr)
            return TRANSLATION
        print("direct and rule paths agree")
        translate_all(store, packs)
    elif args.engine == "rules":
        fp = translate_rules(store, packs)
        print(f"rule engine: {fp.iterations} iterations, {fp.derived} derived, {fp.elapsed_ms:.1f} ms"
              + (" (iteration cap hit)" if fp.capped else ""))
    else:
        print(translate_all(store, packs))
    _persist(args.store, store, before, f"translate-{args.engine}")
    return OK


def cmd_emit(args) -> int:
    store = _store(args.store)
    n = emit(extract(store), open_sink(args.out))
    print(f"wrote {n} bytes to {args.out}")
    return OK


class _DirectorySource:
    """Reloads a store directory whenever its manifest or file list changes."""

    def __init__(self, path: str):
        self.path = Path(path)
        self.signature = None
        self.store: Store | None = None

    def _signature(self):
        files = sorted(self.path.glob("*.n3")) + [self.path / MANIFEST]
        return tuple((f.name, f.stat().st_mtime_ns, f.stat().st_size) for f in files if f.exists())

    def __call__(self) -> Store:
        sig = self._signature()
        if self.store is None or sig != self.signature:
            self.store = load_store(self.path)
            self.signature = sig
        return self.store


def cmd_watch(args) -> int:
    if args.interval < 1:
        raise UsageError("--interval must be at least 1 second")
    _store(args.store)
    watch(_DirectorySource(args.store), args.interval, open_sink(args.out), max_ticks=args.max_ticks)
    return OK


def cmd_bench(args) -> int:
    sizes = [args.constraints]
    if args.sweep:
        try:
            sizes = [int(x) for x in args.sweep.split(",")]
        except ValueError:
            raise UsageError("--sweep takes comma-separated integers") from None
    try:
        scenarios = [bench_mod.BenchScenario(args.devices, m, args.runs, args.seed) for m in sizes]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = []
    for sc in scenarios:
        r = bench_mod.run(sc)
        expected = bench_mod.expected_derived(sc)
        print(f"devices={sc.devices} constraints={sc.constraints} median={r.median_ms:.1f} ms "
              f"max={max(r.elapsed_ms):.1f} ms derived={r.derived[0]} (closed form {expected})",
              file=sys.stderr)
        results.append(r)
    if args.csv:
        bench_mod.write_csv(results, args.csv)
    else:
        bench_mod.write_csv(results, sys.stdout)
    if args.curve:
        Path(args.curve).write_text(bench_mod.curve(results), encoding="utf-8")
    return OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdnqos", description="Translate IoT application QoS constraints into SDN configurations.")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    c = sub.add_parser("parse", help="parse N3 files; --dump re-serializes canonically")
    c.add_argument("files", nargs="+")
    c.add_argument("--dump", action="store_true")
    c.set_defaults(func=cmd_parse)

    c = sub.add_parser("validate", help="check a store against the vocabulary invariants")
    c.add_argument("--store", required=True)
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("instantiate", help="bind a recipe's ingredients and translate")
    c.add_argument("--store", required=True)
    c.add_argument("--recipe", required=True)
    c.add_argument("--bind", required=True, nargs="+", metavar="FILE|ING=OFF")
    c.add_argument("--packs", help="comma-separated rule packs (default: all)")
    c.set_defaults(func=cmd_instantiate)

    c = sub.add_parser("translate", help="translate bound application constraints")
    c.add_argument("--store", required=True)
    c.add_argument("--packs", help="comma-separated rule packs (default: all)")
    c.add_argument("--engine", choices=["direct", "rules", "both"], default="direct")
    c.set_defaults(func=cmd_translate)

    c = sub.add_parser("emit", help="write the northbound configuration once")
    c.add_argument("--store", required=True)
    c.add_argument("--out", required=True, metavar="PATH|URL")
    c.set_defaults(func=cmd_emit)

    c = sub.add_parser("watch", help="re-emit the configuration whenever it changes")
    c.add_argument("--store", required=True)
    c.add_argument("--out", required=True, metavar="PATH|URL")
    c.add_argument("--interval", type=float, default=DEFAULT_INTERVAL)
    c.add_argument("--max-ticks", type=int, default=None, help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_watch)

    c = sub.add_parser("bench", help="time the rule-engine translation of generated scenarios")
    c.add_argument("--devices", type=int, default=100)
    c.add_argument("--constraints", type=int, default=500)
    c.add_argument("--runs", type=int, default=5)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--sweep", help="comma-separated constraint counts, e.g. 100,200,300")
    c.add_argument("--csv", help="write timing rows here instead of standard output")
    c.add_argument("--curve", help="write 'constraints median_ms' lines here")
    c.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported by argparse
        return exc.code if isinstance(exc.code, int) else USAGE
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return OK
    except Exception as exc:  # mapped to exit codes
        code = _exit_code(exc)
        if code == FAILED and not isinstance(exc, (ParseError, InstantiationError, IncompleteConfig,
                                                   AmbiguousTenant, VariableInData)):
            raise
        print(f"sdnqos: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
