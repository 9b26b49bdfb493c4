"""Scaling benchmark: translation time against the number of constraints.

A scenario has N cameras streaming to one analyzer through M frame-rate
constraints, handed out to the cameras round-robin. Every run builds a
fresh store and times the rule-engine fixpoint over the camera pack.

Each constraint derives a fixed number of triples, so the derived count of
a run is known in closed form (:func:`expected_derived`) and checked.
"""

from __future__ import annotations

import csv
import io
import random
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .engine import fixpoint
from .store import Store
from .terms import RDF_TYPE, Iri, Literal, Triple
from .translator import rule_pack
from .vocab import RCP, SDN

DATA = "https://sdnqos.example/bench/"
CSV_COLUMNS = ("devices", "constraints", "run", "elapsedMs", "derivedTriples")

RESOLUTIONS = ((640, 480), (1280, 720), (1920, 1080), (2560, 1440), (3840, 2160))
EFFICIENCIES = ("0.9", "0.92", "0.95", "0.97", "0.99")
FRAME_RATES = (15, 25, 30, 60)

# Derived triples per unit; the breakdown is in expected_derived.
PER_CONSTRAINT = 38
PER_APPLICATION = 8
PER_TENANT = 1


@dataclass(frozen=True)
class BenchScenario:
    devices: int
    constraints: int
    runs: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.devices < 1 or self.constraints < 1:
            raise ValueError("devices and constraints must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass
class BenchResult:
    scenario: BenchScenario
    elapsed_ms: list[float] = field(default_factory=list)
    derived: list[int] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)

    @property
    def median_ms(self) -> float:
        return statistics.median(self.elapsed_ms)

    def rows(self) -> list[dict]:
        sc = self.scenario
        return [
            {"devices": sc.devices, "constraints": sc.constraints, "run": k + 1,
             "elapsedMs": f"{ms:.3f}", "derivedTriples": d}
            for k, (ms, d) in enumerate(zip(self.elapsed_ms, self.derived))
        ]


def _d(name: str) -> Iri:
    return Iri(DATA + name)


def _address(k: int) -> Literal:
    return Literal(f"10.1.{k // 250}.{k % 250 + 1}")


def generate(sc: BenchScenario) -> Store:
    """A store with the scenario's devices and endpoint-complete constraints.

    Device properties and frame rates are drawn from ``random.Random(seed)``.
    """
    rng = random.Random(sc.seed)
    recipe = _d("Recipe")
    analyzer, analyzer_port, switch = _d("Analyzer"), _d("AnalyzerPort"), _d("Switch")
    t = [
        Triple(recipe, RDF_TYPE, RCP.Recipe),
        Triple(recipe, RCP.validFrom, Literal("2024-01-01T00:00:00Z", "http://www.w3.org/2001/XMLSchema#dateTime")),
        Triple(recipe, RCP.validUntil, Literal("2024-12-31T23:59:59Z", "http://www.w3.org/2001/XMLSchema#dateTime")),
        Triple(switch, RDF_TYPE, SDN.NetworkNode),
        Triple(analyzer, RDF_TYPE, RCP.Device),
        Triple(analyzer, RCP.deviceAddress, Literal("10.0.0.1")),
        Triple(analyzer, SDN.hasInterface, analyzer_port),
        Triple(analyzer_port, RDF_TYPE, SDN.Interface),
        Triple(analyzer_port, SDN.node, switch),
        Triple(analyzer_port, SDN.port, Literal.of(1)),
    ]
    cameras = []
    for k in range(sc.devices):
        cam, port = _d(f"Camera{k}"), _d(f"Camera{k}Port")
        x, y = rng.choice(RESOLUTIONS)
        e = Fraction(rng.choice(EFFICIENCIES))
        t += [
            Triple(cam, RDF_TYPE, RCP.Device),
            Triple(cam, RCP.resolutionX, Literal.of(x)),
            Triple(cam, RCP.resolutionY, Literal.of(y)),
            Triple(cam, RCP.videoEfficiency, Literal.of(e)),
            Triple(cam, RCP.deviceAddress, _address(k)),
            Triple(cam, SDN.hasInterface, port),
            Triple(port, RDF_TYPE, SDN.Interface),
            Triple(port, SDN.node, switch),
            Triple(port, SDN.port, Literal.of(k + 2)),
        ]
        cameras.append(cam)
    for j in range(sc.constraints):
        cam = cameras[j % sc.devices]
        i, c = _d(f"Stream{j}"), _d(f"FrameRate{j}")
        t += [
            Triple(recipe, RCP.hasInteraction, i),
            Triple(i, RDF_TYPE, RCP.Interaction),
            Triple(i, RCP.interactionFrom, cam),
            Triple(i, RCP.interactionTo, analyzer),
            Triple(i, RCP.hasConstraint, c),
            Triple(c, RDF_TYPE, RCP.FrameRateConstraint),
            Triple(c, RCP.framesPerSecond, Literal.of(rng.choice(FRAME_RATES))),
            Triple(c, RCP.interactionFrom, cam),
            Triple(c, RCP.interactionTo, analyzer),
        ]
    return Store(t)


def pack_fact_count() -> int:
    return len(rule_pack("camera-framerate").facts)


def expected_derived(sc: BenchScenario) -> int:
    """Triples a fixpoint over the camera pack adds to ``generate(sc)``.

    Per constraint (38):
      qos:needs for the product and the nested difference          2
      two evaluation nodes, 3 triples each                          6
      argument values: 4 for the product, 2 for the difference     6
      walk states: 5 for the product, 3 for the difference          8
      two results and the target value                              3
      flow filter: link, 6 filter, 3 match, 3 requirement triples  13
    Per camera that carries a constraint (8): the application node (6
    triples incl. type) and its validity period (type, start, end).
    Once: the recipe typed sdn:Tenant, and the pack facts.
    """
    return pack_fact_count() + PER_CONSTRAINT * sc.constraints + \
        PER_APPLICATION * min(sc.devices, sc.constraints) + PER_TENANT


def run(sc: BenchScenario, warmup: bool = True) -> BenchResult:
    """Time ``sc.runs`` fixpoints, each on a fresh store; a warm-up run is discarded."""
    ruleset = rule_pack("camera-framerate")
    result = BenchResult(sc)
    if warmup:
        fixpoint(generate(sc), ruleset)
    for _ in range(sc.runs):
        store = generate(sc)
        start = time.perf_counter()
        report = fixpoint(store, ruleset)
        elapsed = (time.perf_counter() - start) * 1000.0
        result.elapsed_ms.append(elapsed)
        result.derived.append(report.derived)
        result.iterations.append(report.iterations)
    if len(set(result.derived)) != 1:
        raise RuntimeError(f"non-deterministic derivation counts: {result.derived}")
    return result


def sweep(devices: int = 100, constraints: Sequence[int] = (100, 200, 300, 400, 500),
          runs: int = 5, seed: int = 42) -> list[BenchResult]:
    return [run(BenchScenario(devices, m, runs, seed)) for m in constraints]


def write_csv(results: Iterable[BenchResult], out) -> None:
    """Write timing rows to a path or text stream."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_csv(results, fh)
        return
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerows(r.rows())


def csv_text(results: Iterable[BenchResult]) -> str:
    buf = io.StringIO()
    write_csv(results, buf)
    return buf.getvalue()


def curve(results: Iterable[BenchResult]) -> str:
    """Gnuplot-friendly ``constraints median_ms`` lines."""
    lines = ["# constraints median_ms"]
    lines += [f"{r.scenario.constraints} {r.median_ms:.3f}" for r in results]
    return "\n".join(lines) + "\n"
