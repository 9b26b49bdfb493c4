"""Keeping a controller configuration in sync with a changing store.

A watcher re-emits the configuration only when it changes. Here a second
camera constraint is added between ticks; the watcher sees the new flow
filter and logs the delta, and a tick without changes emits nothing.
"""

from __future__ import annotations

import logging
import tempfile
from fractions import Fraction
from importlib import resources
from pathlib import Path

from sdnqos import RCP, Store, Watcher, parse, translate_all
from sdnqos.northbound import FileSink
from sdnqos.terms import RDF_TYPE, Iri, Literal, Triple

EX = "https://sdnqos.example/data/"


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    store = Store()
    store.load_document(parse((resources.files("sdnqos") / "fixtures" / "camera.n3").read_text(encoding="utf-8")))
    translate_all(store)

    out = Path(tempfile.mkdtemp()) / "config.json"
    watcher = Watcher(FileSink(out))
    print("tick 1:", watcher.tick(store).summary())
    print("tick 2:", watcher.tick(store))

    feed, c = Iri(EX + "VideoFeed"), Iri(EX + "CameraHighRate")
    camera, analyzer = Iri(EX + "CameraOne"), Iri(EX + "Analyzer")
    store.insert_batch([
        Triple(feed, RCP.hasConstraint, c),
        Triple(c, RDF_TYPE, RCP.FrameRateConstraint),
        Triple(c, RCP.framesPerSecond, Literal.of(60)),
        Triple(c, RCP.interactionFrom, camera),
        Triple(c, RCP.interactionTo, analyzer),
    ])
    translate_all(store)
    delta = watcher.tick(store)
    print("tick 3:", delta.summary())
    print(f"expected new requirement: {(1 - Fraction('0.95')) * 1920 * 1080 * 60} bits/s")
    print(f"{watcher.emissions} emissions written to {out}")


if __name__ == "__main__":
    main()
