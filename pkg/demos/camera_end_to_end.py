"""A single camera, from device description to controller configuration.

The camera fixture describes CameraOne (1920x1080, video efficiency 0.95)
streaming to an analyzer at 30 frames/s. Translation turns the frame-rate
constraint into a minimum bandwidth of (1 - 0.95) * 1920 * 1080 * 30 bits/s
and the emitter writes the resulting flow filter as JSON.

Run with ``python3 demos/camera_end_to_end.py [output.json]``.
"""

from __future__ import annotations

import json
import sys
from importlib import resources

from sdnqos import SDN, Store, emit, extract, parse, translate_all
from sdnqos.terms import RDF_TYPE, parse_numeric


def main(out: str | None = None) -> None:
    text = (resources.files("sdnqos") / "fixtures" / "camera.n3").read_text(encoding="utf-8")
    store = Store()
    store.load_document(parse(text))
    print(f"loaded {len(store)} triples")

    report = translate_all(store)
    print(report)

    for q in store.subjects(RDF_TYPE, SDN.BandwidthConstraint):
        value = parse_numeric(store.value(q, SDN.minBandwidth))
        print(f"minimum bandwidth: {value} bits/s ({float(value) / 1e6:.2f} Mbit/s)")

    config = extract(store)
    if out:
        print(f"wrote {emit(config, out)} bytes to {out}")
    else:
        print(json.dumps(config.to_dict(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
