"""From an abstract recipe to a bound one.

The intruder-alert recipe names ingredients (a camera, a video analysis,
a notifier) but no concrete devices, so translating it yields nothing. Once
the ingredients are bound to offerings, each constraint has endpoints and
turns into exactly one network-level constraint.
"""

from __future__ import annotations

from importlib import resources

from sdnqos import BindingPlan, Store, extract, instantiate, parse, translate_all
from sdnqos.terms import Iri

EX = "https://sdnqos.example/data/"


def ex(name: str) -> Iri:
    return Iri(EX + name)


def main() -> None:
    text = (resources.files("sdnqos") / "fixtures" / "intrusion-detection.n3").read_text(encoding="utf-8")
    store = Store()
    store.load_document(parse(text))

    abstract = store.copy()
    print("before binding:", translate_all(abstract))

    plan = BindingPlan(ex("IntruderAlert"), {
        ex("Camera"): ex("CameraOne"),
        ex("VideoAnalysis"): ex("AnalysisServer"),
        ex("Notification"): ex("SirenController"),
    })
    report = instantiate(store, plan)
    print("after binding:", report)

    for app in extract(store).applications:
        for f in app.flow_filters:
            tag, value = f.requirement
            print(f"  {app.app_id.removeprefix(EX)} -> {f.destination.id.removeprefix(EX)}: {tag} = {value}")


if __name__ == "__main__":
    main()
