from __future__ import annotations

import json
import shutil

import pytest

from sdnqos import cli
from tests.support import FIXTURES

RECIPE = "https://sdnqos.example/data/IntruderAlert"


@pytest.fixture
def store_dir(tmp_path):
    def make(*names):
        d = tmp_path / "store"
        d.mkdir()
        for n in names:
            shutil.copy(FIXTURES / f"{n}.n3", d / f"{n}.n3")
        return d
    return make


def run(*args) -> int:
    return cli.main([str(a) for a in args])


def test_parse(capsys, tmp_path):
    assert run("parse", FIXTURES / "camera.n3") == 0
    assert "triples" in capsys.readouterr().out
    assert run("parse", "--dump", FIXTURES / "camera.n3") == 0
    assert "@prefix rcp:" in capsys.readouterr().out
    bad = tmp_path / "bad.n3"
    bad.write_text("@prefix ex: <http://ex/> .\nex:a ex:b ?x .\n")
    assert run("parse", bad) == 1
    assert "bad.n3:2:" in capsys.readouterr().err
    assert run("parse", tmp_path / "missing.n3") == 3


def test_usage_errors(capsys):
    assert run("parse", "--frobnicate", "x") == 4
    assert run("nonsense") == 4


@pytest.mark.parametrize("command", ["parse", "validate", "instantiate", "translate", "emit", "watch", "bench"])
def test_help(command, capsys):
    assert run(command, "--help") == 0
    assert "usage:" in capsys.readouterr().out


def test_translate_both_and_emit(store_dir, tmp_path, capsys):
    d = store_dir("camera")
    assert run("translate", "--store", d, "--engine", "both") == 0
    assert "agree" in capsys.readouterr().out
    assert run("validate", "--store", d) == 0
    out = tmp_path / "config.json"
    assert run("emit", "--store", d, "--out", out) == 0
    config = json.loads(out.read_text())
    assert config["applications"][0]["flowFilters"][0]["requirement"] == {"bandwidthBps": 3110400}
    # a second translation adds nothing and writes no new file
    files = sorted(p.name for p in d.iterdir())
    assert run("translate", "--store", d, "--engine", "both") == 0
    assert sorted(p.name for p in d.iterdir()) == files


def test_rules_engine(store_dir, capsys):
    d = store_dir("qcc")
    assert run("translate", "--store", d, "--engine", "rules", "--packs", "calculation-core,qcc") == 0
    assert "iterations" in capsys.readouterr().out
    assert run("translate", "--store", d, "--packs", "nope") == 4


def test_instantiate_workflow(store_dir, tmp_path, capsys):
    d = store_dir("intrusion-detection")
    assert run("instantiate", "--store", d, "--recipe", RECIPE, "--bind", FIXTURES / "intrusion-detection.bind") == 0
    assert "interactions concretized: 2" in capsys.readouterr().out
    assert run("instantiate", "--store", d, "--recipe", RECIPE, "--bind", FIXTURES / "intrusion-detection.bind") == 1
    assert run("instantiate", "--store", d, "--recipe", "nope:x", "--bind", "a=b") == 4
    out = tmp_path / "c.json"
    assert run("emit", "--store", d, "--out", out) == 0
    assert len(json.loads(out.read_text())["applications"]) == 2


def test_validation_failure(store_dir, capsys):
    d = store_dir("camera")
    (d / "extra.n3").write_text("@prefix rcp: <https://sdnqos.example/ns/recipe#> .\n"
                                "<https://sdnqos.example/data/CameraOne> rcp:videoEfficiency 1.5 .\n")
    assert run("validate", "--store", d) == 1
    assert "video-efficiency" in capsys.readouterr().err


def test_translation_error(store_dir, capsys):
    d = store_dir("camera")
    text = (d / "camera.n3").read_text().replace("rcp:resolutionX 1920 ;", "")
    (d / "camera.n3").write_text(text)
    assert run("translate", "--store", d) == 2
    assert "resolutionX" in capsys.readouterr().err


def test_io_errors(tmp_path, store_dir):
    assert run("emit", "--store", tmp_path / "absent", "--out", tmp_path / "x.json") == 3
    d = store_dir("camera")
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert run("emit", "--store", d, "--out", blocker / "x.json") == 3


def test_watch(store_dir, tmp_path):
    d = store_dir("camera")
    out = tmp_path / "w.json"
    assert run("watch", "--store", d, "--out", out, "--interval", 1, "--max-ticks", 1) == 0
    assert json.loads(out.read_text())["nbSchema"] == 1
    assert run("watch", "--store", d, "--out", out, "--interval", 0.5) == 4


def test_bench_csv(tmp_path, capsys):
    csv_path = tmp_path / "out.csv"
    curve = tmp_path / "curve.dat"
    assert run("bench", "--devices", 5, "--constraints", 10, "--runs", 5, "--csv", csv_path, "--curve", curve) == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "devices,constraints,run,elapsedMs,derivedTriples" and len(lines) == 6
    assert "closed form" in capsys.readouterr().err
    assert curve.read_text().startswith("# constraints")
    assert run("bench", "--devices", 0) == 4
    assert run("bench", "--sweep", "1,x") == 4
