import json
import subprocess
import sys

import pytest

from qbisect.cli import main

FAST = ["--trials", "quaternion.triples=20", "--trials", "linalg.vectors=5",
        "--trials", "linalg.systems=5", "--trials", "model.pairs=5", "--trials", "model.h4_pairs=5",
        "--trials", "isometry.maps=2", "--trials", "mostow.spine=3", "--trials", "mostow.fiber=2",
        "--trials", "mostow.bisector=3", "--trials", "mostow.triple=3",
        "--trials", "mostow.pythagoras=3", "--trials", "mostow.rebuild=1",
        "--trials", "fan.points=1", "--trials", "fan.blade_samples=2", "--trials", "fan.pairs=1",
        "--trials", "fan.selector_pairs=1", "--trials", "starlike.pairs=1"]


def test_run_pass_and_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["run", "--seed", "3", "--threads", "1", "--out", str(out), *FAST]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "qbisect/report/v1" and doc["status"] == "PASS" and doc["seed"] == 3
    assert "overall    PASS" in capsys.readouterr().err


def test_run_negative_control_exits_one(capsys):
    code = main(["run", "--suites", "mostow", "--negative-control", "--threads", "1", *FAST])
    assert code == 1
    assert "mostow     FAIL" in capsys.readouterr().err


def test_usage_errors_exit_two(tmp_path, capsys):
    assert main([]) == 2
    assert main(["run", "--n", "0"]) == 2
    assert "invalid config: n:" in capsys.readouterr().err
    assert main(["run", "--backend", "decimal"]) == 2
    assert main(["run", "--tolerance", "-1"]) == 2
    assert main(["run", "--trials", "mostow"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"suites": ["nope"]}')
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["frobnicate"]) == 2
    same = '[["1/2","0","0","0"]]'
    assert main(["bisector", "--p1", same, "--p2", same]) == 2
    assert main(["bisector", "--p1", "[1", "--p2", same]) == 2


def test_config_file_with_overrides(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"schema": "qbisect/scenario/v1", "n": 3, "seed": 8,
                               "suites": ["quaternion"], "trials": {"quaternion": {"triples": 5}}}))
    assert main(["run", "--config", str(cfg), "--seed", "9", "--json", "--threads", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["scenario"]["n"] == 3 and doc["seed"] == 9


def test_certify_and_check(tmp_path, capsys):
    cert = tmp_path / "c.json"
    args = ["certify", "--seed", "2", "--trials", "certify.points=5", "--trials",
            "certify.blades=1", "--out", str(cert)]
    assert main(args) == 0
    assert main(["check", str(cert)]) == 0
    assert "ACCEPT  11 entries verified" in capsys.readouterr().out
    doc = json.loads(cert.read_text())
    doc["body"]["entries"][0]["X"][0][0] += "1"
    cert.write_text(json.dumps(doc))
    assert main(["check", str(cert)]) == 1
    assert "REJECT" in capsys.readouterr().out
    assert main(["check", str(tmp_path / "none.json")]) == 2
    assert main(["certify", "--backend", "float"]) == 2


def test_sample_and_bisector(tmp_path, capsys):
    assert main(["sample", "--what", "spine", "--count", "4", "--seed", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["what"] == "spine" and len(doc["points"]) == 4
    p1, p2 = '[["1/2","0","0","0"],["0","0","0","0"]]', '[["-1/2","0","0","0"],["0","0","0","0"]]'
    assert main(["bisector", "--p1", p1, "--p2", p2, "--emit", "slice", "--count", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert all(r["member"] for r in doc["points"])


def test_fan_command(tmp_path, capsys):
    cfg = tmp_path / "fan.json"
    cfg.write_text(json.dumps({"n": 2, "seed": 4, "selectors": 2, "trials": 3}))
    assert main(["fan", "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "qbisect/fan-report/v1" and len(doc["blades"]) == 2
    cfg.write_text(json.dumps({"selectors": 0}))
    assert main(["fan", "--config", str(cfg)]) == 2


def test_demo(capsys):
    assert main(["demo"]) == 0
    out = capsys.readouterr().out
    assert "-51/64" in out and "inside B: True" in out


def test_console_script_version():
    res = subprocess.run([sys.executable, "-m", "qbisect.cli", "--version"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("qbisect ")


@pytest.mark.parametrize("threads", ["1", "2"])
def test_threads_env_does_not_change_report(tmp_path, monkeypatch, threads):
    monkeypatch.setenv("QBISECT_THREADS", threads)
    out = tmp_path / "r.json"
    assert main(["run", "--seed", "6", "--suites", "mostow,fan", "--out", str(out), *FAST]) == 0
    ref = tmp_path.parent / "threads_ref.json"
    if ref.exists():
        assert ref.read_bytes() == out.read_bytes()
    else:
        ref.write_bytes(out.read_bytes())
