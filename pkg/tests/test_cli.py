import json
import subprocess
import sys
from pathlib import Path

import pytest

from dagkit import cli
from dagkit.cdga import SemifreeCdga
from dagkit.groebner import Ideal

DATA = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def in_data(monkeypatch):
    monkeypatch.chdir(DATA)
    monkeypatch.delenv("DAGKIT_PRECISION", raising=False)


def run(*argv):
    status, report, _ = cli.run(list(argv))
    return status, report


def test_validate_exits_zero():
    status, rep = run("validate", "vanishing.dga")
    assert status == 0 and rep["status"] == "ok"
    assert rep["schema"] == 1
    assert rep["command"] == {"name": "validate", "argv": ["validate", "vanishing.dga"]}


def test_homology_h0_ideal_matches_library():
    status, rep = run("homology", "vanishing.dga", "A", "--max-degree", "3")
    assert status == 0
    A = SemifreeCdga([("x", 0), ("Y", 1), ("Z", 1)], {"Y": "x^2", "Z": "x^3"})
    R = A.ring
    got = Ideal(R, [R.parse(g) for g in rep["result"]["degrees"]["0"]["ideal_gens"]])
    assert got.equals(Ideal(R, A.h0_ideal()))
    assert rep["result"]["degrees"]["1"]["q_dimension"] == 2
    assert rep["precision"]["max_degree"] == 3


def test_dtensor_point_point_euler_zero():
    status, rep = run("dtensor", "intersections.dga", "point", "point", "over", "line")
    assert status == 0
    e = rep["result"]["euler"]
    assert e["euler_characteristic"] == 0 and e["complete"]


def test_dtensor_disjoint_points_is_empty():
    status, rep = run("dtensor", "intersections.dga", "point", "moved", "over", "line")
    assert status == 0
    assert rep["result"]["homology"]["degrees"]["0"]["is_zero"]


def test_global_sections_twist():
    status, rep = run("global-sections", "--p1-twist", "-2")
    assert status == 0
    assert rep["result"]["ranks"] == {"0": 0, "1": 1}


def test_hypergroupoid_builtins():
    assert run("hypergroupoid", "--bg", "Gm")[1]["result"]["verdict"] == "yes"
    assert run("hypergroupoid", "cover.dga", "C", "--kind", "dm")[1]["result"]["verdict"] == "yes"


def test_inconclusive_precision_exits_two():
    status, rep = run("derham", "vanishing.dga", "A", "--precision", "1")
    assert status == 2 and rep["status"] == "inconclusive"
    assert rep["result"]["stabilized"] is False
    status, _ = run("derham", "vanishing.dga", "A", "--precision", "3")
    assert status == 0


def test_precision_env_echoed(monkeypatch):
    monkeypatch.setenv("DAGKIT_PRECISION", "1")
    status, rep = run("derham", "vanishing.dga", "A")
    assert status == 2
    assert rep["precision"]["env"] == "1"
    # an explicit flag overrides the environment
    assert run("derham", "vanishing.dga", "A", "--precision", "3")[0] == 0


def test_errors_exit_one():
    status, rep = run("homology", "missing.dga")
    assert status == 1 and rep["status"] == "error"
    status, rep = run("homology", "vanishing.dga", "nope")
    assert status == 1
    with pytest.raises(SystemExit) as e:
        cli.run(["nosuch"])
    assert e.value.code == 1


def test_dsl_error_reported_with_span(tmp_path):
    bad = tmp_path / "bad.dga"
    bad.write_text("cdga A { gens x:0, Y:1, Z:1;\n diff Y -> Z; }\n")
    status, rep = run("validate", str(bad))
    assert status == 1
    assert rep["error"]["type"] == "dsl" and rep["error"]["kind"] == "degree"
    assert rep["error"]["message"].startswith("2:9:")


def test_timing_only_on_request():
    _, rep = run("nerve", "--cyclic", "2")
    assert "timing" not in rep
    _, rep = run("nerve", "--cyclic", "2", "--timing")
    assert rep["timing"]["seconds"] >= 0


def test_inputs_are_hashed():
    _, rep = run("cech", "cover.dga", "C")
    digest = rep["inputs"]["cover.dga"]
    assert len(digest) == 64
    assert run("cech", "cover.dga", "C")[1]["inputs"]["cover.dga"] == digest


def test_json_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        cli.main(["ez", "--count", "2", "--seed", "3"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["status"] == "ok"


def test_text_format(capsys):
    assert cli.main(["homology", "postnikov.dga", "W", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("command:") and "status: \"ok\"" in out


def test_console_script_entry():
    p = subprocess.run([sys.executable, "-m", "dagkit.cli", "nerve", "--cyclic", "3"],
                       capture_output=True, text=True, cwd=DATA)
    assert p.returncode == 0
    rep = json.loads(p.stdout)
    assert rep["command"]["name"] == "nerve"
