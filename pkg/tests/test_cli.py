import io
import json

import pytest

from psmech import catalog
from psmech.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def report(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


@pytest.fixture
def export(tmp_path):
    def write(name, **params):
        f = tmp_path / f"{name}.json"
        f.write_text(json.dumps(catalog.document(name, **params)))
        return str(f)
    return write


def test_catalog_list_and_run():
    code, rep = report("catalog", "list")
    assert code == 0 and {e["id"] for e in rep["entries"]} == set(catalog.ids())
    code, rep = report("catalog", "run", "counterexample-r4")
    assert code == 0 and rep["passed"] and rep["schema"] == "psmech.report/1"
    s = rep["result"]["summary"]
    assert s["condition_A"] == [True, False] and s["condition_B"] is True and s["blacker"] is False
    assert rep["seed"] == 0 and "rank_rel" in rep["tolerances"]


def test_catalog_parameters():
    code, rep = report("catalog", "run", "polynomial", "--param", "b=2", "c=2")
    assert code == 0 and rep["result"]["summary"]["classification"] == "NotFormallyStable"
    assert rep["result"]["catalog"] == {"id": "polynomial", "params": {"a": 1, "b": 2, "c": 2, "d": 1, "e": 1}}
    assert run("catalog", "run", "polynomial", "--param", "f=2")[0] == 2
    assert run("catalog", "run", "polynomial", "--param", "b")[0] == 2


def test_export_then_run_the_file(tmp_path):
    code, text = run("catalog", "export", "example-r7")
    assert code == 0
    f = tmp_path / "r7.json"
    f.write_text(text)
    code, rep = report("catalog", "run", str(f))
    assert code == 0 and rep["passed"]


def test_input_errors_exit_two(tmp_path, capsys):
    assert run("catalog", "run", "nope")[0] == 2
    assert run("catalog", "export")[0] == 2
    assert run("frobnicate")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"dimension": 2,')
    assert run("check", str(bad))[0] == 2
    doc = {"name": "x", "dimension": 2, "k": 1, "forms": [[["", "x1 *"], ["", ""]]]}
    bad.write_text(json.dumps(doc))
    assert run("check", str(bad))[0] == 2
    assert "forms[0][0][1]" in capsys.readouterr().err
    doc["forms"] = [[["", "1"], ["1", ""]]]
    bad.write_text(json.dumps(doc))
    assert run("check", str(bad))[0] == 2
    assert run("check", str(tmp_path / "missing.json"))[0] == 2


def test_check_verdicts(export, tmp_path):
    code, rep = report("check", export("oscillators-cartesian"), "--points", "10")
    assert code == 0 and rep["passed"] and rep["result"]["points"] == 10
    doc = catalog.document("oscillators-cartesian")
    doc["symmetry"]["momentum"][0][0] = "q1_1*p1_2"
    f = tmp_path / "wrong.json"
    f.write_text(json.dumps(doc))
    code, rep = report("check", str(f), "--points", "5")
    assert code == 1 and not rep["passed"]
    assert run("check", str(f), "--points", "0")[0] == 2


def test_reduce(export):
    code, rep = report("reduce", export("counterexample-r4"))
    assert code == 1 and rep["result"]["reduction"]["blacker"] is False
    assert rep["result"]["assumptions"] == {"quotientable": True}
    code, rep = report("reduce", export("example-r7"), "--level", "0.3,0.2")
    assert code == 0 and rep["result"]["level"]["mu"] == [[0.3], [0.2]]
    f = export("polynomial")
    code, rep = report("reduce", f, "--level", "@0.1,0.2,0.3,-0.2,0.4,0.5,0.1,-0.3")
    assert code == 0 and rep["result"]["weak_regularity"]["verdict"] == "WeaklyRegular"
    assert rep["result"]["cocycle"]["equivariant"] is False and rep["result"]["notes"]
    assert run("reduce", f, "--level", "1,2")[0] == 2


def test_equilibria(export, tmp_path):
    f = export("affine-lie")
    code, rep = report("equilibria", f, "--classify")
    assert code == 0 and rep["result"]["equilibria"]
    e = rep["result"]["equilibria"][0]
    assert e["stability"]["classification"] == "FormallyStable"
    assert e["equilibrium"]["xi"][0] == pytest.approx(1.0)
    code, rep = report("equilibria", f, "--grid", "x3=-0.5:0.5:3;x5=-0.5:0.5:2")
    assert code == 0 and rep["result"]["seeds"] == 6
    seeds = tmp_path / "seeds.json"
    seeds.write_text("[[0, 0, 0]]")
    assert run("equilibria", f, "--seeds", str(seeds))[0] == 2
    assert run("equilibria", f, "--grid", "x9=0:1:2")[0] == 2


def test_simulate(export):
    f = export("oscillators-cartesian")
    ic = ",".join(["1", "0", "0.2", "0", "1", "0.1", "1", "0", "0.2", "0", "2", "0.1"])
    code, text = run("simulate", f, "--ic", ic, "--t", "10", "--conserve")
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("t,x1,") and lines[-1].startswith("# conservation pass")
    assert any(l.startswith("# drift h1 ") for l in lines)
    code, text = run("simulate", f, "--ic", ic, "--t", "1", "--method", "rk4", "--dt", "0.01")
    assert code == 0 and len(text.splitlines()) == 102
    assert run("simulate", f, "--ic", "1,2", "--t", "1")[0] == 2
    assert run("simulate", f, "--ic", ic, "--t", "1", "--method", "rk4", "--dt", "-1")[0] == 2


def test_simulate_reports_leaving_the_domain(export):
    f = export("oscillators", k=1, b=1.0)
    # purely radial infall: r reaches zero
    code, _ = run("simulate", f, "--ic", "1,1.5,0,-5,0,0", "--t", "5")
    assert code == 1
