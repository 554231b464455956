import json

import pytest

from conftest import DATA
from reconf.cli import main
from reconf.network import fixture_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cycles_tri3(capsys):
    code, out, _ = run(capsys, "cycles", "tri3.json")
    assert code == 0
    assert "β=1, cycles: 1, cycle-edges: 3, bridges: 0" in out


def test_cycles_twocycle8_lists_bridge(capsys):
    code, out, _ = run(capsys, "cycles", "twocycle8.json", "--all")
    assert code == 0
    assert "bridges: 1" in out and "bridges: [4]" in out
    assert out.count("cycle ") >= 2


def test_cycles_tree(capsys):
    code, out, _ = run(capsys, "cycles", "treefix.json")
    assert code == 0 and "β=0" in out


def test_cycles_dot(capsys, tmp_path):
    dot = tmp_path / "g.dot"
    assert run(capsys, "cycles", "ring6.json", "--dot", str(dot))[0] == 0
    assert dot.read_text().startswith("graph ring6 {")


def test_pf_json(capsys, tmp_path):
    out = tmp_path / "pf.json"
    assert run(capsys, "pf", "ring6.json", "--out", str(out))[0] == 0
    data = json.loads(out.read_text())
    for key in ("v_m", "theta", "p_flow", "q_flow", "p_g", "q_g", "f_obj", "p_loss",
                "gamma_v", "gamma_s", "iterations", "converged"):
        assert key in data
    assert data["converged"] is True


def test_pf_disconnected_topology(capsys, tmp_path):
    topo = tmp_path / "t.json"
    topo.write_text(json.dumps({"closed": [0, 1, 2, 5, 6, 7]}))
    code, _, err = run(capsys, "pf", "twocycle8.json", "--topology", str(topo))
    assert code == 3 and "error" in err


def test_solve_two_models(capsys, tmp_path):
    rep = tmp_path / "r.csv"
    code, _, _ = run(capsys, "solve", "ring6.json", "--model", "cdsr,rrdsr", "--report", str(rep))
    assert code == 0
    header, c, r = rep.read_text().splitlines()
    c, r = c.split(","), r.split(",")
    assert c[1] == "C-DSR" and r[1] == "RR-DSR"
    assert c[2] == r[2]
    assert int(c[9]) <= int(r[9])


def test_solve_tree_zero_delta(capsys):
    code, out, _ = run(capsys, "solve", "treefix.json", "--model", "cdsr")
    assert code == 0
    assert out.splitlines()[1].split(",")[4] == "0.0"


def test_solve_verify(capsys):
    code, _, err = run(capsys, "solve", "ring6.json", "--model", "cdsr", "--verify")
    assert code == 0 and "ok" in err


def test_solve_json_and_dot(capsys, tmp_path):
    js, dot = tmp_path / "r.json", tmp_path / "best.dot"
    code, _, _ = run(capsys, "solve", "tri3.json", "--json", str(js), "--dot", str(dot))
    assert code == 0
    data = json.loads(js.read_text())
    assert data["results"][0]["stats"]["incumbent_history"]
    assert "style=dashed" in dot.read_text()


def test_validation_error_exit_code(capsys, tmp_path):
    data = json.loads(fixture_path("tri3.json").read_text())
    data["buses"][1].update(is_ref=True, v_ref=1.0)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 2 and "multiple reference buses" in err


def test_missing_file(capsys):
    assert run(capsys, "cycles", "nope.json")[0] == 2


def test_unknown_model(capsys):
    assert run(capsys, "solve", "tri3.json", "--model", "foo")[0] == 2


def test_env_max_iter_infeasible(capsys, monkeypatch):
    monkeypatch.setenv("RECONF_MAX_ITER", "0")
    assert run(capsys, "solve", "ring6.json")[0] == 3


def test_export_fixture_path(capsys):
    code, out, _ = run(capsys, "solve", str(DATA / "export6.json"))
    assert code == 0 and float(out.splitlines()[1].split(",")[2]) < 0
