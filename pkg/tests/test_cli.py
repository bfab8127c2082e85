import json
import subprocess
import sys

import pytest

from extremal.cli import RunConfig, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out


def report(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out.out)


def test_construct_writes_algebra(tmp_path, capsys):
    path = tmp_path / "alg.json"
    code, rep = report(capsys, "construct", "--field", "GF(3)", "--kind", "sl", "-n", "3", "--out", str(path))
    assert code == 0
    assert rep["algebra"]["dim"] == 8 and rep["algebra"]["center_dim"] == 1
    assert json.loads(path.read_text())["n"] == 3


def test_verify_passes_on_sl(capsys):
    code, rep = report(capsys, "verify", "--field", "GF(2)", "--kind", "sl", "-n", "3")
    assert code == 0 and rep["points"] == 21
    assert all(c["pass"] for c in rep["checks"].values())


def test_verify_corrupted_structure_fails_with_witness(capsys):
    code, rep = report(capsys, "verify", "--field", "GF(2)", "--kind", "sl", "-n", "3", "--corrupt")
    assert code == 1
    p1 = rep["checks"]["P1"]
    assert not p1["pass"] and p1["witness"]["basis"] == [0, 1]


def test_verify_unitary_has_no_lines(capsys):
    code, rep = report(capsys, "verify", "--field", "GF(4)", "--kind", "su", "-n", "3")
    assert code == 0 and rep["checks"]["no_extremal_lines"]["pass"]


def test_geometry_json_and_dot(tmp_path, capsys):
    dot = tmp_path / "g.dot"
    code, rep = report(capsys, "geometry", "--field", "GF(2)", "--kind", "sl", "-n", "3", "--dot", str(dot))
    assert code == 0 and rep["matches_flag_model"]
    assert rep["geometry"]["points"] == 21 and rep["geometry"]["lines"] == 14
    assert dot.read_text().startswith("graph")


def test_out_redirects_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, head = report(capsys, "classify", "--field", "GF(2)", "--kind", "sl", "-n", "3", "--out", str(out))
    assert code == 0 and head == {"ok": True, "report": str(out)}
    rep = json.loads(out.read_text())
    assert rep["schema"] == "extremal.report/1"
    assert rep["cases"] == {"a": 21, "b": 84, "d": 168, "e": 168}


def test_extend_and_polarity(capsys):
    code, rep = report(capsys, "extend", "--field", "GF(4)", "--kind", "su", "-n", "3", "--extension", "GF(4)")
    assert code == 0 and rep["radical_dim"] == 0 and rep["matches_flag_model"]
    code, rep = report(capsys, "polarity", "--field", "GF(4)", "-n", "3", "--gram", "standard")
    assert code == 0 and rep["epsilon"] == "-1" and rep["tau"] == "frobenius"


def test_local_command(capsys):
    code, rep = report(capsys, "local", "--field", "GF(5)", "-n", "6", "--samples", "2", "--seed", "4")
    assert code == 0 and len(rep["samples"]) == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = RunConfig.from_dict({"field": "GF(3)", "construction": {"kind": "sl", "n": 3}})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    code, rep = report(capsys, "construct", "--config", str(path), "-n", "4")
    assert code == 0 and rep["algebra"]["dim"] == 15
    assert rep["config"]["construction"]["n"] == 4
    assert RunConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_unknown_config_key_rejected(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"field": "GF(3)", "colour": "blue"}))
    code, out = run(capsys, "construct", "--config", str(path))
    assert code == 2 and "colour" in out.err


def test_bad_field_is_a_config_error(capsys):
    code, out = run(capsys, "construct", "--field", "GF(6)", "--kind", "sl", "-n", "3")
    assert code == 2 and out.err.startswith("error:")


def test_suite_subset(capsys):
    code, out = run(capsys, "suite", "--criteria", "2,10")
    assert code == 0
    lines = [l for l in out.out.splitlines() if l.startswith("[")]
    assert len(lines) == 2 and all(l.startswith("[PASS]") for l in lines)


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "extremal.cli", "construct", "--field", "GF(2)",
                        "--kind", "sl", "-n", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["algebra"]["dim"] == 8
