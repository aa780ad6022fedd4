from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from nervelab.cli import run
from nervelab.poset import parse_dot_edges
from nervelab.toys import negative_controls


def _run(argv, tmp_path=None):
    buf = io.StringIO()
    code = run(argv, stdout=buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    return code, lines, buf.getvalue()


def _checks(lines):
    return {line["check"]: line for line in lines if "check" in line}


def test_crt_counts():
    code, lines, _ = _run(["verify", "crt-counts", "--max", "4"])
    assert code == 0
    assert [line["count"] for line in lines if line.get("check") == "crt count"] == [1, 5, 19, 69, 251]
    assert lines[-1]["status"] == "pass"


def test_cpt_inner_one_move(tmp_path):
    out = tmp_path / "cert.json"
    code, lines, _ = _run(["verify", "cpt-inner", "-n", "1", "--certificate", str(out)])
    assert code == 0
    assert _checks(lines)["box inside CCpt inner anodyne"]["moves"] == 1
    assert len(json.loads(out.read_text())["moves"]) == 1


def test_cart_cover():
    code, lines, _ = _run(["verify", "cart-cover", "-n", "1"])
    assert code == 0


def test_komp_toy2():
    code, lines, _ = _run(["komp", "--cat", "toy2.json", "--sigma", "j", "--alpha", "1", "--checks", "filtered,homology"])
    assert code == 0
    checks = _checks(lines)
    assert checks["opposite is filtered"]["filtered"] is True
    assert checks["contractibility evidence"]["verdict"] == "CONE"


def test_lattice_dot(tmp_path):
    dot = tmp_path / "crt2.dot"
    js = tmp_path / "crt2.json"
    code, lines, _ = _run(["lattice", "crt", "-n", "2", "--dot", str(dot), "--json", str(js)])
    assert code == 0
    nodes, edges = parse_dot_edges(dot.read_text())
    assert len(nodes) == 19 and len(edges) == 29
    assert json.loads(js.read_text())


def test_glue_toy1():
    code, lines, _ = _run(["glue", "--cat", "toy1", "--classes", "E1,E2", "--max-dim", "3"])
    assert code == 0
    assert _checks(lines)["bijective on vertices"]["pass"]


def test_glue_rejects_twisted_first_directions():
    code, lines, _ = _run(["glue", "--cat", "toy1", "--classes", "E1,E2", "--twist", "1"])
    assert code == 2
    assert lines[-1]["status"] == "input-error"


def test_hypotheses_positive_and_negative():
    code, _, _ = _run(["hypotheses", "--cat", "toy2", "--mode", "combine"])
    assert code == 0
    for model in negative_controls():
        mode = "gluing" if model.chain is not None else "descent"
        code, lines, _ = _run(["hypotheses", "--cat", model.name, "--mode", mode])
        assert code == 1
        assert model.breaks in lines[-1]["failed"]


def test_homology_expectations():
    code, lines, _ = _run(["homology", "--complex", "boundary:3", "--max-dim", "3"])
    assert code == 0
    info = next(line for line in lines if line.get("info") == "homology")
    assert info["reduced_betti"][:3] == [0, 0, 1]
    code, _, _ = _run(["homology", "--complex", "ccpt:2", "--max-dim", "4", "--expect", "CONE"])
    assert code == 0
    code, _, _ = _run(["homology", "--complex", "boundary:2", "--expect", "CONE"])
    assert code == 1


def test_exit_codes_for_bad_input(tmp_path):
    assert _run(["komp", "--cat", "nope", "--sigma", "j"])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(["hypotheses", "--cat", str(bad)])[0] == 2
    assert _run(["komp", "--cat", "toy2", "--sigma", "j", "--checks", "weird"])[0] == 2
    assert _run(["no-such-command"])[0] == 2


def test_budget_exit_code():
    code, lines, _ = _run(["verify", "cpt-inner", "-n", "5"])
    assert code == 3
    assert lines[-1]["status"] == "budget"
    code, _, _ = _run(["verify", "cpt-inner", "-n", "3", "--max-attempts", "5"])
    assert code == 3


def test_cap_override_and_env(monkeypatch):
    assert _run(["--cap", "CPT_N=1", "verify", "cpt-inner", "-n", "2"])[0] == 3
    monkeypatch.setenv("NERVELAB_CAPS", "CPT_N=1")
    assert _run(["verify", "cpt-inner", "-n", "2"])[0] == 3
    assert _run(["--cap", "CPT_N=3", "verify", "cpt-inner", "-n", "2"])[0] == 0


def test_report_file_and_determinism(tmp_path):
    argv = ["--report", str(tmp_path / "a.jsonl"), "glue", "--cat", "toy2", "--classes", "E1,E2", "--max-dim", "2"]
    _, _, first = _run(argv)
    _, _, second = _run(argv)
    assert first == second
    assert (tmp_path / "a.jsonl").read_text() == first


@pytest.mark.parametrize("argv", [["verify", "crt-counts", "--max", "2"]])
def test_console_entry_point(argv):
    proc = subprocess.run([sys.executable, "-m", "nervelab.cli", *argv], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[-1])["status"] == "pass"
