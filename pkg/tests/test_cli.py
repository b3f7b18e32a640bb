import json
import shutil
import subprocess
from importlib import resources

import jsonschema
import pytest

from jetsym.cli import main

SCHEMA = json.loads(resources.files("jetsym").joinpath("report.schema.json").read_text())


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def report(capsys, *argv):
    status, out, _ = run(capsys, *argv, "--json", "-", "--no-timestamp")
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["exit_status"] == status
    return status, doc


def test_check_invariant(capsys):
    status, doc = report(capsys, "check", "--system", "eh-transport", "--op", "alg20")
    assert status == 0
    assert len(doc["verdicts"]) == 20 and all(v["passed"] for v in doc["verdicts"])


def test_check_not_invariant(capsys):
    status, doc = report(capsys, "check", "--system", "continuity-poynting", "--op", "lorentz-linear")
    assert status == 10
    assert not all(v["passed"] for v in doc["verdicts"])


def test_check_conditional(capsys):
    status, _ = report(capsys, "check", "--system", "continuity-poynting", "--op", "lorentz-linear",
                       "--conditional", "maxwell")
    assert status == 0


def test_check_multiplier_mode(capsys):
    status, _ = report(capsys, "check", "--system", "eh-transport", "--op", "G2_1@alg20",
                       "--mode", "multipliers")
    assert status == 0


def test_usage_errors(capsys):
    assert run(capsys, "check", "--system", "no-such-system", "--op", "alg20")[0] == 64
    assert run(capsys, "flow", "--op", "G1_1@alg20")[0] == 64
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys)[0] == 64


def test_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.jsym"
    bad.write_text("system s { E1 + * H1 = 0; }")
    status, _, err = run(capsys, "check", "--system", str(bad), "--op", "alg20")
    assert status == 65 and "parse error" in err


def test_resource_limit(capsys):
    status, doc = report(capsys, "solve", "--system", "eh-transport", "--deg-x", "1", "--deg-u", "1",
                         "--max-unknowns", "10")
    assert status == 3
    assert "diagnostics" in doc["payload"]


def test_solve_small(capsys, tmp_path):
    out = tmp_path / "basis.json"
    status, doc = report(capsys, "solve", "--system", "eh-transport", "--deg-x", "0", "--deg-u", "0",
                         "--out", str(out))
    assert doc["payload"]["dimension"] == 4
    # translations only, so the reference algebra is not contained
    assert status == 10
    assert json.loads(out.read_text())["dimension"] == 4


def test_algebra(capsys):
    status, doc = report(capsys, "algebra", "--ops", "alg20")
    assert status == 0
    assert doc["payload"]["derived_dimension"] == 19
    status, doc = report(capsys, "algebra", "--ops", "alg24", "--relations")
    assert status == 0
    assert doc["payload"]["relations"]
    # the relations hold but [P0, K0] leaves the span of this set
    status, doc = report(capsys, "algebra", "--ops", "poincare-nl-conformal", "--relations")
    assert status == 10
    failed = [v["subject"] for v in doc["verdicts"] if not v["passed"]]
    assert failed == ["closed"]


def test_flow_with_point_file(capsys, tmp_path):
    pt = tmp_path / "p.json"
    pt.write_text(json.dumps({"x": [0.1, 0.2, 0.3, 0.4], "E": [0.1, 0, 0.2], "H": [0, 0.1, -0.1]}))
    trace = tmp_path / "t.jsonl"
    status, doc = report(capsys, "flow", "--op", "K1@alg24", "--theta", "0.2", "--point", str(pt),
                         "--numeric", "--trace", str(trace))
    assert status == 0
    assert doc["payload"]["max_error"] <= 1e-8
    assert len(trace.read_text().splitlines()) == 201


def test_flow_exact(capsys):
    status, doc = report(capsys, "flow", "--op", "G1_1@alg20", "--theta", "1/3", "--exact")
    assert status == 0 and "numeric" not in doc["payload"]


def test_flow_guard(capsys, tmp_path):
    pt = tmp_path / "p.json"
    pt.write_text(json.dumps({"x": [0, 0, 0, 0], "E": [-2, 0, 0], "H": [0, 0, 0]}))
    status, _, err = run(capsys, "flow", "--op", "G2_1@alg20", "--theta", "1", "--point", str(pt))
    assert status == 64 and "denominator" in err


def test_invariants(capsys):
    status, doc = report(capsys, "invariants", "--check", "I1")
    assert status == 0
    assert len(doc["verdicts"]) == 6
    status, _ = report(capsys, "invariants", "--check", "I1", "--op", "G1_1@alg20")
    assert status == 10


def test_rank(capsys, tmp_path):
    status, doc = report(capsys, "rank")
    assert status == 0 and doc["payload"]["rank"] == 4
    dens = tmp_path / "d.json"
    dens.write_text(json.dumps({"F": ["dot(E,E)", "dot(E,E)", "2*dot(E,E)", "0"]}))
    status, doc = report(capsys, "rank", "--density", str(dens))
    assert doc["payload"]["rank"] == 1


def test_list(capsys):
    status, doc = report(capsys, "list")
    assert status == 0
    assert "eh-transport" in doc["payload"]["systems"]


def test_reports_are_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        main(["invariants", "--check", "I3", "--seed", "4", "--json", str(path), "--no-timestamp"])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_timestamp_present_by_default(capsys):
    status, out, _ = run(capsys, "list", "--json", "-")
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert "timestamp" in doc


@pytest.mark.skipif(shutil.which("jetsym") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["jetsym", "algebra", "--ops", "alg24"], capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert "derived algebra dimension 24" in res.stdout
