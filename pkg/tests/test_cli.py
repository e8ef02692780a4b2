import json
from pathlib import Path

import pytest

from slidearea.cli import main

SCEN = Path(__file__).resolve().parents[1] / "scenarios"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_special_three_lines(capsys):
    code, out, _ = run(capsys, "special", "three-lines")
    rep = json.loads(out)
    assert code == 0 and rep["critical_count"] == 1 and rep["index"] == 2 and rep["passed"]


def test_find_critical_concentric4(capsys, tmp_path):
    svg = tmp_path / "c4.svg"
    code, out, _ = run(capsys, "find-critical", SCEN / "concentric4.json", "--gauge", "fix-first", "--svg", svg)
    rep = json.loads(out)
    assert code == 0
    assert len(rep["critical_points"]) == 8
    assert rep["meta"]["index_histogram"] == {"0": 1, "1": 3, "2": 3, "3": 1}
    for cp in rep["critical_points"]:
        assert set(cp) == {"t", "area", "grad_norm", "index", "nullity", "flags"}
    assert svg.read_text().startswith("<?xml")


def test_billiard_pentagon(capsys, tmp_path):
    csv_path = tmp_path / "orbit.csv"
    code, out, _ = run(capsys, "billiard", SCEN / "circle.json", "--map", "inner-area", "--start", "0,1.2566",
                       "--steps", "5", "--csv", csv_path)
    rep = json.loads(out)
    assert code == 0
    # the start is the pentagon rounded to four decimals; the report polishes it
    ref = rep["refined"]
    assert ref["period"] == 5 and ref["winding"] == 1 and ref["closure_residual"] < 1e-8
    assert len(csv_path.read_text().splitlines()) == 1 + 7


def test_billiard_exact_start_closes(capsys):
    code, out, _ = run(capsys, "billiard", SCEN / "circle.json", "--map", "inner-area",
                       "--start", "0,2.0943951023931953", "--steps", "6")
    rep = json.loads(out)
    assert rep["closed"] and rep["period"] == 3


def test_json_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "find-critical", SCEN / "three_lines.json", "--json", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_square_piecewise(capsys):
    code, out, _ = run(capsys, "check", SCEN / "square.json", "--config", "0,1.5,3")
    rep = json.loads(out)
    assert code == 0 and "piecewise" in rep


def test_closed_orbits_on_ellipse(capsys):
    code, out, _ = run(capsys, "closed-orbits", SCEN / "ellipse.json", "--map", "inner-area",
                       "--period", "3", "--winding", "1", "--grid", "6")
    rep = json.loads(out)
    assert code == 0 and rep["count"] >= 1 and all(o["critical"] for o in rep["orbits"])


def test_deform_zigzag(capsys):
    code, out, _ = run(capsys, "deform", SCEN / "three_circles_point.json", "--op", "zigzag", "--at", "2",
                       "--starts", "64")
    rep = json.loads(out)
    assert code == 0 and rep["verified"]
    assert rep["after"]["index"] == rep["before"]["index"] + 1


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "billiard", SCEN / "circle.json", "--map", "inner-area", "--start", "0,x")[0] == 1
    code, _, err = run(capsys, "find-critical", "/nonexistent.json")
    assert code == 1 and err.startswith("error:")
    assert run(capsys, "check", SCEN / "circle.json", "--config", "0,1")[0] == 1


def test_verification_failure_exit_code(capsys, tmp_path):
    sc = json.loads((SCEN / "three_lines.json").read_text())
    sc["expect"] = {"count": 2}
    p = tmp_path / "wrong.json"
    p.write_text(json.dumps(sc))
    code, out, _ = run(capsys, "find-critical", p)
    assert code == 2 and json.loads(out)["meta"]["matches_expected"] is False


@pytest.mark.parametrize("case", ["three-circles", "four-circles", "concentric-3", "circle-star"])
def test_special_cases_pass(capsys, case):
    code, out, _ = run(capsys, "special", case)
    assert code == 0 and json.loads(out)["passed"]
