import json
import subprocess
import sys

import pytest

from singcert.cli import bundled_corpus, emit_json, main, to_jsonable

CORPUS = bundled_corpus()


def case(name):
    return [str(CORPUS / name / "system.txt"), str(CORPUS / name / "point.json")]


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def write_case(tmp_path, system, point):
    s = tmp_path / "system.txt"
    p = tmp_path / "point.json"
    s.write_text(system)
    p.write_text(point)
    return [str(s), str(p)]


@pytest.mark.parametrize("name, kappa, depth, mult, verdict", [
    ("x3_yz", 3, 4, 11, "SimpleMultiple"),
    ("cube_diff", 3, 3, 8, "SimpleMultiple"),
    ("regular", 0, 0, 1, "Regular"),
    ("nonsimple_x_y3", 1, 2, 3, "NotSimple"),
])
def test_analyze(capsys, name, kappa, depth, mult, verdict):
    code, rep = run_json(capsys, "analyze", *case(name))
    assert code == 0
    r = rep["result"]
    assert (r["kappa"], r["depth"], r["multiplicity"], r["verdict"]) == (kappa, depth, mult, verdict)


def test_certify_t1(capsys):
    code, rep = run_json(capsys, "certify", *case("cube_diff_near"), "--gamma-override", "11.25")
    r = rep["result"]
    assert r["gamma_source"] == "override"
    assert r["radius_cluster"] == pytest.approx(0.00015, rel=0.1)
    assert r["zero_count_lower_bound"] == 8
    assert code == (0 if r["verdict"] == "Certified" else 1)
    code, rep = run_json(capsys, "certify", *case("cube_diff_near"))
    assert code == 0 and rep["result"]["verdict"] == "Certified"


def test_certify_not_certified_exit_code(capsys, tmp_path):
    files = write_case(tmp_path, "vars x, y; x^2 - 1; y^2 + 0.5", "[[1, 0], [0, 0]]")
    code, rep = run_json(capsys, "certify", *files)
    assert code == 1 and rep["result"]["verdict"] == "NotCertified"


def test_separation_override(capsys):
    code, rep = run_json(capsys, "separation", *case("cube_diff"), "--gamma-override", "11.25")
    assert code == 0
    assert rep["result"]["radius"] == pytest.approx(0.0003, rel=0.1)
    code, rep = run_json(capsys, "separation", *case("cube_diff"))
    assert code == 0 and rep["result"]["gamma_source"] == "internal"


def test_separation_not_simple(capsys):
    code, _ = run_json(capsys, "separation", *case("nonsimple_x_y3"))
    assert code == 1


def test_dual_not_stabilized(capsys):
    code, _ = run_json(capsys, "dual", *case("x3_yz"), "--kmax", "2")
    assert code == 4


def test_dual(capsys):
    code, rep = run_json(capsys, "dual", *case("xn_yz_4"))
    assert code == 0 and rep["result"]["multiplicity"] == 14


def test_deflate(capsys):
    code, rep = run_json(capsys, "deflate", *case("x3_yz"), "--trials", "5")
    r = rep["result"]
    assert code == 0
    assert r["deflated"]["nvars"] == 3 and r["deflated"]["full_rank"]
    assert r["equivalence"]["agree"] == 5


def test_parse_error_exit_code(capsys, tmp_path):
    files = write_case(tmp_path, "vars x; x + q", "[[0, 0]]")
    assert main(["certify", *files]) == 2
    assert "line 1" in capsys.readouterr().err


def test_dimension_mismatch_exit_code(tmp_path):
    files = write_case(tmp_path, "vars x, y; x; y", "[[0, 0]]")
    assert main(["analyze", *files]) == 3


def test_usage_errors(tmp_path):
    assert main(["analyze", "missing.txt", "missing.json"]) == 2
    assert main(["analyze", *case("x3_yz"), "--rank-tol", "2"]) == 2
    assert main(["bogus"]) == 2


def test_corpus_empty_dir(capsys, tmp_path):
    code, rep = run_json(capsys, "corpus", str(tmp_path))
    assert code == 0 and rep["result"]["rows"] == []


def test_corpus_bundled(capsys):
    code, rep = run_json(capsys, "corpus")
    assert code == 0
    rows = {r["name"]: r for r in rep["result"]["rows"]}
    assert rows["x3_yz"]["multiplicity"] == 11
    assert all(r["mu_ge_2kappa"] for r in rows.values())
    assert not any(r.get("expected_mismatch") for r in rows.values())


def test_corpus_bad_entry_does_not_stop_run(capsys, tmp_path):
    (tmp_path / "bad").mkdir()
    (tmp_path / "bad" / "system.txt").write_text("vars x; x +")
    (tmp_path / "bad" / "point.json").write_text("[[0, 0]]")
    (tmp_path / "good").mkdir()
    (tmp_path / "good" / "system.txt").write_text("vars x; x^2")
    (tmp_path / "good" / "point.json").write_text("[[0, 0]]")
    code, rep = run_json(capsys, "corpus", str(tmp_path))
    rows = {r["name"]: r for r in rep["result"]["rows"]}
    assert "ParseError" in rows["bad"]["error"]
    assert rows["good"]["multiplicity"] == 2 and code == 0


def test_text_output(capsys):
    assert main(["certify", *case("cube_diff_near")]) == 0
    out = capsys.readouterr().out
    assert "verdict: Certified" in out and "wall_time" in out
    assert main(["corpus"]) == 0
    assert "x3_yz" in capsys.readouterr().out


def test_json_round_trip_and_determinism(capsys):
    reports = []
    for _ in range(2):
        main(["certify", *case("cube_diff_near"), "--json", "--seed", "7"])
        reports.append(capsys.readouterr().out)
    a, b = (json.loads(r) for r in reports)
    assert emit_json(a) == reports[0].rstrip("\n")
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b
    assert a["config"]["seed"] == 7


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("SINGCERT_SEED", "13")
    _, rep = run_json(capsys, "analyze", *case("x3_yz"))
    assert rep["config"]["seed"] == 13
    monkeypatch.setenv("SINGCERT_SEED", "x")
    assert main(["analyze", *case("x3_yz")]) == 2


def test_to_jsonable_complex_and_nonfinite():
    assert to_jsonable(1 - 2j) == [1.0, -2.0]
    assert to_jsonable(float("inf")) is None


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "singcert.cli", "dual", *case("x2_y2"), "--json"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["result"]["multiplicity"] == 4
