import csv
import json

import pytest

from infostab import __version__
from infostab.cli import main, parse_function
from infostab.measures import BasisPerturbed, Family, Sampled


def run_json(capsys, *argv):
    code = main([*argv, "--json", "-"])
    out = capsys.readouterr().out
    assert code == 0, out
    return json.loads(out)


def test_entropy_examples(capsys):
    assert run_json(capsys, "entropy", "--alpha", "-1", "--p", "0.5,0.5")["result"]["entropy"] == pytest.approx(1.0)
    assert run_json(capsys, "entropy", "--alpha", "-1", "--p", "0.5,0.25,0.25")["result"]["entropy"] == pytest.approx(3.0)
    doc = run_json(capsys, "entropy", "--alpha", "-1", "--uniform", "4")
    assert doc["result"]["entropy"] == pytest.approx(5.0)  # (4^2 - 1) / 3


def test_entropy_with_j(capsys):
    doc = run_json(capsys, "entropy", "--alpha", "-1", "--p", "0.5,0.25,0.25", "--a", "2", "--b", "1")
    assert doc["result"]["J"]["value"] == pytest.approx(7.0)


def test_entropy_text_output(capsys):
    assert main(["entropy", "--alpha", "-1", "--p", "0.5,0.25,0.25"]) == 0
    assert "3.0" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["entropy", "--alpha", "-1", "--p", "0.5,0.6"],
        ["entropy", "--alpha", "1", "--p", "0.5,0.5"],
        ["entropy", "--alpha", "-1"],
        ["entropy", "--alpha", "-1", "--p", "a,b"],
        ["defect", "--alpha", "-1", "--fn", "nonsense:1"],
        ["defect", "--alpha", "-1", "--fn", "family:1,0", "--m", "2", "--h", "0.4"],
        ["probe", "--alpha", "-1", "--margins", "1e-3,1e-2"],
        ["recursion", "--alpha", "-1", "--kernel", "perturbed:1,0:1e-3"],
        ["search", "--alpha", "-1", "--eps", "-1"],
        ["entropy", "--bogus"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_defect_family_exact(capsys):
    doc = run_json(capsys, "defect", "--alpha", "-1", "--fn", "family:1,0", "--m", "100", "--h", "1e-3")
    assert doc["result"]["sup_relative"] <= 1e-10
    assert doc["result"]["n_points"] > 0


def test_defect_perturbed_argmax_near_boundary(capsys):
    doc = run_json(capsys, "defect", "--alpha", "-1", "--fn", "family:1,0:+1e-3sin", "--m", "100", "--h", "1e-3")
    res = doc["result"]
    assert res["sup_defect"] > 0.1
    x, y = res["argmax"]["x"], res["argmax"]["y"]
    assert min(x, y, 1 - x - y) <= 1e-3 * (1 + 1e-9) or max(x, y) >= 1 - 3e-3


def test_json_byte_identical_modulo_timestamp(capsys):
    argv = ["defect", "--alpha", "-1", "--fn", "family:1,0:+1e-3sin", "--m", "60"]
    docs = []
    for _ in range(2):
        doc = run_json(capsys, *argv)
        doc["manifest"].pop("timestamp")
        docs.append(json.dumps(doc, sort_keys=True))
    assert docs[0] == docs[1]


def test_manifest_fields(capsys):
    doc = run_json(capsys, "entropy", "--alpha", "-1", "--p", "0.5,0.5", "--seed", "5")
    m = doc["manifest"]
    assert m["command"] == "entropy"
    assert m["seed"] == 5
    assert m["tool_version"] == __version__
    assert m["schema_version"] == 1
    assert m["backend"] in ("numpy", "numba")
    assert m["config"]["alpha"] == -1.0


def test_defect_csv(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["defect", "--alpha", "-1", "--fn", "family:1,0", "--m", "10", "--csv", str(out), "--quiet"]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "defect", "local_scale"]
    assert len(rows) == 1 + 45  # lattice with 8 steps: C(10, 2) points


def test_defect_sampled_input(tmp_path, capsys):
    path = tmp_path / "f.csv"
    path.write_text("x,value\n0.0005,1.0\n0.5,1.0\n0.9995,1.0\n")
    doc = run_json(capsys, "defect", "--alpha", "-1", "--fn", f"sampled:{path}", "--m", "50")
    # constant 1: defect is |1/(1-x) - 1/(1-y)|, large near the corner
    assert doc["result"]["sup_defect"] > 100
    assert doc["result"]["extrapolated"] is False


def test_probe_slopes(capsys):
    doc = run_json(capsys, "probe", "--alpha", "-1")
    assert abs(doc["result"]["slope"] + 1) <= 0.15
    doc = run_json(capsys, "probe", "--alpha", "0")
    assert abs(doc["result"]["slope"]) <= 0.1
    doc = run_json(capsys, "probe", "--alpha", "-2")
    assert abs(doc["result"]["slope"] + 2) <= 0.3


def test_probe_csv(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["probe", "--alpha", "-1", "--csv", str(out), "--quiet"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "h,sup_defect"
    assert len(lines) == 6 and lines[-1].startswith("# slope=")


def test_search_examples(capsys):
    doc = run_json(capsys, "search", "--alpha", "-1", "--eps", "1e-3")
    assert doc["result"]["distance_over_eps"] <= 0.05
    doc = run_json(capsys, "search", "--alpha", "0", "--eps", "1e-3")
    assert doc["result"]["best_distance"] >= 1e-3 / 8
    assert doc["result"]["history"]


def test_search_seed_repeat(capsys):
    argv = ["search", "--alpha", "-0.5", "--m", "50", "--restarts", "3", "--seed", "11"]
    a = run_json(capsys, *argv)["result"]
    b = run_json(capsys, *argv)["result"]
    assert a == b


def test_recursion_examples(capsys):
    doc = run_json(capsys, "recursion", "--alpha", "-1", "--kernel", "family:1,0", "--n-max", "8")
    res = doc["result"]
    assert res["all_ok"]
    assert all(r["max_relative_gap"] <= 1e-9 and r["bound"] == 0.0 for r in res["levels"])

    doc = run_json(capsys, "recursion", "--alpha", "-1", "--n-max", "8", "--eps", "1e-3")
    for r in doc["result"]["levels"]:
        assert r["bound"] == pytest.approx((r["n"] - 2) * 1e-3)
        assert r["ok"]

    doc = run_json(capsys, "recursion", "--alpha", "-1", "--n-max", "2")
    assert [(r["n"], r["bound"]) for r in doc["result"]["levels"]] == [(2, 0.0)]


def test_recursion_explicit_budgets(capsys):
    doc = run_json(capsys, "recursion", "--alpha", "-0.5", "--n-max", "5", "--budgets", "1e-3,0,2e-3")
    bounds = [r["bound"] for r in doc["result"]["levels"]]
    assert bounds == pytest.approx([0.0, 1e-3, 1e-3, 3e-3])


def test_parse_function_grammar(tmp_path):
    f = parse_function("family:2,3", -1)
    assert isinstance(f, Family) and f(0.25) == pytest.approx(9.0)
    g = parse_function("family:1,0:+1e-3sin", -1)
    assert isinstance(g, BasisPerturbed) and g(0.5) == pytest.approx(2.0 + 1e-3)
    h = parse_function("perturbed:0,0:1e-3,2e-3", -1)
    assert h.theta == (1e-3, 2e-3)
    path = tmp_path / "s.csv"
    path.write_text("x,value\n0.25,1\n0.75,3\n")
    s = parse_function(f"sampled:{path}", -1)
    assert isinstance(s, Sampled) and s(0.5) == pytest.approx(2.0)
