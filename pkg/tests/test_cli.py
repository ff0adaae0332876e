import csv
import json
from fractions import Fraction

import pytest

from mafapprox.cli import GAP_COLUMNS, EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_REJECT, main
from mafapprox.instances import grid_label
from mafapprox.phylo import parse_newick


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def grid_file(tmp_path):
    def make(ell):
        path = tmp_path / f"grid{ell}.nwk"
        assert run("generate", "grid", "--ell", ell, "-o", path) == EXIT_OK
        return path

    return make


def test_approx_golden(data_dir, tmp_path):
    out = tmp_path / "r.json"
    assert run("approx", data_dir / "grid2.nwk", "--json", out) == EXIT_OK
    assert out.read_text(encoding="utf-8") == (data_dir / "grid2_approx.json").read_text(encoding="utf-8")
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["forest"]["k"] <= 8 and report["certificate"]["ratio_bound_ok"]


def test_approx_identical_trees(data_dir, tmp_path):
    out = tmp_path / "r.json"
    assert run("approx", data_dir / "same4.nwk", "--json", out) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["forest"]["k"] == 1 and report["cut_size"] == 0
    assert report["tbr"]["value"] == 0


def test_approx_grid_four(grid_file, tmp_path, capsys):
    out = tmp_path / "r.json"
    model = tmp_path / "model.txt"
    quartets = tmp_path / "q.txt"
    code = run("approx", grid_file(4), "--json", out, "--float-lp", "--dump-model", model,
               "--dump-quartets", quartets, "--root-leaf", "(4,4)")
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["cut_size"] <= 4 * Fraction(report["lp_objective"]["fraction"])
    assert report["verification"] == {"af": "ACCEPT", "ilp_feasible": True}
    assert report["certificate"]["root"] == "(4,4)"
    assert len(model.read_text().splitlines()) == 1 + report["instance"]["constraints"]
    assert quartets.read_text().startswith("Q=")
    assert "float LP" in capsys.readouterr().out


def test_exact(grid_file, data_dir, tmp_path):
    out = tmp_path / "e.json"
    assert run("exact", grid_file(2), "--json", out) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["forest"]["k"] == 2 and report["verification"]["brute_force"]["agrees"]
    assert report["tbr"] == {"value": 1, "label": "TBR distance"}
    assert run("exact", grid_file(3), "--json", out, "--method", "bnb") == EXIT_OK
    assert json.loads(out.read_text())["forest"]["k"] >= 5
    assert run("exact", data_dir / "same4.nwk", "--json", out) == EXIT_OK
    assert json.loads(out.read_text())["forest"]["k"] == 1


def test_exact_budget(grid_file, tmp_path):
    out = tmp_path / "e.json"
    assert run("exact", grid_file(3), "--method", "bnb", "--budget", 1, "--json", out) == EXIT_BUDGET
    report = json.loads(out.read_text())
    assert report["optimal"] is False and report["incumbent"]["k"] >= 5


def test_verify(grid_file, tmp_path):
    grid = grid_file(4)
    labels = parse_newick(grid.read_text())[0].labels
    single = tmp_path / "s.json"
    single.write_text(json.dumps({"components": [[x] for x in labels]}))
    assert run("verify", grid, single) == EXIT_OK
    rows = tmp_path / "rows.json"
    rows.write_text(json.dumps({"components": [[grid_label(i, j) for j in range(1, 5)] for i in range(1, 5)]}))
    out = tmp_path / "v.json"
    assert run("verify", grid, rows, "--json", out) == EXIT_REJECT
    verdict = json.loads(out.read_text())
    assert verdict["verdict"] == "REJECT" and verdict["witness"]["type"] == "overlap"


def test_verify_accepts_exact_output(grid_file, tmp_path):
    grid = grid_file(3)
    report = tmp_path / "e.json"
    assert run("exact", grid, "--json", report) == EXIT_OK
    assert run("verify", grid, report) == EXIT_OK


def test_input_errors(tmp_path, data_dir):
    bad = tmp_path / "bad.nwk"
    bad.write_text("((a,b),(c,d))\n")
    assert run("approx", bad) == EXIT_INPUT
    assert run("approx", tmp_path / "missing.nwk") == EXIT_INPUT
    one = tmp_path / "one.nwk"
    one.write_text("((a,b),(c,d));\n")
    assert run("exact", one) == EXIT_INPUT
    assert run("approx", data_dir / "grid2.nwk", "--root-leaf", "zz") == EXIT_INPUT
    garbage = tmp_path / "f.json"
    garbage.write_text("{not json")
    assert run("verify", data_dir / "grid2.nwk", garbage) == EXIT_INPUT
    partial = tmp_path / "p.json"
    partial.write_text(json.dumps({"components": [["(1,1)"]]}))
    assert run("verify", data_dir / "grid2.nwk", partial) == EXIT_INPUT
    with pytest.raises(SystemExit) as info:
        run("generate", "grid")
    assert info.value.code == EXIT_INPUT


def test_generate_random(tmp_path):
    a, b = tmp_path / "a.nwk", tmp_path / "b.nwk"
    assert run("generate", "random", "--n", 7, "--t", 3, "--seed", 5, "-o", a) == EXIT_OK
    assert run("generate", "random", "--n", 7, "--t", 3, "--seed", 5, "-o", b) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(parse_newick(a.read_text())) == 3


def test_gap_study_small(tmp_path):
    out = tmp_path / "gap.csv"
    assert run("gap-study", "--ell-max", 4, "-o", out) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == GAP_COLUMNS
    assert [r["ell"] for r in rows] == ["2", "3", "4"]
    four = rows[2]
    assert Fraction(int(four["lp_obj_num"]), int(four["lp_obj_den"])) <= 4
    assert four["ilp_lower_bound"] == "9" and float(four["certified_gap"]) >= 2.25


def test_gap_study_skips_large(tmp_path):
    out = tmp_path / "gap.csv"
    assert run("gap-study", "--ell", 2, 4, "--max-constraints", 10, "-o", out) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert rows[0]["lp_obj_num"] == "1" and rows[1]["lp_obj_num"] == "skipped"
