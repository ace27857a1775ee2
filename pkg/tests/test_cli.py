import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from scalex.cli import main
from scalex.io import read_matrix, read_vector

P_2X2 = 2 / (2 + math.sqrt(6))
# regression-locked: experiment --scenario a --grid 64,128 --trials 2 --seed 0
GOLDEN_EXPERIMENT = {
    64: (0.054235457666622987, 0.034538215692667573),
    128: (0.03868715945711515, 0.02496580544154272),
}


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def problem(tmp_path):
    return (
        write(tmp_path / "A.csv", "1,2\n3,4\n"),
        write(tmp_path / "r.csv", "1,1\n"),
        write(tmp_path / "c.csv", "1,1\n"),
    )


def run_json(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


class TestScale:
    def test_closed_form_csv(self, problem, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["scale", *problem, "--out", str(out)]) == 0
        P = read_matrix(out / "P.csv")
        np.testing.assert_allclose(P, [[P_2X2, 1 - P_2X2], [1 - P_2X2, P_2X2]], atol=1e-10)
        x, y = read_vector(out / "x.csv"), read_vector(out / "y.csv")
        assert x.sum() == pytest.approx(y.sum(), rel=1e-14)
        text = capsys.readouterr().out
        assert "iterations:" in text and "final_margin_error:" in text and "converged: true" in text

    def test_json_format(self, problem, tmp_path):
        assert main(["scale", *problem, "--format", "json", "--out", str(tmp_path)]) == 0
        sol = json.loads((tmp_path / "solution.json").read_text())
        assert sol["converged"] is True
        assert sol["scaled"][0][0] == pytest.approx(P_2X2, abs=1e-10)

    def test_zero_entry(self, problem, tmp_path, capsys):
        A = write(tmp_path / "Z.csv", "1,0\n3,4\n")
        assert main(["scale", A, problem[1], problem[2], "--out", str(tmp_path / "o")]) == 1
        assert "row 0, column 1" in capsys.readouterr().err

    def test_mismatched_marginals(self, problem, tmp_path):
        c = write(tmp_path / "c2.csv", "1,2\n")
        assert main(["scale", problem[0], problem[1], c, "--out", str(tmp_path / "o")]) == 1

    def test_malformed_csv(self, problem, tmp_path, capsys):
        A = write(tmp_path / "bad.csv", "1,2\n3,four\n")
        assert main(["scale", A, problem[1], problem[2], "--out", str(tmp_path / "o")]) == 1
        assert "row 1, column 1" in capsys.readouterr().err

    def test_missing_file(self, problem, tmp_path):
        assert main(["scale", str(tmp_path / "nope.csv"), problem[1], problem[2], "--out", str(tmp_path)]) == 1

    def test_nonconvergence_exit_code(self, tmp_path, capsys):
        A = write(tmp_path / "A.csv", "1,9,1\n2,1,7\n")
        r = write(tmp_path / "r.csv", "0.3,0.7\n")
        c = write(tmp_path / "c.csv", "0.2,0.5,0.3\n")
        assert main(["scale", A, r, c, "--max-iters", "1", "--out", str(tmp_path / "o")]) == 2
        assert "converged: false" in capsys.readouterr().out

    def test_bad_flag_is_invalid_input(self, problem, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["scale", *problem, "--tol", "abc", "--out", str(tmp_path)])
        assert info.value.code == 1


class TestBounds:
    def test_rho(self, capsys):
        code, d = run_json(capsys, ["bounds", "rho", "--M", "100", "--N", "100"])
        assert code == 0
        assert d["rho1"] == pytest.approx(0.1, rel=1e-14)
        assert d["rho2"] == pytest.approx(1.0, rel=1e-14) and d["rho3"] == pytest.approx(1.0, rel=1e-14)

    def test_rho_from_files(self, tmp_path, capsys):
        r = write(tmp_path / "r.csv", "3,3\n")
        c = write(tmp_path / "c.csv", "2,2,2\n")
        code, d = run_json(capsys, ["bounds", "rho", "--M", "2", "--N", "3", "--row-sums", r, "--col-sums", c])
        assert code == 0 and d["rho3"] == pytest.approx(math.sqrt(6), rel=1e-14)

    def test_constants(self, capsys):
        code, d = run_json(capsys, ["bounds", "constants", "--a", "1", "--b", "2", "--d", "1"])
        assert code == 0
        assert d["c_p"] == pytest.approx(2.8284271247461903, rel=1e-14)
        assert d["c_e"] == pytest.approx(23.627416997969522, rel=1e-14)

    def test_theorem2(self, capsys):
        code, d = run_json(capsys, ["bounds", "theorem2", "--M", "100", "--N", "100", "--delta", "1"])
        assert code == 0
        assert list(d) == ["delta", "probability_floor", "row_rel_error_bound", "col_rel_error_bound", "c_p", "c_e"]
        assert d["probability_floor"] == pytest.approx(0.9985093387311685, rel=1e-13)

    def test_theorem2_delta_out_of_range(self, capsys):
        assert main(["bounds", "theorem2", "--delta", "1.5"]) == 1
        assert "delta" in capsys.readouterr().err

    def test_lemma1(self, capsys):
        code, d = run_json(capsys, ["bounds", "lemma1", "--a", "1", "--b", "4"])
        assert (code, d) == (0, {"lower": 0.25, "upper": 2.0})

    def test_lemma2(self, capsys):
        code, d = run_json(capsys, ["bounds", "lemma2", "--eps", "0.5", "--axis", "col", "--index", "4"])
        assert code == 0 and d["bound"] == pytest.approx(7.453306344157342e-06, rel=1e-13)

    def test_lemma3(self, capsys):
        argv = ["bounds", "lemma3", "--eps", "0.5", "--a", "1", "--b", "4", "--s", "8", "--M", "2",
                "--min-r", "2", "--N", "2", "--min-c", "2", "--c1", "0.5", "--c2", "0.5"]
        code, d = run_json(capsys, argv)
        assert code == 0 and d["row_bound"] == pytest.approx(65.0, rel=1e-14)

    def test_lemma3_eps_out_of_range(self, capsys):
        assert main(["bounds", "lemma3", "--eps", "1"]) == 1
        assert "eps" in capsys.readouterr().err

    def test_inconsistent_envelope(self):
        assert main(["bounds", "constants", "--a", "1", "--b", "2", "--d", "3"]) == 0
        assert main(["bounds", "theorem2", "--a", "1", "--b", "2", "--d", "3"]) == 1


class TestExperiment:
    def test_empty_grid(self, tmp_path):
        assert main(["experiment", "--grid", "", "--out", str(tmp_path)]) == 1

    def test_non_integer_grid(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["experiment", "--grid", "64,abc", "--out", str(tmp_path)])
        assert info.value.code == 1

    def test_decreasing_grid(self, tmp_path):
        assert main(["experiment", "--grid", "128,64", "--out", str(tmp_path)]) == 1

    def test_golden_and_deterministic(self, tmp_path, capsys):
        argv = ["experiment", "--scenario", "a", "--grid", "64,128", "--trials", "2", "--seed", "0"]
        assert main([*argv, "--out", str(tmp_path / "one")]) == 0
        first = capsys.readouterr().out
        assert main([*argv, "--out", str(tmp_path / "two")]) == 0
        assert capsys.readouterr().out == first
        for name in ("doubly_stochastic.csv", "doubly_stochastic.json", "doubly_stochastic.gp"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()
        rows = list(csv.DictReader((tmp_path / "one" / "doubly_stochastic.csv").open()))
        for row in rows:
            en, op = GOLDEN_EXPERIMENT[int(row["N"])]
            assert float(row["mean_en"]) == pytest.approx(en, rel=1e-12)
            assert float(row["mean_operr"]) == pytest.approx(op, rel=1e-8)
            assert row["trials"] == "2" and row["failures"] == "0"

    def test_aborted_run(self, tmp_path, capsys):
        argv = ["experiment", "--scenario", "b", "--grid", "8,16", "--trials", "2", "--max-iters", "1",
                "--out", str(tmp_path)]
        assert main(argv) == 2
        assert (tmp_path / "rect_random_sums.csv").exists()

    def test_slopes_printed(self, tmp_path, capsys):
        argv = ["experiment", "--scenario", "c", "--grid", "16,25,36", "--trials", "2", "--out", str(tmp_path)]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "slope_en:" in out and "slope_operr:" in out


def test_tail_check(capsys):
    code, d = run_json(capsys, ["tail-check", "--N", "60", "--eps", "0.5", "--trials", "300"])
    assert code == 0 and d["consistent"] is True and d["violation_rate"] == 0.0


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "scalex", "bounds", "rho", "--M", "4", "--N", "4"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rho1"] == 0.5
