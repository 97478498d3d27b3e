import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fraclap import ProblemFileError, SineCoefficients
from fraclap.cli import main
from fraclap.io import load_coefficients, load_problem, problem_from_dict, write_coefficients, write_samples

EXAMPLE = Path(__file__).resolve().parents[1] / "src" / "fraclap" / "data" / "example.toml"


def write(tmp_path, text, name="p.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


BASIC = """
[problem]
beta = 1.0
f = ["sin(t) - 0.5*x1^3"]
u = ["0"]

[numerics]
modes = 32
"""


class TestProblemFiles:
    def test_example_file(self):
        pf = load_problem(EXAMPLE)
        assert pf.spec.m == 2 and pf.spec.r == 2 and pf.spec.beta.beta == 1.0
        assert pf.numerics.modes == 128 and pf.spec.growth_a is not None
        assert pf.output.path == EXAMPLE.parent / "example"

    def test_defaults(self):
        pf = problem_from_dict({"problem": {"beta": 0.8, "f": ["x1"], "u": ["t"]}})
        assert (pf.numerics.modes, pf.numerics.panels, pf.numerics.order) == (256, 64, 24)
        assert pf.output.format == "csv" and pf.output.delimiter == ","

    @pytest.mark.parametrize(
        "doc, where",
        [
            ({}, "[problem]"),
            ({"problem": {"f": ["x1"], "u": ["0"]}}, "beta"),
            ({"problem": {"beta": "one", "f": ["x1"], "u": ["0"]}}, "problem.beta"),
            ({"problem": {"beta": -1, "f": ["x1"], "u": ["0"]}}, "problem.beta"),
            ({"problem": {"beta": 1, "f": "x1", "u": ["0"]}}, "problem.f"),
            ({"problem": {"beta": 1, "m": 2, "f": ["x1"], "u": ["0"]}}, "problem.f"),
            ({"problem": {"beta": 1, "f": ["x1 +"], "u": ["0"]}}, "problem.f[0]"),
            ({"problem": {"beta": 1, "f": ["x2"], "u": ["0"]}}, "problem.f[0]"),
            ({"problem": {"beta": 1, "f": ["x1"], "u": ["x1"]}}, "problem.u[0]"),
            ({"problem": {"beta": 1, "f": ["x1"], "u": ["0"], "growth": {"b": "1"}}}, "problem.growth"),
            ({"problem": {"beta": 1, "f": ["x1"], "u": ["0"]}, "numerics": {"modes": 0}}, "numerics"),
            ({"problem": {"beta": 1, "f": ["x1"], "u": ["0"]}, "numerics": {"modes": 2.5}}, "numerics.modes"),
            ({"problem": {"beta": 1, "f": ["x1"], "u": ["0"]}, "numerics": {"newton": {"damping": 2.0}}}, "numerics.newton"),
            ({"problem": {"beta": 1, "f": ["x1"], "u": ["0"]}, "output": {"format": "xlsx"}}, "output.format"),
        ],
    )
    def test_validation_names_location(self, doc, where):
        with pytest.raises(ProblemFileError) as exc:
            problem_from_dict(doc)
        assert where in str(exc.value)

    def test_bad_toml(self, tmp_path):
        with pytest.raises(ProblemFileError, match="p.toml"):
            load_problem(write(tmp_path, "[problem\nbeta = 1"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ProblemFileError):
            load_problem(tmp_path / "nope.toml")

    def test_growth_as_string(self):
        pf = problem_from_dict({"problem": {"beta": 1, "f": ["x1"], "u": ["0"], "growth": "0.5"}})
        assert pf.spec.growth_a.source == "0.5"


class TestResultFiles:
    @settings(max_examples=30)
    @given(arrays(np.float64, st.tuples(st.integers(1, 20), st.integers(1, 3)), elements=st.floats(-1e300, 1e300)))
    def test_coefficient_round_trip_bit_exact(self, a):
        import tempfile

        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "c.csv"
            write_coefficients(path, SineCoefficients(a))
            back = load_coefficients(path)
        assert back.a.shape == a.shape and np.array_equal(back.a, a)

    def test_tsv_round_trip(self, tmp_path):
        x = SineCoefficients([[math.pi, -1e-300], [1 / 3, 2.0]])
        path = tmp_path / "c.tsv"
        write_coefficients(path, x, "\t")
        assert "\t" in path.read_text()
        assert np.array_equal(load_coefficients(path).a, x.a)

    def test_samples_grid(self, tmp_path):
        path = tmp_path / "s.csv"
        write_samples(path, SineCoefficients([1.0, 0.5]), ",")
        rows = path.read_text().splitlines()
        assert rows[0] == "t,x1" and len(rows) == 1002
        assert rows[1] == "0,0" and rows[-1].endswith(",0")
        t_last = float(rows[-1].split(",")[0])
        assert t_last == math.pi

    def test_not_a_dump(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n", "x.csv")
        with pytest.raises(ProblemFileError):
            load_coefficients(path)


class TestCli:
    def test_solve_example(self, tmp_path, capsys):
        out = tmp_path / "ex"
        assert main(["solve", str(EXAMPLE), "--out", str(out)]) == 0
        report = json.loads((tmp_path / "ex.report.json").read_text())
        assert report["solve"]["converged"] and report["solve"]["final_residual"] <= 1e-10
        verdicts = report["solve"]["condition_verdicts"]
        assert verdicts["cond_c"]["holds"] and verdicts["coercivity"]["holds"]
        assert report["warnings"] == []
        assert (tmp_path / "ex.samples.csv").exists() and (tmp_path / "ex.coeffs.csv").exists()

    def test_deterministic_dump(self, tmp_path):
        path = write(tmp_path, BASIC)
        main(["solve", str(path), "--out", str(tmp_path / "a")])
        main(["solve", str(path), "--out", str(tmp_path / "b")])
        assert (tmp_path / "a.coeffs.csv").read_bytes() == (tmp_path / "b.coeffs.csv").read_bytes()
        assert (tmp_path / "a.samples.csv").read_bytes() == (tmp_path / "b.samples.csv").read_bytes()

    def test_low_order_with_checks_exits_4(self, tmp_path, capsys):
        path = write(tmp_path, BASIC.replace("beta = 1.0", "beta = 0.3"))
        assert main(["solve", str(path), "--out", str(tmp_path / "o")]) == 4
        assert "beta > 1/2" in capsys.readouterr().err

    def test_low_order_without_checks_warns_once(self, tmp_path, capsys):
        text = BASIC.replace("beta = 1.0", "beta = 0.4").replace("modes = 32", "modes = 32\npanels = 4\norder = 4")
        path = write(tmp_path, text)
        assert main(["solve", str(path), "--no-check", "--out", str(tmp_path / "o")]) == 0
        report = json.loads((tmp_path / "o.report.json").read_text())
        ws = report["warnings"]
        assert len(ws) == len(set(ws)) == 2
        assert any("1/2" in w for w in ws) and any("resolvable" in w for w in ws)
        assert sorted(capsys.readouterr().err.strip().splitlines()) == sorted(f"warning: {w}" for w in ws)

    def test_parse_error_exits_2_with_location(self, tmp_path, capsys):
        path = write(tmp_path, BASIC.replace("0.5*x1^3", "0.5*x1^^3"))
        assert main(["solve", str(path)]) == 2
        err = capsys.readouterr().err
        assert "problem.f[0]" in err and "offset" in err

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["solve", str(tmp_path / "missing.toml")]) == 2

    def test_singular_exits_3(self, tmp_path, capsys):
        path = write(tmp_path, BASIC.replace("0.5*x1^3", "(-x1)"))
        assert main(["solve", str(path), "--out", str(tmp_path / "o")]) == 3
        assert "singular" in capsys.readouterr().err

    def test_non_convergence_exits_3(self, tmp_path, capsys):
        text = BASIC + "\n[numerics.newton]\nmax_iters = 1\nresidual_tol = 1e-15\nstep_tol = 1e-300\n"
        path = write(tmp_path, text.replace("0.5*x1^3", "5*x1^3"))
        assert main(["solve", str(path), "--out", str(tmp_path / "o")]) == 3
        assert "did not converge" in capsys.readouterr().err

    def test_apply_both_directions(self, tmp_path):
        path = write(tmp_path, "[problem]\nbeta = 1\nf = [\"sin(2*t)\"]\nu = [\"0\"]\n[numerics]\nmodes = 8\n")
        assert main(["apply", str(path), "--out", str(tmp_path / "o")]) == 0
        assert main(["apply", str(path), "--inverse", "--out", str(tmp_path / "o")]) == 0
        fwd = load_coefficients(tmp_path / "o.apply-forward.coeffs.csv").a[:, 0]
        inv = load_coefficients(tmp_path / "o.apply-inverse.coeffs.csv").a[:, 0]
        s = math.sqrt(math.pi / 2)
        np.testing.assert_allclose(fwd, 4 * s * np.eye(8)[1], atol=1e-12)
        np.testing.assert_allclose(inv, s / 4 * np.eye(8)[1], atol=1e-12)

    def test_sens_with_fd_table(self, tmp_path):
        out = tmp_path / "ex"
        assert main(["sens", str(EXAMPLE), "--v", "1, 0", "--fd-check", "1e-2", "--out", str(out)]) == 0
        rows = (tmp_path / "ex.sens.fd.csv").read_text().splitlines()
        assert rows[0] == "eps,relative_error,ratio" and len(rows) == 4
        ratios = [float(r.split(",")[2]) for r in rows[2:]]
        assert all(5 <= q <= 20 for q in ratios)
        assert float(rows[3].split(",")[1]) <= 5e-4

    def test_sens_bad_direction(self, tmp_path):
        assert main(["sens", str(EXAMPLE), "--v", "1", "--out", str(tmp_path / "o")]) == 2
        assert main(["sens", str(EXAMPLE), "--v", "1,x1", "--out", str(tmp_path / "o")]) == 2

    def test_check_writes_conditions(self, tmp_path, capsys):
        assert main(["check", str(EXAMPLE), "--out", str(tmp_path / "ex")]) == 0
        doc = json.loads((tmp_path / "ex.conditions.json").read_text())
        assert doc["conditions"]["cond_a"]["holds"] and not doc["conditions"]["cond_b"]["holds"]
        assert "any of a/b/c holds: True" in capsys.readouterr().out

    def test_verify(self, capsys):
        assert main(["verify", "diagonal"]) == 0
        assert main(["verify", "bogus"]) == 2

    def test_verify_failure_exits_1(self, monkeypatch):
        import fraclap.cli as cli
        from fraclap.verify import CheckResult

        monkeypatch.setattr(cli, "run_suite", lambda name: [CheckResult("x", False, "forced")])
        assert main(["verify", "all"]) == 1

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "fraclap", "verify", "diagonal"], capture_output=True, text=True, timeout=120
        )
        assert proc.returncode == 0, proc.stderr
        assert "10/10 checks passed" in proc.stdout
