import numpy as np
import pytest

from trizero.cli import EXIT_OK, EXIT_PARSE, EXIT_RESIDUAL, RunConfig, main, run
from trizero.errors import ParseError
from trizero.formats import (
    FORMAT_HEADER,
    format_target,
    read_fg_file,
    read_params_file,
    read_target_file,
    trajectory_csv,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def params_ref1(tmp_path):
    return write(tmp_path / "params.txt",
                 f"{FORMAT_HEADER}\na = 1.0\nbeta = 0.0\n")


class TestFormats:
    def test_params_roundtrip(self, params_ref1):
        assert read_params_file(params_ref1) == (1.0, 0.0)

    def test_params_missing_header(self, tmp_path):
        path = write(tmp_path / "p.txt", "a = 1.0\nbeta = 0.0\n")
        with pytest.raises(ParseError) as err:
            read_params_file(path)
        assert err.value.line == 1

    def test_params_bad_key(self, tmp_path):
        path = write(tmp_path / "p.txt", f"{FORMAT_HEADER}\na = 1.0\ngamma = 2\n")
        with pytest.raises(ParseError) as err:
            read_params_file(path)
        assert err.value.line == 3

    def test_fg_file(self, tmp_path):
        path = write(tmp_path / "F.txt",
                     f"{FORMAT_HEADER}\n# quadratic part\n1.0*u1^2 - 0.5*u1*u2\n")
        series = read_fg_file(path, 4)
        assert series[2].coeff((1, 1)) == -0.5

    def test_fg_degree_bounds(self, tmp_path):
        path = write(tmp_path / "F.txt", f"{FORMAT_HEADER}\n1.0*u1\n")
        with pytest.raises(ParseError):
            read_fg_file(path, 4)

    def test_target_roundtrip(self, tmp_path):
        text = format_target({2: {"A[2,0]": 1.0, "B[2,0]": -0.25}})
        path = write(tmp_path / "t.txt", text)
        target = read_target_file(path, 3)
        assert target.coeffs[2]["B[2,0]"] == -0.25

    def test_target_invalid_label(self, tmp_path):
        path = write(tmp_path / "t.txt", f"{FORMAT_HEADER}\nB[2,3] = 1.0\n")
        with pytest.raises(ParseError) as err:
            read_target_file(path, 3)
        assert "B[2,3]" in str(err.value)

    def test_trajectory_csv(self):
        csv = trajectory_csv([0.0, 0.5], np.array([[1.0, 2.0], [3.0, 4.0]]))
        lines = csv.strip().split("\n")
        assert lines[0] == "t,x,y"
        assert len(lines) == 3


class TestRun:
    def test_locus_report(self, params_ref1):
        code, text = run(RunConfig(command="locus", params_path=params_ref1))
        assert code == EXIT_OK
        assert "tau0 = 1.4142135624e+00" in text
        assert "kappa2 = 2.1213203436e+00" in text
        assert "status OK" in text

    def test_verify_report(self, params_ref1):
        code, text = run(RunConfig(command="verify", params_path=params_ref1))
        assert code == EXIT_OK
        assert "normalization" in text

    def test_wbasis(self):
        code, text = run(RunConfig(command="wbasis", degree=3))
        assert code == EXIT_OK
        assert "B[3,1] = 1*u1*u3^2" in text
        assert "count = 6" in text

    def test_reduce_command(self, tmp_path, params_ref1):
        fpath = write(tmp_path / "F.txt",
                      f"{FORMAT_HEADER}\n0.4714045207910317*u1^2\n")
        code, text = run(RunConfig(command="reduce", params_path=params_ref1,
                                   f_path=fpath, order=2))
        assert code == EXIT_OK
        assert "A[2,0] = 1.0000000000e+00" in text

    def test_roundtrip_command(self, tmp_path, params_ref1):
        tpath = write(tmp_path / "t.txt",
                      f"{FORMAT_HEADER}\nA[2,0] = 1.0\nB[2,0] = 1.0\n")
        code, text = run(RunConfig(command="roundtrip", params_path=params_ref1,
                                   target_path=tpath, order=3))
        assert code == EXIT_OK
        assert "roundtrip_diff" in text

    def test_invalid_label_exit2(self, tmp_path, params_ref1):
        tpath = write(tmp_path / "t.txt", f"{FORMAT_HEADER}\nB[2,3] = 1.0\n")
        code, text = run(RunConfig(command="realize", params_path=params_ref1,
                                   target_path=tpath, order=2))
        assert code == EXIT_PARSE
        assert "B[2,3]" in text

    def test_malformed_params_exit2(self, tmp_path):
        path = write(tmp_path / "p.txt", f"{FORMAT_HEADER}\na == 1\n")
        code, text = run(RunConfig(command="locus", params_path=path))
        assert code == EXIT_PARSE

    def test_residual_failure_named(self, tmp_path, params_ref1):
        tpath = write(tmp_path / "t.txt", f"{FORMAT_HEADER}\nA[2,0] = 1.0\n")
        code, text = run(RunConfig(command="roundtrip", params_path=params_ref1,
                                   target_path=tpath, order=2,
                                   tolerances={"roundtrip": 1e-30}))
        assert code == EXIT_RESIDUAL
        assert "roundtrip_diff" in text and "FAIL" in text

    def test_order_range(self, params_ref1):
        code, _ = run(RunConfig(command="locus", params_path=params_ref1, order=7))
        assert code == EXIT_PARSE

    def test_bad_tolerance(self, params_ref1):
        code, _ = run(RunConfig(command="locus", params_path=params_ref1,
                                tolerances={"nope": 1.0}))
        assert code == EXIT_PARSE
        code, _ = run(RunConfig(command="locus", params_path=params_ref1,
                                tolerances={"locus": -1.0}))
        assert code == EXIT_PARSE

    def test_simulate_csv(self, params_ref1):
        cfg = RunConfig(command="simulate", params_path=params_ref1,
                        horizon=0.2, nsteps=16, history=(0.1, 0.0))
        code, text = run(cfg)
        assert code == EXIT_OK
        assert "t,x,y" in text

    def test_simulate_projected(self, params_ref1):
        cfg = RunConfig(command="simulate", params_path=params_ref1,
                        horizon=0.2, nsteps=16, seed=(0.01, 0.0, 0.0),
                        project=True)
        code, text = run(cfg)
        assert code == EXIT_OK
        assert "t,x,y,u1,u2,u3" in text

    def test_oracle(self, params_ref1):
        code, text = run(RunConfig(command="oracle", params_path=params_ref1,
                                   ncheb=20, dps=25))
        assert code == EXIT_OK
        assert "gap" in text

    def test_determinism(self, tmp_path, params_ref1):
        tpath = write(tmp_path / "t.txt", f"{FORMAT_HEADER}\nA[2,0] = 1.0\n")
        cfg = RunConfig(command="roundtrip", params_path=params_ref1,
                        target_path=tpath, order=2)
        out1 = run(cfg)
        out2 = run(cfg)
        assert out1 == out2


class TestMain:
    def test_main_locus(self, params_ref1, capsys, tmp_path):
        out = tmp_path / "report.txt"
        code = main(["locus", "--params", params_ref1, "--out", str(out)])
        assert code == EXIT_OK
        captured = capsys.readouterr().out
        assert out.read_text(encoding="utf-8") == captured

    def test_main_tol_override(self, params_ref1, capsys):
        code = main(["verify", "--params", params_ref1, "--tol",
                     "normalization=1e-30"])
        assert code == EXIT_RESIDUAL
        assert "normalization" in capsys.readouterr().out
