import json
import shutil

import numpy as np
import pytest

from queuegrad import (
    ParseError,
    example_lp_instance,
    example_qp_instance,
    parse_problem_file,
    read_trace,
    run,
    write_trace,
)
from queuegrad.cli import _thread_cap, main

LP_FILE = "problems/lp_paper.json"
QP_FILE = "problems/qp_paper.json"


def _write_json(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def _lp_json():
    spec = example_lp_instance()
    return {"family": "lp", "c": list(spec.c),
            "A": [list(row) for row in spec.A], "b": list(spec.b),
            "lower": list(spec.lower), "upper": list(spec.upper)}


class TestParseProblemFile:
    def test_shipped_files_match_builtins(self):
        assert parse_problem_file(LP_FILE) == example_lp_instance()
        assert parse_problem_file(QP_FILE) == example_qp_instance()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="cannot read"):
            parse_problem_file(str(tmp_path / "nope.json"))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError, match="malformed"):
            parse_problem_file(str(path))

    def test_top_level_must_be_object(self, tmp_path):
        path = _write_json(tmp_path / "arr.json", [1, 2, 3])
        with pytest.raises(ParseError, match="object"):
            parse_problem_file(path)

    def test_bad_family(self, tmp_path):
        obj = dict(_lp_json(), family="sdp")
        path = _write_json(tmp_path / "fam.json", obj)
        with pytest.raises(ParseError, match="family"):
            parse_problem_file(path)

    def test_unknown_key(self, tmp_path):
        obj = dict(_lp_json(), extra=1)
        path = _write_json(tmp_path / "extra.json", obj)
        with pytest.raises(ParseError, match="unknown keys: extra"):
            parse_problem_file(path)

    def test_missing_key(self, tmp_path):
        obj = _lp_json()
        del obj["b"]
        path = _write_json(tmp_path / "missing.json", obj)
        with pytest.raises(ParseError, match="missing keys: b"):
            parse_problem_file(path)

    def test_ragged_matrix_names_row(self, tmp_path):
        obj = _lp_json()
        obj["A"][1] = obj["A"][1][:-1]
        path = _write_json(tmp_path / "ragged.json", obj)
        with pytest.raises(ParseError, match="row 2"):
            parse_problem_file(path)

    def test_bool_rejected_as_number(self, tmp_path):
        obj = _lp_json()
        obj["c"][0] = True
        path = _write_json(tmp_path / "bool.json", obj)
        with pytest.raises(ParseError):
            parse_problem_file(path)

    def test_non_numeric_entry(self, tmp_path):
        obj = _lp_json()
        obj["b"][0] = "six"
        path = _write_json(tmp_path / "str.json", obj)
        with pytest.raises(ParseError):
            parse_problem_file(path)

    def test_invalid_instance_reported_with_path(self, tmp_path):
        obj = _lp_json()
        obj["lower"], obj["upper"] = obj["upper"], obj["lower"]
        path = _write_json(tmp_path / "flipped.json", obj)
        with pytest.raises(ParseError, match="flipped.json"):
            parse_problem_file(path)

    def test_non_psd_quadratic(self, tmp_path):
        spec = example_qp_instance()
        obj = {"family": "qp", "c": list(spec.c),
               "A": [list(r) for r in spec.A], "b": list(spec.b),
               "P": [list(r) for r in spec.P],
               "Q": [[-1.0, 0.0], [0.0, 1.0]], "d": list(spec.d),
               "e": spec.e, "lower": list(spec.lower),
               "upper": list(spec.upper)}
        path = _write_json(tmp_path / "npsd.json", obj)
        with pytest.raises(ParseError):
            parse_problem_file(path)


class TestTraceRoundTrip:
    def test_exact_float_round_trip(self, tmp_path, lp_setup):
        _, program, constants = lp_setup
        trace = run(program, constants, iterations=50)
        path = str(tmp_path / "trace.csv")
        write_trace(path, trace, "demo")
        meta, columns = read_trace(path)
        assert meta["algorithm"] == "new"
        assert meta["gamma"] == trace.meta["gamma"]  # 17 digits round-trip
        assert meta["iterations"] == 50
        np.testing.assert_array_equal(columns["t"], trace.t)
        for j in range(4):
            np.testing.assert_array_equal(columns["x_%d" % (j + 1)],
                                          trace.x[:, j])
        np.testing.assert_array_equal(columns["f_xbar"], trace.f_xbar)
        np.testing.assert_array_equal(columns["q_norm"], trace.q_norm)
        np.testing.assert_array_equal(columns["drift"], trace.drift)
        for k in range(3):
            np.testing.assert_array_equal(columns["g_xbar_%d" % (k + 1)],
                                          trace.g_xbar[:, k])

    def test_file_is_ascii_with_lf(self, tmp_path, lp_setup):
        _, program, constants = lp_setup
        trace = run(program, constants, iterations=3)
        path = tmp_path / "trace.csv"
        write_trace(str(path), trace, "demo")
        raw = path.read_bytes()
        raw.decode("ascii")
        assert b"\r" not in raw
        assert raw.startswith(b"# queuegrad-trace\n")
        assert b"wall" not in raw  # timings would break reproducibility


class TestSolveCommand:
    def test_lp_auto_step(self, tmp_path, capsys):
        out = str(tmp_path / "lp.csv")
        code = main(["solve", LP_FILE, "--iterations", "500", "-o", out])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "0.00389105" in stdout  # the derived LP step
        assert "final f(xbar)" in stdout
        meta, _ = read_trace(out)
        assert meta["problem"] == "lp_paper.json"
        assert meta["family"] == "lp"

    def test_qp_explicit_step(self, tmp_path, capsys):
        out = str(tmp_path / "qp.csv")
        code = main(["solve", QP_FILE, "--iterations", "200",
                     "--step", "0.1395", "-o", out])
        assert code == 0
        assert "0.1395" in capsys.readouterr().out
        meta, _ = read_trace(out)
        assert meta["gamma"] == 0.1395

    def test_bad_iterations(self, tmp_path, capsys):
        code = main(["solve", LP_FILE, "--iterations", "0",
                     "-o", str(tmp_path / "x.csv")])
        assert code == 1
        assert "iterations must be >= 1" in capsys.readouterr().err

    def test_missing_problem_file(self, tmp_path, capsys):
        code = main(["solve", str(tmp_path / "ghost.json"),
                     "-o", str(tmp_path / "x.csv")])
        assert code == 1

    def test_file_and_random_conflict(self, tmp_path, capsys):
        code = main(["solve", LP_FILE, "--random", "lp", "3", "2", "7",
                     "-o", str(tmp_path / "x.csv")])
        assert code == 1

    def test_random_instance(self, tmp_path, capsys):
        out = str(tmp_path / "rand.csv")
        code = main(["solve", "--random", "lp", "3", "2", "7",
                     "--iterations", "200", "-o", out])
        assert code == 0
        meta, _ = read_trace(out)
        assert meta["problem"] == "random-lp-n3-m2-seed7"

    def test_baseline_flags(self, tmp_path, capsys):
        out = str(tmp_path / "pd.csv")
        code = main(["solve", LP_FILE, "--algorithm", "pd-subgradient",
                     "--iterations", "100", "--step", "0.001",
                     "--lambda-max", "10", "--no-objective-gradient",
                     "-o", out])
        assert code == 0
        meta, _ = read_trace(out)
        assert meta["algorithm"] == "pd-subgradient"
        assert meta["include_objective_gradient"] is False

    def test_overflow_exits_2_and_writes_partial_trace(self, tmp_path,
                                                       capsys):
        obj = {"family": "lp", "c": [1.0], "A": [[1.0]], "b": [-1e101],
               "lower": [0.0], "upper": [1.0]}
        path = _write_json(tmp_path / "blowup.json", obj)
        out = str(tmp_path / "blowup.csv")
        code = main(["solve", path, "--iterations", "100", "--step", "1.0",
                     "--x-init", "lower", "-o", out])
        assert code == 2
        assert "overflow" in capsys.readouterr().err
        meta, _ = read_trace(out)
        assert "error" in meta

    def test_inner_loop_failure_exits_2(self, tmp_path, capsys):
        code = main(["solve", QP_FILE, "--algorithm", "dual-type",
                     "--iterations", "5", "--inner-tol", "1e-30",
                     "--inner-max-iter", "1",
                     "-o", str(tmp_path / "x.csv")])
        assert code == 2
        assert "inner" in capsys.readouterr().err


class TestVerifyCommand:
    @pytest.fixture()
    def lp_trace_file(self, tmp_path):
        out = str(tmp_path / "lp.csv")
        assert main(["solve", LP_FILE, "--iterations", "400",
                     "-o", out]) == 0
        return out

    def test_clean_trace_passes(self, lp_trace_file, capsys):
        capsys.readouterr()
        code = main(["verify", lp_trace_file, LP_FILE,
                     "--f-star", repr(-86.0 / 15.0)])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "verification passed" in stdout
        assert "stored-columns-consistent" in stdout
        assert "queue-norm-cap" in stdout

    def test_corrupted_q_norm_fails(self, lp_trace_file, tmp_path, capsys):
        lines = open(lp_trace_file).read().splitlines()
        header = next(i for i, l in enumerate(lines)
                      if l.startswith("t,"))
        cols = lines[header].split(",")
        qi = cols.index("q_norm")
        row = lines[header + 3].split(",")
        row[qi] = "-1.0"
        lines[header + 3] = ",".join(row)
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(lines) + "\n", encoding="ascii")
        capsys.readouterr()
        code = main(["verify", str(bad), LP_FILE])
        out = capsys.readouterr()
        assert code == 3
        assert "queue-nonnegative" in out.out
        assert "FAILED" in out.err

    def test_baseline_trace_rejected(self, tmp_path, capsys):
        out = str(tmp_path / "pd.csv")
        assert main(["solve", LP_FILE, "--algorithm", "pd-subgradient",
                     "--iterations", "50", "--step", "0.001",
                     "-o", out]) == 0
        capsys.readouterr()
        assert main(["verify", out, LP_FILE]) == 1
        assert "'new'" in capsys.readouterr().err

    def test_trace_without_x_columns_rejected(self, tmp_path, capsys):
        out = str(tmp_path / "nox.csv")
        assert main(["solve", LP_FILE, "--iterations", "50",
                     "--no-x-columns", "-o", out]) == 0
        capsys.readouterr()
        assert main(["verify", out, LP_FILE]) == 1
        assert "x columns" in capsys.readouterr().err

    def test_f_star_oracle_conflict(self, lp_trace_file, capsys):
        code = main(["verify", lp_trace_file, LP_FILE,
                     "--f-star", "-5.7", "--oracle"])
        assert code == 1


@pytest.fixture(scope="module")
def rate_trace(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("rate") / "lp.csv")
    assert main(["solve", LP_FILE, "--iterations", "5000", "-o", out]) == 0
    return out


class TestRateCommand:
    def test_slope_report(self, rate_trace, capsys):
        capsys.readouterr()
        code = main(["rate", rate_trace, "--f-star", repr(-86.0 / 15.0),
                     "--window", "10", "5000"])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "slope = -" in stdout
        assert "constraint 3:" in stdout

    def test_oracle_f_star(self, rate_trace, capsys):
        code = main(["rate", rate_trace, LP_FILE, "--oracle",
                     "--window", "10", "5000"])
        assert code == 0

    def test_series_out(self, rate_trace, tmp_path, capsys):
        series = tmp_path / "series.csv"
        code = main(["rate", rate_trace, "--f-star", "-5.73",
                     "--window", "10", "5000",
                     "--series-out", str(series)])
        assert code == 0
        text = series.read_text(encoding="ascii")
        assert text.startswith("t,gap\n")
        assert len(text.splitlines()) == 5001

    def test_needs_f_star(self, rate_trace, capsys):
        assert main(["rate", rate_trace]) == 1

    def test_window_too_narrow(self, rate_trace, capsys):
        code = main(["rate", rate_trace, "--f-star", "-5.73",
                     "--window", "4999.5", "5000.5"])
        assert code == 1
        assert "point" in capsys.readouterr().err


class TestCompareCommand:
    def test_table_and_equivalence(self, capsys):
        code = main(["compare", LP_FILE, "--iterations", "200"])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "f_star" in stdout
        table = [l for l in stdout.splitlines()
                 if l.split()[:1] == ["100"]]
        # objective-gap row then constraint row, both at t=100
        assert len(table) == 2
        for line in table:
            _, new_col, pd_col, dual_col = line.split()
            assert new_col == dual_col  # identical runs on LPs
        assert "alpha" in stdout

    def test_thread_cap_env(self, monkeypatch, capsys):
        monkeypatch.setenv("QUEUEGRAD_THREADS", "1")
        assert _thread_cap() == 1
        assert main(["compare", LP_FILE, "--iterations", "100"]) == 0
        monkeypatch.setenv("QUEUEGRAD_THREADS", "zero")
        with pytest.raises(Exception):
            _thread_cap()
        assert main(["compare", LP_FILE, "--iterations", "100"]) == 1

    def test_thread_cap_default(self, monkeypatch):
        monkeypatch.delenv("QUEUEGRAD_THREADS", raising=False)
        assert _thread_cap() >= 1


class TestDeterminism:
    def test_byte_identical_traces(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            assert main(["solve", LP_FILE, "--iterations", "300",
                         "-o", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_random_instances_reproduce(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            assert main(["solve", "--random", "qp", "2", "2", "11",
                         "--iterations", "200", "-o", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestOracleCommand:
    def test_lp(self, capsys):
        code = main(["oracle", LP_FILE])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "vertex-enumeration" in stdout
        assert "-5.733333333" in stdout

    def test_qp(self, capsys):
        code = main(["oracle", QP_FILE, "--grid", "60"])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "grid-polish" in stdout
        assert "-3.75" in stdout

    def test_infeasible_exits_2(self, tmp_path, capsys):
        obj = {"family": "lp", "c": [1.0], "A": [[1.0]], "b": [-2.0],
               "lower": [0.0], "upper": [1.0]}
        path = _write_json(tmp_path / "inf.json", obj)
        assert main(["oracle", path]) == 2

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 1
