import io
import json
import math
import runpy
import sys

import pandas as pd
import pytest

from scipy import special

from BIZ.__main__ import main, parse_command_line
from BIZ.RunConfig import RunConfig
from BIZ.util import DomainError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_zeros_csv(in_tmpdir, capsys):
    code, out, _ = run(capsys, "zeros", "--k", "0", "--n-max", "3", "-q")
    assert code == 0
    df = pd.read_csv(io.StringIO(out))
    assert list(df.columns) == ["n", "value", "residual"]
    for got, ref in zip(df["value"], special.jn_zeros(0, 3)):
        assert abs(got - ref) <= 1e-10
    assert (in_tmpdir / "biz_log.txt").exists()


def test_zeros_half_order(in_tmpdir, capsys):
    code, out, _ = run(capsys, "zeros", "--k", "1/2", "--n-max", "4", "-q", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [r["n"] for r in rows] == [1, 2, 3, 4]
    for r in rows:
        assert abs(r["value"] - r["n"] * math.pi) <= 1e-10


def test_decimal_order_notice(in_tmpdir, capsys):
    code, _, err = run(capsys, "zeros", "--k", "0.5", "--n-max", "1")
    assert code == 0
    assert "converted to the rational 1/2" in err
    assert "BIZ [v." in err


def test_bad_order(in_tmpdir, capsys):
    code, out, err = run(capsys, "zeros", "--k=-1.5", "--n-max", "1", "-q")
    assert code == 2
    assert out == ""
    assert "order must exceed -1" in err


def test_missing_order(in_tmpdir, capsys):
    code, _, err = run(capsys, "zeros", "-q")
    assert code == 2
    assert "--k" in err


def test_bad_curve_index(in_tmpdir, capsys):
    code, _, _ = run(capsys, "gcurve", "--k", "2", "--m", "1", "-q")
    assert code == 2


def test_bad_format(in_tmpdir, capsys):
    code, _, _ = run(capsys, "zeros", "--k", "0", "--format", "xml", "-q")
    assert code == 2


def test_gcurve_csv(in_tmpdir, capsys):
    code, out, _ = run(capsys, "gcurve", "--k", "2", "--m", "3", "-q")
    assert code == 0
    assert "6 - r^2/8" in out
    assert "4*sqrt(3)" in out
    assert "diverges" in out


def test_gcurve_pole_and_root(in_tmpdir, capsys):
    code, out, _ = run(capsys, "gcurve", "--k", "2", "--m", "4", "-q")
    assert code == 0
    assert "4*sqrt(5)" in out and "sqrt(30)" in out


def test_gcurve_json(in_tmpdir, capsys):
    code, out, _ = run(capsys, "gcurve", "--k", "0", "--m", "2", "--format", "json", "-q")
    assert code == 0
    doc = json.loads(out)
    assert doc["expression"] == "2"
    assert doc["poles"] == [] and doc["roots"] == []
    assert doc["constant"] == "2"


def test_gcurve_samples(in_tmpdir, capsys):
    code, out, _ = run(capsys, "gcurve", "--k", "2", "--m", "4", "--r-max", "10",
                       "--samples", "20", "--format", "json", "-q")
    assert code == 0
    assert len(json.loads(out)["samples"]) == 20


def test_classify_json(in_tmpdir, capsys):
    code, out, _ = run(capsys, "classify", "--k", "2", "--n", "1", "--format", "json", "-q")
    assert code == 0
    doc = json.loads(out)
    assert (doc["case_234"], doc["case_5"], doc["pole_in_branch"]) == ("B", "IV", True)
    assert doc["predicted_ordering"][:3] == ["j_{3,1}", "j_{4,1}", "j_{2,2}"]


def test_verify_single_order(in_tmpdir, capsys):
    code, out, _ = run(capsys, "verify", "--k", "2", "--n-max", "8", "--format", "json", "-q")
    assert code == 0
    doc = json.loads(out)
    assert doc["all_agree"]
    assert doc["counts"] == {"cells": 8, "agree": 8, "disagree": 0, "skipped": 0}


def test_verify_negative_control(in_tmpdir, capsys):
    code, out, _ = run(capsys, "verify", "--k", "2", "--n-max", "3", "--corrupt-threshold", "-q")
    assert code == 1
    df = pd.read_csv(io.StringIO(out))
    assert df["disagree"].sum() > 0


def test_figure_files(in_tmpdir, capsys):
    args = ["figure", "--k", "2", "--n-max", "8", "-o", "fig2", "-q"]
    assert run(capsys, *args)[0] == 0
    names = ["samples", "zeros", "branches"]
    first = {n: (in_tmpdir / "fig2_{}.csv".format(n)).read_bytes() for n in names}
    zeros = pd.read_csv(in_tmpdir / "fig2_zeros.csv")
    assert list(zeros["label"][:5]) == ["j_{2,1}", "j_{3,1}", "j_{4,1}", "j_{2,2}", "j_{5,1}"]
    samples = pd.read_csv(in_tmpdir / "fig2_samples.csv")
    assert len(samples) == 2000
    assert samples["F_k"].isna().any()

    assert run(capsys, *args)[0] == 0
    for n in names:
        assert (in_tmpdir / "fig2_{}.csv".format(n)).read_bytes() == first[n]


def test_figure_first_branch(in_tmpdir, capsys):
    code, out, _ = run(capsys, "figure", "--k", "0", "--n-max", "2", "--samples", "400",
                       "--format", "json", "-q")
    assert code == 0
    doc = json.loads(out)
    j11 = special.jn_zeros(1, 1)[0]
    first = [row["F_k"] for row in doc["samples"] if row["r"] < j11 and row["F_k"] is not None]
    assert first and all(v < 2 for v in first)
    assert len(doc["branches"]) == 3


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        parse_command_line(["--version"])
    assert exc.value.code == 0
    assert "BIZ" in capsys.readouterr().out


def test_no_command(capsys):
    with pytest.raises(SystemExit) as exc:
        parse_command_line([])
    assert exc.value.code == 2


def test_runconfig():
    config = RunConfig("zeros", quiet=True)
    config.set_param("k", "7/3")
    assert str(config["k"]) == "7/3"
    with pytest.raises(DomainError):
        config.set_param("nonsense", 1)
    with pytest.raises(DomainError):
        config.set_param("ell_max", "5")
    with pytest.raises(DomainError):
        RunConfig("plot")


def test_classify_precision_flag(in_tmpdir, capsys):
    code, out, err = run(capsys, "classify", "--k", "2", "--n", "1", "--precision", "5", "-q")
    assert code == 1
    assert out == ""
    assert "is within 5.0 of" in err
    code, _, _ = run(capsys, "classify", "--k", "2", "--n", "1", "--precision=-1", "-q")
    assert code == 2


def test_module_entry_reports_error_once(in_tmpdir, capsys, monkeypatch):
    monkeypatch.setattr(sys, "argv", ["BIZ", "zeros", "--k=-1.5", "--n-max", "1", "-q"])
    with pytest.raises(SystemExit) as exit_info:
        runpy.run_module("BIZ", run_name="__main__")
    assert exit_info.value.code == 2
    _, err = capsys.readouterr()
    assert err.count("order must exceed -1") == 1


def test_cli_logger_stays_under_package():
    module = runpy.run_module("BIZ.__main__", run_name="__biz_cli__")
    assert module["LOGGER"].name == "BIZ.__main__"
    assert module["LOGGER"].parent.name == "BIZ"
