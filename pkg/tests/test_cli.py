import csv
import io
import json
import math
import shutil
import subprocess

import pytest

from modent.cli import EPILOG, RunConfig, build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_entropy_command(capsys):
    code, out, _ = run(capsys, "entropy", "--f", "x*window(B)", "--k", "1", "--interval", "-1,1")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["result"]["value"] == pytest.approx(4 * math.pi / 3, abs=1e-8)
    assert doc["result"]["residual_vs_other_path"] < 1e-8
    assert "normalization" in doc["result"]


def test_entropy_zero_and_saturation(capsys):
    code, out, _ = run(capsys, "entropy", "--f", "0")
    assert code == 0 and json.loads(out)["result"]["value"] == 0.0
    code, out, _ = run(capsys, "entropy", "--f", "x*window(B)", "--k", "2")
    assert code == 0 and abs(json.loads(out)["result"]["value"]) < 1e-8


def test_entropy_pictures(capsys):
    code, out, _ = run(capsys, "entropy", "--f", "x^2*window(B)", "--k", "2", "--picture", "variance")
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(32 * math.pi / 45, abs=1e-8)
    code, out, _ = run(capsys, "entropy", "--f", "(x^2-1)^2*gauss(x)", "--k", "2", "--picture", "kspace")
    assert code == 0
    assert json.loads(out)["result"]["residual_vs_other_path"] < 1e-6
    code, _, _ = run(capsys, "entropy", "--f", "x", "--k", "3", "--picture", "variance")
    assert code == 3


def test_entropy_radius_interval(capsys):
    code, out, _ = run(capsys, "entropy", "--f", "x*window(2)", "--interval", "2")
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(16 * math.pi / 3, abs=1e-8)


def test_moment_error_exit_code(capsys):
    code, out, _ = run(capsys, "entropy", "--f", "window(B)", "--k", "2")
    assert code == 2
    doc = json.loads(out)
    assert doc["error"] == "MomentError"
    assert doc["moments"][0] == pytest.approx(2.0, abs=1e-10)


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "entropy", "--f", "sin(x)")
    assert code == 3
    assert json.loads(err)["error"] == "ParseError"


def test_usage_errors_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["entropy", "--k", "two"])
    assert exc.value.code == 3
    code, _, _ = run(capsys, "entropy", "--k", "0")
    assert code == 3
    code, _, _ = run(capsys, "scan", "--R", "4,2")
    assert code == 3


@pytest.mark.parametrize("exc", ["NonConvergence", "GridResolutionError", "PoleError",
                                 "CutNotAdmissible", "IllConditioned", "TailError"])
def test_numerical_error_exit_code(capsys, monkeypatch, exc):
    from modent import cli, errors

    def boom(cfg):
        raise getattr(errors, exc)("synthetic failure")

    monkeypatch.setitem(cli.HANDLERS, "entropy", boom)
    code, out, err = run(capsys, "entropy")
    assert code == 4 and out == ""
    assert json.loads(err)["error"] == exc


def test_bound_command(capsys):
    code, out, _ = run(capsys, "bound", "--f", "(x^2-1/3)*window(B)", "--k", "2")
    res = json.loads(out)["result"]
    assert code == 0 and res["ok"]
    assert res["slack"] == pytest.approx(16 * math.pi / 45, abs=1e-8)


def test_flowcheck_command(capsys):
    code, out, _ = run(capsys, "flowcheck", "--f", "bump(2*x)", "--k", "3")
    res = json.loads(out)["result"]
    assert code == 0 and res["order"] >= 1.9 and res["identity_residual"] <= 1e-8


def test_legendre_command(capsys):
    code, out, _ = run(capsys, "legendre", "--n-max", "20", "--f", "(x^2-1)^2*exp(x)", "--k", "3")
    res = json.loads(out)["result"]
    assert code == 0
    assert len(res["eigen_residuals"]) == 21 and res["max_eigen_residual"] <= 1e-8
    assert res["bound"]["slack"] > 0


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--trials", "0")
    res = json.loads(out)["result"]
    assert code == 0 and res["violations"] == [] and res["trials"] == 0
    code, out, _ = run(capsys, "oracle", "--trials", "40", "--seed", "5")
    assert code == 0
    code, out, _ = run(capsys, "oracle", "--trials", "20", "--mutate")
    assert code == 1
    assert json.loads(out)["result"]["violations"]


def _rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# modent scan schema_version=1")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--f", "bump(x)", "--k", "1", "--R", "2,4,8,16",
                       "--format", "csv")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == ["R", "S", "S_over_R", "limit", "gap"]
    gaps = [float(r["gap"]) for r in rows]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert "\r\n" in out


def test_scan_empty_and_limit_independent_of_k(capsys):
    code, out, _ = run(capsys, "scan", "--f", "bump(x)", "--R", "", "--format", "csv")
    assert code == 0 and _rows(out) == []
    code, _, _ = run(capsys, "scan", "--f", "bump(x)", "--k", "2", "--R", "2,4")
    # bump has nonzero mean, so k = 2 must be refused
    assert code == 2
    f = "x*bump(x)"
    _, out1, _ = run(capsys, "scan", "--f", f, "--k", "1", "--R", "2,4", "--format", "csv")
    _, out2, _ = run(capsys, "scan", "--f", f, "--k", "2", "--R", "2,4", "--format", "csv")
    assert [r["limit"] for r in _rows(out1)] == [r["limit"] for r in _rows(out2)]


def test_scan_gap_tolerance(capsys):
    code, _, _ = run(capsys, "scan", "--f", "bump(x)", "--R", "2,4", "--gap-tol", "1e-6")
    assert code == 1
    code, _, _ = run(capsys, "scan", "--f", "bump(x)", "--R", "2,4,64", "--gap-tol", "1e-3")
    assert code == 0


def test_threads_do_not_change_output(capsys, monkeypatch):
    args = ("scan", "--f", "x*bump(x)", "--R", "1,2,3,5,8", "--format", "csv")
    monkeypatch.setenv("MODENT_THREADS", "1")
    _, one, _ = run(capsys, *args)
    monkeypatch.setenv("MODENT_THREADS", "4")
    _, four, _ = run(capsys, *args)
    assert one == four


def test_deterministic_json(capsys):
    args = ("oracle", "--trials", "15", "--seed", "3")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    doc = json.loads(a)
    assert list(doc) == sorted(doc)


def test_config_roundtrip(tmp_path, capsys):
    cfg = RunConfig(command="scan", function="bump(x)", k=2, interval=(-2, 3), R_values=[1, 2])
    text = cfg.to_json()
    assert RunConfig.from_json(text).to_json() == text
    path = tmp_path / "cfg.json"
    path.write_text(text)
    code, out, _ = run(capsys, "scan", "--config", str(path), "--print-config")
    assert code == 0 and out.strip() == text
    code, out, _ = run(capsys, "scan", "--config", str(path), "--k", "1", "--print-config")
    assert json.loads(out)["k"] == 1
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus": 1})


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "entropy", "--f", "x*window(B)", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text(encoding="utf-8"))["result"]["value"] > 4


def test_help_documents_exit_codes():
    text = build_parser().format_help()
    for code in ("0", "1", "2", "3", "4"):
        assert f"  {code}  " in text
    assert "MODENT_THREADS" in EPILOG


@pytest.mark.skipif(shutil.which("modent") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["modent", "entropy", "--f", "x*window(B)", "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert abs(json.loads(proc.stdout)["result"]["value"]) < 1e-8
