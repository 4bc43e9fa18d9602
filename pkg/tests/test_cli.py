import json
import shutil
import subprocess
import sys

import pytest

from psilcf.cli import build_parser, resolve_config, run


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_gamma_prints_four(out, capsys):
    assert run(["gamma", "--psi", "1", "--x", "5", "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "4"
    doc = _manifest(out)
    assert doc["command"] == "gamma" and doc["results"][0]["gamma"] == pytest.approx(4.0, rel=1e-14)
    assert doc["config"]["psi"] == "1" and "version" in doc


def test_gamma_inverse_and_theta(out, capsys):
    assert run(["gamma", "--psi", "x", "--inverse", "0", "--out", str(out)]) == 0
    assert float(capsys.readouterr().out) == 1.0
    assert run(["theta", "--psi", "sqrt(x)", "--x", "16", "--out", str(out)]) == 0
    assert float(capsys.readouterr().out) == 4.0


def test_check_psi_lcf_pass(out, capsys):
    assert run(["check-psi-lcf", "--g", "x^-3", "--psi", "sqrt(x)", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["verdict"] == "PASS"
    assert _manifest(out)["verdicts"] == {"psi_lcf": "PASS"}
    header = (out / "check.csv").read_text().splitlines()[0]
    assert header == "check,function,psi,v,x,value,verdict"


def test_check_psi_lcf_fail_exit_code(out):
    assert run(["check-psi-lcf", "--g", "exp(-x)", "--psi", "sqrt(x)", "--out", str(out)]) == 1
    assert _manifest(out)["verdicts"]["psi_lcf"] == "FAIL"


def test_check_class(out):
    assert run(["check-class", "--psi", "sqrt(x)", "--cls", "K", "--out", str(out)]) == 0
    assert run(["check-class", "--psi", "x", "--cls", "K", "--out", str(out)]) == 1
    assert run(["check-class", "--psi", "sqrt(x)", "--cls", "K1", "--out", str(out)]) == 0


def test_upper_power(out):
    assert run(["upper-power", "--g", "x^-3", "--out", str(out)]) == 0
    assert run(["upper-power", "--g", "exp(-x)", "--out", str(out)]) == 1


def test_build_and_check(out, capsys):
    assert run(["build", "--x", "100", "--check", "--out", str(out)]) == 0
    x, g = capsys.readouterr().out.split()
    assert float(x) == 100.0 and float(g) > 1
    assert _manifest(out)["verdicts"]["psi_lcf"] == "PASS"


def test_missing_required_flag(out, capsys):
    assert run(["check-psi-lcf", "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "usage:" in err and "--g" in err


def test_unknown_config_key(tmp_path, out, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"psi": "1", "x": [5], "colour": "red"}))
    assert run(["gamma", "--config", str(cfg), "--out", str(out)]) == 2
    assert "colour" in capsys.readouterr().err


def test_flags_override_config(tmp_path, out, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"psi": "x", "x": [5]}))
    assert run(["gamma", "--config", str(cfg), "--psi", "1", "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "4"
    args = build_parser().parse_args(["gamma", "--config", str(cfg)])
    assert resolve_config("gamma", args)["psi"] == "x"


def test_bad_expression_is_usage_error(out):
    assert run(["gamma", "--psi", "sqrt(", "--x", "5", "--out", str(out)]) == 2


def test_output_dir_from_environment(tmp_path, monkeypatch, capsys):
    target = tmp_path / "env-out"
    monkeypatch.setenv("PSILCF_OUTPUT_DIR", str(target))
    assert run(["gamma", "--psi", "1", "--x", "2"]) == 0
    assert (target / "manifest.json").exists()


def test_simulate(out, capsys):
    assert run(["simulate", "--n", "1", "--x", "8.5", "--reps", "100000", "--seed", "3", "--out", str(out)]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["n"] == 1 and rec["estimator"] == "crude" and 0 < rec["p_sum"] < 0.01


def _scan_config(tmp_path, **kw):
    cfg = {"tail": "x^-3", "h": "n", "ns": [10, 20, 40], "reps": 20000, "seed": 5, "estimator": "both"}
    cfg.update(kw)
    p = tmp_path / "exp.json"
    p.write_text(json.dumps(cfg))
    return p


def test_ratio_scan_light_tail_control_fails(tmp_path, out, capsys):
    cfg = _scan_config(tmp_path, tail="exp(-x)", h="n^0.75", ns=[50, 100, 200, 400], reps=10000,
                       estimator="crude", psi="sqrt(x)")
    assert run(["ratio-scan", "--config", str(cfg), "--out", str(out)]) == 1
    doc = _manifest(out)
    assert doc["hypotheses"]["psi_lcf"] == "FAIL"
    assert doc["verdicts"]["scan"] == "FAIL"


def test_ratio_scan_outputs_are_reproducible(tmp_path, capsys):
    cfg = _scan_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    run(["ratio-scan", "--config", str(cfg), "--out", str(a), "--plot"])
    run(["ratio-scan", "--config", str(cfg), "--out", str(b), "--plot"])
    for name in ("results.csv", "plot.csv", "plot.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    doc = _manifest(a)
    assert doc["config"]["seed"] == 5 and doc["experiment"]["reps"] == 20000
    assert set(doc["verdicts"]) >= {"ratio_trend", "zone", "cross_check", "scan"}
    assert (a / "plot.svg").read_text().startswith("<svg")


def test_report_regenerates_plot(tmp_path, out, capsys):
    src = tmp_path / "scan"
    code = run(["ratio-scan", "--config", str(_scan_config(tmp_path)), "--out", str(src)])
    capsys.readouterr()
    assert run(["report", "--dir", str(src), "--out", str(out)]) == code
    assert (out / "plot.svg").exists()
    assert json.loads(capsys.readouterr().out)["scan"] in ("PASS", "FAIL")


def test_report_missing_manifest(tmp_path, out):
    assert run(["report", "--dir", str(tmp_path / "nothing"), "--out", str(out)]) == 2


@pytest.mark.skipif(shutil.which("psilcf") is None, reason="console script not installed")
def test_console_script(tmp_path):
    r = subprocess.run(["psilcf", "gamma", "--psi", "1", "--x", "5", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "4"


def test_module_version_flag():
    r = subprocess.run([sys.executable, "-c", "from psilcf.cli import run; raise SystemExit(run(['--version']))"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "psilcf" in r.stdout
