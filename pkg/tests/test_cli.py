"""Tests for the command-line front end: argument parsing, exit codes, JSON output."""

import io
import json

import pytest

from dnls_core.cli import build_parser, main, parse_axes
from dnls_core.errors import InvalidArgumentError

TINY_RUN = """\
ic.kind = sech
driver.Gamma = 0.5
driver.sigma_x = 3
grid.L = 20
grid.N = 64
integrator.backend = lawson
integrator.t_end = 0.5
integrator.snapshot_dt_event = 0.25
analysis.admissibility_horizon = 100
output.plots = false
"""


def _run(argv):
    buf = io.StringIO()
    code = main(argv, dest=buf)
    return code, buf.getvalue()


# ---------------------------------------------------------------------------
# parse_axes
# ---------------------------------------------------------------------------

def test_parse_axes():
    assert parse_axes(["model.gamma=0.01, 0.02", "ic.kind=sech"]) == {
        "model.gamma": ["0.01", "0.02"],
        "ic.kind": ["sech"],
    }

@pytest.mark.parametrize("item", ["model.gamma", "=1,2", "model.gamma= "])
def test_parse_axes_rejects_malformed(item):
    with pytest.raises(InvalidArgumentError):
        parse_axes([item])


# ---------------------------------------------------------------------------
# build_parser
# ---------------------------------------------------------------------------

def test_parser_collects_overrides():
    args = build_parser().parse_args(["simulate", "--preset", "gaussian-driver", "--set", "grid.L=100",
                                      "--set", "grid.N=256"])
    assert args.preset == "gaussian-driver"
    assert args.overrides == ["grid.L=100", "grid.N=256"]

def test_parser_accepts_preset_alias():
    assert build_parser().parse_args(["simulate", "--preset", "fig8N"]).preset == "fig8N"

def test_parser_rejects_unknown_preset():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["simulate", "--preset", "nope"])

def test_parser_needs_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])

def test_parser_verbose_and_quiet_exclusive():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["-v", "-q", "verify-balance", "run"])

def test_convergence_degrees_default():
    args = build_parser().parse_args(["convergence-study"])
    assert args.degrees == [64, 128, 256, 512]


# ---------------------------------------------------------------------------
# main
# ---------------------------------------------------------------------------

def test_verify_admissibility_prints_json():
    code, out = _run(["verify-admissibility", "--set", "grid.L=20", "--set", "grid.N=32",
                      "--set", "analysis.admissibility_horizon=100"])
    assert code == 0
    report = json.loads(out)
    assert report["horizon"] == 100.0
    assert report["divergence_flag"] is False

def test_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("grid.M = 1\n", encoding="utf-8")
    code, out = _run(["mms-study", "--config", str(path)])
    assert code == 2
    assert out == ""
    assert capsys.readouterr().err.startswith("Error: line 1: grid.M:")

def test_invalid_argument_exit_code(capsys):
    code, _ = _run(["mms-study", "--set", "grid.L=20"])
    assert code == 2
    assert "manufactured" in capsys.readouterr().err

def test_missing_config_file_is_io_error(tmp_path):
    code, _ = _run(["simulate", "--config", str(tmp_path / "missing.cfg")])
    assert code == 4

def test_missing_run_is_storage_error(tmp_path):
    code, _ = _run(["verify-balance", str(tmp_path)])
    assert code == 4

def test_detect_event_window_flags_go_together(tmp_path):
    code, _ = _run(["detect-event", str(tmp_path), "--t-lo", "1"])
    assert code == 2

def test_simulate_then_verify_balance(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_RUN, encoding="utf-8")
    run_dir = tmp_path / "run"
    code, out = _run(["-q", "simulate", "--config", str(cfg), "--out", str(run_dir)])
    assert code == 0
    summary = json.loads(out)
    assert summary["status"] == "completed"
    assert summary["run_dir"] == str(run_dir)
    assert "manifest" in summary["files"]

    code, out = _run(["-q", "verify-balance", str(run_dir)])
    assert code == 0
    assert set(json.loads(out)) >= {"mass", "time_weighted"}

    code, out = _run(["-q", "detect-event", str(run_dir), "--t-lo", "2", "--t-hi", "3"])
    assert code == 5
    assert out == ""
