import json
import subprocess
import sys

import pytest

from jointfade.cli import build_parser, main

SMALL = ["--synth.n_total", "200000", "--align.M", "10", "--seed", "3"]


def test_flags_mirror_config_keys():
    from jointfade.config import PipelineConfig
    help_text = build_parser().format_help()
    sub = build_parser()._subparsers._group_actions[0].choices["threshold"].format_help()
    for key in ("--align.M", "--thresholds.grid", "--decluster.mg", "--r2_min", "--seed"):
        assert key in sub
    assert "fit-bgpd" in help_text
    assert len(PipelineConfig.keys()) > 20


def test_synth_then_threshold(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["synth", "--out", str(out)] + SMALL) == 0
    assert out.read_text().startswith("t,rx1_dbm,rx2_dbm\n")
    capsys.readouterr()
    assert main(["threshold", "--input", str(out), "--align.M", "10"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["threshold"]["x"]["found"]


def test_fit_bgpd_methods(capsys):
    assert main(["fit-bgpd", "--method", "logistic"] + SMALL) == 0
    assert "alpha_from_rho" in json.loads(capsys.readouterr().out)["logistic"]
    assert main(["fit-bgpd", "--method", "ppp"] + SMALL) == 0
    assert "mean_symmetrized" in json.loads(capsys.readouterr().out)["ppp"]


def test_report_writes_files(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)] + SMALL) == 0
    assert (tmp_path / "report.json").exists()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("align.M: 0\n")
    assert main(["decluster", "--config", str(cfg)]) == 2
    assert "stage 'config'" in capsys.readouterr().err
    assert main(["decluster", "--config", str(cfg), "--align.M", "10",
                 "--synth.n_total", "20000"]) == 0


def test_stage_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,rx1_dbm,rx2_dbm\n0,-1,-2\n1,abc,-3\n")
    assert main(["decluster", "--input", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "stage 'data'" in err and "line 3" in err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "jointfade", "decluster", "--align.M", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "align.M" in proc.stderr
