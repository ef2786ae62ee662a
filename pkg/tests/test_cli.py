"""Command-line front end: subcommands, exit codes, and the entry point."""

import subprocess
import sys

import pytest

from paritylab.cli import main
from paritylab.sweep import HEADER
from paritylab.theory import scaling_table

VALID = """
[task]
kind = "parity"
d = 4
S = [0, 1]

[grid]
models = ["theory"]
P = [8, 16]
kappa = [0.01, 0.05]
seeds = 1

[theory]
N = 64
gamma = 0.5
sigma_w = 1.0
sigma_a = 1.0
"""

DIVERGING = """
[task]
kind = "parity"
d = 3
S = [0, 1]

[grid]
models = ["mf"]
P = [6]
kappa = [0.05]
seeds = 1

[eval]
P_eval = 32

[mf]
N = 4
B = 4
gamma = 0.5
sigma_w = 1.0
sigma_a = 1.0
outer_steps = 40
learning_rate_start = 1e6
learning_rate = 1e6
learning_rate_decay_steps = 10
"""


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_ok(tmp_path, capsys):
    rc = main(["validate", write(tmp_path, VALID)])
    assert rc == 0
    assert capsys.readouterr().out.startswith("ok: 1 model(s), 4 cells")


def test_validate_reports_suggestions(tmp_path, capsys):
    rc = main(["validate", write(tmp_path, "wrokers = 2\n" + VALID)])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "did you mean 'workers'" in err


def test_validate_missing_file(tmp_path, capsys):
    rc = main(["validate", str(tmp_path / "nope.toml")])
    assert rc == 1
    assert "not found" in capsys.readouterr().err


def test_sweep_needs_config_or_preset(capsys):
    rc = main(["sweep"])
    assert rc == 1
    assert "config file" in capsys.readouterr().err


def test_sweep_runs_and_resumes(tmp_path, capsys):
    cfg = write(tmp_path, VALID)
    out = str(tmp_path / "r.csv")
    rc = main(["sweep", cfg, "--out", out])
    assert rc == 0
    assert "cells=4 ok=4 failed=0 skipped=0" in capsys.readouterr().out
    with open(out) as fh:
        assert fh.readline().strip() == HEADER
    rc = main(["sweep", cfg, "--out", out])
    assert rc == 0
    assert "skipped=4" in capsys.readouterr().out


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_sweep_failed_cells_exit_2(tmp_path, capsys):
    rc = main(["sweep", write(tmp_path, DIVERGING), "--out", str(tmp_path / "d.csv")])
    assert rc == 2
    assert "failed=1" in capsys.readouterr().out


def test_sweep_rejects_unknown_preset(capsys):
    rc = main(["sweep", "--preset", "desk-fig9"])
    assert rc == 1
    assert "unknown preset" in capsys.readouterr().err


def test_theory_table_matches_library(capsys):
    rc = main(
        [
            "theory-table",
            "--mode", "MF",
            "--d", "64,128",
            "--k", "2",
            "--N", "1000000",
        ]
    )
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "d,kappa_c_sq"
    expected = scaling_table("MF", [64, 128], 2, N=1_000_000, gamma=0.5,
                             sigma_w=1.0, sigma_a=1.0, rho_on=1.0)
    for line, (d, kc2) in zip(lines[1:], expected):
        assert line == f"{d},{kc2:.17g}"


def test_theory_table_rejects_bad_dims(capsys):
    rc = main(["theory-table", "--mode", "MF", "--d", "a,b", "--k", "2", "--N", "64"])
    assert rc == 1
    assert "comma-separated integers" in capsys.readouterr().err


def test_theory_table_rejects_empty_dims(capsys):
    rc = main(["theory-table", "--mode", "MF", "--d", ",", "--k", "2", "--N", "64"])
    assert rc == 1


def test_usage_errors_exit_1_not_2(capsys):
    # argparse would exit 2; 2 is reserved for failed sweep cells
    assert main([]) == 1
    assert main(["theory-table", "--mode", "bogus", "--d", "8", "--k", "2", "--N", "4"]) == 1


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, VALID)
    proc = subprocess.run(
        [sys.executable, "-m", "paritylab.cli", "validate", cfg],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("ok:")
