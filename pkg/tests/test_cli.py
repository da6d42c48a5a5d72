"""Command-line interface: outputs, exit codes, determinism, figures."""

import json
import subprocess
import sys

import numpy as np
import pytest

from aeop.cli import main, parse_config_file

RUN = [sys.executable, "-m", "aeop.cli"]


def run_cli(args, cwd):
    return subprocess.run(RUN + args, cwd=cwd, capture_output=True, text=True)


def test_lattice_branch_points(tmp_path):
    res = run_cli(["lattice", "--branch-points", "1", "0", "-1"], tmp_path)
    assert res.returncode == 0
    data = json.loads(res.stdout)["lattice"]
    assert data["omega1"] == pytest.approx(1.31103, abs=1e-5)


def test_lattice_half_periods_caption_consistent(tmp_path):
    res = run_cli(["lattice", "--half-periods", "0.5", "1.5"], tmp_path)
    data = json.loads(res.stdout)["lattice"]
    assert data["e1"] == pytest.approx(6.57974, abs=1e-3)


def test_lattice_bad_ordering_exit_code(tmp_path):
    res = run_cli(["lattice", "--branch-points", "0.4", "0.2", "-0.3"], tmp_path)
    assert res.returncode == 2
    assert "BadOrdering" in res.stderr or "sum to zero" in res.stderr


def test_family_max_n_zero(tmp_path):
    res = run_cli(["family", "--weight", "flat", "--maxn", "0", "--outdir", "."],
                  tmp_path)
    assert res.returncode == 0
    data = json.loads((tmp_path / "family.json").read_text())
    assert data["maxN"] == 0
    assert data["monic"] == [[[1.0, 0.0]]]


def test_zeros_csv_odd_count(tmp_path):
    res = run_cli(["zeros", "--weight", "examplew", "--alpha", "0", "--beta", "0",
                   "--n", "5", "--maxn", "5", "--contour", "gamma2", "--outdir", "."],
                  tmp_path)
    assert res.returncode == 0
    lines = (tmp_path / "zeros.csv").read_text().strip().splitlines()
    assert lines[0] == "n,contour,t,re_z,im_z"
    assert len(lines) == 1 + 6  # n odd: n + 1 zeros
    assert (tmp_path / "zeros.png").exists()


def test_recurrence_csv(tmp_path):
    res = run_cli(["recurrence", "--weight", "flat", "--maxn", "4", "--outdir", "."],
                  tmp_path)
    assert res.returncode == 0
    lines = (tmp_path / "recurrence.csv").read_text().strip().splitlines()
    assert lines[0] == "k,A_k,B_k,C_k"
    assert len(lines) == 6


def test_verify_recurrence_and_exit(tmp_path):
    res = run_cli(["verify", "recurrence", "--weight", "flat", "--maxn", "5",
                   "--outdir", "."], tmp_path)
    assert res.returncode == 0
    report = json.loads((tmp_path / "verify_recurrence.json").read_text())
    assert report["pass"]
    assert report["suite"] == "recurrence"
    assert any("half-period" in note["check"] or "half-period" in str(note)
               for note in report["reference_notes"])


def test_verify_reference_notes_content(tmp_path):
    res = run_cli(["verify", "lattice"], tmp_path)
    assert res.returncode == 0
    report = json.loads(res.stdout)
    notes = {n["check"]: n for n in report["reference_notes"]}
    period_note = notes["square-lattice real half-period"]
    assert period_note["computed"] == pytest.approx(1.3110287771460599)
    assert period_note["published_value"] == pytest.approx(0.5818024568173420)
    assert "figure" in " ".join(notes)
    assert any("e2" in str(n) for n in report["reference_notes"])


def test_verify_unknown_suite(tmp_path):
    res = run_cli(["verify", "nonsense"], tmp_path)
    assert res.returncode == 2


def test_plotdata_values_and_determinism(tmp_path):
    args = ["plotdata", "--half-periods", "0.5", "1.5", "--outdir", "."]
    res = run_cli(args, tmp_path)
    assert res.returncode == 0
    body1 = (tmp_path / "plotdata.csv").read_bytes()
    rows = np.genfromtxt(tmp_path / "plotdata.csv", delimiter=",", names=True)
    # shifted contour: increasing to e2 at t = 1/2 then decreasing; endpoints near e3
    g2 = rows["wp_gamma2"]
    assert g2[0] == pytest.approx(-3.29624, abs=1e-2)
    assert g2.max() == pytest.approx(-3.2835, abs=1e-2)
    assert g2.min() == pytest.approx(-3.29624, abs=1e-2)
    mid = len(g2) // 2
    assert np.all(np.diff(g2[:mid]) > 0) and np.all(np.diff(g2[mid + 1:]) < 0)
    # contour through the origin: e1 at the midpoint, decreasing before it
    g1 = rows["wp_gamma1"]
    assert g1.min() == pytest.approx(6.57974, abs=1e-2)
    assert np.argmin(g1) in (mid - 1, mid)
    # byte-identical rerun
    res2 = run_cli(args, tmp_path)
    assert res2.returncode == 0
    assert (tmp_path / "plotdata.csv").read_bytes() == body1
    assert (tmp_path / "plotdata.png").exists()


def test_lift_command(tmp_path):
    res = run_cli(["lift", "--weight", "examplew", "--alpha", "0.5", "--beta", "0.5",
                   "--n", "3", "--outdir", "."], tmp_path)
    assert res.returncode == 0
    data = json.loads((tmp_path / "lift.json").read_text())
    assert data["pass"] and data["coefficient_diff"] <= 1e-6


def test_decompose_command(tmp_path):
    res = run_cli(["decompose", "--weight", "flat", "--maxn", "4", "--n", "4",
                   "--outdir", "."], tmp_path)
    assert res.returncode == 0
    data = json.loads((tmp_path / "decompose.json").read_text())
    assert data["pass"]
    assert len(data["p1"]) == 3  # degree 2 in the interval variable


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# flat config\nweight = flat\nmaxn = 3\ncontour = \"gamma2\"\n")
    parsed = parse_config_file(cfg)
    assert parsed == {"weight": "flat", "maxn": 3, "contour": "gamma2"}
    res = run_cli(["family", "--config", "run.cfg", "--maxn", "2", "--outdir", "."],
                  tmp_path)
    assert res.returncode == 0
    data = json.loads((tmp_path / "family.json").read_text())
    assert data["maxN"] == 2  # the flag wins


def test_main_entry_in_process(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = main(["lattice", "--branch-points", "1", "0", "-1"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lattice"]["g2"] == pytest.approx(4.0, abs=1e-9)
