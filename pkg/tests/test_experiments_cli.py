"""CLI surface: CSV schemas, manifests, reproducibility, exit codes."""

import json
import math

import numpy as np
import pytest

from prodmap.cli import main
from prodmap.runio import fmt_cell, read_schema_line


def run_cli(args):
    return main(args)


def read_body(path):
    return path.read_bytes()


def test_bifurcation_outputs_and_reproducibility(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    args = ["bifurcation", "--grid", "24", "--range", "0,2.2",
            "--burn", "200", "--keep", "40", "--seed", "1"]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    for name in ("bifurcation_points.csv", "bifurcation_divergence.csv",
                 "bifurcation_thresholds.csv"):
        assert read_body(out1 / name) == read_body(out2 / name)
    meta = read_schema_line(out1 / "bifurcation_points.csv")
    assert meta["schema"] == "bifurcation-points/1"
    assert meta["artifact_version"] == "0.1.0"
    man = json.loads((out1 / "run_manifest.json").read_text())
    assert man["command"] == "bifurcation" and man["seed"] == 1
    assert len(man["output_files"]) == 3
    th = (out1 / "bifurcation_thresholds.csv").read_text().splitlines()
    assert any(repr(2 * math.sqrt(2) - 2) in line for line in th)


def test_verify_reduction_zero_steps_and_subset(tmp_path):
    out = tmp_path / "r"
    assert run_cli(["verify-reduction", "--mu", "1.3", "--steps", "0",
                    "--seed", "0", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.glob("*.csv"))
    assert files == ["reduction_mu1p3.csv", "reduction_summary.csv"]
    lines = (out / "reduction_mu1p3.csv").read_text().splitlines()
    assert len(lines) == 3  # schema comment, header, single step-0 row
    assert lines[2].split(",")[-1] == "0.0"


def test_verify_reduction_fails_on_impossible_tolerance(tmp_path):
    out = tmp_path / "r2"
    code = run_cli(["verify-reduction", "--mu", "0.5", "--steps", "40",
                    "--tol", "0", "--seed", "0", "--out", str(out)])
    assert code == 1


def test_phase_portrait_files(tmp_path):
    out = tmp_path / "p"
    assert run_cli(["phase-portrait", "--mu", "0.7", "--steps", "30",
                    "--seed", "0", "--out", str(out)]) == 0
    names = {p.name for p in out.glob("*.csv")}
    assert names == {"portrait_curves_mu0p7.csv"} | {
        f"portrait_orbit_mu0p7_{L}.csv" for L in "ABCD"}
    body = (out / "portrait_orbit_mu0p7_C.csv").read_text().splitlines()
    meta = read_schema_line(out / "portrait_orbit_mu0p7_C.csv")
    assert meta["schema"] == "orbit-trace/1"
    # exterior seed diverges: last row flagged, all cells finite or 'diverged'
    last = body[-1].split(",")
    assert last[11] == "1"
    for cell in last[:10]:
        if cell:
            float(cell)


def test_separatrix_crossing_smoke(tmp_path):
    out = tmp_path / "s"
    assert run_cli(["separatrix-crossing", "--m-list", "full,8,1",
                    "--traj-steps", "50", "--draws", "200",
                    "--seed", "0", "--out", str(out)]) == 0
    man = json.loads((out / "run_manifest.json").read_text())
    fractions = [n for n in man["notes"] if "exit_fraction" in n]
    assert len(fractions) == 3
    meta = read_schema_line(out / "crossing_landings.csv")
    assert meta["schema"] == "crossing-landings/1"


def test_lyapunov_smoke(tmp_path):
    out = tmp_path / "l"
    assert run_cli(["lyapunov", "--sizes", "1,full", "--steps", "120",
                    "--real", "6", "--seed", "0", "--out", str(out)]) == 0
    rows = (out / "lyapunov_summary.csv").read_text().splitlines()
    assert len(rows) == 4  # comment, header, two sizes
    man = json.loads((out / "run_manifest.json").read_text())
    assert any("lambda_hat" in n for n in man["notes"])


def test_lsa_sgd_smoke(tmp_path):
    out = tmp_path / "g"
    assert run_cli(["lsa-sgd", "--n", "8", "--d", "2", "--N", "5",
                    "--m-list", "full,1", "--steps", "10", "--warm", "100",
                    "--seed", "1", "--out", str(out)]) == 0
    mu_rows = (out / "sgd_mu_values.csv").read_text().splitlines()
    assert len(mu_rows) == 10
    assert read_schema_line(out / "sgd_diagnostics.csv")["schema"] == "sgd-diagnostics/1"


def test_identity_suite_cli(tmp_path, capsys):
    assert run_cli(["identity-suite", "--samples", "300", "--seed", "0",
                    "--out", str(tmp_path / "i")]) == 0
    printed = capsys.readouterr().out
    assert "route_identity" in printed and "ALL PASS" in printed
    assert (tmp_path / "i" / "identity_report.csv").exists()


def test_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("PRODMAP_OUTDIR", str(tmp_path / "envout"))
    assert run_cli(["bifurcation", "--grid", "5", "--range", "0,1",
                    "--burn", "10", "--keep", "5"]) == 0
    assert (tmp_path / "envout" / "bifurcation" / "bifurcation_points.csv").exists()


def test_argument_error_exit_code(tmp_path):
    assert run_cli(["bifurcation", "--grid", "1", "--range", "0,1",
                    "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as err:
        run_cli(["no-such-command"])
    assert err.value.code == 2


def test_fmt_cell_contract():
    assert fmt_cell(0.1) == "0.1"
    assert fmt_cell(np.float64(1.0) / 3) == repr(1 / 3)
    assert fmt_cell(7) == "7" and fmt_cell(True) == "1"
    assert fmt_cell("diverged") == "diverged"
    with pytest.raises(ValueError):
        fmt_cell(float("nan"))
