import json

import pandas as pd
import pytest

from enercoop.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run
from enercoop.sweep import CSV_COLUMNS


def test_solve(tmp_path):
    out = tmp_path / "solve.json"
    assert run(["solve", "--scenario", "s4", "--case", "a", "--out", str(out), "-q"]) == EXIT_OK
    content = json.loads(out.read_text(encoding="utf-8"))
    assert content["spec"] == {"scenario": "S4", "case": "A", "objective": "sum", "rho": 0.0}
    assert content["result"]["status"] == "Converged"
    assert content["B1"] > 0


def test_solve_with_network_flags(tmp_path):
    out = tmp_path / "solve.json"
    assert run(["solve", "--scenario", "S3", "--case", "B", "--X1", "50", "--lambda", "2", "--objective", "common", "-o", str(out), "-q"]) == EXIT_OK
    content = json.loads(out.read_text(encoding="utf-8"))
    assert content["network"]["X1"] == 50.0
    assert content["network"]["lambda_"] == 2.0
    assert content["spec"]["objective"] == "common"


def test_usage_errors():
    with pytest.raises(SystemExit) as exit_info:
        run(["solve", "--case", "A", "-q"])
    assert exit_info.value.code == EXIT_USAGE

    with pytest.raises(SystemExit) as exit_info:
        run(["sweep-energy", "--scenarios", "S1,S7", "-q"])
    assert exit_info.value.code == EXIT_USAGE


def test_invalid_values_are_usage_errors(tmp_path):
    assert run(["solve", "--scenario", "S2", "--case", "A", "--rho", "0.3", "-q"]) == EXIT_USAGE
    assert run(["solve", "--scenario", "S4", "--case", "A", "--d1", "3", "-q"]) == EXIT_USAGE
    assert run(["select", "--config", str(tmp_path / "missing.cfg"), "-q"]) == EXIT_USAGE


def test_unwritable_output_fails(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("", encoding="utf-8")
    assert run(["solve", "--scenario", "S4", "--case", "A", "-o", str(blocker / "out.json"), "-q"]) == EXIT_FAILED


def test_capped_solver_fails(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("max_inner = 1\ntau_max = 1\n", encoding="utf-8")
    assert run(["solve", "--scenario", "S3", "--case", "A", "-c", str(config), "-q"]) == EXIT_FAILED


def test_screen_rho(tmp_path):
    out = tmp_path / "screen.json"
    assert run(["screen-rho", "--case", "B", "--rho-step", "0.25", "-o", str(out), "-q"]) == EXIT_OK
    content = json.loads(out.read_text(encoding="utf-8"))
    assert [row["rho"] for row in content["candidates"]] == [0.0, 0.25, 0.5]
    assert content["rho_star"] in (0.0, 0.25, 0.5)


def test_select_without_a_beneficial_relay(tmp_path):
    out = tmp_path / "select.json"
    assert run(["select", "--du", "3", "-o", str(out), "-q"]) == EXIT_OK
    content = json.loads(out.read_text(encoding="utf-8"))
    assert content["scenario"] in ("S3", "S4")
    assert len(content["skipped"]) == 4


def test_sweep_energy(tmp_path):
    out, plotdata, rho = tmp_path / "energy.csv", tmp_path / "energy.plotdata.csv", tmp_path / "energy.rho.csv"
    code = run([
        "sweep-energy", "--start", "50", "--stop", "100", "--step", "50", "--scenarios", "S1,S4", "--objective", "sum",
        "--rho-step", "0.25", "-o", str(out), "--plotdata", str(plotdata), "--rho-table", str(rho), "-q",
    ])
    assert code == EXIT_OK
    table = pd.read_csv(out)
    assert tuple(table.columns) == CSV_COLUMNS
    assert len(table) == 2 * 4
    assert set(table["scenario"]) == {"S1", "S4"}
    assert plotdata.exists()
    assert rho.exists()


def test_sweep_reads_its_range_from_the_config(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("start = 0.8\nstop = 1.0\nobjectives = common\nscenarios = S3\n", encoding="utf-8")
    out = tmp_path / "distance.csv"
    assert run(["sweep-distance", "-c", str(config), "--step", "0.2", "-o", str(out), "-q"]) == EXIT_OK
    table = pd.read_csv(out)
    assert list(table["sweep_param"].unique()) == [0.8, 1.0]
    assert set(table["objective_kind"]) == {"common"}


def test_validate(tmp_path):
    out = tmp_path / "validate.json"
    code = run(["validate", "--objective", "sum", "--grid-step", "0.01", "--points", "20", "-o", str(out), "-q"])
    content = json.loads(out.read_text(encoding="utf-8"))
    checks = {(check["check"], check["subject"]): check for check in content["checks"]}
    assert checks[("perspective gradient", "20 random points")]["passed"]
    assert checks[("rank-1 hessian factor", "20 random points")]["passed"]
    assert all(check["passed"] for check in content["checks"] if check["check"] == "grid oracle")
    assert code == (EXIT_OK if all(check["passed"] for check in content["checks"]) else EXIT_FAILED)
