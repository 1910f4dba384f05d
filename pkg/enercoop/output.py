"""This module contains the logic for reporting and exporting strategies and sweep tables"""
from __future__ import annotations

from pathlib import Path

import pandas as pd

from enercoop.errors import InvalidConfigurationError, OutputError
from enercoop.model import ScenarioSpec, SolveResult, StrategyResult
from enercoop.network.throughputs import describe_allocation
from enercoop.sweep import CSV_COLUMNS, winners
from enercoop.utils.logger import LOGGER

FLOAT_FORMAT: str = "%.12g"
"""Numbers are written with 12 significant digits"""


def _write(frame: pd.DataFrame, path: str | Path, **kwargs: object) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, float_format=FLOAT_FORMAT, lineterminator="\n", **kwargs)
    except OSError as error:
        raise OutputError(f"cannot write {path}: {error}") from error
    LOGGER.info("wrote %d rows to %s", len(frame), path)


def emit_csv(table: pd.DataFrame, path: str | Path) -> None:
    """
    Write a sweep table to CSV with the columns of `enercoop.sweep.CSV_COLUMNS`.

    Missing values (the allocation of failed combinations, `t3` of scenarios without a relaying slot) are left empty.
    """
    if table.empty:
        raise InvalidConfigurationError("refusing to write an empty sweep table")
    _write(table.loc[:, list(CSV_COLUMNS)], path, index=False)


def emit_plotdata(table: pd.DataFrame, path: str | Path) -> None:
    """
    Write a sweep table in a wide layout for external plotting.

    Each row holds an objective and a swept value; each combination contributes its objective and per-user throughputs
    as columns named like `S1-A:obj_bits`.
    """
    if table.empty:
        raise InvalidConfigurationError("refusing to write an empty sweep table")

    labelled = table.assign(series=table["scenario"] + "-" + table["case"])
    wide = labelled.pivot(index=["objective_kind", "sweep_param"], columns="series", values=["obj_bits", "B1_bits", "B2_bits"])
    wide.columns = [f"{label}:{value}" for value, label in wide.columns]
    wide = wide.reindex(columns=sorted(wide.columns))
    _write(wide.reset_index(), path, index=False)


def rho_table(table: pd.DataFrame) -> pd.DataFrame:
    """Pivot the screened ratios of S1 in a sweep table: one row per objective and case, one column per swept value"""
    relayed = table[table["scenario"] == "S1"]
    return relayed.pivot(index=["objective_kind", "case"], columns="sweep_param", values="rho_star")


def emit_rho_table(table: pd.DataFrame, path: str | Path) -> None:
    """Write the ratio pivot of a sweep table to CSV"""
    _write(rho_table(table), path)


def print_allocation(spec: ScenarioSpec, result: SolveResult) -> None:
    """Pretty-print the slots of a solution"""
    for line in describe_allocation(spec, result.x_star).to_string(index=False, float_format=lambda value: f"{value:.6g}").splitlines():
        LOGGER.notice(line)


def print_strategy(result: StrategyResult) -> None:
    """Pretty-print a strategy selection"""
    LOGGER.notice("winner: %s, rho* = %g, %.10g bits (B1 = %.6g, B2 = %.6g)", result.label, result.rho_star, result.objective_bits, result.B1, result.B2)
    if result.refined_rho is not None:
        LOGGER.notice("refined rho = %.6g, %.10g bits", result.refined_rho, result.refined_objective_bits)
    for note in result.skipped:
        LOGGER.notice("skipped %s", note)

    LOGGER.notice("candidates:")
    for row in result.per_candidate_table:
        LOGGER.notice("    %s-%s rho=%-4g %14.10g bits  %s", row.scenario.value, row.case.value, row.rho, row.objective_bits, row.status.value)


def print_sweep_summary(table: pd.DataFrame) -> None:
    """Pretty-print the winner at every sweep point"""
    for row in winners(table).itertuples():
        LOGGER.notice(
            "%-6s %8g: %s-%s rho*=%-4g %12.8g bits (B1 = %.6g, B2 = %.6g)",
            row.objective_kind, row.sweep_param, row.scenario, row.case, row.rho_star, row.obj_bits, row.B1_bits, row.B2_bits,
        )


def export_strategy(result: StrategyResult) -> dict:
    """Export a strategy selection to a dict"""
    return result.asdict()
