"""
This module contains everything needed for reading a sweep table back from a CSV file written by
`enercoop.output.emit_csv`.
"""
from __future__ import annotations

from pathlib import Path

import pandas as pd

from enercoop.errors import InvalidConfigurationError
from enercoop.model import SolveStatus
from enercoop.sweep import CSV_COLUMNS, failed_points
from enercoop.utils.logger import LOGGER

_TEXT_COLUMNS = ("scenario", "case", "objective_kind", "status")


def read_sweep_table(path: str | Path) -> pd.DataFrame:
    """
    Read a sweep table from a CSV file.

    Empty cells become NaN. The header must match `enercoop.sweep.CSV_COLUMNS` exactly.

    Raises
    ------
    * `InvalidConfigurationError` when the header does not match
    """
    table = pd.read_csv(path, skipinitialspace=True, engine="c", dtype={column: str for column in _TEXT_COLUMNS})

    if tuple(table.columns) != CSV_COLUMNS:
        raise InvalidConfigurationError(f"{path} is not a sweep table (columns {list(table.columns)})")

    LOGGER.info("parsed sweep table from %s", path)
    LOGGER.info("    %d rows", len(table))
    LOGGER.info("    %d skipped combinations", (table["status"] == SolveStatus.SKIPPED.value).sum())
    LOGGER.info("    %d swept values", table["sweep_param"].nunique())
    LOGGER.info("    %d failed combinations", len(failed_points(table)))

    return table
