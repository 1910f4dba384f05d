"""
Parameter sweeps over the natural energy arrival rate of the near user or its distance to the destination.

Every sweep point is an independent strategy evaluation, so points are dispatched to a pool of workers; the result table is
assembled in a deterministic order (objective, swept value, canonical combination order) whatever the completion order.
"""
from __future__ import annotations

import enum
import math
import typing
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from enercoop.errors import NUMERICAL_ERRORS, EnercoopError, InvalidConfigurationError
from enercoop.model import ALL_COMBINATIONS, Case, NetworkConfig, Objective, Scenario, Serializable, SolveStatus
from enercoop.solvers import SolverSettings
from enercoop.strategy.screening import DEFAULT_RHO_STEP, DEFAULT_TIE_TOLERANCE, pick_best
from enercoop.strategy.selection import CombinationOutcome, evaluate_combinations
from enercoop.utils.logger import LOGGER
from enercoop.utils.pool import ordered_map
from enercoop.utils.timer import profile

CSV_COLUMNS: tuple[str, ...] = (
    "sweep_param",
    "scenario",
    "case",
    "objective_kind",
    "rho_star",
    "obj_bits",
    "B1_bits",
    "B2_bits",
    "t0",
    "t1",
    "t2",
    "t3",
    "status",
)
"""The columns of a sweep table as written to CSV, in order"""


class SweepParameter(enum.Enum):
    """The network parameter varied by a sweep"""

    ENERGY = "X1"
    """The natural energy arrival rate of U1 (mW)"""
    DISTANCE = "d1"
    """The distance from U1 to D, with U1 kept on the U2-D segment"""


@dataclass(frozen=True)
class SweepSpec(Serializable):
    """The definition of a sweep"""

    parameter: SweepParameter
    start: float
    stop: float
    """The last swept value, included when it lies on the grid"""
    step: float
    base: NetworkConfig = field(default_factory=NetworkConfig.default)
    """The fixed network parameters"""
    objectives: tuple[Objective, ...] = (Objective.WEIGHTED_SUM, Objective.COMMON_THROUGHPUT)
    scenarios: tuple[Scenario, ...] = tuple(Scenario)

    def __post_init__(self: typing.Self) -> None:
        if not self.step > 0:
            raise InvalidConfigurationError(f"the sweep step must be positive (got {self.step})")
        if self.start > self.stop:
            raise InvalidConfigurationError(f"the sweep range is empty ({self.start} > {self.stop})")
        if len(self.objectives) == 0 or len(self.scenarios) == 0:
            raise InvalidConfigurationError("a sweep needs at least one objective and one scenario")
        # every point must be a valid network
        for value in self.values:
            self.config_at(value)

    @staticmethod
    def energy(
        base: NetworkConfig | None = None,
        start: float = 25.0,
        stop: float = 300.0,
        step: float = 25.0,
        **kwargs: typing.Any,
    ) -> SweepSpec:
        """The sweep over X1 at a fixed X2, by default from a quarter to three times X2 = 100 mW"""
        return SweepSpec(parameter=SweepParameter.ENERGY, start=start, stop=stop, step=step, base=base or NetworkConfig.default(), **kwargs)

    @staticmethod
    def distance(
        base: NetworkConfig | None = None,
        start: float = 0.2,
        stop: float = 1.8,
        step: float = 0.2,
        **kwargs: typing.Any,
    ) -> SweepSpec:
        """The sweep of U1 along the U2-D segment, so that du = d2 − d1"""
        return SweepSpec(parameter=SweepParameter.DISTANCE, start=start, stop=stop, step=step, base=base or NetworkConfig.default(), **kwargs)

    @property
    def values(self: typing.Self) -> tuple[float, ...]:
        """The swept values, rounded to 10 decimals"""
        count = math.floor((self.stop - self.start) / self.step + 1e-9)
        return tuple(round(self.start + index * self.step, 10) for index in range(count + 1))

    @property
    def combinations(self: typing.Self) -> tuple[tuple[Scenario, Case], ...]:
        """The (scenario, case) combinations evaluated at every point, in canonical order"""
        return tuple((scenario, case) for scenario, case in ALL_COMBINATIONS if scenario in self.scenarios)

    def config_at(self: typing.Self, value: float) -> NetworkConfig:
        """The network at a sweep point"""
        match self.parameter:
            case SweepParameter.ENERGY:
                return self.base.with_values(X1=value)
            case SweepParameter.DISTANCE:
                return self.base.with_d1_collinear(value)

    def asdict(self: typing.Self) -> dict:
        return {
            "parameter": self.parameter.value,
            "start": self.start,
            "stop": self.stop,
            "step": self.step,
            "base": self.base.asdict(),
            "objectives": [objective.value for objective in self.objectives],
            "scenarios": [scenario.value for scenario in self.scenarios],
        }


@dataclass(frozen=True)
class _PointTask:
    spec: SweepSpec
    value: float
    objective: Objective
    settings: SolverSettings
    rho_step: float
    tie_tolerance: float


def _row(value: float, outcome: CombinationOutcome, winner: bool | None) -> dict:
    alloc = outcome.result.x_star if outcome.result is not None and outcome.status == SolveStatus.CONVERGED else None
    return {
        "sweep_param": value,
        "scenario": outcome.scenario.value,
        "case": outcome.case.value,
        "objective_kind": outcome.objective.value,
        "rho_star": outcome.rho_star,
        "obj_bits": outcome.objective_bits,
        "B1_bits": outcome.B1,
        "B2_bits": outcome.B2,
        "t0": alloc.t0 if alloc is not None else math.nan,
        "t1": alloc.get("t1", math.nan) if alloc is not None else math.nan,
        "t2": alloc.get("t2", math.nan) if alloc is not None else math.nan,
        "t3": alloc.get("t3", math.nan) if alloc is not None else math.nan,
        "status": outcome.status.value,
        "winner": winner,
        "note": outcome.note,
    }


def _sweep_point(task: _PointTask) -> list[dict]:
    spec, value, objective = task.spec, task.value, task.objective
    try:
        outcomes, _ = evaluate_combinations(
            spec.config_at(value),
            objective,
            settings=task.settings,
            combinations=spec.combinations,
            rho_step=task.rho_step,
            tie_tolerance=task.tie_tolerance,
        )
    except (EnercoopError, *NUMERICAL_ERRORS) as error:
        LOGGER.warning("%s=%g [%s] failed: %s", spec.parameter.value, value, objective.value, error)
        failed = [CombinationOutcome(scenario, case, objective, math.nan, None, math.nan, math.nan, SolveStatus.FAILED, str(error)) for scenario, case in spec.combinations]
        return [_row(value, outcome, None) for outcome in failed]

    best = pick_best(outcomes, lambda outcome: outcome.objective_bits, task.tie_tolerance)
    if best is not None:
        LOGGER.info("%s=%g [%s]: %s wins with %.10g bits", spec.parameter.value, value, objective.value, best.label, best.objective_bits)
    return [_row(value, outcome, outcome is best if outcome.status == SolveStatus.CONVERGED else None) for outcome in outcomes]


@profile()
def run_sweep(
    spec: SweepSpec,
    *,
    settings: SolverSettings | None = None,
    rho_step: float = DEFAULT_RHO_STEP,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    workers: int = 1,
) -> pd.DataFrame:
    """
    Evaluate every (scenario, case) combination at every point of a sweep.

    Returns
    -------
    * a table with one row per objective, swept value and combination, holding the `CSV_COLUMNS` plus a `winner` flag (empty
      for combinations without a result) and a `note` explaining skipped or failed combinations
    """
    settings = settings or SolverSettings()
    tasks = [
        _PointTask(spec=spec, value=value, objective=objective, settings=settings, rho_step=rho_step, tie_tolerance=tie_tolerance)
        for objective in spec.objectives
        for value in spec.values
    ]
    LOGGER.notice("sweeping %s over %d values for %d objectives", spec.parameter.value, len(spec.values), len(spec.objectives))

    rows = [row for point in ordered_map(_sweep_point, tasks, workers) for row in point]
    table = pd.DataFrame(rows, columns=[*CSV_COLUMNS, "winner", "note"])
    table["winner"] = table["winner"].astype("boolean")
    return table


def failed_points(table: pd.DataFrame) -> pd.DataFrame:
    """The rows of a sweep table whose combination was evaluated but did not converge"""
    evaluated = ~table["status"].isin([SolveStatus.CONVERGED.value, SolveStatus.SKIPPED.value])
    return table[evaluated]


def winners(table: pd.DataFrame) -> pd.DataFrame:
    """The winning row of every (objective, swept value) pair"""
    return table[table["winner"].fillna(False).astype(bool)].reset_index(drop=True)


def series(table: pd.DataFrame, scenario: Scenario, case: Case, objective: Objective, column: str = "obj_bits") -> pd.Series:
    """A column of a sweep table for one combination and objective, indexed by the swept value"""
    selected = table[(table["scenario"] == scenario.value) & (table["case"] == case.value) & (table["objective_kind"] == objective.value)]
    return pd.Series(np.asarray(selected[column], dtype=float), index=np.asarray(selected["sweep_param"], dtype=float), name=f"{scenario.value}-{case.value}")
