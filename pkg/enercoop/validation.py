"""
Self-checks of the solvers on a network.

* the Newton barrier method against the brute-force grid on the programs without data cooperation
* the analytic derivatives against central finite differences, on random perspective points and on every program
* the Newton barrier method against the iterative quadratic approach on every combination, with the number of rounds the
  latter needs
* the fidelity of the quadratic model of the perspective (reported, never failing)
"""
from __future__ import annotations

import math
import typing
from dataclasses import dataclass

import numpy as np
import pandas as pd

from enercoop.convex.perspective import perspective_gradient, perspective_hessian, perspective_value
from enercoop.convex.program import initial_point
from enercoop.errors import EnercoopError
from enercoop.model import ALL_COMBINATIONS, Case, NetworkConfig, Objective, Scenario, ScenarioSpec
from enercoop.network.channels import derive_channels, relay_beneficial, rho_max
from enercoop.network.formulation import build_problem
from enercoop.oracle import GridSpec, brute_force_grid, finite_diff_report
from enercoop.solvers import SolverSettings, relative_gap, solve_iterative, solve_nb
from enercoop.solvers.quadratic import model_fidelity
from enercoop.strategy.screening import rho_grid
from enercoop.utils.logger import LOGGER
from enercoop.utils.pool import ordered_map
from enercoop.utils.timer import profile

GRADIENT_TOLERANCE: float = 1e-6
HESSIAN_TOLERANCE: float = 1e-4
RANK_ONE_TOLERANCE: float = 1e-12
SOLVER_GAP_TOLERANCE: float = 1e-4
QUAD_ROUND_LIMIT: int = 10
"""Outer rounds the iterative quadratic approach is expected to need at most"""


@dataclass(frozen=True)
class Check:
    """The outcome of one validation check"""

    check: str
    subject: str
    value: float
    threshold: float

    @property
    def passed(self: typing.Self) -> bool:
        return math.isfinite(self.value) and self.value <= self.threshold


def _specs(cfg: NetworkConfig, objective: Objective, every_ratio: bool = False) -> list[ScenarioSpec]:
    """One program per combination, S1 at the middle of its ratio range or at every screened ratio"""
    ch = derive_channels(cfg)
    specs = []
    for scenario, case in ALL_COMBINATIONS:
        if scenario.relays and not relay_beneficial(ch):
            continue
        if scenario != Scenario.S1:
            ratios: tuple[float, ...] = (0.0,)
        else:
            ratios = rho_grid(rho_max(ch)) if every_ratio else (round(rho_max(ch) / 2, 10),)
        specs += [ScenarioSpec(scenario=scenario, case=case, objective=objective, rho=rho) for rho in ratios]
    return specs


def check_perspective(points: int = 100, seed: int = 0) -> list[Check]:
    """Compare the perspective derivatives with central differences at random interior points"""
    rng = np.random.default_rng(seed)
    gradient_error, hessian_error, rank_one_error = 0.0, 0.0, 0.0

    for _ in range(points):
        gamma = 10 ** rng.uniform(1, 5)
        t, y = rng.uniform(0.05, 1.0), rng.uniform(1e-4, 0.1)
        g, v = perspective_gradient(gamma, t, y)
        hessian = perspective_hessian(gamma, t, y)

        # steps relative to each coordinate
        h_t, h_y = 1e-6 * t, 1e-6 * y
        numeric = np.array([
            (perspective_value(gamma, t + h_t, y) - perspective_value(gamma, t - h_t, y)) / (2 * h_t),
            (perspective_value(gamma, t, y + h_y) - perspective_value(gamma, t, y - h_y)) / (2 * h_y),
        ])
        gradient_error = max(gradient_error, float(np.max(np.abs(numeric - g)) / max(float(np.max(np.abs(g))), 1.0)))

        h_t, h_y = 1e-5 * t, 1e-5 * y
        numeric_hessian = np.column_stack([
            (perspective_gradient(gamma, t + h_t, y)[0] - perspective_gradient(gamma, t - h_t, y)[0]) / (2 * h_t),
            (perspective_gradient(gamma, t, y + h_y)[0] - perspective_gradient(gamma, t, y - h_y)[0]) / (2 * h_y),
        ])
        scale = max(float(np.max(np.abs(hessian))), 1.0)
        hessian_error = max(hessian_error, float(np.max(np.abs(numeric_hessian - hessian))) / scale)
        rank_one_error = max(rank_one_error, float(np.max(np.abs(np.outer(v, v) - hessian))) / scale)

    return [
        Check("perspective gradient", f"{points} random points", gradient_error, GRADIENT_TOLERANCE),
        Check("perspective hessian", f"{points} random points", hessian_error, HESSIAN_TOLERANCE),
        Check("rank-1 hessian factor", f"{points} random points", rank_one_error, RANK_ONE_TOLERANCE),
    ]


def check_programs(cfg: NetworkConfig, objective: Objective) -> list[Check]:
    """Compare the barrier function derivatives of every program with central differences at its initial point"""
    checks = []
    for spec in _specs(cfg, objective):
        program = build_problem(spec, cfg, derive_channels(cfg))
        x = initial_point(program).x
        checks.append(Check("barrier gradient", str(spec), finite_diff_report(program, x, 1e-6).gradient, GRADIENT_TOLERANCE))
        checks.append(Check("barrier hessian", str(spec), finite_diff_report(program, x, 1e-5).hessian, HESSIAN_TOLERANCE))
    return checks


def check_oracle(cfg: NetworkConfig, objective: Objective, settings: SolverSettings, grid: GridSpec | None = None) -> list[Check]:
    """
    Compare the solver with the brute-force grid on S3 and S4.

    The solver may beat the grid, but never fall behind it by more than the grid resolution allows, which is measured as a
    relative shortfall against a tolerance equal to the grid step.
    """
    grid = grid or GridSpec()
    checks = []
    for scenario in (Scenario.S3, Scenario.S4):
        for case in Case:
            spec = ScenarioSpec(scenario=scenario, case=case, objective=objective)
            program = build_problem(spec, cfg, derive_channels(cfg))
            result = settings.run(program)
            _, best = brute_force_grid(program, grid)
            shortfall = max(0.0, (best - result.objective_bits) / max(abs(best), 1e-12)) if result.converged else math.nan
            LOGGER.info("%s: solver %.10g bits, grid %.10g bits", spec, result.objective_bits, best)
            checks.append(Check("grid oracle", str(spec), shortfall, grid.step))
    return checks


def _solver_checks(task: tuple[ScenarioSpec, NetworkConfig, SolverSettings]) -> list[Check]:
    spec, cfg, settings = task
    program = build_problem(spec, cfg, derive_channels(cfg))
    reference = solve_nb(program, settings.barrier)
    quad = solve_iterative(program, settings.quadratic)
    gap = relative_gap(reference.objective_bits, quad.objective_bits) if reference.converged and quad.converged else math.nan
    LOGGER.info("%s: nb %.10g bits, quad %.10g bits in %d rounds", spec, reference.objective_bits, quad.objective_bits, quad.outer_iters)
    return [
        Check("nb vs quad", str(spec), gap, SOLVER_GAP_TOLERANCE),
        Check("quad rounds", str(spec), quad.outer_iters if quad.converged else math.nan, QUAD_ROUND_LIMIT),
    ]


def check_solvers(
    cfg: NetworkConfig,
    objective: Objective,
    settings: SolverSettings | None = None,
    *,
    every_ratio: bool = False,
    workers: int = 1,
) -> list[Check]:
    """
    Compare the Newton barrier method and the iterative quadratic approach on every combination.

    Both objectives must agree to `SOLVER_GAP_TOLERANCE`, and the quadratic approach must converge within
    `QUAD_ROUND_LIMIT` rounds. With `every_ratio`, S1 is checked at every screened ratio.
    """
    settings = settings or SolverSettings()
    tasks = [(spec, cfg, settings) for spec in _specs(cfg, objective, every_ratio)]
    return [check for checks in ordered_map(_solver_checks, tasks, workers) for check in checks]


@profile()
def run_validation(
    cfg: NetworkConfig,
    objectives: typing.Iterable[Objective] = tuple(Objective),
    *,
    settings: SolverSettings | None = None,
    grid: GridSpec | None = None,
    points: int = 100,
    seed: int = 0,
    fidelity_gamma: float = 1e4,
) -> pd.DataFrame:
    """
    Run every check on a network.

    Returns
    -------
    * a table with the check name, its subject, the measured error, the threshold and whether it passed
    """
    settings = settings or SolverSettings()
    checks = check_perspective(points, seed)
    for objective in objectives:
        try:
            checks += check_programs(cfg, objective)
            checks += check_oracle(cfg, objective, settings, grid)
            checks += check_solvers(cfg, objective, settings)
        except EnercoopError as error:
            LOGGER.error("validation [%s] aborted: %s", objective.value, error)
            checks.append(Check("validation", objective.value, math.nan, 0.0))

    fidelity = model_fidelity(fidelity_gamma)
    LOGGER.notice(
        "quadratic model of the perspective (gamma=%g): normalized distance %.4g, perspective range [%.4g, %.4g], model range [%.4g, %.4g]",
        fidelity_gamma, fidelity.distance, *fidelity.perspective_range, *fidelity.model_range,
    )

    table = pd.DataFrame([
        {"check": check.check, "subject": check.subject, "value": check.value, "threshold": check.threshold, "passed": check.passed}
        for check in checks
    ])
    for row in table.itertuples():
        (LOGGER.notice if row.passed else LOGGER.error)("%-22s %-36s %10.3g <= %-8g %s", row.check, row.subject, row.value, row.threshold, "ok" if row.passed else "FAILED")
    return table
