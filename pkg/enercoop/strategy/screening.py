"""
Screening of the power-splitting ratio of S1.

The ratio is not optimized continuously: the program is solved for every `ρ ∈ {0, 0.1, …}` below `rho_max`, and the best
candidate wins, ties going to the smallest ratio. `refine_rho` can then look between the grid points around the winner.
"""
from __future__ import annotations

import functools
import math
import typing
from dataclasses import dataclass

from enercoop.errors import NUMERICAL_ERRORS, EnercoopError, InvalidConfigurationError, NoFeasibleCandidateError
from enercoop.model import CandidateRow, Case, NetworkConfig, Objective, Scenario, ScenarioSpec, SolveResult, SolveStatus
from enercoop.network.channels import derive_channels, rho_max
from enercoop.network.formulation import build_problem
from enercoop.solvers import SolverSettings
from enercoop.solvers.linesearch import golden_section_min
from enercoop.utils.logger import LOGGER
from enercoop.utils.pool import ordered_map

T = typing.TypeVar("T")

DEFAULT_RHO_STEP: float = 0.1
DEFAULT_TIE_TOLERANCE: float = 1e-6
"""Relative objective difference below which two candidates are considered tied"""


@dataclass(frozen=True)
class Candidate:
    """A solved (or failed) combination"""

    spec: ScenarioSpec
    result: SolveResult | None = None
    error: str | None = None
    """Why the program could not be built or solved"""

    @property
    def eligible(self: typing.Self) -> bool:
        """Whether the candidate can compete: its solver converged to a finite objective"""
        return self.result is not None and self.result.converged and math.isfinite(self.result.objective_bits)

    @property
    def objective_bits(self: typing.Self) -> float:
        return self.result.objective_bits if self.result is not None else math.nan

    @property
    def status(self: typing.Self) -> SolveStatus:
        return self.result.status if self.result is not None else SolveStatus.FAILED

    def row(self: typing.Self) -> CandidateRow:
        """The candidate as a row of the per-candidate table"""
        return CandidateRow(
            scenario=self.spec.scenario,
            case=self.spec.case,
            rho=self.spec.rho,
            objective_bits=self.objective_bits if self.eligible else math.nan,
            status=self.status,
        )


def solve_candidate(task: tuple[ScenarioSpec, NetworkConfig, SolverSettings]) -> Candidate:
    """
    Build and solve the program of a combination.

    Errors are caught and recorded in the candidate, so a failing combination never aborts a selection. The task is a single
    tuple to be usable with a pool of workers.
    """
    spec, cfg, settings = task
    try:
        result = settings.run(build_problem(spec, cfg, derive_channels(cfg)))
    except (EnercoopError, *NUMERICAL_ERRORS) as error:
        LOGGER.warning("candidate %s failed: %s", spec, error)
        return Candidate(spec=spec, error=str(error))

    if not result.converged:
        LOGGER.warning("candidate %s excluded: solver ended with status %s", spec, result.status.value)
    else:
        LOGGER.info("candidate %s: %.10g bits (%s, %d outer iterations)", spec, result.objective_bits, result.solver, result.outer_iters)
    return Candidate(spec=spec, result=result)


def pick_best(items: typing.Sequence[T], value: typing.Callable[[T], float], tie_tolerance: float = DEFAULT_TIE_TOLERANCE) -> T | None:
    """
    The item with the largest value, the first one among those within `tie_tolerance` (relative) of the maximum.

    Items with a non-finite value are ignored. Returns `None` when no item is left.
    """
    valid = [item for item in items if math.isfinite(value(item))]
    if len(valid) == 0:
        return None
    best = max(value(item) for item in valid)
    threshold = best - tie_tolerance * abs(best)
    return next(item for item in valid if value(item) >= threshold)


def rho_grid(limit: float, step: float = DEFAULT_RHO_STEP) -> tuple[float, ...]:
    """The screened ratios `{0, step, 2·step, …}` strictly below `limit` (and below 1), rounded to 10 decimals"""
    if step <= 0:
        raise InvalidConfigurationError(f"the screening step must be positive (got {step})")

    grid = []
    index = 0
    while (rho := round(index * step, 10)) < min(limit, 1.0):
        grid.append(rho)
        index += 1
    return tuple(grid)


def screening_specs(case: Case, objective: Objective, limit: float, step: float = DEFAULT_RHO_STEP) -> list[ScenarioSpec]:
    """The S1 combinations screened for a case, in increasing ratio order"""
    return [ScenarioSpec(scenario=Scenario.S1, case=case, objective=objective, rho=rho) for rho in rho_grid(limit, step)]


def screen_candidates(
    case: Case,
    objective: Objective,
    cfg: NetworkConfig,
    *,
    settings: SolverSettings | None = None,
    step: float = DEFAULT_RHO_STEP,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    workers: int = 1,
) -> tuple[Candidate | None, list[Candidate]]:
    """Solve S1 at every screened ratio; returns the winner (if any candidate converged) and every candidate in grid order"""
    settings = settings or SolverSettings()
    limit = rho_max(derive_channels(cfg))
    specs = screening_specs(case, objective, limit, step)
    LOGGER.verbose("screening %d ratios below rho_max=%g for S1-%s", len(specs), limit, case.value)

    candidates = ordered_map(solve_candidate, [(spec, cfg, settings) for spec in specs], workers)
    return pick_best([c for c in candidates if c.eligible], lambda c: c.objective_bits, tie_tolerance), candidates


def screen_rho(
    scenario: Scenario,
    case: Case,
    objective: Objective,
    cfg: NetworkConfig,
    *,
    settings: SolverSettings | None = None,
    step: float = DEFAULT_RHO_STEP,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    workers: int = 1,
) -> tuple[float, tuple[CandidateRow, ...]]:
    """
    Pick the best power-splitting ratio of S1 on the screening grid.

    Parameters
    ----------
    * `scenario`:       *must be S1, the only scenario with a power-splitting ratio*
    * `case`:           *the transmission order*
    * `objective`:      *the design goal*
    * `cfg`:            *the network*
    * `settings`:       *the solver to use for every candidate*
    * `step`:           *the spacing of the ratio grid*
    * `tie_tolerance`:  *relative objective difference under which the smaller ratio wins*
    * `workers`:        *number of worker processes solving candidates concurrently*

    Returns
    -------
    * the winning ratio
    * the table of every candidate in grid order, with NaN objectives for the excluded ones

    Raises
    ------
    * `RelayNotBeneficialError` when relaying does not pay off, so no ratio exists
    * `NoFeasibleCandidateError` when no candidate converged
    """
    if scenario != Scenario.S1:
        raise InvalidConfigurationError(f"only S1 has a power-splitting ratio to screen (got {scenario.value})")

    winner, candidates = screen_candidates(case, objective, cfg, settings=settings, step=step, tie_tolerance=tie_tolerance, workers=workers)
    if winner is None:
        raise NoFeasibleCandidateError(f"no ratio of S1-{case.value} could be solved")

    LOGGER.notice("S1-%s [%s]: rho* = %g with %.10g bits", case.value, objective.value, winner.spec.rho, winner.objective_bits)
    return winner.spec.rho, tuple(candidate.row() for candidate in candidates)


def refine_rho(
    case: Case,
    objective: Objective,
    cfg: NetworkConfig,
    rho_star: float,
    *,
    settings: SolverSettings | None = None,
    step: float = DEFAULT_RHO_STEP,
    tol: float = 1e-3,
) -> tuple[float, float]:
    """
    Look for a better ratio between the grid neighbours of `rho_star` with a golden-section search.

    The objective is assumed unimodal in the ratio over `[rho_star − step, rho_star + step]`. The grid winner is kept when the
    search finds nothing better.

    Returns
    -------
    * the refined ratio
    * its objective, in bits
    """
    settings = settings or SolverSettings()
    limit = rho_max(derive_channels(cfg))

    @functools.cache
    def negated(rho: float) -> float:
        candidate = solve_candidate((ScenarioSpec(scenario=Scenario.S1, case=case, objective=objective, rho=rho), cfg, settings))
        return -candidate.objective_bits if candidate.eligible else math.inf

    interval = (max(0.0, rho_star - step), min(rho_star + step, math.nextafter(limit, 0.0)))
    rho = golden_section_min(negated, interval, tol)
    if negated(rho) > negated(rho_star):
        rho = rho_star

    LOGGER.info("S1-%s [%s]: refined rho = %.6g with %.10g bits (grid rho* = %g)", case.value, objective.value, rho, -negated(rho), rho_star)
    return rho, -negated(rho)
