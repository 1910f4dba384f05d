"""Selection of the best energy/data cooperation strategy of a network."""
from __future__ import annotations

import math
import typing
from dataclasses import dataclass

from enercoop.errors import InfeasibleAllocationError, NoFeasibleCandidateError
from enercoop.model import ALL_COMBINATIONS, Case, NetworkConfig, Objective, Scenario, ScenarioSpec, Serializable, SolveResult, SolveStatus, StrategyResult
from enercoop.network.channels import derive_channels, relay_beneficial, rho_max
from enercoop.network.throughputs import throughputs_from_allocation
from enercoop.solvers import SolverSettings
from enercoop.strategy.screening import DEFAULT_RHO_STEP, DEFAULT_TIE_TOLERANCE, Candidate, pick_best, refine_rho, screening_specs, solve_candidate
from enercoop.utils.logger import LOGGER
from enercoop.utils.pool import ordered_map


@dataclass(frozen=True)
class CombinationOutcome(Serializable):
    """The best candidate of a (scenario, case) combination, with the per-user throughputs it achieves"""

    scenario: Scenario
    case: Case
    objective: Objective
    rho_star: float
    """The screened ratio for S1, 0 for the other scenarios, NaN when the combination has no result"""
    result: SolveResult | None
    B1: float
    B2: float
    status: SolveStatus
    note: str = ""

    @property
    def label(self: typing.Self) -> str:
        return f"{self.scenario.value}-{self.case.value}"

    @property
    def objective_bits(self: typing.Self) -> float:
        """The objective of the best candidate, NaN when there is none"""
        return self.result.objective_bits if self.result is not None and self.status == SolveStatus.CONVERGED else math.nan

    def asdict(self: typing.Self) -> dict:
        return {
            "scenario": self.scenario.value,
            "case": self.case.value,
            "objective": self.objective.value,
            "rho_star": self.rho_star,
            "objective_bits": self.objective_bits,
            "B1": self.B1,
            "B2": self.B2,
            "status": self.status.value,
            "note": self.note,
        }


def _outcome(scenario: Scenario, case: Case, objective: Objective, cfg: NetworkConfig, group: list[Candidate], tie_tolerance: float) -> CombinationOutcome:
    winner = pick_best([c for c in group if c.eligible], lambda c: c.objective_bits, tie_tolerance)
    if winner is None:
        failed = next((c for c in group if not c.eligible), None)
        status = failed.status if failed is not None else SolveStatus.FAILED
        note = (failed.error or "") if failed is not None else ""
        return CombinationOutcome(scenario, case, objective, math.nan, None, math.nan, math.nan, status, note)

    try:
        B1, B2 = throughputs_from_allocation(winner.spec, cfg, derive_channels(cfg), winner.result.x_star)
    except InfeasibleAllocationError as error:
        LOGGER.warning("%s: %s", winner.spec, error)
        B1, B2 = math.nan, math.nan

    return CombinationOutcome(scenario, case, objective, winner.spec.rho, winner.result, B1, B2, SolveStatus.CONVERGED)


def evaluate_combinations(
    cfg: NetworkConfig,
    objective: Objective = Objective.WEIGHTED_SUM,
    *,
    settings: SolverSettings | None = None,
    combinations: typing.Iterable[tuple[Scenario, Case]] = ALL_COMBINATIONS,
    rho_step: float = DEFAULT_RHO_STEP,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    workers: int = 1,
) -> tuple[list[CombinationOutcome], list[Candidate]]:
    """
    Solve every requested (scenario, case) combination of a network.

    S1 is screened over its power-splitting ratios, the other scenarios are solved once. All candidates are solved in a
    single batch, possibly by a pool of workers, and grouped back in canonical order. When relaying does not pay off, S1 and S2
    are skipped and reported with the `Skipped` status.

    Returns
    -------
    * the outcome of every combination, in the requested order
    * every solved candidate, in the same order
    """
    settings = settings or SolverSettings()
    combinations = list(combinations)
    ch = derive_channels(cfg)
    beneficial = relay_beneficial(ch)

    groups: dict[tuple[Scenario, Case], list[ScenarioSpec]] = {}
    for scenario, case in combinations:
        if scenario.relays and not beneficial:
            continue
        if scenario == Scenario.S1:
            groups[(scenario, case)] = screening_specs(case, objective, rho_max(ch), rho_step)
        else:
            groups[(scenario, case)] = [ScenarioSpec(scenario=scenario, case=case, objective=objective)]

    tasks = [(spec, cfg, settings) for specs in groups.values() for spec in specs]
    solved = iter(ordered_map(solve_candidate, tasks, workers))
    candidates = {key: [next(solved) for _ in specs] for key, specs in groups.items()}

    outcomes = []
    for scenario, case in combinations:
        if (scenario, case) not in candidates:
            note = f"relay not beneficial (gammaU={ch.gammaU:g} <= gamma2={ch.gamma2:g})"
            LOGGER.warning("%s-%s skipped: %s", scenario.value, case.value, note)
            outcomes.append(CombinationOutcome(scenario, case, objective, math.nan, None, math.nan, math.nan, SolveStatus.SKIPPED, note))
            continue
        outcomes.append(_outcome(scenario, case, objective, cfg, candidates[(scenario, case)], tie_tolerance))

    return outcomes, [candidate for group in candidates.values() for candidate in group]


def select_strategy(
    cfg: NetworkConfig,
    objective: Objective = Objective.WEIGHTED_SUM,
    *,
    settings: SolverSettings | None = None,
    combinations: typing.Iterable[tuple[Scenario, Case]] = ALL_COMBINATIONS,
    rho_step: float = DEFAULT_RHO_STEP,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    workers: int = 1,
    refine: bool = False,
) -> StrategyResult:
    """
    Choose the (scenario, case, ρ) combination maximizing the objective of a network.

    Ties between combinations go to the first one in canonical order (S1-A, S1-B, …, S4-B). With `refine`, a winning S1 ratio
    is refined between its grid neighbours; the refinement is reported separately and never replaces the grid ratio.

    Raises
    ------
    * `NoFeasibleCandidateError` when no combination could be solved
    """
    settings = settings or SolverSettings()
    outcomes, candidates = evaluate_combinations(
        cfg,
        objective,
        settings=settings,
        combinations=combinations,
        rho_step=rho_step,
        tie_tolerance=tie_tolerance,
        workers=workers,
    )

    winner = pick_best(outcomes, lambda outcome: outcome.objective_bits, tie_tolerance)
    if winner is None:
        raise NoFeasibleCandidateError("no (scenario, case) combination could be solved")

    refined_rho, refined_bits = None, None
    if refine and winner.scenario == Scenario.S1:
        refined_rho, refined_bits = refine_rho(winner.case, objective, cfg, winner.rho_star, settings=settings, step=rho_step)

    LOGGER.notice(
        "best strategy [%s]: %s with rho*=%g, %.10g bits (B1=%.6g, B2=%.6g)",
        objective.value, winner.label, winner.rho_star, winner.objective_bits, winner.B1, winner.B2,
    )

    return StrategyResult(
        scenario=winner.scenario,
        case=winner.case,
        rho_star=winner.rho_star,
        result=winner.result,
        B1=winner.B1,
        B2=winner.B2,
        per_candidate_table=tuple(candidate.row() for candidate in candidates),
        skipped=tuple(f"{outcome.label}: {outcome.note}" for outcome in outcomes if outcome.status == SolveStatus.SKIPPED),
        refined_rho=refined_rho,
        refined_objective_bits=refined_bits,
    )
