import math

import numpy as np
import pytest

from enercoop.errors import InvalidConfigurationError, NoFeasibleCandidateError, RelayNotBeneficialError
from enercoop.model import Case, NetworkConfig, Objective, Scenario, ScenarioSpec, SolveStatus
from enercoop.solvers import BarrierOptions, SolverSettings
from enercoop.strategy import (
    evaluate_combinations,
    pick_best,
    refine_rho,
    rho_grid,
    screen_rho,
    select_strategy,
    solve_candidate,
)


def test_rho_grid():
    assert rho_grid(0.75) == (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
    # the supremum itself is never screened
    assert rho_grid(0.7) == (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    assert rho_grid(1.0)[-1] == 0.9
    assert rho_grid(0.05) == (0.0,)
    assert rho_grid(0.75, 0.25) == (0.0, 0.25, 0.5)
    with pytest.raises(InvalidConfigurationError):
        rho_grid(0.75, 0.0)


def test_pick_best_prefers_the_first_of_tied_items():
    items = [("a", 1.0), ("b", 1.0 + 1e-9), ("c", 0.5)]
    assert pick_best(items, lambda item: item[1])[0] == "a"
    assert pick_best(items, lambda item: item[1], tie_tolerance=0.0)[0] == "b"
    assert pick_best([("a", math.nan), ("b", 2.0)], lambda item: item[1])[0] == "b"
    assert pick_best([("a", math.nan)], lambda item: item[1]) is None
    assert pick_best([], lambda item: item) is None


def test_failed_candidates_are_recorded(cfg):
    candidate = solve_candidate((ScenarioSpec(scenario=Scenario.S1, case=Case.A, rho=0.8), cfg, SolverSettings()))
    assert not candidate.eligible
    assert candidate.status == SolveStatus.FAILED
    assert "rho_max" in candidate.error
    assert math.isnan(candidate.row().objective_bits)


def test_capped_candidates_are_not_eligible(cfg):
    settings = SolverSettings(barrier=BarrierOptions(max_inner=1, tau_max=1.0))
    candidate = solve_candidate((ScenarioSpec(scenario=Scenario.S3, case=Case.A), cfg, settings))
    assert candidate.status == SolveStatus.MAX_ITERATIONS
    assert not candidate.eligible
    assert math.isnan(candidate.row().objective_bits)


def test_screen_rho_only_screens_s1(cfg):
    with pytest.raises(InvalidConfigurationError):
        screen_rho(Scenario.S2, Case.A, Objective.WEIGHTED_SUM, cfg)


def test_screen_rho_without_a_beneficial_relay(not_beneficial):
    with pytest.raises(RelayNotBeneficialError):
        screen_rho(Scenario.S1, Case.B, Objective.WEIGHTED_SUM, not_beneficial)


def test_screen_rho(cfg):
    rho_star, table = screen_rho(Scenario.S1, Case.B, Objective.WEIGHTED_SUM, cfg)
    assert [row.rho for row in table] == list(rho_grid(0.75))
    assert all(row.status == SolveStatus.CONVERGED for row in table)
    best = max(row.objective_bits for row in table)
    winner = next(row for row in table if row.rho == rho_star)
    assert winner.objective_bits >= best * (1 - 1e-6)
    assert all(row.objective_bits < best * (1 - 1e-6) for row in table if row.rho < rho_star)


def test_every_candidate_failing(cfg):
    settings = SolverSettings(barrier=BarrierOptions(max_inner=1, tau_max=1.0))
    with pytest.raises(NoFeasibleCandidateError):
        screen_rho(Scenario.S1, Case.A, Objective.WEIGHTED_SUM, cfg, settings=settings, step=0.5)
    with pytest.raises(NoFeasibleCandidateError):
        select_strategy(cfg, combinations=[(Scenario.S4, Case.A)], settings=settings)


def test_relaying_is_skipped_when_not_beneficial(not_beneficial):
    result = select_strategy(not_beneficial)
    assert result.scenario in (Scenario.S3, Scenario.S4)
    assert len(result.skipped) == 4
    assert result.skipped[0].startswith("S1-A: relay not beneficial")
    assert {row.scenario for row in result.per_candidate_table} == {Scenario.S3, Scenario.S4}


def test_outcomes_follow_the_requested_order(not_beneficial):
    combinations = [(Scenario.S4, Case.B), (Scenario.S2, Case.A), (Scenario.S3, Case.A)]
    outcomes, candidates = evaluate_combinations(not_beneficial, combinations=combinations)
    assert [outcome.label for outcome in outcomes] == ["S4-B", "S2-A", "S3-A"]
    assert [outcome.status for outcome in outcomes] == [SolveStatus.CONVERGED, SolveStatus.SKIPPED, SolveStatus.CONVERGED]
    assert math.isnan(outcomes[1].objective_bits)
    assert [candidate.spec.label for candidate in candidates] == ["S4-B", "S3-A"]
    assert outcomes[0].rho_star == 0.0
    assert outcomes[0].B1 > 0 and outcomes[0].B2 > 0


@pytest.mark.parametrize("case", list(Case))
def test_relaying_without_harvesting_matches_data_cooperation(case):
    cfg = NetworkConfig(eta=0.0)
    outcomes, _ = evaluate_combinations(cfg, combinations=[(Scenario.S1, case), (Scenario.S2, case)], rho_step=0.5)
    both, data_only = outcomes
    # splitting power towards a harvester that converts nothing cannot help
    assert both.rho_star == 0.0
    assert both.objective_bits == pytest.approx(data_only.objective_bits, rel=1e-6)


def test_energy_cooperation_never_hurts(cfg):
    outcomes, _ = evaluate_combinations(cfg, combinations=[(Scenario.S1, Case.A), (Scenario.S2, Case.A), (Scenario.S3, Case.B), (Scenario.S4, Case.B)])
    s1, s2, s3, s4 = (outcome.objective_bits for outcome in outcomes)
    assert s1 >= s2 * (1 - 1e-6)
    assert s3 >= s4 * (1 - 1e-6)


def test_common_throughput_outcome_is_the_smaller_rate(cfg):
    outcomes, _ = evaluate_combinations(cfg, Objective.COMMON_THROUGHPUT, combinations=[(Scenario.S3, Case.A), (Scenario.S2, Case.B)])
    for outcome in outcomes:
        assert outcome.objective_bits == pytest.approx(min(outcome.B1, outcome.B2), rel=1e-5)


def test_select_strategy(cfg):
    result = select_strategy(cfg, combinations=[(Scenario.S1, Case.B), (Scenario.S3, Case.A), (Scenario.S4, Case.A)])
    assert result.label in ("S1-B", "S3-A", "S4-A")
    assert len(result.per_candidate_table) == 8 + 2
    best = max(row.objective_bits for row in result.per_candidate_table)
    assert result.objective_bits >= best * (1 - 1e-6)
    assert result.skipped == ()
    assert result.refined_rho is None
    exported = result.asdict()
    assert exported["scenario"] == result.scenario.value
    assert len(exported["candidates"]) == 10


def test_refine_rho_never_loses_to_the_grid(cfg):
    rho_star, table = screen_rho(Scenario.S1, Case.B, Objective.WEIGHTED_SUM, cfg, step=0.25)
    grid_bits = next(row.objective_bits for row in table if row.rho == rho_star)
    rho, bits = refine_rho(Case.B, Objective.WEIGHTED_SUM, cfg, rho_star, step=0.25, tol=1e-2)
    assert abs(rho - rho_star) <= 0.25
    assert 0.0 <= rho < 0.75
    assert bits >= grid_bits * (1 - 1e-9)


def test_linear_algebra_failures_are_recorded(cfg, monkeypatch):
    def singular(*args, **kwargs):
        raise np.linalg.LinAlgError("singular matrix")

    monkeypatch.setattr("enercoop.strategy.screening.build_problem", singular)
    candidate = solve_candidate((ScenarioSpec(scenario=Scenario.S3, case=Case.B), cfg, SolverSettings()))
    assert candidate.status == SolveStatus.FAILED
    assert "singular" in candidate.error
    assert not candidate.eligible
