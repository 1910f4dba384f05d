import numpy as np
import pytest

from enercoop.convex.program import initial_point
from enercoop.errors import GridTooLargeError, InvalidConfigurationError
from enercoop.model import Case, Objective, Scenario
from enercoop.oracle import GridSpec, brute_force_grid, finite_diff_check
from enercoop.solvers import solve_nb


def test_grid_spec():
    assert len(GridSpec(step=0.25).axis) == 5
    assert GridSpec(step=0.1).points(2) == 121
    with pytest.raises(InvalidConfigurationError):
        GridSpec(step=0.0)
    with pytest.raises(InvalidConfigurationError):
        GridSpec(step=1.5)


def test_relay_programs_are_rejected(program):
    with pytest.raises(InvalidConfigurationError):
        brute_force_grid(program(Scenario.S2, Case.A), GridSpec(step=0.1))


def test_grid_guard(program):
    with pytest.raises(GridTooLargeError):
        brute_force_grid(program(Scenario.S3, Case.A), GridSpec(step=1e-3, max_points=1000))


@pytest.mark.parametrize("objective", list(Objective))
@pytest.mark.parametrize("scenario", [Scenario.S3, Scenario.S4])
@pytest.mark.parametrize("case", list(Case))
def test_solver_is_never_beaten_by_the_grid(program, scenario, case, objective):
    p = program(scenario, case, objective)
    grid = GridSpec(step=1e-3)
    best_x, best = brute_force_grid(p, grid)
    result = solve_nb(p)

    assert result.converged
    assert result.objective_bits >= best - 1e-6 * abs(best)
    assert (result.objective_bits - best) / abs(best) <= grid.step
    assert best_x[p.index("t1")] + best_x[p.index("t2")] <= 1.0 + 1e-12


def test_grid_point_is_feasible(program):
    p = program(Scenario.S3, Case.B)
    best_x, _ = brute_force_grid(p, GridSpec(step=0.01))
    assert np.all(p.constraint_values(best_x) <= 1e-12)


def test_finite_differences_agree_at_the_start(program):
    p = program(Scenario.S1, Case.A, rho=0.4)
    assert finite_diff_check(p, initial_point(p).x, 1e-5) <= 1e-4
