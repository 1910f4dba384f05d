import numpy as np
import pytest
from scipy import optimize

from enercoop.convex.program import ConvexProgram, LinearConstraint, PerspectiveTerm, VariableKind, initial_point
from enercoop.errors import InvalidConfigurationError
from enercoop.model import ALL_COMBINATIONS, Case, NetworkConfig, Objective, Scenario, SolveStatus
from enercoop.oracle import finite_diff_report
from enercoop.solvers import BarrierOptions, newton_direction, solve_nb
from enercoop.solvers.barrier import barrier_derivatives, solve_newton_system
from enercoop.solvers.linesearch import golden_section_min


def _no_cooperation_bits(t: np.ndarray) -> float:
    """S4 Case A with default channels and both energies at their budget"""
    t1, t2 = t
    y1 = max(0.1 * (1.0 - t1 - t2), 0.0)
    y2 = max(0.1 * (1.0 - t2), 0.0)
    return t1 * np.log2(1 + 1e4 * y1 / t1) + t2 * np.log2(1 + 2500.0 * y2 / t2)


def test_options_validation():
    with pytest.raises(InvalidConfigurationError):
        BarrierOptions(mu=1.0)
    with pytest.raises(InvalidConfigurationError):
        BarrierOptions(tau0=0.0)
    with pytest.raises(InvalidConfigurationError):
        BarrierOptions(shrink=1.0)


def test_matches_an_independent_solver(program):
    result = solve_nb(program(Scenario.S4, Case.A))
    assert result.status == SolveStatus.CONVERGED
    assert result.max_constraint_violation < 0

    reference = optimize.minimize(
        lambda t: -_no_cooperation_bits(t),
        x0=np.array([0.3, 0.3]),
        method="SLSQP",
        bounds=[(1e-6, 1.0), (1e-6, 1.0)],
        constraints=[{"type": "ineq", "fun": lambda t: 1.0 - t[0] - t[1]}],
        options={"ftol": 1e-12, "maxiter": 500},
    )
    assert result.objective_bits == pytest.approx(-reference.fun, rel=1e-5)
    assert result.x_star["y1"] == pytest.approx(0.1 * result.x_star.t0, rel=1e-4)


@pytest.mark.parametrize("objective", list(Objective))
@pytest.mark.parametrize(("scenario", "case"), ALL_COMBINATIONS)
def test_converges_on_every_combination(program, scenario, case, objective):
    result = solve_nb(program(scenario, case, objective, rho=0.3 if scenario == Scenario.S1 else 0.0))
    assert result.converged
    assert np.isfinite(result.objective_bits)
    assert result.objective_bits > 0
    assert result.max_constraint_violation < 0
    assert result.outer_iters == len(result.history)
    assert result.kkt_residual <= 1e-6


def test_common_throughput_is_the_smaller_rate(program):
    result = solve_nb(program(Scenario.S3, Case.A, Objective.COMMON_THROUGHPUT))
    x = result.x_star
    B1 = x["t1"] * np.log2(1 + 1e4 * x["y1"] / x["t1"])
    B2 = x["t2"] * np.log2(1 + 2500.0 * x["y2"] / x["t2"])
    assert result.objective_bits == pytest.approx(min(B1, B2), rel=1e-6)
    assert B1 == pytest.approx(B2, rel=1e-4)


def test_initial_barrier_parameter_does_not_change_the_optimum(program):
    p = program(Scenario.S3, Case.B)
    results = [solve_nb(p, BarrierOptions(tau0=tau0)) for tau0 in (0.1, 1.0, 10.0)]
    for result in results:
        assert result.converged
        assert result.objective_bits == pytest.approx(results[1].objective_bits, rel=1e-6)
    assert results[0].outer_iters > results[2].outer_iters


def test_derivatives_match_central_differences(program):
    for scenario, case in ALL_COMBINATIONS:
        p = program(scenario, case, rho=0.4 if scenario == Scenario.S1 else 0.0)
        x = initial_point(p).x
        assert finite_diff_report(p, x, 1e-6).gradient <= 1e-6
        assert finite_diff_report(p, x, 1e-5).hessian <= 1e-4


def test_newton_direction_descends(program):
    p = program(Scenario.S1, Case.A, rho=0.5)
    x = initial_point(p).x
    _, gradient, _ = barrier_derivatives(p, 1.0, x)
    assert gradient @ newton_direction(p, 1.0, x) < 0


def test_newton_system_is_regularized_when_singular():
    d, regularized = solve_newton_system(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 0.0]))
    assert regularized
    assert d == pytest.approx([1.0, 0.0], abs=1e-6)

    d, regularized = solve_newton_system(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([2.0, 2.0]))
    assert not regularized
    assert d == pytest.approx([1.0, 0.5])


def test_infeasible_program():
    # y ≤ -2t leaves no room for any positive time
    p = ConvexProgram(
        names=("t", "y"),
        kinds=(VariableKind.TIME, VariableKind.ENERGY),
        linear_objective=(0.0, 0.0),
        objective_terms=(PerspectiveTerm(1.0, 0, 1),),
        linear=(LinearConstraint((2.0, 1.0), 0.0, "budget"),),
    )
    result = solve_nb(p)
    assert result.status == SolveStatus.INFEASIBLE
    assert np.isnan(result.objective_bits)


def test_near_user_without_energy(program):
    """With X1 = 0 only U2 transmits, and only the length of its slot matters"""
    result = solve_nb(program(Scenario.S4, Case.A, network=NetworkConfig.default().with_values(X1=0.0)))
    assert result.converged
    assert result.x_star.degenerate

    def far_user_bits(t2: float) -> float:
        return t2 * np.log2(1 + 2500.0 * 0.1 * (1.0 - t2) / t2)

    t2 = golden_section_min(lambda t: -far_user_bits(t), (1e-9, 1.0), 1e-12)
    assert result.objective_bits == pytest.approx(far_user_bits(t2), rel=1e-6)


@pytest.mark.parametrize(("scenario", "case", "objective"), [
    (Scenario.S4, Case.A, Objective.WEIGHTED_SUM),
    (Scenario.S3, Case.B, Objective.WEIGHTED_SUM),
    (Scenario.S2, Case.B, Objective.COMMON_THROUGHPUT),
])
def test_no_energy_at_all(program, scenario, case, objective):
    result = solve_nb(program(scenario, case, objective, network=NetworkConfig.default().with_values(X1=0.0, X2=0.0)))
    assert result.converged
    assert result.objective_bits == pytest.approx(0.0, abs=1e-6)


def test_users_can_swap_places(program):
    """Users at (almost) the same distance with the same energy and weight: the transmission order does not matter"""
    network = NetworkConfig.default().with_values(d1=2.0 - 1e-9)
    first = solve_nb(program(Scenario.S4, Case.A, network=network))
    second = solve_nb(program(Scenario.S4, Case.B, network=network))
    assert first.objective_bits == pytest.approx(second.objective_bits, rel=1e-6)
    # slots are numbered in transmission order
    assert first.x_star["t1"] == pytest.approx(second.x_star["t1"], abs=1e-4)
