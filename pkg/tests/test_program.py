import numpy as np
import pytest

from enercoop.convex.program import (
    Allocation,
    ConvexProgram,
    EpigraphConstraint,
    LinearConstraint,
    PerspectiveTerm,
    VariableKind,
    eval_program,
    initial_point,
    presolve,
)
from enercoop.errors import DomainError, InvalidConfigurationError
from enercoop.model import ALL_COMBINATIONS, Case, NetworkConfig, Objective, Scenario

TIME, ENERGY, AUX = VariableKind.TIME, VariableKind.ENERGY, VariableKind.AUX


def test_program_validation():
    with pytest.raises(InvalidConfigurationError):
        ConvexProgram(names=("t", "y"), kinds=(TIME,), linear_objective=(0.0, 0.0))
    with pytest.raises(InvalidConfigurationError):
        # the perspective pairs a time with an energy, not the other way round
        ConvexProgram(names=("t", "y"), kinds=(TIME, ENERGY), linear_objective=(0.0, 0.0), objective_terms=(PerspectiveTerm(1.0, 1, 0),))
    with pytest.raises(InvalidConfigurationError):
        EpigraphConstraint(aux_index=2, terms=(PerspectiveTerm(1.0, 0, 1, coeff=-1.0),))
    with pytest.raises(InvalidConfigurationError):
        PerspectiveTerm(0.0, 0, 1)
    with pytest.raises(InvalidConfigurationError):
        ConvexProgram(names=("t", "y"), kinds=(TIME, ENERGY), linear_objective=(0.0, 0.0), linear=(LinearConstraint((1.0,), 1.0),))


def test_eval_program(program):
    p = program(Scenario.S4, Case.A)
    x = np.array([0.4, 0.4, 0.02, 0.04])
    objective, constraints = eval_program(p, x)
    expected = -0.4 * np.log1p(1e4 * 0.02 / 0.4) - 0.4 * np.log1p(2500 * 0.04 / 0.4)
    assert objective == pytest.approx(expected)
    assert list(constraints) == pytest.approx([0.0, -0.02, -0.2], abs=1e-12)

    with pytest.raises(DomainError):
        eval_program(p, [0.4, 0.4, 0.02])


@pytest.mark.parametrize("objective", list(Objective))
@pytest.mark.parametrize(("scenario", "case"), ALL_COMBINATIONS)
def test_initial_point_is_strictly_feasible(program, scenario, case, objective):
    p = program(scenario, case, objective, rho=0.3 if scenario == Scenario.S1 else 0.0)
    start = initial_point(p)
    assert not start.degenerate
    assert np.all(p.constraint_values(start.x) < 0)
    assert all(start.x[i] > 0 for i in p.bounded_indices)
    assert start.t0 >= 0.2 - 1e-12


def test_vanishing_budget_pins_the_energy(program):
    p = program(Scenario.S4, Case.A, network=NetworkConfig(X1=0.0))
    reduced = presolve(p)
    assert reduced.pinned == frozenset({p.index("y1")})
    assert len(reduced.objective_terms) == 1

    start = initial_point(p)
    assert start.degenerate
    assert start["y1"] == 0.0
    assert start["y2"] > 0


def test_presolve_keeps_regular_programs(program):
    p = program(Scenario.S1, Case.B, rho=0.2)
    assert presolve(p) is p


def test_allocation():
    alloc = Allocation(x=np.array([0.4, 0.4, 0.02, 0.04]), names=("t1", "t2", "y1", "y2"), kinds=(TIME, TIME, ENERGY, ENERGY))
    assert alloc["y2"] == pytest.approx(0.04)
    assert alloc.t0 == pytest.approx(0.2)
    assert alloc.powers == pytest.approx({"P1": 0.05, "P2": 0.1})
    assert alloc.get("t3") == 0.0
    assert "t3" not in alloc
    assert alloc.asdict()["t0"] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        alloc.x[0] = 1.0
    with pytest.raises(DomainError):
        Allocation(x=np.zeros(3), names=("t1", "y1"), kinds=(TIME, ENERGY))


def test_equivalent_ignores_labels():
    first = ConvexProgram(names=("t", "y"), kinds=(TIME, ENERGY), linear_objective=(0.0, 0.0), linear=(LinearConstraint((1.0, 0.0), 1.0, "time"),), label="a")
    second = ConvexProgram(names=("t", "y"), kinds=(TIME, ENERGY), linear_objective=(0.0, 0.0), linear=(LinearConstraint((1.0, 0.0), 1.0, "block"),), label="b")
    third = ConvexProgram(names=("t", "y"), kinds=(TIME, ENERGY), linear_objective=(0.0, 0.0), linear=(LinearConstraint((1.0, 0.0), 0.9),))
    assert first.equivalent(second)
    assert not first.equivalent(third)
    assert first.equivalent(third, tolerance=0.2)


def test_epigraph_bound():
    epigraph = EpigraphConstraint(aux_index=2, terms=(PerspectiveTerm(1.0, 0, 1),))
    x = np.array([1.0, 1.0, 0.5])
    assert epigraph.bound(x) == pytest.approx(np.log(2.0))
    assert epigraph.value(x) == pytest.approx(0.5 - np.log(2.0))
