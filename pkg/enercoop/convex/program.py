"""
This module contains the canonical convex program shared by every scenario formulation and both solvers.

Programs follow the minimization convention:

```
minimize    c·x + Σ coeff·l_γ(t, y)
subject to  x[aux] + Σ coeff·l_γ(t, y) ≤ 0     (epigraph constraints)
            a·x ≤ b                           (linear constraints)
            t ≥ 0, y ≥ 0
```

Auxiliary variables (throughputs in nats) carry no sign constraint.
"""
from __future__ import annotations

import enum
import math
import typing
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import numpy.typing as npt

from enercoop.convex.perspective import perspective_gradient, perspective_value
from enercoop.errors import DomainError, InfeasibleProgramError, InvalidConfigurationError
from enercoop.utils.logger import LOGGER

Vector = npt.NDArray[np.float64]
Matrix = npt.NDArray[np.float64]

DEGENERATE_SLACK: float = 1e-9
"""Energy budgets at or below this slack are reported as degenerate"""


class VariableKind(enum.Enum):
    """The role of a variable in a program"""

    TIME = "time"
    """A time fraction t ≥ 0"""
    ENERGY = "energy"
    """A transmit energy y = P·t ≥ 0"""
    AUX = "aux"
    """An auxiliary throughput (nats), unbounded below"""


@dataclass(frozen=True)
class PerspectiveTerm:
    """A weighted logarithmic perspective `coeff·l_γ(x[t_index], x[y_index])`"""

    gamma: float
    t_index: int
    y_index: int
    coeff: float = 1.0

    def __post_init__(self: typing.Self) -> None:
        if not math.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidConfigurationError(f"perspective terms need a positive SNR coefficient (got {self.gamma})")
        if self.t_index < 0 or self.y_index < 0:
            raise InvalidConfigurationError(f"negative variable index in {self}")

    def value(self: typing.Self, x: Vector) -> float:
        """The weighted value of the term at `x`, in nats"""
        return self.coeff * perspective_value(self.gamma, float(x[self.t_index]), float(x[self.y_index]))

    def derivatives(self: typing.Self, x: Vector) -> tuple[float, Vector, Vector]:
        """
        The weighted value, gradient and Hessian factor of the term, scattered into the full variable space.

        The Hessian of the term is `coeff·v·vᵀ`; the returned factor is not scaled by the coefficient.
        """
        n = len(x)
        t, y = float(x[self.t_index]), float(x[self.y_index])
        g, v = perspective_gradient(self.gamma, t, y)

        gradient = np.zeros(n)
        gradient[self.t_index] += self.coeff * g[0]
        gradient[self.y_index] += self.coeff * g[1]

        factor = np.zeros(n)
        factor[self.t_index] = v[0]
        factor[self.y_index] = v[1]

        return self.coeff * perspective_value(self.gamma, t, y), gradient, factor


@dataclass(frozen=True)
class EpigraphConstraint:
    """The constraint `x[aux_index] + Σ terms ≤ 0`, bounding an auxiliary throughput by a concave rate expression"""

    aux_index: int
    terms: tuple[PerspectiveTerm, ...]
    label: str = ""

    def __post_init__(self: typing.Self) -> None:
        if any(term.coeff <= 0 for term in self.terms):
            raise InvalidConfigurationError(f"epigraph constraint '{self.label}' has a nonpositive coefficient, breaking convexity")

    def value(self: typing.Self, x: Vector) -> float:
        """The constraint value c(x); feasible when nonpositive"""
        return float(x[self.aux_index]) + sum(term.value(x) for term in self.terms)

    def bound(self: typing.Self, x: Vector) -> float:
        """The largest value of the auxiliary variable allowed by this constraint, given the other coordinates of `x`"""
        return -sum(term.value(x) for term in self.terms)


@dataclass(frozen=True)
class LinearConstraint:
    """The constraint `a·x ≤ b`"""

    a: tuple[float, ...]
    b: float
    label: str = ""

    @cached_property
    def vector(self: typing.Self) -> Vector:
        """The coefficients as an array"""
        return np.asarray(self.a, dtype=float)

    def value(self: typing.Self, x: Vector) -> float:
        """The constraint value `a·x − b`; feasible when nonpositive"""
        return float(self.vector @ x - self.b)


@dataclass(frozen=True)
class ConvexProgram:
    """A canonical convex program, immutable once built"""

    names: tuple[str, ...]
    """The variable names, such as `t1` or `B`"""
    kinds: tuple[VariableKind, ...]
    linear_objective: tuple[float, ...]
    objective_terms: tuple[PerspectiveTerm, ...] = ()
    epigraphs: tuple[EpigraphConstraint, ...] = ()
    linear: tuple[LinearConstraint, ...] = ()
    pinned: frozenset[int] = field(default_factory=frozenset)
    """Energy variables fixed at zero because their budget vanishes identically"""
    label: str = ""

    def __post_init__(self: typing.Self) -> None:
        n = len(self.names)
        if len(self.kinds) != n or len(self.linear_objective) != n:
            raise InvalidConfigurationError(f"program '{self.label}' has inconsistent dimensions")
        for term in self.terms:
            if max(term.t_index, term.y_index) >= n:
                raise InvalidConfigurationError(f"program '{self.label}' references a variable out of range in {term}")
            if self.kinds[term.t_index] != VariableKind.TIME or self.kinds[term.y_index] != VariableKind.ENERGY:
                raise InvalidConfigurationError(f"program '{self.label}' pairs the wrong variable kinds in {term}")
        for epigraph in self.epigraphs:
            if self.kinds[epigraph.aux_index] != VariableKind.AUX:
                raise InvalidConfigurationError(f"epigraph '{epigraph.label}' must bound an auxiliary variable")
        for constraint in self.linear:
            if len(constraint.a) != n:
                raise InvalidConfigurationError(f"linear constraint '{constraint.label}' has {len(constraint.a)} coefficients, expected {n}")

    @property
    def n_vars(self: typing.Self) -> int:
        """The number of variables"""
        return len(self.names)

    @property
    def n_constraints(self: typing.Self) -> int:
        """The number of epigraph and linear constraints"""
        return len(self.epigraphs) + len(self.linear)

    @cached_property
    def terms(self: typing.Self) -> tuple[PerspectiveTerm, ...]:
        """Every perspective term of the program, objective first"""
        return self.objective_terms + tuple(term for epigraph in self.epigraphs for term in epigraph.terms)

    def indices(self: typing.Self, kind: VariableKind) -> tuple[int, ...]:
        """The indices of the variables of the given kind"""
        return tuple(i for i, item in enumerate(self.kinds) if item == kind)

    @cached_property
    def free_indices(self: typing.Self) -> tuple[int, ...]:
        """The indices the solvers are allowed to move"""
        return tuple(i for i in range(self.n_vars) if i not in self.pinned)

    @cached_property
    def bounded_indices(self: typing.Self) -> tuple[int, ...]:
        """The free time and energy variables, which carry a nonnegativity barrier"""
        return tuple(i for i in self.free_indices if self.kinds[i] != VariableKind.AUX)

    @cached_property
    def objective_vector(self: typing.Self) -> Vector:
        """The coefficients of the linear part of the objective, as an array"""
        return np.asarray(self.linear_objective, dtype=float)

    @property
    def is_quadratic_free(self: typing.Self) -> bool:
        """Whether the constraints are all linear, so the quadratized program is a QP rather than a QCQP"""
        return all(len(epigraph.terms) == 0 for epigraph in self.epigraphs)

    def index(self: typing.Self, name: str) -> int:
        """The position of the variable with the given name"""
        try:
            return self.names.index(name)
        except ValueError as error:
            raise KeyError(f"program '{self.label}' has no variable named '{name}'") from error

    def check_dimension(self: typing.Self, x: npt.ArrayLike) -> Vector:
        """Convert `x` to an array, rejecting points with the wrong dimension"""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_vars,):
            raise DomainError(f"program '{self.label}' has {self.n_vars} variables, got a point of shape {x.shape}")
        return x

    # evaluation

    def objective_value(self: typing.Self, x: Vector) -> float:
        """The objective f(x), in nats"""
        return float(self.objective_vector @ x) + sum(term.value(x) for term in self.objective_terms)

    def constraint_values(self: typing.Self, x: Vector) -> Vector:
        """Every constraint value c_j(x), epigraphs first"""
        return np.array([epigraph.value(x) for epigraph in self.epigraphs] + [constraint.value(x) for constraint in self.linear])

    def objective_derivatives(self: typing.Self, x: Vector) -> tuple[float, Vector, Matrix]:
        """The value, gradient and Hessian of the objective at a point with positive time fractions"""
        value = float(np.asarray(self.linear_objective) @ x)
        gradient = np.asarray(self.linear_objective, dtype=float).copy()
        hessian = np.zeros((self.n_vars, self.n_vars))
        for term in self.objective_terms:
            term_value, term_gradient, factor = term.derivatives(x)
            value += term_value
            gradient += term_gradient
            hessian += term.coeff * np.outer(factor, factor)
        return value, gradient, hessian

    def constraint_derivatives(self: typing.Self, x: Vector) -> tuple[Vector, Matrix, list[Matrix]]:
        """The values, Jacobian and per-constraint Hessians of the constraints, epigraphs first"""
        values, rows, hessians = [], [], []
        for epigraph in self.epigraphs:
            value = float(x[epigraph.aux_index])
            gradient = np.zeros(self.n_vars)
            gradient[epigraph.aux_index] = 1.0
            hessian = np.zeros((self.n_vars, self.n_vars))
            for term in epigraph.terms:
                term_value, term_gradient, factor = term.derivatives(x)
                value += term_value
                gradient += term_gradient
                hessian += term.coeff * np.outer(factor, factor)
            values.append(value)
            rows.append(gradient)
            hessians.append(hessian)
        for constraint in self.linear:
            values.append(constraint.value(x))
            rows.append(constraint.vector)
            hessians.append(np.zeros((self.n_vars, self.n_vars)))
        jacobian = np.array(rows) if len(rows) > 0 else np.zeros((0, self.n_vars))
        return np.array(values), jacobian, hessians

    def equivalent(self: typing.Self, other: ConvexProgram, *, tolerance: float = 0.0) -> bool:
        """Structural equality of the coefficient data, ignoring constraint labels"""
        if self.names != other.names or self.kinds != other.kinds or self.pinned != other.pinned:
            return False
        if len(self.objective_terms) != len(other.objective_terms) or len(self.epigraphs) != len(other.epigraphs):
            return False
        if len(self.linear) != len(other.linear):
            return False

        def close(first: typing.Sequence[float], second: typing.Sequence[float]) -> bool:
            return bool(np.allclose(first, second, rtol=tolerance, atol=tolerance))

        def same_terms(first: tuple[PerspectiveTerm, ...], second: tuple[PerspectiveTerm, ...]) -> bool:
            return len(first) == len(second) and all(
                (a.t_index, a.y_index) == (b.t_index, b.y_index) and close([a.gamma, a.coeff], [b.gamma, b.coeff])
                for a, b in zip(first, second, strict=True)
            )

        return (
            close(self.linear_objective, other.linear_objective)
            and same_terms(self.objective_terms, other.objective_terms)
            and all(
                a.aux_index == b.aux_index and same_terms(a.terms, b.terms)
                for a, b in zip(self.epigraphs, other.epigraphs, strict=True)
            )
            and all(close((*a.a, a.b), (*b.a, b.b)) for a, b in zip(self.linear, other.linear, strict=True))
        )


@dataclass(frozen=True, eq=False)
class Allocation:
    """A point of a program: time fractions, transmit energies and auxiliary throughputs"""

    x: Vector
    names: tuple[str, ...]
    kinds: tuple[VariableKind, ...]
    pinned: frozenset[int] = field(default_factory=frozenset)
    degenerate: bool = False
    """Whether some energy budget vanished when the point was initialized"""

    def __post_init__(self: typing.Self) -> None:
        x = np.array(self.x, dtype=float)
        x.flags.writeable = False
        object.__setattr__(self, "x", x)
        if len(x) != len(self.names) or len(x) != len(self.kinds):
            raise DomainError(f"allocation of {len(x)} values for {len(self.names)} variables")

    @staticmethod
    def of(program: ConvexProgram, x: npt.ArrayLike, *, degenerate: bool = False) -> Allocation:
        """Wrap a point of the given program"""
        return Allocation(x=program.check_dimension(x), names=program.names, kinds=program.kinds, pinned=program.pinned, degenerate=degenerate)

    def with_x(self: typing.Self, x: npt.ArrayLike) -> Allocation:
        """A copy of this allocation at another point"""
        return replace(self, x=np.asarray(x, dtype=float))

    def __getitem__(self: typing.Self, name: str) -> float:
        return float(self.x[self.names.index(name)])

    def __contains__(self: typing.Self, name: str) -> bool:
        return name in self.names

    def get(self: typing.Self, name: str, default: float = 0.0) -> float:
        """The value of the named variable, or the default when the layout has no such variable"""
        return self[name] if name in self else default

    def _of_kind(self: typing.Self, kind: VariableKind) -> dict[str, float]:
        return {name: float(value) for name, value, item in zip(self.names, self.x, self.kinds, strict=True) if item == kind}

    @property
    def times(self: typing.Self) -> dict[str, float]:
        """The time fractions by name"""
        return self._of_kind(VariableKind.TIME)

    @property
    def energies(self: typing.Self) -> dict[str, float]:
        """The transmit energies by name (J)"""
        return self._of_kind(VariableKind.ENERGY)

    @property
    def t0(self: typing.Self) -> float:
        """The energy harvesting slot left over at the beginning of the block"""
        return 1.0 - sum(self.times.values())

    @property
    def powers(self: typing.Self) -> dict[str, float]:
        """The transmit power of each slot (W), `P = y/t`, or 0 when the slot is empty"""
        result = {}
        for name, energy in self.energies.items():
            duration = self[f"t{name[1:]}"]
            result[f"P{name[1:]}"] = energy / duration if duration > 0 else 0.0
        return result

    def asdict(self: typing.Self) -> dict:
        return {
            **{name: float(value) for name, value in zip(self.names, self.x, strict=True)},
            "t0": self.t0,
            **self.powers,
            "degenerate": self.degenerate,
        }

    def __repr__(self: typing.Self) -> str:
        values = ", ".join(f"{name}={value:.6g}" for name, value in zip(self.names, self.x, strict=True))
        return f"Allocation({values})"


def eval_program(p: ConvexProgram, x: npt.ArrayLike) -> tuple[float, Vector]:
    """
    Evaluate a program exactly at a point.

    Returns
    -------
    * the objective value, in nats
    * the constraint values, epigraphs first, feasible when all are nonpositive
    """
    x = p.check_dimension(x)
    return p.objective_value(x), p.constraint_values(x)


def presolve(p: ConvexProgram) -> ConvexProgram:
    """
    Pin the energy variables whose budget vanishes identically and drop what they make inactive.

    A linear constraint with `b = 0` whose remaining nonzero coefficients are all positive and all on energy variables can
    only hold with those variables at zero. They are pinned, repeatedly until no more constraint qualifies. Constraints
    left with no free coefficient are dropped, as are the perspective terms of pinned energies (which vanish there).
    """
    pinned = set(p.pinned)

    changed = True
    while changed:
        changed = False
        for constraint in p.linear:
            support = [i for i, coefficient in enumerate(constraint.a) if coefficient != 0 and i not in pinned]
            if len(support) == 0 or constraint.b != 0:
                continue
            if all(constraint.a[i] > 0 and p.kinds[i] == VariableKind.ENERGY for i in support):
                pinned.update(support)
                changed = True

    if pinned == set(p.pinned):
        return p

    LOGGER.debug("program %s: pinning %s at zero", p.label, [p.names[i] for i in sorted(pinned)])

    def active(term: PerspectiveTerm) -> bool:
        return term.y_index not in pinned

    linear = []
    for constraint in p.linear:
        if all(coefficient == 0 or i in pinned for i, coefficient in enumerate(constraint.a)):
            if constraint.b < 0:
                raise InfeasibleProgramError(f"constraint '{constraint.label}' of program '{p.label}' cannot hold")
            continue
        linear.append(constraint)

    return replace(
        p,
        objective_terms=tuple(term for term in p.objective_terms if active(term)),
        epigraphs=tuple(replace(epigraph, terms=tuple(term for term in epigraph.terms if active(term))) for epigraph in p.epigraphs),
        linear=tuple(linear),
        pinned=frozenset(pinned),
    )


def aux_bound(p: ConvexProgram, x: Vector, index: int) -> float:
    """The largest value of an auxiliary variable allowed by every constraint it appears in, the others fixed"""
    bound = math.inf
    for epigraph in p.epigraphs:
        if epigraph.aux_index == index:
            bound = min(bound, epigraph.bound(x))
    for constraint in p.linear:
        coefficient = constraint.a[index]
        if coefficient > 0:
            rest = constraint.vector @ x - coefficient * x[index]
            bound = min(bound, (constraint.b - rest) / coefficient)
    return bound


def energy_budget(p: ConvexProgram, x: Vector, index: int) -> float:
    """The largest value of an energy variable allowed by the linear constraints, the others fixed"""
    budget = math.inf
    for constraint in p.linear:
        coefficient = constraint.a[index]
        if coefficient > 0:
            rest = constraint.vector @ x - coefficient * x[index]
            budget = min(budget, (constraint.b - rest) / coefficient)
    return budget


def initial_point(p: ConvexProgram) -> Allocation:
    """
    Build a strictly feasible starting point for a program.

    Time fractions share 80% of the block evenly, leaving at least 20% to the harvesting slot. Energies are then set one
    after the other to half of their remaining budget, and each auxiliary throughput sits slightly below the tightest
    bound imposed on it. Pinned energies stay at zero, and the point is flagged as degenerate.
    """
    program = presolve(p)
    x = np.zeros(program.n_vars)
    degenerate = len(program.pinned) > 0

    times = program.indices(VariableKind.TIME)
    x[list(times)] = 0.8 / (len(times) + 1)

    for index in program.indices(VariableKind.ENERGY):
        if index in program.pinned:
            continue
        budget = energy_budget(program, x, index)
        if not math.isfinite(budget):
            raise InfeasibleProgramError(f"energy '{program.names[index]}' of program '{program.label}' has no budget")
        if budget <= 0:
            raise InfeasibleProgramError(f"energy '{program.names[index]}' of program '{program.label}' has no room left ({budget:g})")
        if budget <= DEGENERATE_SLACK:
            degenerate = True
        x[index] = 0.5 * budget

    for index in program.indices(VariableKind.AUX):
        bound = aux_bound(program, x, index)
        if not math.isfinite(bound):
            raise InfeasibleProgramError(f"auxiliary '{program.names[index]}' of program '{program.label}' is unbounded")
        x[index] = bound - max(0.1 * abs(bound), 1e-6)

    values = program.constraint_values(x)
    if len(values) > 0 and np.max(values) >= 0:
        raise InfeasibleProgramError(f"no strictly feasible point found for program '{program.label}' (max constraint {np.max(values):g})")

    if degenerate:
        LOGGER.warning("program %s: degenerate energy budget, %s kept at zero", program.label, [program.names[i] for i in sorted(program.pinned)])

    return Allocation.of(program, x, degenerate=degenerate)
