"""
A primal-dual path-following interior-point method for small convex QCQPs whose quadratic forms are sums of weighted
rank-1 outer products.

With slacks `s` and multipliers `λ` for the inequalities `G(x) ≤ 0`, every iteration solves the reduced Newton system

```
(H + Jᵀ·S⁻¹Λ·J)·dx = −r_d − Jᵀ·S⁻¹·(Λ·r_p − r_c)
```

where `r_d = ∇f + Jᵀλ`, `r_p = G(x) + s` and `r_c = Λs − σμ`, then recovers `dλ` and `ds` and takes the largest step
keeping `s` and `λ` positive, times a fraction.
"""
from __future__ import annotations

import math
import typing
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from enercoop.convex.program import Allocation, Matrix, VariableKind, Vector
from enercoop.errors import InvalidConfigurationError, SubproblemError
from enercoop.solvers.barrier import solve_newton_system
from enercoop.utils.logger import LOGGER

SLACK_FLOOR: float = 1e-6
"""Smallest initial slack, so that constraints active at the starting point do not freeze the first iterations"""


@dataclass(frozen=True)
class QuadraticForm:
    """
    The function `constant + linear·x + ½·Σ weights_k·(factors_k·x)²`.

    Every weight is nonnegative, so the form is convex.
    """

    linear: Vector
    constant: float = 0.0
    factors: Matrix = field(default_factory=lambda: np.zeros((0, 0)))
    """One rank-1 factor per row"""
    weights: Vector = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self: typing.Self) -> None:
        n = len(self.linear)
        factors = np.asarray(self.factors, dtype=float).reshape(-1, n) if np.size(self.factors) > 0 else np.zeros((0, n))
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float))
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).reshape(-1))
        if len(self.weights) != len(factors):
            raise InvalidConfigurationError(f"{len(factors)} rank-1 factors for {len(self.weights)} weights")
        if np.any(self.weights < 0):
            raise InvalidConfigurationError("rank-1 weights must be nonnegative for the form to be convex")

    @staticmethod
    def affine(linear: npt.ArrayLike, constant: float = 0.0) -> QuadraticForm:
        """A form without curvature"""
        return QuadraticForm(linear=np.asarray(linear, dtype=float), constant=constant)

    @property
    def is_affine(self: typing.Self) -> bool:
        """Whether the form has no curvature"""
        return len(self.weights) == 0 or not np.any(self.weights)

    def value(self: typing.Self, x: Vector) -> float:
        """The value at `x`"""
        projections = self.factors @ x
        return float(self.constant + self.linear @ x + 0.5 * np.sum(self.weights * projections**2))

    def gradient(self: typing.Self, x: Vector) -> Vector:
        """The gradient at `x`"""
        return self.linear + self.factors.T @ (self.weights * (self.factors @ x))

    @property
    def hessian(self: typing.Self) -> Matrix:
        """The (constant) Hessian, assembled from the rank-1 factors"""
        return self.factors.T @ (self.weights[:, None] * self.factors)

    def __add__(self: typing.Self, other: QuadraticForm) -> QuadraticForm:
        return QuadraticForm(
            linear=self.linear + other.linear,
            constant=self.constant + other.constant,
            factors=np.vstack([self.factors, other.factors]),
            weights=np.concatenate([self.weights, other.weights]),
        )


@dataclass(frozen=True)
class QuadraticSubproblem:
    """
    A convex QCQP: minimize a quadratic form subject to quadratic constraints `q_j(x) ≤ 0`, linear constraints
    `A·x ≤ b` and nonnegativity of the bounded variables. Pinned variables keep their value.
    """

    names: tuple[str, ...]
    kinds: tuple[VariableKind, ...]
    objective: QuadraticForm
    quadratic: tuple[QuadraticForm, ...] = ()
    A: Matrix = field(default_factory=lambda: np.zeros((0, 0)))
    b: Vector = field(default_factory=lambda: np.zeros(0))
    bounded: tuple[int, ...] = ()
    """Indices constrained to be nonnegative"""
    pinned: frozenset[int] = field(default_factory=frozenset)
    label: str = ""

    def __post_init__(self: typing.Self) -> None:
        n = len(self.names)
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float).reshape(-1, n) if np.size(self.A) > 0 else np.zeros((0, n)))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))
        if len(self.A) != len(self.b):
            raise InvalidConfigurationError(f"subproblem '{self.label}' has {len(self.A)} linear rows and {len(self.b)} bounds")

    @property
    def n_vars(self: typing.Self) -> int:
        """The number of variables"""
        return len(self.names)

    @property
    def is_qp(self: typing.Self) -> bool:
        """Whether every constraint is linear"""
        return all(form.is_affine for form in self.quadratic)

    @property
    def free_indices(self: typing.Self) -> tuple[int, ...]:
        """The variables the solver may move"""
        return tuple(i for i in range(self.n_vars) if i not in self.pinned)

    def constraints(self: typing.Self, x: Vector) -> tuple[Vector, Matrix, list[tuple[int, Matrix]]]:
        """
        Every inequality `G(x) ≤ 0` at `x`: quadratic constraints, then linear rows, then bounds.

        Returns the values, the Jacobian and the Hessians of the curved constraints as (index, Hessian) pairs.
        """
        n = self.n_vars
        values = [form.value(x) for form in self.quadratic] + list(self.A @ x - self.b) + [-x[i] for i in self.bounded]
        rows = [form.gradient(x) for form in self.quadratic] + list(self.A)
        for i in self.bounded:
            row = np.zeros(n)
            row[i] = -1.0
            rows.append(row)
        curvatures = [(j, form.hessian) for j, form in enumerate(self.quadratic) if not form.is_affine]
        jacobian = np.array(rows) if len(rows) > 0 else np.zeros((0, n))
        return np.array(values), jacobian, curvatures


@dataclass(frozen=True)
class InteriorPointOptions:
    """The parameters of the primal-dual interior-point method"""

    tol: float = 1e-8
    """Target of the (scaled) KKT residual"""
    centering: float = 0.1
    step_fraction: float = 0.99
    """Fraction of the largest positivity-preserving step actually taken"""
    stall_iterations: int = 50
    """Iterations without residual improvement before giving up"""
    max_iterations: int = 500


@dataclass(frozen=True)
class InteriorPointResult:
    """The solution of a subproblem with its multipliers and convergence figures"""

    x: Vector
    multipliers: Vector
    iterations: int
    residual: float


def _residuals(q: QuadraticSubproblem, x: Vector, s: Vector, lam: Vector) -> tuple[Vector, Vector, Matrix, list, float]:
    values, jacobian, curvatures = q.constraints(x)
    r_d = q.objective.gradient(x) + jacobian.T @ lam
    r_p = values + s
    scale = max(1.0, float(np.max(np.abs(q.objective.gradient(x)))))
    free = list(q.free_indices)
    mu = float(s @ lam / len(s)) if len(s) > 0 else 0.0
    residual = max(float(np.max(np.abs(r_d[free]), initial=0.0)) / scale, float(np.max(np.abs(r_p), initial=0.0)), mu)
    return r_d, r_p, jacobian, curvatures, residual


def interior_point(q: QuadraticSubproblem, x_start: npt.ArrayLike, opts: InteriorPointOptions | None = None) -> InteriorPointResult:
    """
    Solve a convex QCQP from a (nearly) feasible starting point.

    Raises
    ------
    * `SubproblemError` when the residual stops improving for `stall_iterations` iterations or the iteration cap is hit
    """
    opts = opts or InteriorPointOptions()
    x = np.array(x_start, dtype=float)
    free = list(q.free_indices)

    values, _, _ = q.constraints(x)
    s = np.maximum(-values, SLACK_FLOOR)
    mu0 = float(np.mean(s)) if len(s) > 0 else 0.0
    lam = mu0 / s

    best, stalled = math.inf, 0
    for iteration in range(1, opts.max_iterations + 1):
        r_d, r_p, jacobian, curvatures, residual = _residuals(q, x, s, lam)
        LOGGER.spam("subproblem %s: iteration %d, residual %g", q.label, iteration, residual)
        if residual <= opts.tol:
            return InteriorPointResult(x=x, multipliers=lam, iterations=iteration - 1, residual=residual)

        if residual < best * (1.0 - 1e-3):
            best, stalled = residual, 0
        else:
            stalled += 1
            if stalled >= opts.stall_iterations:
                raise SubproblemError(f"subproblem '{q.label}' stalled at residual {residual:g} after {iteration} iterations")

        mu = float(s @ lam / len(s)) if len(s) > 0 else 0.0
        r_c = lam * s - opts.centering * mu

        hessian = q.objective.hessian.copy()
        for j, curvature in curvatures:
            hessian += lam[j] * curvature
        scaling = lam / s
        system = hessian + jacobian.T @ (scaling[:, None] * jacobian)
        rhs = -r_d - jacobian.T @ ((lam * r_p - r_c) / s)

        dx = np.zeros(q.n_vars)
        reduced, _ = solve_newton_system(system[np.ix_(free, free)], rhs[free])
        dx[free] = reduced
        dlam = scaling * (jacobian @ dx + r_p) - r_c / s
        ds = -r_p - jacobian @ dx

        # closed-form largest step keeping slacks and multipliers positive
        ratios = np.concatenate([-s[ds < 0] / ds[ds < 0], -lam[dlam < 0] / dlam[dlam < 0]])
        alpha = min(1.0, opts.step_fraction * float(np.min(ratios, initial=math.inf)))

        x = x + alpha * dx
        s = s + alpha * ds
        lam = lam + alpha * dlam

    raise SubproblemError(f"subproblem '{q.label}' did not converge in {opts.max_iterations} iterations")


def solve_subproblem(q: QuadraticSubproblem, x_start: npt.ArrayLike, opts: InteriorPointOptions | None = None) -> Allocation:
    """Solve a convex QCQP with the primal-dual interior-point method and return its solution as an allocation"""
    result = interior_point(q, x_start, opts)
    return Allocation(x=result.x, names=q.names, kinds=q.kinds, pinned=q.pinned)
