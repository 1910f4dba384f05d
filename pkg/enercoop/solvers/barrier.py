"""
The Newton barrier method.

For an increasing barrier parameter τ, the barrier function

```
F_τ(x) = f(x) − (1/τ)·(Σ log(−c_j(x)) + Σ log(x_i))
```

is minimized by damped Newton steps, where the second sum runs over the free time and energy variables. Steps are sized
by the three-stage line search of `enercoop.solvers.linesearch`.
"""
from __future__ import annotations

import math
import time
import typing
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from enercoop.convex.program import Allocation, ConvexProgram, Matrix, Vector, initial_point, presolve
from enercoop.errors import InfeasibleProgramError, InvalidConfigurationError
from enercoop.model import LN2, SolveResult, SolveStatus
from enercoop.solvers.linesearch import alpha_linear, alpha_log_bisection, golden_section_min
from enercoop.utils.logger import LOGGER
from enercoop.utils.timer import profile

REGULARIZATION: float = 1e-10
"""The first diagonal shift tried when the Newton system is not numerically positive definite"""


@dataclass(frozen=True)
class BarrierOptions:
    """The parameters of the Newton barrier method"""

    tau0: float = 1.0
    """Initial barrier parameter"""
    mu: float = 10.0
    """Growth factor of the barrier parameter"""
    tau_max: float = 1e8
    """The outer loop stops once the barrier parameter reaches this value"""
    eps: float = 1e-6
    """The inner loop stops when an iterate moves less than this (euclidean norm)"""
    max_inner: int = 200
    """Newton steps allowed per barrier parameter"""
    shrink: float = 0.99
    """Safety factor applied to the feasibility intervals of the line search"""
    bisection_tol: float = 1e-9
    golden_tol: float = 1e-8
    kkt_tol: float = 1e-6
    """Newton decrement below which the last central point counts as optimal"""

    def __post_init__(self: typing.Self) -> None:
        violations = []
        if self.tau0 <= 0:
            violations.append(f"tau0 must be positive (got {self.tau0})")
        if self.mu <= 1:
            violations.append(f"mu must exceed 1 (got {self.mu})")
        if self.eps <= 0 or self.bisection_tol <= 0 or self.golden_tol <= 0 or self.kkt_tol <= 0:
            violations.append("tolerances must be positive")
        if not 0 < self.shrink < 1:
            violations.append(f"shrink must lie in (0, 1) (got {self.shrink})")
        if self.max_inner < 1:
            violations.append(f"max_inner must be at least 1 (got {self.max_inner})")
        if len(violations) > 0:
            raise InvalidConfigurationError(f"invalid barrier options: {', '.join(violations)}")


@dataclass(frozen=True)
class NewtonStep:
    """A Newton direction of the barrier function and its by-products"""

    direction: Vector
    decrement: float
    """The Newton decrement `sqrt(−∇F_τᵀd)`, a measure of the distance to the central point"""
    regularized: bool
    """Whether the Hessian had to be shifted to be factorized"""


def barrier_value(p: ConvexProgram, tau: float, x: Vector) -> float:
    """The barrier function at `x`, or +inf outside the strict interior"""
    values = p.constraint_values(x)
    bounded = x[list(p.bounded_indices)]
    if np.any(values >= 0) or np.any(bounded <= 0):
        return math.inf
    return p.objective_value(x) - (np.sum(np.log(-values)) + np.sum(np.log(bounded))) / tau


def barrier_derivatives(p: ConvexProgram, tau: float, x: Vector) -> tuple[float, Vector, Matrix]:
    """
    The value, gradient and Hessian of the barrier function at a strictly feasible point.

    The Hessian adds to the rank-1 perspective factors of the objective the barrier curvature
    `(1/τ)·(∇c∇cᵀ/c² + ∇²c/|c|)` of every constraint and `1/(τ·x_i²)` on the bounded coordinates.
    """
    value, gradient, hessian = p.objective_derivatives(x)
    constraint_values, jacobian, constraint_hessians = p.constraint_derivatives(x)

    for c, row, curvature in zip(constraint_values, jacobian, constraint_hessians, strict=True):
        value -= math.log(-c) / tau
        gradient += row / (-c) / tau
        hessian += (np.outer(row, row) / c**2 + curvature / abs(c)) / tau

    for i in p.bounded_indices:
        value -= math.log(x[i]) / tau
        gradient[i] -= 1.0 / (tau * x[i])
        hessian[i, i] += 1.0 / (tau * x[i] ** 2)

    return value, gradient, hessian


def solve_newton_system(hessian: Matrix, rhs: Vector) -> tuple[Vector, bool]:
    """Solve `H·d = rhs` by Cholesky factorization, shifting the diagonal when it fails"""
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(hessian), rhs), False
    except scipy.linalg.LinAlgError:
        pass

    shift = REGULARIZATION
    identity = np.eye(len(rhs))
    while shift < 1.0:
        try:
            return scipy.linalg.cho_solve(scipy.linalg.cho_factor(hessian + shift * identity), rhs), True
        except scipy.linalg.LinAlgError:
            shift *= 100.0
    return scipy.linalg.lstsq(hessian, rhs)[0], True


def newton_step(p: ConvexProgram, tau: float, x: Vector) -> NewtonStep:
    """The Newton direction of the barrier function, restricted to the free variables"""
    _, gradient, hessian = barrier_derivatives(p, tau, x)
    free = list(p.free_indices)

    direction = np.zeros(p.n_vars)
    if not np.any(gradient[free]):
        return NewtonStep(direction=direction, decrement=0.0, regularized=False)

    reduced, regularized = solve_newton_system(hessian[np.ix_(free, free)], -gradient[free])
    direction[free] = reduced
    decrement = math.sqrt(max(-float(gradient[free] @ reduced), 0.0))

    return NewtonStep(direction=direction, decrement=decrement, regularized=regularized)


def newton_direction(p: ConvexProgram, tau: float, x: Vector) -> Vector:
    """The Newton direction `d = −(∇²F_τ)⁻¹∇F_τ` at a strictly feasible point"""
    return newton_step(p, tau, x).direction


def _strictly_feasible(p: ConvexProgram, x: Vector) -> bool:
    values = p.constraint_values(x)
    return bool(np.all(values < 0) and np.all(x[list(p.bounded_indices)] > 0))


def _step_length(p: ConvexProgram, tau: float, x: Vector, d: Vector, opts: BarrierOptions) -> float:
    """
    Size a Newton step: feasibility intervals first, then a golden-section search.

    The search minimizes the objective f along the ray, and falls back to the barrier function when that step is too short
    to move the iterate or does not decrease the barrier function.
    """
    alpha_I = alpha_linear(p, x, d, opts.shrink)
    alpha_II = alpha_log_bisection(p, x, d, alpha_I, opts.shrink, opts.bisection_tol)
    LOGGER.spam("feasibility intervals: alpha_I=%g, alpha_II=%g", alpha_I, alpha_II)

    current = barrier_value(p, tau, x)
    step_norm = float(np.linalg.norm(d))

    alpha = golden_section_min(lambda a: p.objective_value(x + a * d), (0.0, alpha_II), opts.golden_tol)
    if alpha * step_norm > opts.eps and barrier_value(p, tau, x + alpha * d) < current:
        return alpha

    alpha = golden_section_min(lambda a: barrier_value(p, tau, x + a * d), (0.0, alpha_II), opts.golden_tol)
    if barrier_value(p, tau, x + alpha * d) < current:
        return alpha
    return 0.0


def infeasible_result(p: ConvexProgram, solver: str, reason: str, started: float) -> SolveResult:
    LOGGER.warning("program %s is infeasible: %s", p.label, reason)
    return SolveResult(
        x_star=Allocation.of(p, np.zeros(p.n_vars)),
        objective_bits=math.nan,
        outer_iters=0,
        inner_iters=0,
        max_constraint_violation=math.nan,
        status=SolveStatus.INFEASIBLE,
        solver=solver,
        elapsed=time.perf_counter() - started,
        diagnostics=(reason,),
    )


def max_violation(p: ConvexProgram, x: Vector) -> float:
    """The largest constraint value at `x`, nonnegativity of time and energy included"""
    values = np.concatenate([p.constraint_values(x), -x[list(p.bounded_indices)]])
    return float(np.max(values)) if len(values) > 0 else -math.inf


def _damped_step(p: ConvexProgram, tau: float, x: Vector, step: NewtonStep, opts: BarrierOptions) -> Vector:
    """The next iterate along a Newton direction, halved until strictly feasible"""
    alpha = _step_length(p, tau, x, step.direction, opts) if step.decrement > 0 else 0.0
    candidate = x + alpha * step.direction
    while alpha > 0 and not _strictly_feasible(p, candidate):
        alpha /= 2.0
        candidate = x + alpha * step.direction
    return candidate


@profile()
def solve_nb(p: ConvexProgram, opts: BarrierOptions | None = None) -> SolveResult:
    """
    Maximize the throughput objective of a program with the Newton barrier method.

    Starting from `initial_point`, every barrier parameter `τ = τ0, μ·τ0, …` up to `τ_max` gets an inner loop of Newton
    steps, which stops when an iterate moves by less than `eps`. The last central point is then polished by Newton steps
    until its decrement drops below `kkt_tol`. The result reports the maximized objective in bits.
    """
    opts = opts or BarrierOptions()
    started = time.perf_counter()
    program = presolve(p)

    try:
        start = initial_point(program)
    except InfeasibleProgramError as error:
        return infeasible_result(program, "nb", str(error), started)

    x = start.x.copy()
    tau = opts.tau0
    outer, inner = 0, 0
    history: list[float] = []
    diagnostics: list[str] = []
    capped = False

    while True:
        outer += 1
        capped = True
        for _ in range(opts.max_inner):
            step = newton_step(program, tau, x)
            if step.regularized:
                diagnostics.append(f"regularized Newton system at tau={tau:g}")
                LOGGER.warning("program %s: regularized Newton system at tau=%g", program.label, tau)

            candidate = _damped_step(program, tau, x, step, opts)
            inner += 1

            moved = float(np.linalg.norm(candidate - x))
            x = candidate
            LOGGER.debug("tau=%g: step %g, decrement %g, objective %.10g", tau, moved, step.decrement, program.objective_value(x))
            if moved <= opts.eps:
                capped = False
                break

        history.append(-program.objective_value(x) / LN2)
        LOGGER.verbose("program %s: tau=%g, objective %.10g bits after %d Newton steps", program.label, tau, history[-1], inner)

        if tau >= opts.tau_max:
            break
        tau *= opts.mu

    final = newton_step(program, tau, x)
    for _ in range(opts.max_inner):
        if final.decrement <= opts.kkt_tol:
            break
        candidate = _damped_step(program, tau, x, final, opts)
        inner += 1
        if np.array_equal(candidate, x):
            break
        x = candidate
        final = newton_step(program, tau, x)

    if final.decrement > opts.kkt_tol:
        LOGGER.warning("program %s: Newton decrement %g left at the last barrier parameter", program.label, final.decrement)
        diagnostics.append(f"Newton decrement {final.decrement:g} above {opts.kkt_tol:g}")
    status = SolveStatus.MAX_ITERATIONS if capped or final.decrement > opts.kkt_tol else SolveStatus.CONVERGED

    return SolveResult(
        x_star=Allocation.of(program, x, degenerate=start.degenerate),
        objective_bits=-program.objective_value(x) / LN2,
        outer_iters=outer,
        inner_iters=inner,
        max_constraint_violation=max_violation(program, x),
        status=status,
        kkt_residual=final.decrement,
        solver="nb",
        elapsed=time.perf_counter() - started,
        history=tuple(history),
        diagnostics=tuple(dict.fromkeys(diagnostics)),
    )
