"""
The iterative quadratic approach.

Every logarithmic perspective is replaced by its second-order expansion at the current solution,

```
l_γ(t, y) ≈ l_γ(t_k, y_k) + g_kᵀδ + ½·(v_kᵀδ)²,   δ = (t − t_k, y − y_k)
```

which has a rank-1 curvature. The resulting QCQP (a QP when the program has no epigraph constraints with perspective
terms) is solved by `enercoop.solvers.interior`. The next expansion point is the best point of the original objective on
the segment towards the subproblem solution, and the process repeats until the models stop predicting any progress.
"""
from __future__ import annotations

import math
import time
import typing
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from enercoop.convex.perspective import perspective_gradient, perspective_value
from enercoop.convex.program import Allocation, ConvexProgram, PerspectiveTerm, VariableKind, Vector, aux_bound, initial_point, presolve
from enercoop.errors import DomainError, InfeasibleProgramError, InvalidConfigurationError, SubproblemError
from enercoop.model import LN2, SolveResult, SolveStatus
from enercoop.solvers.barrier import infeasible_result, max_violation
from enercoop.solvers.interior import InteriorPointOptions, QuadraticForm, QuadraticSubproblem, interior_point
from enercoop.solvers.linesearch import alpha_linear, golden_section_min
from enercoop.utils.logger import LOGGER
from enercoop.utils.timer import profile


@dataclass(frozen=True)
class QuadraticModel:
    """The local quadratic model of a logarithmic perspective around an expansion point"""

    base_value: float
    """The perspective value at the expansion point (nats)"""
    g: Vector
    v: Vector
    """The rank-1 Hessian factor"""
    expansion_point: tuple[float, float]

    @staticmethod
    def expand(gamma: float, t_k: float, y_k: float) -> QuadraticModel:
        """Build the model of `l_γ` at `(t_k, y_k)`"""
        if t_k <= 0:
            raise DomainError(f"cannot expand the perspective at t={t_k}")
        g, v = perspective_gradient(gamma, t_k, y_k)
        return QuadraticModel(base_value=perspective_value(gamma, t_k, y_k), g=g, v=v, expansion_point=(t_k, y_k))

    def value(self: typing.Self, t: npt.ArrayLike, y: npt.ArrayLike) -> npt.ArrayLike:
        """The model value, elementwise for arrays"""
        dt = np.asarray(t, dtype=float) - self.expansion_point[0]
        dy = np.asarray(y, dtype=float) - self.expansion_point[1]
        return self.base_value + self.g[0] * dt + self.g[1] * dy + 0.5 * (self.v[0] * dt + self.v[1] * dy) ** 2

    def gradient(self: typing.Self, t: float, y: float) -> Vector:
        """The model gradient `g + v·(vᵀδ)`"""
        delta = np.array([t - self.expansion_point[0], y - self.expansion_point[1]])
        return self.g + self.v * float(self.v @ delta)

    def form(self: typing.Self, term: PerspectiveTerm, x_k: Vector) -> QuadraticForm:
        """The weighted model of a term written as a quadratic form over the whole variable vector"""
        n = len(x_k)
        g, u = np.zeros(n), np.zeros(n)
        g[term.t_index], g[term.y_index] = self.g
        u[term.t_index], u[term.y_index] = self.v
        anchor = float(u @ x_k)
        return QuadraticForm(
            linear=term.coeff * (g - anchor * u),
            constant=term.coeff * (self.base_value - float(g @ x_k) + 0.5 * anchor**2),
            factors=u[None, :],
            weights=np.array([term.coeff]),
        )


@dataclass(frozen=True)
class QuadraticOptions:
    """The parameters of the iterative quadratic approach"""

    eps: float = 1e-6
    """The iterations stop when a full-length step moves the solution less than this (euclidean norm)"""
    ftol: float = 1e-8
    """
    The iterations stop when the subproblem predicts a decrease below `ftol·max(1, |f|)`, or when a full step lands where
    the models match the original functions to within that amount
    """
    max_outer: int = 50
    shrink: float = 0.99
    """Fraction of the distance to the boundary kept when a step would leave the positive orthant of the time variables"""
    aux_margin: float = 1e-7
    """Relative gap kept between an auxiliary throughput and its tightest bound"""
    line_tol: float = 1e-9
    """Accuracy of the golden-section search along the step, as a fraction of the step"""
    interior: InteriorPointOptions = field(default_factory=InteriorPointOptions)

    def __post_init__(self: typing.Self) -> None:
        violations = []
        if self.eps <= 0 or self.ftol <= 0 or self.line_tol <= 0:
            violations.append("tolerances must be positive")
        if self.max_outer < 1:
            violations.append(f"max_outer must be at least 1 (got {self.max_outer})")
        if not 0 < self.shrink < 1:
            violations.append(f"shrink must lie in (0, 1) (got {self.shrink})")
        if self.aux_margin < 0:
            violations.append(f"aux_margin must be nonnegative (got {self.aux_margin})")
        if len(violations) > 0:
            raise InvalidConfigurationError(f"invalid quadratic options: {', '.join(violations)}")


def quadratize(p: ConvexProgram, x_k: npt.ArrayLike) -> QuadraticSubproblem:
    """
    Replace every perspective term of a program by its quadratic model at `x_k`.

    Linear constraints are copied verbatim. Epigraph constraints become quadratic constraints, so relay scenarios yield a
    QCQP and the others a QP.
    """
    x_k = p.check_dimension(x_k)

    def model(term: PerspectiveTerm) -> QuadraticForm:
        t_k = float(x_k[term.t_index])
        if t_k <= 0:
            raise DomainError(f"program '{p.label}': cannot quadratize at {p.names[term.t_index]}={t_k}")
        return QuadraticModel.expand(term.gamma, t_k, float(x_k[term.y_index])).form(term, x_k)

    objective = QuadraticForm.affine(p.linear_objective)
    for term in p.objective_terms:
        objective = objective + model(term)

    constraints = []
    for epigraph in p.epigraphs:
        unit = np.zeros(p.n_vars)
        unit[epigraph.aux_index] = 1.0
        form = QuadraticForm.affine(unit)
        for term in epigraph.terms:
            form = form + model(term)
        constraints.append(form)

    return QuadraticSubproblem(
        names=p.names,
        kinds=p.kinds,
        objective=objective,
        quadratic=tuple(constraints),
        A=np.array([constraint.a for constraint in p.linear]) if len(p.linear) > 0 else np.zeros((0, p.n_vars)),
        b=np.array([constraint.b for constraint in p.linear]),
        bounded=p.bounded_indices,
        pinned=p.pinned,
        label=p.label,
    )


def _tighten_aux(p: ConvexProgram, x: Vector, margin: float) -> Vector:
    """Set every auxiliary throughput just below its tightest bound under the original constraints"""
    x = x.copy()
    for index in p.indices(VariableKind.AUX):
        bound = aux_bound(p, x, index)
        x[index] = bound - margin * max(1.0, abs(bound))
    return x


def model_error(p: ConvexProgram, subproblem: QuadraticSubproblem, x: Vector) -> float:
    """The largest gap between the objective or an epigraph constraint and its quadratic model at `x`"""
    gaps = [abs(p.objective_value(x) - subproblem.objective.value(x))]
    gaps += [abs(epigraph.value(x) - form.value(x)) for epigraph, form in zip(p.epigraphs, subproblem.quadratic, strict=True)]
    return max(gaps)


@dataclass(frozen=True)
class Step:
    """A step of the iterative quadratic approach towards a subproblem solution"""

    x: Vector
    """The next expansion point, auxiliary throughputs fitted to the original constraints"""
    theta: float
    """The fraction of the way to the subproblem solution"""
    decrease: float
    """The decrease of the original objective (nats)"""


def _next_iterate(p: ConvexProgram, x: Vector, z: Vector, opts: QuadraticOptions) -> Step:
    """
    Turn a subproblem solution into the next expansion point of the original program.

    The step towards the solution is cut short when it would leave the positive orthant or the linear constraints, then a
    golden-section search finds the fraction of it minimizing the original objective, auxiliary throughputs fitted to the
    original epigraph constraints along the way.
    """
    z = z.copy()
    bounded = list(p.bounded_indices)
    z[bounded] = np.maximum(z[bounded], 0.0)
    d = z - x

    ahead = x + d
    linear_ok = all(constraint.value(ahead) < 0 for constraint in p.linear)
    bounds_ok = bool(np.all(ahead[bounded] > 0))
    longest = 1.0 if linear_ok and bounds_ok else min(1.0, alpha_linear(p, x, d, opts.shrink))

    def along(theta: float) -> float:
        return p.objective_value(_tighten_aux(p, x + theta * d, opts.aux_margin))

    current = along(0.0)
    theta = golden_section_min(along, (0.0, longest), opts.line_tol * longest)
    decrease = current - along(theta)
    if decrease <= 0:
        return Step(x=_tighten_aux(p, x, opts.aux_margin), theta=0.0, decrease=0.0)
    return Step(x=_tighten_aux(p, x + theta * d, opts.aux_margin), theta=theta, decrease=decrease)


@profile()
def solve_iterative(p: ConvexProgram, opts: QuadraticOptions | None = None) -> SolveResult:
    """
    Maximize the throughput objective of a program by successive quadratic approximations.

    Each round quadratizes the program at the current point, solves the subproblem with the interior-point method, and moves
    along the segment to its solution as far as the original objective keeps decreasing. The rounds stop when the subproblem
    predicts no significant decrease, when a full step lands where the models are exact, or when a full step moves the
    solution by less than `eps`. A round that cannot decrease the objective although the model predicts it can ends the
    iterations without convergence.
    """
    opts = opts or QuadraticOptions()
    started = time.perf_counter()
    program = presolve(p)

    try:
        start = initial_point(program)
    except InfeasibleProgramError as error:
        return infeasible_result(program, "quad", str(error), started)

    x = _tighten_aux(program, start.x.copy(), opts.aux_margin)
    history: list[float] = []
    diagnostics: list[str] = []
    inner, residual = 0, math.nan
    status = SolveStatus.MAX_ITERATIONS
    rounds = 0

    for rounds in range(1, opts.max_outer + 1):
        subproblem = quadratize(program, x)
        try:
            solution = interior_point(subproblem, x, opts.interior)
        except SubproblemError as error:
            LOGGER.warning("%s", error)
            diagnostics.append(str(error))
            break
        inner += solution.iterations
        residual = solution.residual

        scale = opts.ftol * max(1.0, abs(program.objective_value(x)))
        predicted = subproblem.objective.value(_tighten_aux(program, x, 0.0)) - subproblem.objective.value(solution.x)
        if predicted <= scale:
            LOGGER.verbose("program %s: round %d predicts a decrease of %g nats only", program.label, rounds, predicted)
            history.append(-program.objective_value(x) / LN2)
            status = SolveStatus.CONVERGED
            break

        step = _next_iterate(program, x, solution.x, opts)
        if step.decrease <= 0:
            LOGGER.warning("program %s: round %d could not decrease the objective, %g nats were predicted", program.label, rounds, predicted)
            diagnostics.append(f"no decrease in round {rounds}")
            history.append(-program.objective_value(x) / LN2)
            break

        moved = float(np.linalg.norm(step.x - x))
        x = step.x
        history.append(-program.objective_value(x) / LN2)
        LOGGER.verbose("program %s: round %d, objective %.10g bits, step %g of the way, moved %g", program.label, rounds, history[-1], step.theta, moved)

        full = step.theta >= 1.0 - 1e-6
        if full and (moved <= opts.eps or model_error(program, subproblem, _tighten_aux(program, x, 0.0)) <= scale):
            status = SolveStatus.CONVERGED
            break

    return SolveResult(
        x_star=Allocation.of(program, x, degenerate=start.degenerate),
        objective_bits=-program.objective_value(x) / LN2,
        outer_iters=rounds,
        inner_iters=inner,
        max_constraint_violation=max_violation(program, x),
        status=status,
        kkt_residual=residual,
        solver="quad",
        elapsed=time.perf_counter() - started,
        history=tuple(history),
        diagnostics=tuple(dict.fromkeys(diagnostics)),
    )


@dataclass(frozen=True)
class ModelFidelity:
    """How closely a quadratic model follows the perspective over a rectangle"""

    distance: float
    """The Frobenius distance between both surfaces, normalized by the norm of the perspective surface"""
    perspective_range: tuple[float, float]
    model_range: tuple[float, float]


def model_fidelity(
    gamma: float,
    expansion: tuple[float, float] = (0.5, 0.05),
    t_range: tuple[float, float] = (0.1, 0.9),
    y_range: tuple[float, float] = (0.01, 0.1),
    points: int = 251,
) -> ModelFidelity:
    """Compare the perspective and its quadratic model at `expansion` over a `points × points` grid"""
    t, y = np.meshgrid(np.linspace(*t_range, points), np.linspace(*y_range, points))
    exact = perspective_value(gamma, t, y)
    approximation = QuadraticModel.expand(gamma, *expansion).value(t, y)

    return ModelFidelity(
        distance=float(np.linalg.norm(exact - approximation) / np.linalg.norm(exact)),
        perspective_range=(float(np.min(exact)), float(np.max(exact))),
        model_range=(float(np.min(approximation)), float(np.max(approximation))),
    )
