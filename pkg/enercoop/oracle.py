"""
Independent oracles to validate the solvers on small instances.

* `brute_force_grid` scans the time fractions of a program without data cooperation on a regular grid. Every energy is
  set to the largest value its budget allows, which is optimal since each throughput increases with its energy.
* `finite_diff_check` compares the analytic derivatives of the barrier function and of the perspective terms with
  central finite differences.
"""
from __future__ import annotations

import itertools
import math
import typing
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from enercoop.convex.perspective import perspective_gradient, perspective_value
from enercoop.convex.program import ConvexProgram, Matrix, VariableKind, Vector, presolve
from enercoop.errors import GridTooLargeError, InvalidConfigurationError
from enercoop.model import LN2
from enercoop.solvers.barrier import barrier_derivatives, barrier_value
from enercoop.utils.logger import LOGGER

MAX_GRID_POINTS: int = 100_000_000
"""Guard on the number of grid points an oracle may scan"""


@dataclass(frozen=True)
class GridSpec:
    """The resolution of the brute-force scan of the time fractions"""

    step: float = 1e-3
    """Spacing of the grid on every time fraction, which lies in [0, 1]"""
    max_points: int = MAX_GRID_POINTS
    chunk: int = 100
    """Values of the first time fraction evaluated together"""

    def __post_init__(self: typing.Self) -> None:
        if not 0 < self.step <= 1:
            raise InvalidConfigurationError(f"grid step must lie in (0, 1] (got {self.step})")

    @property
    def axis(self: typing.Self) -> Vector:
        """The grid on a single time fraction"""
        return np.linspace(0.0, 1.0, round(1.0 / self.step) + 1)

    def points(self: typing.Self, dimensions: int) -> int:
        """The size of the full grid in the given number of dimensions"""
        return len(self.axis) ** dimensions


def _fill_energies(p: ConvexProgram, x: Matrix) -> npt.NDArray[np.bool_]:
    """Set every free energy to its largest budget, row by row; returns which rows are feasible"""
    feasible = np.ones(len(x), dtype=bool)
    for index in p.indices(VariableKind.ENERGY):
        if index in p.pinned:
            continue
        budget = np.full(len(x), np.inf)
        for constraint in p.linear:
            coefficient = constraint.a[index]
            if coefficient > 0:
                a = constraint.vector
                rest = x @ a - coefficient * x[:, index]
                budget = np.minimum(budget, (constraint.b - rest) / coefficient)
        feasible &= budget >= 0
        x[:, index] = np.where(np.isfinite(budget), np.maximum(budget, 0.0), 0.0)
    return feasible


def _terms_value(terms: typing.Iterable, x: Matrix) -> Vector:
    total = np.zeros(len(x))
    for term in terms:
        total += term.coeff * perspective_value(term.gamma, x[:, term.t_index], x[:, term.y_index])
    return total


def _evaluate_chunk(p: ConvexProgram, times: Matrix) -> tuple[Matrix, Vector]:
    """The best point of every row of time fractions, with its objective (+inf where infeasible)"""
    x = np.zeros((len(times), p.n_vars))
    x[:, list(p.indices(VariableKind.TIME))] = times
    feasible = _fill_energies(p, x)

    # auxiliary throughputs sit exactly at their tightest bound
    for index in p.indices(VariableKind.AUX):
        bound = np.full(len(x), np.inf)
        for epigraph in p.epigraphs:
            if epigraph.aux_index == index:
                bound = np.minimum(bound, -_terms_value(epigraph.terms, x))
        for constraint in p.linear:
            coefficient = constraint.a[index]
            if coefficient > 0:
                rest = x @ constraint.vector - coefficient * x[:, index]
                bound = np.minimum(bound, (constraint.b - rest) / coefficient)
        x[:, index] = bound

    for constraint in p.linear:
        feasible &= x @ constraint.vector - constraint.b <= 1e-12

    objective = x @ np.asarray(p.linear_objective) + _terms_value(p.objective_terms, x)
    return x, np.where(feasible, objective, np.inf)


def brute_force_grid(p: ConvexProgram, grid: GridSpec | None = None) -> tuple[Vector, float]:
    """
    Exhaustively scan the time fractions of a program without data cooperation.

    Returns
    -------
    * the best grid point
    * its objective, maximized and in bits

    Raises
    ------
    * `InvalidConfigurationError` for programs with more than two time fractions (relay scenarios couple the energies)
    * `GridTooLargeError` when the grid exceeds its guard
    """
    grid = grid or GridSpec()
    program = presolve(p)
    times = program.indices(VariableKind.TIME)
    if len(times) > 2:
        raise InvalidConfigurationError(f"the grid oracle handles programs with up to two time fractions ({program.label} has {len(times)})")
    if grid.points(len(times)) > grid.max_points:
        raise GridTooLargeError(f"{grid.points(len(times))} grid points exceed the guard of {grid.max_points}")

    axis = grid.axis
    best_x, best = np.zeros(program.n_vars), math.inf
    for start in range(0, len(axis), grid.chunk):
        heads = axis[start:start + grid.chunk]
        rows = np.array(list(itertools.product(heads, *[axis] * (len(times) - 1))))
        rows = rows[rows.sum(axis=1) <= 1.0 + 1e-12]
        if len(rows) == 0:
            continue
        x, objective = _evaluate_chunk(program, rows)
        index = int(np.argmin(objective))
        if objective[index] < best:
            best, best_x = float(objective[index]), x[index]

    LOGGER.debug("grid oracle on %s: best objective %.10g nats at %s", program.label, -best, best_x)
    return best_x, -best / LN2


@dataclass(frozen=True)
class FiniteDifferenceReport:
    """Relative errors of the analytic derivatives against central differences"""

    gradient: float
    """Error of the barrier function gradient"""
    hessian: float
    """Error of the barrier function Hessian"""
    terms: float
    """Largest error of the perspective term gradients"""

    @property
    def max_relative_error(self: typing.Self) -> float:
        """The largest of all errors"""
        return max(self.gradient, self.hessian, self.terms)


def _relative_error(numeric: npt.ArrayLike, analytic: npt.ArrayLike) -> float:
    numeric, analytic = np.asarray(numeric), np.asarray(analytic)
    return float(np.max(np.abs(numeric - analytic), initial=0.0) / max(float(np.max(np.abs(analytic), initial=0.0)), 1.0))


def finite_diff_report(p: ConvexProgram, x: npt.ArrayLike, step: float, tau: float = 1.0) -> FiniteDifferenceReport:
    """Compare the analytic derivatives of the barrier function and of the perspective terms at `x` with central differences"""
    x = p.check_dimension(x)
    n = p.n_vars
    _, gradient, hessian = barrier_derivatives(p, tau, x)

    numeric_gradient = np.zeros(n)
    numeric_hessian = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        numeric_gradient[i] = (barrier_value(p, tau, x + e) - barrier_value(p, tau, x - e)) / (2 * step)
        numeric_hessian[:, i] = (barrier_derivatives(p, tau, x + e)[1] - barrier_derivatives(p, tau, x - e)[1]) / (2 * step)

    term_errors = [0.0]
    for term in p.terms:
        t, y = float(x[term.t_index]), float(x[term.y_index])
        g, _ = perspective_gradient(term.gamma, t, y)
        numeric = [
            (perspective_value(term.gamma, t + step, y) - perspective_value(term.gamma, t - step, y)) / (2 * step),
            (perspective_value(term.gamma, t, y + step) - perspective_value(term.gamma, t, max(y - step, 0.0))) / (y + step - max(y - step, 0.0)),
        ]
        term_errors.append(_relative_error(numeric, g))

    return FiniteDifferenceReport(
        gradient=_relative_error(numeric_gradient, gradient),
        hessian=_relative_error(numeric_hessian, hessian),
        terms=max(term_errors),
    )


def finite_diff_check(p: ConvexProgram, x: npt.ArrayLike, step: float, tau: float = 1.0) -> float:
    """The largest relative error between analytic derivatives and central differences at `x`"""
    return finite_diff_report(p, x, step, tau).max_relative_error
