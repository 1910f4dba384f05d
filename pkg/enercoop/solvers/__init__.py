"""
The two interchangeable convex solvers: the Newton barrier method and the iterative quadratic approach.

Use `solve` to run either of them, or both for cross-validation.
"""
from __future__ import annotations

import enum
import math
import typing
from dataclasses import dataclass, field, replace

from enercoop.convex.program import ConvexProgram
from enercoop.model import SolveResult
from enercoop.solvers.barrier import BarrierOptions, newton_direction, solve_nb
from enercoop.solvers.interior import QuadraticSubproblem, solve_subproblem
from enercoop.solvers.linesearch import alpha_linear, alpha_log_bisection, golden_section_min
from enercoop.solvers.quadratic import QuadraticModel, QuadraticOptions, model_fidelity, quadratize, solve_iterative
from enercoop.utils.logger import LOGGER


class SolverKind(enum.Enum):
    """The solver to use"""

    NB = "nb"
    """The Newton barrier method"""
    QUAD = "quad"
    """The iterative quadratic approach"""
    BOTH = "both"
    """Both solvers; the Newton barrier result is returned, with the relative gap to the other"""


def relative_gap(first: float, second: float) -> float:
    """The relative difference between two objective values"""
    return abs(first - second) / max(abs(first), abs(second), 1e-12)


def solve(
    p: ConvexProgram,
    kind: SolverKind = SolverKind.NB,
    *,
    barrier: BarrierOptions | None = None,
    quadratic: QuadraticOptions | None = None,
) -> SolveResult:
    """Solve a program with the selected solver"""
    match kind:
        case SolverKind.NB:
            return solve_nb(p, barrier)
        case SolverKind.QUAD:
            return solve_iterative(p, quadratic)
        case SolverKind.BOTH:
            reference = solve_nb(p, barrier)
            other = solve_iterative(p, quadratic)
            if not (reference.converged and other.converged):
                return replace(reference, reference_gap=math.nan)
            gap = relative_gap(reference.objective_bits, other.objective_bits)
            LOGGER.info("program %s: nb %.10g bits, quad %.10g bits, relative gap %.3g", p.label, reference.objective_bits, other.objective_bits, gap)
            return replace(reference, reference_gap=gap)


@dataclass(frozen=True)
class SolverSettings:
    """The solver choice and its options, shared by the strategy selection and the sweeps"""

    kind: SolverKind = SolverKind.NB
    barrier: BarrierOptions = field(default_factory=BarrierOptions)
    quadratic: QuadraticOptions = field(default_factory=QuadraticOptions)

    def run(self: typing.Self, p: ConvexProgram) -> SolveResult:
        """Solve a program with these settings"""
        return solve(p, self.kind, barrier=self.barrier, quadratic=self.quadratic)


__all__ = [
    "BarrierOptions",
    "SolverSettings",
    "QuadraticModel",
    "QuadraticOptions",
    "QuadraticSubproblem",
    "SolverKind",
    "alpha_linear",
    "alpha_log_bisection",
    "golden_section_min",
    "model_fidelity",
    "newton_direction",
    "quadratize",
    "relative_gap",
    "solve",
    "solve_iterative",
    "solve_nb",
    "solve_subproblem",
]
