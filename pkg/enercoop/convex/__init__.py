"""
The calculus of the logarithmic perspective function and the canonical convex program built from it.

Every nonlinear term of the throughput maximization problems has the form `l_γ(t, y) = -t·ln(1 + γy/t)`. A program is a
linear objective plus weighted perspective terms, a set of epigraph constraints `x[aux] + Σ coeff·l_γ ≤ 0`, and a set of
linear constraints `a·x ≤ b`.
"""
from enercoop.convex.perspective import perspective_gradient, perspective_hessian, perspective_value
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

__all__ = [
    "Allocation",
    "ConvexProgram",
    "EpigraphConstraint",
    "LinearConstraint",
    "PerspectiveTerm",
    "VariableKind",
    "eval_program",
    "initial_point",
    "perspective_gradient",
    "perspective_hessian",
    "perspective_value",
    "presolve",
]
