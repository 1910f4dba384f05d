"""
Exact line search along a Newton direction, in three stages.

1. `alpha_linear` finds in closed form the largest step keeping the linear constraints and the nonnegativity of the time
   and energy variables strictly satisfied.
2. `alpha_log_bisection` shortens it so that the logarithmic (epigraph) constraints stay strictly satisfied; each of them
   crosses zero at most once along the ray, which bisection locates.
3. `golden_section_min` minimizes a convex function of the step over the resulting interval.
"""
from __future__ import annotations

import math
import typing

import numpy as np
from scipy import optimize

from enercoop.convex.program import ConvexProgram, Vector
from enercoop.utils.logger import LOGGER

ALPHA_CAP: float = 1e6
"""The step returned when no constraint limits the ray"""

GOLDEN_RATIO: float = (math.sqrt(5.0) - 1.0) / 2.0


def alpha_linear(p: ConvexProgram, x: Vector, d: Vector, shrink: float = 0.99) -> float:
    """
    The largest step along `d` keeping every linear constraint and every bounded coordinate strictly feasible.

    A linear constraint with directional derivative `s = a·d > 0` is crossed at `−c(x)/s`; a time or energy coordinate
    with `d_i < 0` reaches zero at `−x_i/d_i`. The smallest crossing is scaled by `shrink`.
    """
    crossing = math.inf
    for constraint in p.linear:
        slope = float(constraint.vector @ d)
        if slope > 0:
            crossing = min(crossing, -constraint.value(x) / slope)
    for i in p.bounded_indices:
        if d[i] < 0:
            crossing = min(crossing, -x[i] / d[i])

    if not math.isfinite(crossing):
        return ALPHA_CAP
    return min(shrink * crossing, ALPHA_CAP)


def alpha_log_bisection(p: ConvexProgram, x: Vector, d: Vector, alpha_I: float, shrink: float = 0.99, tol: float = 1e-9) -> float:
    """
    Shorten a step so that every epigraph constraint stays strictly feasible.

    Constraints still negative at `x + alpha_I·d` allow the whole interval; the others are bisected on `[0, alpha_I]` for
    their zero crossing. The smallest allowance is scaled by `shrink`.
    """
    allowance = alpha_I
    for epigraph in p.epigraphs:
        def along(alpha: float, epigraph: typing.Any = epigraph) -> float:
            return epigraph.value(x + alpha * d)

        if along(alpha_I) < 0:
            continue
        crossing = optimize.bisect(along, 0.0, alpha_I, xtol=tol)
        LOGGER.spam("constraint '%s' crosses zero at alpha=%g", epigraph.label, crossing)
        allowance = min(allowance, crossing)

    return shrink * allowance


def golden_section_min(f_along_ray: typing.Callable[[float], float], interval: tuple[float, float], tol: float = 1e-8) -> float:
    """
    Locate the minimizer of a convex function over a closed interval, to within `tol`.

    The interval keeps the better of its two interior points at every iteration; the endpoints are compared at the end,
    so a monotone function yields the corresponding endpoint exactly.
    """
    low, high = interval
    if high <= low:
        return low

    a, b = low, high
    lower = b - GOLDEN_RATIO * (b - a)
    upper = a + GOLDEN_RATIO * (b - a)
    f_lower, f_upper = f_along_ray(lower), f_along_ray(upper)

    while b - a > tol:
        if f_upper < f_lower:
            a, lower, f_lower = lower, upper, f_upper
            upper = a + GOLDEN_RATIO * (b - a)
            f_upper = f_along_ray(upper)
        else:
            b, upper, f_upper = upper, lower, f_lower
            lower = b - GOLDEN_RATIO * (b - a)
            f_lower = f_along_ray(lower)

    candidates = [((a + b) / 2.0, f_along_ray((a + b) / 2.0)), (low, f_along_ray(low)), (high, f_along_ray(high))]
    values = np.array([value for _, value in candidates])
    return candidates[int(np.argmin(values))][0]
