"""
Values and derivatives of the logarithmic perspective `l_γ(t, y) = -t·ln(1 + γy/t)`.

All quantities are in nats. The Hessian of `l_γ` has rank one, so it is returned as a factor `v` with `∇²l_γ = v·vᵀ`.
"""
from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

from enercoop.errors import DomainError

ArrayLike = float | npt.NDArray[np.float64]


def perspective_value(gamma: float, t: ArrayLike, y: ArrayLike) -> ArrayLike:
    """
    Evaluate the logarithmic perspective.

    The function extends continuously to the boundary: it is 0 whenever `t = 0` or `y = 0`. Arrays are evaluated
    elementwise.

    Parameters
    ----------
    * `gamma`:  *the SNR coefficient, positive*
    * `t`:      *the time fraction(s), nonnegative*
    * `y`:      *the energy variable(s), nonnegative*

    Returns
    -------
    * `-t·ln(1 + γy/t)`, with the same shape as the broadcast inputs
    """
    if isinstance(t, float) and isinstance(y, float):
        if t < 0 or y < 0:
            raise DomainError(f"the perspective is defined for t >= 0 and y >= 0 (got t={t}, y={y})")
        return -t * math.log1p(gamma * y / t) if t > 0 else 0.0

    t_arr = np.asarray(t, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if np.any(t_arr < 0) or np.any(y_arr < 0):
        raise DomainError(f"the perspective is defined for t >= 0 and y >= 0 (got t={t}, y={y})")

    positive = t_arr > 0
    safe_t = np.where(positive, t_arr, 1.0)
    value = np.where(positive, -safe_t * np.log1p(gamma * y_arr / safe_t), 0.0)

    return float(value) if value.ndim == 0 else value


def perspective_gradient(gamma: float, t: float, y: float) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Exact gradient and rank-1 Hessian factor of the logarithmic perspective at `(t, y)`.

    Returns
    -------
    * `g`: *the gradient `[∂l/∂t, ∂l/∂y]`*
    * `v`: *the Hessian factor, such that `v·vᵀ` is the Hessian*
    """
    if t <= 0:
        raise DomainError(f"the perspective derivatives need t > 0 (got t={t})")
    if y < 0:
        raise DomainError(f"the perspective derivatives need y >= 0 (got y={y})")

    denominator = t + gamma * y
    root_t = np.sqrt(t)

    g = np.array([
        -np.log1p(gamma * y / t) + gamma * y / denominator,
        -gamma * t / denominator,
    ])
    v = np.array([
        gamma * y / (root_t * denominator),
        -gamma * root_t / denominator,
    ])

    return g, v


def perspective_hessian(gamma: float, t: float, y: float) -> npt.NDArray[np.float64]:
    """The analytic 2x2 Hessian of the logarithmic perspective, computed entry by entry"""
    if t <= 0:
        raise DomainError(f"the perspective derivatives need t > 0 (got t={t})")

    denominator = t + gamma * y
    return np.array([
        [gamma**2 * y**2 / (t * denominator**2), -(gamma**2) * y / denominator**2],
        [-(gamma**2) * y / denominator**2, gamma**2 * t / denominator**2],
    ])
