import math

import numpy as np
import pytest

from enercoop.convex.perspective import perspective_gradient, perspective_hessian, perspective_value
from enercoop.errors import DomainError


@pytest.fixture()
def points() -> list[tuple[float, float, float]]:
    rng = np.random.default_rng(7)
    return [(10 ** rng.uniform(1, 5), rng.uniform(0.05, 1.0), rng.uniform(1e-4, 0.1)) for _ in range(50)]


def test_value():
    assert perspective_value(1.0, 1.0, 1.0) == pytest.approx(-math.log(2.0))
    assert perspective_value(1e4, 0.5, 0.01) == pytest.approx(-0.5 * math.log(1 + 1e4 * 0.01 / 0.5))


def test_value_vanishes_on_the_boundary():
    assert perspective_value(1e4, 0.0, 0.3) == 0.0
    assert perspective_value(1e4, 0.3, 0.0) == 0.0


def test_value_is_elementwise():
    t = np.array([0.0, 0.5, 1.0])
    y = np.array([0.1, 0.1, 0.1])
    values = perspective_value(10.0, t, y)
    assert values.shape == (3,)
    assert values[0] == 0.0
    assert values[2] == pytest.approx(perspective_value(10.0, 1.0, 0.1))


def test_domain():
    with pytest.raises(DomainError):
        perspective_value(1.0, -0.1, 0.5)
    with pytest.raises(DomainError):
        perspective_value(1.0, 0.1, np.array([0.5, -0.5]))
    with pytest.raises(DomainError):
        perspective_gradient(1.0, 0.0, 0.5)
    with pytest.raises(DomainError):
        perspective_hessian(1.0, 0.0, 0.5)


def test_gradient_matches_central_differences(points):
    for gamma, t, y in points:
        g, _ = perspective_gradient(gamma, t, y)
        h_t, h_y = 1e-6 * t, 1e-6 * y
        numeric = [
            (perspective_value(gamma, t + h_t, y) - perspective_value(gamma, t - h_t, y)) / (2 * h_t),
            (perspective_value(gamma, t, y + h_y) - perspective_value(gamma, t, y - h_y)) / (2 * h_y),
        ]
        assert np.max(np.abs(numeric - g)) / max(np.max(np.abs(g)), 1.0) <= 1e-6


def test_hessian_is_rank_one(points):
    for gamma, t, y in points:
        _, v = perspective_gradient(gamma, t, y)
        hessian = perspective_hessian(gamma, t, y)
        assert np.max(np.abs(np.outer(v, v) - hessian)) / np.max(np.abs(hessian)) <= 1e-12
        assert abs(np.linalg.det(hessian)) <= 1e-9 * np.max(np.abs(hessian)) ** 2
        assert np.min(np.linalg.eigvalsh(hessian)) >= -1e-9 * np.max(np.abs(hessian))


def test_hessian_matches_central_differences(points):
    for gamma, t, y in points:
        hessian = perspective_hessian(gamma, t, y)
        h_t, h_y = 1e-5 * t, 1e-5 * y
        numeric = np.column_stack([
            (perspective_gradient(gamma, t + h_t, y)[0] - perspective_gradient(gamma, t - h_t, y)[0]) / (2 * h_t),
            (perspective_gradient(gamma, t, y + h_y)[0] - perspective_gradient(gamma, t, y - h_y)[0]) / (2 * h_y),
        ])
        assert np.max(np.abs(numeric - hessian)) / max(np.max(np.abs(hessian)), 1.0) <= 1e-4


def test_convex_along_segments(points):
    for gamma, t, y in points:
        start, end = np.array([t, y]), np.array([1.0 - t / 2, y / 3])
        middle = (start + end) / 2
        assert perspective_value(gamma, *middle) <= (perspective_value(gamma, *start) + perspective_value(gamma, *end)) / 2 + 1e-12
