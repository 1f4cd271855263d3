import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from horokit.core import (
    ball_perimeter,
    ball_quermass,
    ball_volume,
    poincare_distance,
    quermass_inverse_radius,
    sphere_measure,
    sinh_power_integral,
)
from horokit.errors import DomainValidationError

from oracles import quad_ball_volume


def test_sphere_measures():
    assert sphere_measure(1) == 2.0 * math.pi
    assert sphere_measure(2) == 4.0 * math.pi
    assert sphere_measure(0) == 2.0
    for i in range(8):
        gamma_form = 2.0 * math.pi ** ((i + 1) / 2) / math.gamma((i + 1) / 2)
        assert sphere_measure(i) == pytest.approx(gamma_form, rel=1e-14)


@pytest.mark.parametrize("n,r", [(2, 1.0), (2, 0.3), (3, 1.0), (4, 0.7), (5, 2.0)])
def test_ball_volume_matches_quadrature(n, r):
    assert ball_volume(n, r) == pytest.approx(quad_ball_volume(n, r), rel=1e-12)


def test_ball_volume_reference_values():
    # closed forms cross-checked against quadrature in the test above
    assert ball_volume(2, 1.0) == pytest.approx(2 * math.pi * (math.cosh(1) - 1), rel=1e-12)
    assert ball_volume(2, 1.0) == pytest.approx(3.4122763, rel=1e-6)
    assert ball_volume(3, 1.0) == pytest.approx(math.pi * (math.sinh(2) - 2), rel=1e-12)
    assert ball_volume(3, 1.0) == pytest.approx(5.1109327, rel=1e-6)


def test_ball_volume_degenerate_limit():
    # volume vanishes like the Euclidean one as r -> 0+
    for r in (1e-3, 1e-5, 1e-7):
        v = ball_volume(2, r)
        assert 0.0 < v < 1.1 * math.pi * r ** 2
    with pytest.raises(DomainValidationError):
        ball_volume(2, 0.0)
    with pytest.raises(DomainValidationError):
        ball_volume(2, -1.0)


def test_ball_perimeter_values_and_derivative():
    assert ball_perimeter(2, 1.0) == pytest.approx(2 * math.pi * math.sinh(1), rel=1e-12)
    assert ball_perimeter(2, 1.0) == pytest.approx(7.3840069, rel=1e-6)
    assert ball_perimeter(3, 1.0) == pytest.approx(4 * math.pi * math.sinh(1) ** 2, rel=1e-12)
    assert ball_perimeter(3, 1.0) == pytest.approx(17.355387, rel=1e-6)
    with pytest.raises(DomainValidationError):
        ball_perimeter(3, -0.5)
    # d/dr volume = perimeter, centered finite differences
    step = 1e-5
    for n in (2, 3, 4, 5):
        for r in (0.3, 1.0, 2.5):
            fd = (ball_volume(n, r + step) - ball_volume(n, r - step)) / (2 * step)
            assert fd == pytest.approx(ball_perimeter(n, r), rel=1e-6)


def test_ball_isoperimetric_identity():
    # P^2 = 4 pi V + V^2 for planar balls
    for r in (0.2, 0.7, 1.0, 2.0):
        v = ball_volume(2, r)
        p = ball_perimeter(2, r)
        assert p * p == pytest.approx(4 * math.pi * v + v * v, rel=1e-12)


def test_ball_quermass_reference_n2():
    qv = ball_quermass(2, 1.0)
    assert qv[0] == pytest.approx(3.4122763, rel=1e-6)
    assert qv[1] == pytest.approx(math.pi * math.sinh(1), rel=1e-12)
    assert qv[1] == pytest.approx(3.6920034, rel=1e-6)
    assert qv[2] == pytest.approx(math.pi, rel=1e-12)


def test_ball_quermass_terminal_convention():
    for n in (2, 3, 4, 5):
        target = sphere_measure(n - 1) / n
        for r in (0.1, 0.5, 1.0, 2.0, 4.0):
            qv = ball_quermass(n, r)
            assert abs(qv[n] - target) <= 1e-10 * target
    assert ball_quermass(3, 1.0)[3] == pytest.approx(4 * math.pi / 3, rel=1e-12)


def test_ball_quermass_monotone_in_radius():
    radii = np.linspace(0.1, 3.0, 12)
    for n in (2, 3, 4):
        rows = np.array([ball_quermass(n, r).w for r in radii])
        for j in range(n):
            assert np.all(np.diff(rows[:, j]) > 0.0)


def test_quermass_inverse_radius_round_trips():
    assert quermass_inverse_radius(2, 1, math.pi * math.sinh(1)) == pytest.approx(1.0, rel=1e-12)
    assert quermass_inverse_radius(2, 0, ball_volume(2, 1.0)) == pytest.approx(1.0, rel=1e-9)
    w2 = ball_quermass(3, 0.7)[2]
    assert quermass_inverse_radius(3, 2, w2) == pytest.approx(0.7, rel=1e-9)
    for n in (2, 3, 4):
        for r in (0.2, 0.9, 1.7):
            qv = ball_quermass(n, r)
            for m in range(n):
                assert quermass_inverse_radius(n, m, qv[m]) == pytest.approx(r, rel=1e-9)
    with pytest.raises(DomainValidationError):
        quermass_inverse_radius(3, 3, 1.0)
    with pytest.raises(DomainValidationError):
        quermass_inverse_radius(3, 0, -2.0)


def test_poincare_distance_basics():
    origin = np.zeros(2)
    assert poincare_distance(origin, origin) == 0.0
    x = np.array([math.tanh(0.5), 0.0])
    assert poincare_distance(origin, x) == pytest.approx(1.0, rel=1e-14)
    y = np.array([0.3, -0.4])
    assert poincare_distance(x, y) == pytest.approx(poincare_distance(y, x), rel=1e-15)
    with pytest.raises(DomainValidationError):
        poincare_distance(np.array([1.0, 0.0]), origin)


_coords = st.floats(min_value=-0.69, max_value=0.69)


@settings(max_examples=60, deadline=None)
@given(_coords, _coords, _coords, _coords, _coords, _coords)
def test_poincare_triangle_inequality(ax, ay, bx, by, cx, cy):
    a = np.array([ax, ay])
    b = np.array([bx, by])
    c = np.array([cx, cy])
    dab = poincare_distance(a, b)
    dbc = poincare_distance(b, c)
    dac = poincare_distance(a, c)
    assert dac <= dab + dbc + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.floats(min_value=0.05, max_value=5.0))
def test_sinh_power_integral_positive_and_increasing(m, r):
    val = float(sinh_power_integral(m, r))
    assert val > 0.0
    assert float(sinh_power_integral(m, r + 0.1)) > val
