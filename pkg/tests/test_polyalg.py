import cmath
import math

import numpy as np
import pytest

from lib.polyalg import (
    ConfigPoint,
    MonicPoly,
    aberth_roots,
    all_roots,
    critical_values,
    matching_order,
    newton_polish,
    poly_from_roots,
    set_distance,
    theta,
)


def test_config_point_defects():
    assert ConfigPoint((1, 2), "V").valid
    assert "vanishes" in ConfigPoint((0j, 2), "V").defect
    assert "collide" in ConfigPoint((1, 1 + 1e-12), "C").defect
    assert ConfigPoint((0j, 1), "C").valid


def test_set_distance_and_matching():
    a = (1 + 0j, 2j, -3)
    b = (-3 + 1e-3, 1, 2j)
    assert set_distance(a, b) == pytest.approx(1e-3)
    assert set_distance(a, b[:2]) == math.inf
    assert matching_order(a, b) == [2, 0, 1]


def test_poly_from_roots_critical_points():
    p = poly_from_roots([1, 2])
    expected = (1 - 1 / math.sqrt(3), 1 + 1 / math.sqrt(3))
    assert set_distance(p.critical_points, expected) < 1e-10
    assert set_distance(p.roots, (0, 1, 2)) < 1e-12


def test_degree_two_critical_value():
    c = 0.3 - 1.1j
    assert MonicPoly((c,)).critical_values[0] == pytest.approx(-(c**2))
    y = 1.5 + 0.5j
    assert theta((y,))[0] == pytest.approx(-(y**2) / 4)


def test_theta_modes_agree():
    p = poly_from_roots([1 + 1j, -2])
    by_roots = theta([1 + 1j, -2], "roots")
    by_crit = theta(p.critical_points, "critical_points")
    assert set_distance(by_roots, by_crit) < 1e-10
    with pytest.raises(ValueError):
        theta([1], "bogus")


def test_all_roots_puts_zero_first():
    p = MonicPoly((1 + 0j, -1 + 0.5j))
    z = all_roots(p)
    assert z[0] == 0
    assert np.max(np.abs(p.evaluate(z))) < 1e-8


def test_aberth_cube_roots_of_unity():
    z = aberth_roots(np.array([-1, 0, 0, 1], dtype=complex))
    expected = [cmath.exp(2j * math.pi * k / 3) for k in range(3)]
    assert set_distance(z, expected) < 1e-10


def test_rotation_keeps_critical_values():
    p = MonicPoly((0.4 + 0.2j, -1.3 + 0.7j))
    for k in range(3):
        assert set_distance(p.rotated(k).critical_values, p.critical_values) < 1e-10


def test_newton_polish_recovers_critical_points():
    p = MonicPoly((0.9 + 0.1j, -0.7 + 1.2j))
    target = np.asarray(p.critical_values)
    start = np.asarray(p.critical_points) + 1e-3
    c, ok, iters = newton_polish(start, target, residual=1e-12)
    assert ok
    assert np.max(np.abs(c - np.asarray(p.critical_points))) < 1e-8
    assert iters >= 1


def test_critical_values_point():
    v = critical_values(poly_from_roots([1, 2]))
    assert v.kind == "V"
    assert v.valid
