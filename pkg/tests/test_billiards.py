import csv
import io
import math

import numpy as np
import pytest

from slidearea import billiards as bl
from slidearea.area import Configuration
from slidearea.curves import Circle, Ellipse, Line, circular_distance
from slidearea.errors import DomainError, InsufficientDataError
from slidearea.solver import check_critical_smooth

UNIT = Circle((0.0, 0.0), 1.0)


def test_circle_inner_area_rotates_by_constant_step():
    d = 0.7
    o = bl.iterate(UNIT, "inner-area", (0.2, 0.2 + d), 200)
    steps = np.diff(o.unwrapped)
    assert np.allclose(steps, d, atol=1e-10)
    assert np.allclose(np.linalg.norm(o.xy, axis=1), 1.0, atol=1e-12)
    assert not o.closed


def test_circle_perimeter_rotates_by_constant_step():
    o = bl.iterate(UNIT, "perimeter", (0.0, 1.1), 100)
    assert np.allclose(np.diff(o.unwrapped), 1.1, atol=1e-10)


def test_equilateral_orbit_is_closed():
    o = bl.iterate(UNIT, "inner-area", (0.0, 2 * math.pi / 3), 10)
    assert o.closed and o.period == 3 and o.winding == 1
    assert o.closure_residual < 1e-12


def test_diameter_perimeter_orbit():
    o = bl.iterate(Ellipse((0, 0), 2.0, 1.0), "perimeter", (0.0, math.pi), 6)
    assert o.closed and o.period == 2 and o.winding == 1


def test_inner_map_on_ellipse_preserves_parallel_condition():
    e = Ellipse((0.3, -0.1), 2.0, 1.0, 0.4)
    o = bl.iterate(e, "inner-area", (0.1, 1.3), 50)
    P = o.xy
    for k in range(1, len(P) - 1):
        T = e.derivative(o.points[k], 1)
        chord = P[k + 1] - P[k - 1]
        assert abs(T[0] * chord[1] - T[1] * chord[0]) < 1e-9 * np.linalg.norm(T) * np.linalg.norm(chord)


def test_perimeter_reflection_law():
    e = Ellipse((0.0, 0.0), 1.5, 1.0)
    o = bl.iterate(e, "perimeter", (0.3, 2.0), 30)
    P = o.xy
    for k in range(1, len(P) - 1):
        T = e.derivative(o.points[k], 1)
        T = T / np.linalg.norm(T)
        a, b = P[k - 1] - P[k], P[k + 1] - P[k]
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        # equal angles with the tangent, on opposite sides
        assert a @ T == pytest.approx(-(b @ T), abs=1e-9)


def test_inner_area_map_is_affine_equivariant():
    e = Ellipse((0.0, 0.0), 1.0, 1.0)
    A = np.array([[2.0, 0.5], [0.3, 0.8]])
    b = np.array([1.0, -2.0])
    image = e.affine(A, b)
    o1 = bl.iterate(e, "inner-area", (0.4, 1.5), 40)
    o2 = bl.iterate(image, "inner-area", (0.4, 1.5), 40)
    assert np.allclose(o1.xy @ A.T + b, o2.xy, atol=1e-9)


def test_outer_map_on_circle():
    R = 2.5
    p = np.array([R * math.cos(0.3), R * math.sin(0.3)])
    q = bl.outer_area_step(UNIT, p, "right")
    assert np.linalg.norm(q) == pytest.approx(R, abs=1e-12)
    turn = (math.atan2(q[1], q[0]) - 0.3) % (2 * math.pi)
    assert turn == pytest.approx(2 * math.acos(1 / R), abs=1e-10)
    # the midpoint of p and its image lies on the table with tangent through p
    m = 0.5 * (p + q)
    assert np.linalg.norm(m) == pytest.approx(1.0, abs=1e-12)
    assert abs(m @ (p - m)) < 1e-12
    back = bl.outer_area_step(UNIT, q, "left")
    assert np.allclose(back, p, atol=1e-12)


def test_outer_map_rejects_interior_points():
    with pytest.raises(DomainError):
        bl.outer_area_step(UNIT, (0.2, 0.1))
    o = bl.iterate(UNIT, "outer-area", (0.2, 0.1), 5)
    assert o.stopped and not o.closed


def test_outer_square_orbit_closes():
    R = math.sqrt(2)
    o = bl.iterate(UNIT, "outer-area", (R, 0.0), 10)
    assert o.closed and o.period == 4 and o.winding == 1


def test_open_table_rejected():
    with pytest.raises(DomainError):
        bl.iterate(Line((0, 0), (1, 0)), "inner-area", (0.0, 1.0), 3)


def test_closed_orbits_on_circle():
    orbits = bl.find_closed_orbits(UNIT, "inner-area", 5, 2, grid=4)
    assert orbits
    for o in orbits:
        steps = np.diff(np.r_[o.points, o.points[0]]) % (2 * math.pi)
        assert np.allclose(steps, 4 * math.pi / 5, atol=1e-8)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_ellipse_closed_orbits_are_critical(n):
    e = Ellipse((0.0, 0.0), 2.0, 1.0)
    orbits = bl.find_closed_orbits(e, "inner-area", n, 1, grid=8)
    assert orbits
    for o in orbits:
        assert o.period == n and o.winding == 1
        assert check_critical_smooth(Configuration((e,) * n, o.points)).critical


def test_refine_closed_polishes_a_near_orbit():
    x = bl.refine_closed(UNIT, "inner-area", (0.0, 2 * math.pi / 5 + 1e-4), 5)
    assert bl.closure_residual(UNIT, "inner-area", x, 5) < 1e-11


def test_circle_caustic_radius():
    d = 1.0
    o = bl.iterate(UNIT, "inner-area", (0.0, d), 300)
    env = bl.caustic_envelope(bl.orbit_chords(UNIT, o))
    assert env.fit.is_ellipse
    assert np.allclose(env.fit.axes, math.cos(d), atol=1e-9)
    assert np.allclose(env.fit.center, 0.0, atol=1e-9)
    assert env.fit.residual < 1e-9
    assert np.allclose(np.linalg.norm(env.intersections, axis=1), math.cos(d) / math.cos(d / 2), atol=1e-9)
    assert np.allclose(np.linalg.norm(env.tangency, axis=1), math.cos(d), atol=1e-9)


def test_ellipse_caustic_is_a_conic():
    e = Ellipse((0.2, 0.1), 2.0, 1.0, 0.3)
    o = bl.iterate(e, "inner-area", (0.0, 1.1), 400)
    env = bl.caustic_envelope(bl.orbit_chords(e, o))
    assert env.fit.is_ellipse and env.fit.residual < 1e-6
    assert np.allclose(env.fit.center, [0.2, 0.1], atol=1e-6)


def test_caustic_needs_data():
    o = bl.iterate(UNIT, "inner-area", (0.0, 1.0), 20)
    with pytest.raises(InsufficientDataError):
        bl.caustic_envelope(bl.orbit_chords(UNIT, o))
    closed = bl.iterate(UNIT, "inner-area", (0.0, 2 * math.pi / 3), 100)
    with pytest.raises(InsufficientDataError):
        bl.caustic_envelope(bl.orbit_chords(UNIT, closed))


def test_orbit_csv():
    o = bl.iterate(UNIT, "inner-area", (0.0, 1.0), 3)
    rows = list(csv.reader(io.StringIO(bl.orbit_csv(UNIT, o))))
    assert rows[0] == ["step", "t", "x", "y"]
    assert len(rows) == 1 + len(o.points)
    assert float(rows[2][1]) == pytest.approx(1.0)
    assert float(rows[2][2]) == pytest.approx(math.cos(1.0))


def test_winding_counts_turns():
    o = bl.iterate(UNIT, "inner-area", (0.0, 4 * math.pi / 5), 10)
    assert o.period == 5 and o.winding == 2
    assert float(circular_distance(o.points[5], o.points[0], 2 * math.pi)) < 1e-12
