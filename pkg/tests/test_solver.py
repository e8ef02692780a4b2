import math

import numpy as np
import pytest

from slidearea import area
from slidearea.area import Configuration
from slidearea.curves import Circle, Ellipse, Line, Polyline
from slidearea.solver import (SolverSettings, check_critical_piecewise, check_critical_smooth,
                              find_critical, index_histogram, newton)


def test_settings_validation():
    assert SolverSettings(gauge="fix-first").gauge == "fix_first_parameter"
    with pytest.raises(ValueError):
        SolverSettings(gauge="other")
    with pytest.raises(ValueError):
        SolverSettings(starts=0)
    with pytest.raises(ValueError):
        SolverSettings(newton_tol=-1.0)


def test_newton_on_quadratic():
    x, ok = newton(lambda x: x ** 2 - 2.0, lambda x: np.diag(2 * x), [1.0, 3.0])
    assert ok and np.allclose(x, math.sqrt(2.0))


def test_three_lines_single_critical_point():
    lines = [Line((0, 0), (1, 0)), Line((2, 0), (-1, 1.5)), Line((0, 0.5), (1, 2))]
    cps = find_critical(lines, SolverSettings(starts=32))
    assert len(cps) == 1
    assert cps[0].index == 2 and cps[0].grad_norm <= 1e-10


def test_results_satisfy_gradient_bound():
    curves = [Circle((0, 0), 1.0), Circle((0.2, 0.1), 1.8), Ellipse((0, 0.1), 3.0, 2.2)]
    for cp in find_critical(curves, SolverSettings(starts=128)):
        g = area.gradient(cp.config)
        assert np.max(np.abs(g)) <= 1e-10


def test_rigid_motion_invariance():
    curves = [Circle((0, 0), 1.0), Circle((0.2, 0.1), 1.8), Ellipse((0, 0.1), 3.0, 2.2)]
    R = np.array([[0.6, -0.8], [0.8, 0.6]])
    moved = [c.affine(R, (1.0, -2.0)) for c in curves]
    s = SolverSettings(starts=128)
    a = find_critical(curves, s)
    b = find_critical(moved, s)
    assert len(a) == len(b)
    assert sorted(round(cp.area, 8) for cp in a) == sorted(round(cp.area, 8) for cp in b)


def test_concentric_three_histogram():
    curves = [Circle((0, 0), r) for r in (1.0, 2.0, 3.0)]
    cps = find_critical(curves, SolverSettings(gauge="fix_first_parameter"))
    assert len(cps) == 4 and index_histogram(cps) == {0: 1, 1: 2, 2: 1}
    assert all(cp.t[0] == 0.0 for cp in cps)


def test_deterministic():
    curves = [Circle((0, 0), r) for r in (1.0, 2.0, 3.0)]
    s = SolverSettings(gauge="fix_first_parameter", starts=64)
    a = [cp.t for cp in find_critical(curves, s)]
    b = [cp.t for cp in find_critical(curves, s)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_equilateral_triangle_verdict():
    c = Circle((0, 0), 1.0)
    v = check_critical_smooth(Configuration((c,) * 3, [0, 2 * math.pi / 3, 4 * math.pi / 3]))
    assert v.critical and v.branches == ["parallel"] * 3


def test_zigzag_pentagon_branches():
    c = Circle((0, 0), 1.0)
    a, b, d = 0.0, 2 * math.pi / 3, 4 * math.pi / 3
    v = check_critical_smooth(Configuration((c,) * 5, [a, b, d, b, d]))
    assert v.critical
    assert "coincident" in v.branches and "parallel" in v.branches


def test_perturbed_vertex_is_neither():
    c = Circle((0, 0), 1.0)
    v = check_critical_smooth(Configuration((c,) * 3, [0, 2 * math.pi / 3 + 0.1, 4 * math.pi / 3]))
    assert not v.critical and v.branches[1] == "neither"


def test_piecewise_corner_cone():
    sq = Polyline([[0, 0], [1, 0], [1, 1], [0, 1]])
    cfg = Configuration((sq,) * 3, [0.0, 1.0, 2.5])
    v = check_critical_piecewise(cfg)
    assert v.critical and v.branches[:2] == ["cone", "cone"] and v.branches[2] == "parallel"
    # moving the top vertex off the cone of the first corner
    bad = check_critical_piecewise(Configuration((sq,) * 3, [0.0, 1.5, 2.5]))
    assert not bad.critical


def test_piecewise_equals_smooth_at_smooth_points():
    e = Ellipse((0, 0), 2.0, 1.0)
    cfg = Configuration((e,) * 3, [0.3, 2.2, 4.4])
    a, b = check_critical_smooth(cfg), check_critical_piecewise(cfg)
    assert a.branches == b.branches and np.allclose(a.residuals, b.residuals)
