import math

import numpy as np
import pytest

from slidearea import area, deform, special
from slidearea.area import Configuration
from slidearea.curves import Circle, Point
from slidearea.errors import CountMismatchError, PreconditionError
from slidearea.morse import classify
from slidearea.solver import SolverSettings, find_critical

CURVES = (Circle((0.0, 0.0), 1.0), Circle((0.3, 0.1), 2.0), Circle((-0.2, 0.4), 3.0), Point((0.5, -4.0)))


@pytest.fixture(scope="module")
def criticals():
    return [cp for cp in find_critical(CURVES, SolverSettings(starts=128)) if cp.morse.nullity == 0]


def test_zigzag_structure():
    c = Circle((0.0, 0.0), 1.0)
    cfg = special.star_configuration(c, 5, 4 * math.pi / 5, 0.3)
    z = deform.add_zigzag(cfg, 2)
    assert z.n == 7
    assert np.allclose(z.points()[[1, 2, 3, 4]], cfg.points()[[1, 2, 1, 2]])
    assert area.signed_area(z) == pytest.approx(area.signed_area(cfg), abs=1e-12)
    assert np.max(np.abs(area.gradient(z))) < 1e-12


def test_zigzag_hessian_entries(criticals):
    # zigzag at the last vertex: H-bar keeps a_1..a_{n-1}, then 0, 0, a_n
    cp = criticals[0]
    H = area.hessian(cp.config)
    Z = area.hessian(deform.add_zigzag(cp.config, 3))
    n = 4
    assert np.allclose(Z.a, np.r_[H.a[:n - 1], 0.0, 0.0, H.a[n - 1]], atol=1e-10)
    # couplings (n-1, n), (n, n+1), (n+1, n+2) in one-based numbering
    assert Z.b[n - 1] == pytest.approx(-H.b[n - 2], abs=1e-10)
    assert Z.b[n] == pytest.approx(H.b[n - 2], abs=1e-10)
    assert Z.b[n + 1] == pytest.approx(H.b[n - 1], abs=1e-10)
    Hd, Zd = H.dense(), Z.dense()
    b = H.b[n - 2]
    assert np.linalg.det(Zd) == pytest.approx(-b * b * np.linalg.det(Hd), rel=1e-8)
    assert np.linalg.det(Zd[:n + 1, :n + 1]) == pytest.approx(-b * b * np.linalg.det(Hd[:n - 1, :n - 1]), rel=1e-8)


def test_zigzag_raises_index_by_one(criticals):
    for cp in criticals:
        for at in range(4):
            z = deform.add_zigzag(cp.config, at)
            assert np.max(np.abs(area.gradient(z))) < 1e-10
            m = classify(area.hessian(z).reduced(list(z.free_indices())))
            if at in (1, 2):
                assert (m.index, m.nullity) == (cp.index + 1, 0)
            else:
                # the repeated pair touches the point curve, so b vanishes and the new row is zero
                assert (m.index, m.nullity) == (cp.index, 1)


def test_double_zigzag():
    c = Circle((0.0, 0.0), 1.0)
    cfg = special.star_configuration(c, 5, 2 * math.pi / 5)
    i0 = classify(area.hessian(cfg).dense()).index
    z2 = deform.add_zigzag(deform.add_zigzag(cfg, 4), 6)
    assert np.max(np.abs(area.gradient(z2))) < 1e-12
    assert classify(area.hessian(z2).dense()).index == i0 + 2


def test_tangent_circle_birth(criticals):
    cp = criticals[0]
    for r, shift in ((1e-3, 1), (-1e-3, 0)):
        g = deform.grow_tangent_circle(cp.config, [3], [r])
        assert np.max(np.abs(area.gradient(g))) < 1e-12
        assert area.hessian(g).a[3] == pytest.approx(-r * np.linalg.norm(cp.config.small_diagonals()[3]))
        assert classify(area.hessian(g).dense()).index == cp.index + shift


def test_tangent_circle_zero_radius_is_point(criticals):
    g = deform.grow_tangent_circle(criticals[0].config, [3], [0.0])
    assert g.curves[3].is_point


def test_tangent_circle_requires_point(criticals):
    with pytest.raises(PreconditionError):
        deform.grow_tangent_circle(criticals[0].config, [0], [1e-3])


def test_birth_determinant_expansion(criticals):
    for cp in criticals:
        c1, c2, pred = deform.determinant_fit(cp.config, 3)
        assert c1 == pytest.approx(pred, rel=1e-2)


def test_many_points_grown_at_once():
    rng = np.random.default_rng(11)
    P = rng.normal(size=(5, 2))
    cfg = Configuration(tuple(Point(p) for p in P), np.zeros(5))
    signs = np.array([1, -1, -1, 1, -1])
    s = 1e-3
    g = deform.grow_tangent_circle(cfg, range(5), s * signs)
    assert np.max(np.abs(area.gradient(g))) < 1e-12
    # for small s the leading minors follow a_1 ... a_k, so the index counts the negative a_i
    assert classify(area.hessian(g).dense()).index == int(np.sum(signs > 0))


def test_centered_circle_birth(criticals):
    for cp in criticals[:3]:
        P0 = cp.config.points()
        for r in (1e-2, 1e-3, 1e-4):
            two = deform.grow_centered_circle(cp.config, 3, r)
            assert sorted(x.index for x in two) == [cp.index, cp.index + 1]
            for x in two:
                P = x.config.points()
                assert np.max(np.linalg.norm(P - P0, axis=1)) <= 10 * r
                # tangent to the small circle is parallel to the chord P_{n-1} P_1
                T = x.config.curves[3].derivative(x.t[3], 1)
                chord = P[0] - P[2]
                assert abs(np.cross(np.r_[T, 0], np.r_[chord, 0])[2]) < 1e-8 * np.linalg.norm(T) * np.linalg.norm(chord)


def test_centered_circle_preconditions(criticals):
    cfg = criticals[0].config
    with pytest.raises(PreconditionError):
        deform.grow_centered_circle(cfg, 0, 1e-3)
    with pytest.raises(PreconditionError):
        deform.grow_centered_circle(cfg.with_t(cfg.t + 0.1), 3, 1e-3)
    with pytest.raises(CountMismatchError):
        deform.grow_centered_circle(cfg, 3, 1e-3, ball=1e-6)


def test_morsify_degenerate_family():
    # equal-m circles at m = 2s all coincide with one circle: a rotation family of critical triangles
    tri = np.array([[1.0, 0.0], [-0.5, math.sqrt(3) / 2], [-0.5, -math.sqrt(3) / 2]])
    s = area.signed_area_points(tri)
    f = special.three_circles_frame(tri, [3 * math.sqrt(3) / (2 * s)] * 3)
    curves = f.frame.curves
    dirs = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    rep = deform.morsify_by_translation(curves, dirs, rho=0.2, seed=3, settings=SolverSettings(starts=128))
    assert rep.min_abs_eig_before < 1e-8
    assert rep.after and rep.morse_after


def test_morsify_zero_translation():
    curves = [Circle((0, 0), 1.0), Circle((0.3, 0), 2.0), Circle((0, 0.2), 3.0)]
    rep = deform.morsify_by_translation(curves, [[1, 0], [0, 1], [1, 1]], rho=0.0, solve=False)
    assert all(a is b for a, b in zip(rep.curves, curves))
    with pytest.raises(PreconditionError):
        deform.morsify_by_translation(curves, [[1, 0], [2, 0], [3, 0]], rho=0.1, solve=False)


def test_small_translation_keeps_morse():
    curves = [Circle((0, 0), 1.0), Circle((0.3, 0.1), 2.0), Circle((-0.2, 0.4), 3.0)]
    settings = SolverSettings(starts=128)
    rep = deform.morsify_by_translation(curves, [[1, 0], [0, 1], [1, 1]], rho=1e-3, seed=1, settings=settings)
    assert all(cp.morse.nullity == 0 for cp in rep.before) and rep.morse_after
    assert len(rep.before) == len(rep.after)
