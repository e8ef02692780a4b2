import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from slidearea.curves import Circle, Line, Point
from slidearea.render import INDEX_COLORS, Scene, clip_line, index_color, render_svg
from slidearea.solver import SolverSettings, find_critical

SVG = "{http://www.w3.org/2000/svg}"


def _viewbox(text):
    root = ET.fromstring(text.split("\n", 1)[1])
    return root, [float(v) for v in root.attrib["viewBox"].split()]


def test_unit_circle_scene():
    text = render_svg(Scene().add_curve(Circle((0, 0), 1.0)))
    root, (x, y, w, h) = _viewbox(text)
    assert len(root.findall(f"{SVG}path")) == 1
    assert x == pytest.approx(-1.1, abs=1e-3) and y == pytest.approx(-1.1, abs=1e-3)
    assert w == pytest.approx(2.2, abs=1e-3) and h == pytest.approx(2.2, abs=1e-3)


def test_render_is_deterministic():
    def build():
        s = Scene().add_curve(Circle((0.1, 0.2), 1.3))
        s.add_polygon([[0, 0], [1, 0], [0, 1]], stroke="red").add_marker((0.5, 0.5)).add_label((0, 0), "a<b")
        s.add_line((0, 0), (1, 1))
        return render_svg(s)
    a, b = build(), build()
    assert a == b
    root, _ = _viewbox(a)
    assert root.find(f"{SVG}text").text == "a<b"


def test_empty_scene_rejected():
    with pytest.raises(ValueError):
        render_svg(Scene())


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        render_svg(Scene(viewbox=(-1, -1, 1, 1)).add_polyline([[0, 0], [np.nan, 1]]))


def test_six_decimal_coordinates():
    text = render_svg(Scene().add_polygon([[0, 0], [1 / 3, 0], [0, 2 / 3]]))
    assert "0.333333" in text and "-0.666667" in text


def test_clip_line():
    seg = clip_line((0, 0), (1, 1), (-1, -2, 2, 1))
    assert np.allclose(seg, [[-1, -1], [1, 1]])
    assert clip_line((5, 5), (1, 0), (-1, -1, 1, 1)) is None
    seg = clip_line((0, 0.5), (1, 0), (-1, -1, 1, 1))
    assert np.allclose(seg, [[-1, 0.5], [1, 0.5]])


def test_index_colors():
    assert [index_color(i) for i in range(4)] == ["blue", "green", "orange", "red"]
    assert index_color(1, degenerate=True) == "black" and index_color(None) == "black"
    assert set(INDEX_COLORS) == {0, 1, 2, 3}


def test_point_and_line_curves():
    s = Scene(viewbox=(-2, -2, 2, 2)).add_curve(Point((0.5, 0.5))).add_curve(Line((0, 0), (1, 0)))
    root, _ = _viewbox(render_svg(s))
    assert len(root.findall(f"{SVG}circle")) == 1 and len(root.findall(f"{SVG}line")) == 1


def test_critical_triangle_with_tangents():
    curves = (Circle((0, 0), 1.0),) * 3
    cps = find_critical(curves, SolverSettings(starts=16, gauge="fix_first_parameter"))
    s = Scene()
    for c in curves[:1]:
        s.add_curve(c, stroke="gray")
    for cp in cps:
        s.add_critical(cp, tangents=True)
    root, _ = _viewbox(render_svg(s))
    lines = root.findall(f"{SVG}line")
    assert len(lines) == 3 * len(cps)
    # each tangent is parallel to the opposite side of the equilateral triangle
    for cp in cps:
        P = cp.config.points()
        for i in range(3):
            T = curves[i].derivative(cp.t[i], 1)
            side = P[(i + 1) % 3] - P[(i - 1) % 3]
            assert abs(T[0] * side[1] - T[1] * side[0]) < 1e-8
