"""Closed-form families: three lines, circle frames, concentric circles, stars, midpoints."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import area
from .area import Configuration
from .curves import (
    TWO_PI,
    Circle,
    Curve,
    Line,
    Point,
    Reparametrized,
    cross,
    curvature_data,
    dot,
    norm,
    rot90,
    unit,
    vec,
)
from .errors import FamilyDegenerateError, UndefinedVertexError
from .morse import MorseData, classify


# ---------------------------------------------------------------------------
# Three lines
# ---------------------------------------------------------------------------

def _meet(l1: Line, l2: Line) -> np.ndarray:
    den = float(cross(l1.direction, l2.direction))
    scale = float(norm(l1.direction) * norm(l2.direction))
    if abs(den) < 1e-12 * scale:
        raise FamilyDegenerateError("parallel lines")
    s = float(cross(l2.base - l1.base, l2.direction)) / den
    return l1.base + s * l1.direction


@dataclass
class ThreeLinesNormalForm:
    """Lines ``C_i(t) = t B_{i-1} + (1 - t) B_i`` through the corners ``B_i = C_i n C_{i+1}``.

    In these coordinates the area is ``(s1 s2 + s2 s3 + s3 s1 + 1/4) A(B)``
    with ``s_i = t_i - 1/2``; the single critical point sits at the edge
    midpoints of the corner triangle.
    """

    corners: np.ndarray
    corner_area: float          # doubled signed area A(B1 B2 B3)
    curves: tuple               # the lines in normal-form parametrization
    critical_t: np.ndarray      # normal-form parameters (1/2, 1/2, 1/2)
    original_t: np.ndarray      # same point in the input parametrization
    morse: MorseData

    COEFFICIENT = 1.0

    def area(self, t) -> float:
        s = np.asarray(t, float) - 0.5
        q = s[0] * s[1] + s[1] * s[2] + s[2] * s[0]
        return float(self.COEFFICIENT * (q + 0.25) * self.corner_area)

    def to_normal(self, lines: Sequence[Line], t) -> np.ndarray:
        """Map input-line parameters to normal-form parameters."""
        out = np.empty(3)
        for i, (ln, ti) in enumerate(zip(lines, t)):
            p = ln.eval(ti)
            nf = self.curves[i]
            out[i] = float(np.dot(p - nf.base, nf.direction) / np.dot(nf.direction, nf.direction))
        return out


def three_lines_normal_form(lines: Sequence[Line]) -> ThreeLinesNormalForm:
    lines = tuple(lines)
    if len(lines) != 3 or not all(isinstance(ln, Line) for ln in lines):
        raise ValueError("expected three Line curves")
    B = np.array([_meet(lines[i], lines[(i + 1) % 3]) for i in range(3)])
    AB = area.signed_area_points(B)
    span = max(float(np.max(norm(B - B.mean(axis=0)))), 1e-300)
    if abs(AB) <= 1e-12 * span ** 2:
        raise FamilyDegenerateError("lines are concurrent")
    nf = tuple(Line(B[i], B[i - 1] - B[i], start_range=(-2.0, 3.0)) for i in range(3))
    crit = np.full(3, 0.5)
    cfg = Configuration(nf, crit)
    morse = classify(area.hessian(cfg))
    P = cfg.points()
    orig = np.array([float(np.dot(P[i] - ln.base, ln.direction) / np.dot(ln.direction, ln.direction))
                     for i, ln in enumerate(lines)])
    return ThreeLinesNormalForm(B, AB, nf, crit, orig, morse)


# ---------------------------------------------------------------------------
# Circles tangent to the diagonal-parallel lines of a polygon
# ---------------------------------------------------------------------------

@dataclass
class CircleFrame:
    """Polygon ``P`` with circles tangent at ``P_i`` to the parallel of ``P_{i-1}P_{i+1}``.

    ``radii[i]`` is signed: the center is ``P_i + r_i n_i`` with ``n_i`` the
    left normal of ``u_i = (P_{i+1} - P_{i-1}) / l_i``.  ``None`` keeps
    ``P_i`` as a point curve.  The polygon is critical for every choice.
    """

    polygon: np.ndarray
    radii: tuple
    centers: np.ndarray
    directions: np.ndarray      # u_i
    lengths: np.ndarray         # l_i = |P_{i+1} - P_{i-1}|
    curves: tuple
    t: np.ndarray

    @property
    def n(self) -> int:
        return len(self.polygon)

    def config(self) -> Configuration:
        return Configuration(self.curves, self.t)

    @property
    def curvatures(self) -> np.ndarray:
        """Signed curvature in the orientation where ``T_i = u_i`` (1/r_i)."""
        return np.array([0.0 if r is None else 1.0 / r for r in self.radii])

    def normalized_config(self, speed: Optional[Sequence[float]] = None) -> Configuration:
        """Same polygon, circles reparametrized with ``C_i' = speed_i * u_i`` at ``P_i``.

        The default speed is ``l_i``.
        """
        speed = self.lengths if speed is None else np.asarray(speed, float)
        curves = []
        for c, ti, u, v in zip(self.curves, self.t, self.directions, speed):
            if c.is_point:
                curves.append(c)
                continue
            d = c.derivative(ti, 1)
            sign = 1.0 if float(np.dot(d, u)) > 0 else -1.0
            curves.append(Reparametrized.linear(c, ti, sign * v / float(norm(d))))
        return Configuration(tuple(curves), np.zeros(self.n))


def tangent_circle_frame(polygon, radii) -> CircleFrame:
    P = np.asarray(polygon, float).reshape(-1, 2)
    n = len(P)
    if n < 3 or len(radii) != n:
        raise ValueError("need n >= 3 vertices and one radius per vertex")
    D = np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)
    L = norm(D)
    if np.any(L < 1e-12) or abs(area.signed_area_points(P)) < 1e-12 * max(float(np.max(L)), 1.0) ** 2:
        raise FamilyDegenerateError("degenerate polygon")
    U = D / L[:, None]
    Nl = rot90(U)
    centers, curves, ts = [], [], []
    for i in range(n):
        r = radii[i]
        if r is None or r == 0:
            centers.append(P[i].copy())
            curves.append(Point(P[i]))
            ts.append(0.0)
            continue
        M = P[i] + r * Nl[i]
        c = Circle(M, abs(r), 1)
        centers.append(M)
        curves.append(c)
        ts.append(c.parameter_of(P[i]))
    radii = tuple(None if (r is None or r == 0) else float(r) for r in radii)
    return CircleFrame(P, radii, np.array(centers), U, L, tuple(curves), np.array(ts))


@dataclass
class ThreeCircleFrame:
    frame: CircleFrame
    m: np.ndarray       # m_i = kappa_i eps_i l_i^3
    s: float            # common off-diagonal = A(P1 P2 P3) = half the area of the tangent-line triangle

    @property
    def triangle(self):
        return self.frame.polygon

    @property
    def centers(self):
        return self.frame.centers

    @property
    def radii(self):
        return self.frame.radii

    def config(self) -> Configuration:
        return self.frame.config()

    def normalized_config(self) -> Configuration:
        return self.frame.normalized_config()

    def form_matrix(self) -> np.ndarray:
        m, s = self.m, self.s
        return np.array([[-m[0], s, s], [s, -m[1], s], [s, s, -m[2]]])

    def determinant(self) -> float:
        return three_circle_determinant(self.m, self.s)

    def tangent_line_triangle(self) -> np.ndarray:
        P, U = self.frame.polygon, self.frame.directions
        out = []
        for i in range(3):
            j = (i + 1) % 3
            out.append(_meet(Line(P[i], U[i]), Line(P[j], U[j])))
        return np.array(out)


def three_circles_frame(triangle, radii_signed) -> ThreeCircleFrame:
    frame = tangent_circle_frame(triangle, radii_signed)
    if frame.n != 3 or any(r is None for r in frame.radii):
        raise ValueError("expected a triangle and three nonzero radii")
    m = frame.lengths ** 3 * frame.curvatures
    s = area.signed_area_points(frame.polygon)
    return ThreeCircleFrame(frame, m, s)


@dataclass
class FourCircleFrame:
    frame: CircleFrame
    m: np.ndarray       # m_i = kappa_i eps_i l_i   (arc-length coordinates)
    s: float            # sin of the angle between consecutive tangents

    def config(self) -> Configuration:
        return self.frame.config()

    def normalized_config(self) -> Configuration:
        return self.frame.normalized_config(np.ones(4))

    def form_matrix(self) -> np.ndarray:
        m, s = self.m, self.s
        return np.array([[-m[0], s, 0, s], [s, -m[1], s, 0], [0, s, -m[2], s], [s, 0, s, -m[3]]])

    def determinant(self) -> float:
        return four_circle_determinant(self.m, self.s)

    def tangent_angles(self) -> np.ndarray:
        """Unsigned angles between consecutive tangents ``u_i, u_{i+1}``."""
        U = self.frame.directions
        Un = np.roll(U, -1, axis=0)
        return np.abs(np.arctan2(cross(U, Un), dot(U, Un)))


def four_circles_frame(quad, radii_signed) -> FourCircleFrame:
    frame = tangent_circle_frame(quad, radii_signed)
    if frame.n != 4 or any(r is None for r in frame.radii):
        raise ValueError("expected a quadrilateral and four nonzero radii")
    m = frame.lengths * frame.curvatures
    s = float(cross(frame.directions[0], frame.directions[1]))
    return FourCircleFrame(frame, m, s)


def three_circle_determinant(m, s) -> float:
    m1, m2, m3 = m
    return -m1 * m2 * m3 + (m1 + m2 + m3) * s ** 2 + 2 * s ** 3


def three_circle_characteristic(lam, m, s) -> float:
    m1, m2, m3 = m
    return -(lam + m1) * (lam + m2) * (lam + m3) + (3 * lam + m1 + m2 + m3) * s ** 2 + 2 * s ** 3


def equal_m_eigenvalues(m: float, s: float) -> np.ndarray:
    """Roots of ``-(lam + m - 2s)(lam + m + s)^2``."""
    return np.sort(np.array([2 * s - m, -s - m, -s - m]))


def four_circle_determinant(m, s) -> float:
    m1, m2, m3, m4 = m
    return m1 * m2 * m3 * m4 - (m1 * m2 + m2 * m3 + m3 * m4 + m4 * m1) * s ** 2


def bifurcation_m3(m1: float, m2: float, s: float) -> float:
    """The ``m3`` at which the three-circle Hessian determinant vanishes."""
    den = m1 * m2 - s * s
    if abs(den) <= 1e-14 * max(abs(m1 * m2), s * s, 1e-300):
        raise FamilyDegenerateError("m1 m2 = s^2: no bifurcation value")
    return (m1 * s * s + m2 * s * s + 2 * s ** 3) / den


def concentric_four_determinant(r) -> float:
    """Reduced Hessian determinant ``-r1 r2 r3 r4 (r4 - r2)(r3 - r1)`` (signed radii)."""
    r1, r2, r3, r4 = r
    return -r1 * r2 * r3 * r4 * (r4 - r2) * (r3 - r1)


# ---------------------------------------------------------------------------
# Concentric circles
# ---------------------------------------------------------------------------

@dataclass
class ConcentricVerdict:
    center: np.ndarray
    inner_products: np.ndarray
    residual: float
    orthocenter_residual: Optional[float] = None
    diagonal_residual: Optional[float] = None
    signed_radii: Optional[np.ndarray] = None
    critical: bool = False


def common_center(curves) -> np.ndarray:
    if not all(isinstance(c, Circle) for c in curves):
        raise FamilyDegenerateError("all curves must be circles")
    c0 = curves[0].center
    for c in curves[1:]:
        if float(norm(c.center - c0)) > 1e-12 * max(1.0, float(norm(c0))):
            raise FamilyDegenerateError("circles are not concentric")
    return c0


def orthocenter(P) -> np.ndarray:
    A, B, C = np.asarray(P, float)
    # altitudes: (X - A) . (B - C) = 0, (X - B) . (C - A) = 0
    M = np.array([B - C, C - A])
    rhs = np.array([np.dot(A, B - C), np.dot(B, C - A)])
    return np.linalg.solve(M, rhs)


def _line_distance(p, q, x) -> float:
    d = q - p
    return abs(float(cross(d, x - p))) / max(float(norm(d)), 1e-300)


def concentric_criterion(config: Configuration, tol: float = 1e-8) -> ConcentricVerdict:
    O = common_center(config.curves)
    p = config.points() - O
    ip = dot(p, np.roll(p, -1, axis=0))
    scale = max(float(np.max(np.abs(ip))), 1.0)
    res = float(np.max(ip) - np.min(ip))
    v = ConcentricVerdict(O, ip, res)
    ok = res <= tol * scale
    if config.n == 3:
        try:
            v.orthocenter_residual = float(norm(orthocenter(p)))
        except np.linalg.LinAlgError:
            v.orthocenter_residual = math.inf
        ok = ok and v.orthocenter_residual <= tol * scale
    elif config.n == 4:
        d1, d2 = p[2] - p[0], p[3] - p[1]
        orth = abs(float(dot(d1, d2))) / max(float(norm(d1) * norm(d2)), 1e-300)
        through = max(_line_distance(p[0], p[2], np.zeros(2)), _line_distance(p[1], p[3], np.zeros(2)))
        v.diagonal_residual = max(orth, through)
        e1 = unit(p[0])
        e2 = rot90(e1)
        v.signed_radii = np.array([dot(p[0], e1), dot(p[1], e2), dot(p[2], e1), dot(p[3], e2)])
        ok = ok and v.diagonal_residual <= tol
    v.critical = bool(ok)
    return v


# ---------------------------------------------------------------------------
# Polygons on one circle
# ---------------------------------------------------------------------------

@dataclass
class StarVerdict:
    angles: np.ndarray          # signed central angles in (-pi, pi]
    critical: bool
    kind: str                   # regular | zigzag | fold | degenerate | none
    winding: int
    coincident: list = field(default_factory=list)


def circle_star_check(config: Configuration, tol: float = 1e-8) -> StarVerdict:
    c0 = config.curves[0]
    if not all(isinstance(c, Circle) for c in config.curves):
        raise FamilyDegenerateError("all vertices must lie on circles")
    for c in config.curves[1:]:
        if float(norm(c.center - c0.center)) > 1e-12 or abs(abs(c.radius) - abs(c0.radius)) > 1e-12:
            raise FamilyDegenerateError("vertices are not on a single circle")
    p = config.points() - c0.center
    q = np.roll(p, -1, axis=0)
    alpha = np.arctan2(cross(p, q), dot(p, q))
    alpha = np.where(alpha <= -math.pi + 1e-15, math.pi, alpha)
    mags = np.abs(alpha)
    mean = float(np.mean(mags))
    coincident = [i for i in range(config.n) if mags[i] < 1e-12]
    winding = int(round(float(np.sum(alpha)) / TWO_PI))
    if mean < 1e-12:
        return StarVerdict(alpha, True, "fold", 0, coincident)
    critical = bool(np.max(np.abs(mags - mean)) <= tol * mean)
    if not critical:
        kind = "none"
    elif abs(mean - math.pi) < 1e-9:
        kind = "degenerate"
    elif np.all(alpha > 0) or np.all(alpha < 0):
        kind = "regular"
    else:
        kind = "zigzag"
    return StarVerdict(alpha, critical, kind, winding, coincident)


def star_configuration(circle: Circle, n: int, step: float, phase: float = 0.0,
                       signs: Optional[Sequence[int]] = None) -> Configuration:
    """Vertices at central angles ``phase + sum(sign_k * step)``."""
    signs = np.ones(n) if signs is None else np.asarray(signs, float)
    ang = phase + np.concatenate([[0.0], np.cumsum(signs[:-1] * step)])
    pts = circle.center + abs(circle.radius) * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    t = np.array([circle.parameter_of(x) for x in pts])
    return Configuration((circle,) * n, t)


# ---------------------------------------------------------------------------
# Tangential sliding
# ---------------------------------------------------------------------------

@dataclass
class MidpointVerdict:
    vertices: np.ndarray
    midpoint_residuals: np.ndarray
    curvatures: np.ndarray
    branches: list              # midpoint | flat | neither
    critical: bool


def midpoint_check(config: Configuration, tol: float = 1e-8, flat_tol: float = 1e-8) -> MidpointVerdict:
    P = area.tangential_vertices(config)
    Q = config.points()
    mids = 0.5 * (np.roll(P, 1, axis=0) + P)
    res = norm(Q - mids)
    kap = np.array([curvature_data(c, t).kappa for c, t in zip(config.curves, config.t)])
    branches = []
    for r, k in zip(res, kap):
        if r < tol:
            branches.append("midpoint")
        elif abs(k) < flat_tol:
            branches.append("flat")
        else:
            branches.append("neither")
    return MidpointVerdict(P, res, kap, branches, all(b != "neither" for b in branches))


def _fd_jacobian(fun, x, h: float = 1e-6) -> np.ndarray:
    J = np.empty((len(x), len(x)))
    for j in range(len(x)):
        e = np.zeros(len(x))
        e[j] = h
        J[:, j] = (fun(x + e) - fun(x - e)) / (2 * h)
    return J


def find_tangential_critical(curves, starts: int = 256, seed: int = 0, tol: float = 1e-10,
                             dedup_tol: float = 1e-6, min_separation: float = 1e-3) -> list:
    """Critical configurations of the tangential area, as parameter arrays.

    Newton on the exact gradient with a central-difference Jacobian from a
    scrambled Halton lattice.  Configurations whose contact points nearly
    coincide (parameter distance below ``min_separation``) are dropped.
    """
    from .solver import newton, param_distance, start_points

    curves = tuple(curves)
    idx = np.arange(len(curves))

    def fun(x):
        return area.tangential_gradient(Configuration(curves, x))

    out = []
    for x0 in start_points(curves, idx, starts, seed):
        try:
            x, ok = newton(fun, lambda x: _fd_jacobian(fun, x), x0, tol)
        except (UndefinedVertexError, np.linalg.LinAlgError):
            continue
        if not ok or not np.all(np.isfinite(x)):
            continue
        x = np.array([c.wrap(v) for c, v in zip(curves, x)])
        if _min_separation(curves, x) < min_separation:
            continue
        if all(param_distance(curves, x, o) > dedup_tol for o in out):
            out.append(x)
    return sorted(out, key=lambda v: tuple(np.round(v, 9)))


def _min_separation(curves, t) -> float:
    from .solver import param_distance

    n = len(t)
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            if curves[i] is curves[j]:
                best = min(best, param_distance([curves[i]], [t[i]], [t[j]]))
    return best
