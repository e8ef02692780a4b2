"""Parametric plane curves with derivatives up to order three.

Every curve maps a parameter ``t`` (scalar or array) to points of shape
``t.shape + (2,)``.  Circles and ellipses are parametrized by angle and are
periodic; polylines by edge index (``t`` in ``[k, k+1]`` runs along edge
``k``) with breakpoints at the integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    BreakpointError,
    CuspError,
    DomainError,
    SingularParametrizationError,
)

TWO_PI = 2.0 * math.pi
_BREAK_TOL = 1e-12


# ---------------------------------------------------------------------------
# 2-vector helpers (plain numpy arrays of shape (..., 2))
# ---------------------------------------------------------------------------

def vec(x, y=None) -> np.ndarray:
    if y is None:
        return np.asarray(x, dtype=float).reshape(2)
    return np.array([x, y], dtype=float)


def cross(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def dot(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]


def norm(u):
    u = np.asarray(u, dtype=float)
    return np.hypot(u[..., 0], u[..., 1])


def rot90(u) -> np.ndarray:
    """Counterclockwise quarter turn, so that ``cross(u, rot90(u)) = |u|^2``."""
    u = np.asarray(u, dtype=float)
    return np.stack([-u[..., 1], u[..., 0]], axis=-1)


def unit(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    n = norm(u)
    if np.any(n == 0):
        raise SingularParametrizationError("cannot normalize a zero vector")
    return u / n[..., None] if u.ndim > 1 else u / n


def _stack(x, y) -> np.ndarray:
    return np.stack(np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float)), axis=-1)


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def circular_distance(a, b, period):
    """Distance between parameters on a circle of length ``period``."""
    d = np.mod(np.asarray(a, float) - np.asarray(b, float), period)
    return np.minimum(d, period - d)


# ---------------------------------------------------------------------------
# Curve base
# ---------------------------------------------------------------------------

class Curve:
    """Base class.  Subclasses implement ``_eval`` and ``_deriv``."""

    kind = "custom"
    #: length of the parameter circle for closed curves, else None
    period: Optional[float] = None
    #: bounded parameter interval for open curves, else None (unbounded)
    domain: Optional[tuple] = None
    #: interval used for multi-start sampling and display of unbounded curves
    start_range: tuple = (-10.0, 10.0)

    # -- evaluation ---------------------------------------------------------
    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if self.domain is not None and self.period is None:
            lo, hi = self.domain
            if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
                raise DomainError(f"parameter outside [{lo}, {hi}] for {self.kind} curve")
        return t

    def eval(self, t) -> np.ndarray:
        return self._eval(self._check(t))

    __call__ = eval

    def derivative(self, t, order: int = 1) -> np.ndarray:
        if order not in (1, 2, 3):
            raise ValueError("order must be 1, 2 or 3")
        t = self._check(t)
        if self.is_breakpoint(t):
            raise BreakpointError(
                f"t={float(np.ravel(t)[0]):.6g} is a breakpoint; use one_sided_tangents")
        return self._deriv(t, order)

    def d1(self, t):
        return self.derivative(t, 1)

    def d2(self, t):
        return self.derivative(t, 2)

    def d3(self, t):
        return self.derivative(t, 3)

    # -- structure ------------------------------------------------------------
    @property
    def is_point(self) -> bool:
        return False

    @property
    def breakpoints(self) -> np.ndarray:
        return np.empty(0)

    def is_breakpoint(self, t) -> bool:
        bp = self.breakpoints
        if bp.size == 0:
            return False
        t = np.ravel(np.asarray(t, float))
        if self.period is not None:
            d = circular_distance(t[:, None], bp[None, :], self.period)
        else:
            d = np.abs(t[:, None] - bp[None, :])
        return bool(np.any(d < _BREAK_TOL))

    def wrap(self, t):
        """Reduce a parameter to the canonical range ``[0, period)``."""
        if self.period is None:
            return t
        w = np.mod(t, self.period)
        w = np.where(self.period - w < 1e-12, 0.0, w)
        return float(w) if np.ndim(w) == 0 else w

    def sample_range(self) -> tuple:
        if self.period is not None:
            return (0.0, self.period)
        if self.domain is not None:
            return tuple(self.domain)
        return tuple(self.start_range)

    def sample(self, count: int = 512) -> np.ndarray:
        lo, hi = self.sample_range()
        ts = np.linspace(lo, hi, count, endpoint=self.period is None)
        return self.eval(ts)

    # -- transforms -----------------------------------------------------------
    def translated(self, v) -> "Curve":
        return AffineCurve(self, np.eye(2), vec(v))

    def affine(self, matrix, offset=(0.0, 0.0)) -> "Curve":
        return AffineCurve(self, np.asarray(matrix, float), vec(offset))

    def describe(self) -> dict:
        return {"kind": self.kind}


# ---------------------------------------------------------------------------
# Concrete families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Point(Curve):
    """Constant curve."""

    position: np.ndarray
    kind = "point"

    def __post_init__(self):
        object.__setattr__(self, "position", vec(self.position))

    @property
    def is_point(self) -> bool:
        return True

    def _eval(self, t):
        return np.broadcast_to(self.position, np.shape(t) + (2,)).copy()

    def _deriv(self, t, order):
        return np.zeros(np.shape(t) + (2,))

    def sample_range(self):
        return (0.0, 0.0)

    def translated(self, v):
        return Point(self.position + vec(v))

    def describe(self):
        return {"kind": "point", "position": self.position.tolist()}


@dataclass(frozen=True, eq=False)
class Line(Curve):
    base: np.ndarray
    direction: np.ndarray
    start_range: tuple = (-10.0, 10.0)
    kind = "line"

    def __post_init__(self):
        object.__setattr__(self, "base", vec(self.base))
        object.__setattr__(self, "direction", vec(self.direction))
        if norm(self.direction) == 0:
            raise SingularParametrizationError("line direction must be nonzero")

    def _eval(self, t):
        t = np.asarray(t, float)
        return self.base + t[..., None] * self.direction

    def _deriv(self, t, order):
        out = np.zeros(np.shape(t) + (2,))
        if order == 1:
            out[...] = self.direction
        return out

    def translated(self, v):
        return Line(self.base + vec(v), self.direction, self.start_range)

    def describe(self):
        return {"kind": "line", "base": self.base.tolist(), "direction": self.direction.tolist()}


@dataclass(frozen=True, eq=False)
class Circle(Curve):
    """``center + radius * (cos(s t), sin(s t))`` with orientation sign ``s``.

    A negative radius is accepted and describes the same circle traversed
    from the antipodal point; derivatives then scale with the signed radius.
    """

    center: np.ndarray
    radius: float
    orientation: int = 1
    kind = "circle"
    period = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "center", vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius == 0:
            raise SingularParametrizationError("circle radius must be nonzero; use Point")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def _eval(self, t):
        a = self.orientation * np.asarray(t, float)
        return self.center + self.radius * _stack(np.cos(a), np.sin(a))

    def _deriv(self, t, order):
        s = self.orientation
        a = s * np.asarray(t, float)
        c, sn = np.cos(a), np.sin(a)
        r = self.radius
        if order == 1:
            return r * s * _stack(-sn, c)
        if order == 2:
            return -r * _stack(c, sn)
        return r * s * _stack(sn, -c)

    def parameter_of(self, p) -> float:
        d = vec(p) - self.center
        if self.radius < 0:
            d = -d
        return float(self.wrap(self.orientation * math.atan2(d[1], d[0])))

    def translated(self, v):
        return Circle(self.center + vec(v), self.radius, self.orientation)

    def describe(self):
        return {"kind": "circle", "center": self.center.tolist(), "radius": self.radius,
                "orientation": self.orientation}


@dataclass(frozen=True, eq=False)
class Ellipse(Curve):
    """``center + R(rotation) (a cos(s t), b sin(s t))``."""

    center: np.ndarray
    a: float
    b: float
    rotation: float = 0.0
    orientation: int = 1
    kind = "ellipse"
    period = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "center", vec(self.center))
        if self.a <= 0 or self.b <= 0:
            raise ValueError("semi-axes must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    @property
    def frame(self) -> np.ndarray:
        return _rotation(self.rotation)

    def _local(self, t, order):
        s = self.orientation
        x = s * np.asarray(t, float)
        c, sn = np.cos(x), np.sin(x)
        if order == 0:
            return _stack(self.a * c, self.b * sn)
        if order == 1:
            return s * _stack(-self.a * sn, self.b * c)
        if order == 2:
            return _stack(-self.a * c, -self.b * sn)
        return s * _stack(self.a * sn, -self.b * c)

    def _eval(self, t):
        return self.center + self._local(t, 0) @ self.frame.T

    def _deriv(self, t, order):
        return self._local(t, order) @ self.frame.T

    def translated(self, v):
        return Ellipse(self.center + vec(v), self.a, self.b, self.rotation, self.orientation)

    def describe(self):
        return {"kind": "ellipse", "center": self.center.tolist(), "a": self.a, "b": self.b,
                "rotation": self.rotation, "orientation": self.orientation}


@dataclass(frozen=True, eq=False)
class Polyline(Curve):
    """Piecewise linear curve; edge ``k`` is traversed for ``t`` in ``[k, k+1]``."""

    vertices: np.ndarray
    closed: bool = True
    kind = "polyline"

    def __post_init__(self):
        v = np.asarray(self.vertices, float).reshape(-1, 2)
        if len(v) < 2:
            raise ValueError("polyline needs at least two vertices")
        object.__setattr__(self, "vertices", v)
        nxt = np.roll(v, -1, axis=0) if self.closed else v[1:]
        edges = nxt - (v if self.closed else v[:-1])
        if np.any(norm(edges) == 0):
            raise SingularParametrizationError("polyline has a zero-length edge")
        object.__setattr__(self, "_edges", edges)

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def period(self):
        return float(len(self._edges)) if self.closed else None

    @property
    def domain(self):
        return (0.0, float(len(self._edges)))

    @property
    def breakpoints(self):
        m = len(self._edges)
        return np.arange(m, dtype=float) if self.closed else np.arange(1, m, dtype=float)

    def _split(self, t):
        m = len(self._edges)
        t = np.asarray(t, float)
        if self.closed:
            t = np.mod(t, m)
        k = np.clip(np.floor(t).astype(int), 0, m - 1)
        return k, t - k

    def _eval(self, t):
        k, f = self._split(t)
        return self.vertices[k] + f[..., None] * self._edges[k]

    def _deriv(self, t, order):
        k, _ = self._split(t)
        if order == 1:
            return self._edges[k].copy()
        return np.zeros(np.shape(t) + (2,))

    def translated(self, v):
        return Polyline(self.vertices + vec(v), self.closed)

    def describe(self):
        return {"kind": "polyline", "vertices": self.vertices.tolist(), "closed": self.closed}


class Custom(Curve):
    """Curve given by callables; ``d3`` defaults to central differences of ``d2``."""

    kind = "custom"
    FD_STEP = 1e-4

    def __init__(self, eval_fn: Callable, d1_fn: Callable, d2_fn: Callable,
                 d3_fn: Optional[Callable] = None, *, period=None, domain=None,
                 start_range=(-10.0, 10.0)):
        self._fns = (eval_fn, d1_fn, d2_fn, d3_fn)
        self.period = period
        self.domain = domain
        self.start_range = start_range

    @staticmethod
    def _call(fn, t):
        out = np.asarray(fn(t), float)
        if out.shape == np.shape(t) + (2,):
            return out
        flat = np.ravel(t)
        return np.array([np.asarray(fn(float(x)), float) for x in flat]).reshape(np.shape(t) + (2,))

    def _eval(self, t):
        return self._call(self._fns[0], t)

    def _deriv(self, t, order):
        fn = self._fns[order]
        if fn is None:
            h = self.FD_STEP
            d2 = self._fns[2]
            return (self._call(d2, t + h) - self._call(d2, t - h)) / (2 * h)
        return self._call(fn, t)


class PolarCurve(Custom):
    """Star-shaped closed curve ``center + r(theta) (cos theta, sin theta)``.

    ``r(theta) = radius + sum(a cos(k theta) + b sin(k theta))`` over
    ``harmonics`` given as ``(k, a, b)`` triples.
    """

    kind = "polar"

    def __init__(self, center=(0.0, 0.0), radius=1.0, harmonics: Sequence = ()):
        self.center = vec(center)
        self.radius = float(radius)
        self.harmonics = tuple((int(k), float(a), float(b)) for k, a, b in harmonics)
        super().__init__(self._pt, None, None, None, period=TWO_PI)

    def _r(self, th, order):
        th = np.asarray(th, float)
        out = np.full(th.shape, self.radius if order == 0 else 0.0)
        for k, a, b in self.harmonics:
            c, s = np.cos(k * th), np.sin(k * th)
            out = out + (
                (a * c + b * s, k * (-a * s + b * c), -k * k * (a * c + b * s),
                 k ** 3 * (a * s - b * c))[order])
        return out

    def _pt(self, th):
        e = _stack(np.cos(th), np.sin(th))
        return self.center + self._r(th, 0)[..., None] * e

    def _eval(self, t):
        return self._pt(np.asarray(t, float))

    def _deriv(self, t, order):
        th = np.asarray(t, float)
        e = _stack(np.cos(th), np.sin(th))
        f = rot90(e)
        r = [self._r(th, k)[..., None] for k in range(order + 1)]
        if order == 1:
            return r[1] * e + r[0] * f
        if order == 2:
            return (r[2] - r[0]) * e + 2 * r[1] * f
        return (r[3] - 3 * r[1]) * e + (3 * r[2] - r[0]) * f

    def translated(self, v):
        return PolarCurve(self.center + vec(v), self.radius, self.harmonics)

    def describe(self):
        return {"kind": "polar", "center": self.center.tolist(), "radius": self.radius,
                "harmonics": [list(h) for h in self.harmonics]}


class AffineCurve(Curve):
    """Image ``L C(t) + v`` of a curve under an affine map; parameters are kept."""

    def __init__(self, base: Curve, matrix, offset):
        self.base = base
        self.matrix = np.asarray(matrix, float)
        self.offset = vec(offset)
        self.kind = base.kind if np.allclose(self.matrix, np.eye(2)) else "custom"
        self.period = base.period
        self.domain = base.domain
        self.start_range = base.start_range

    @property
    def is_point(self):
        return self.base.is_point

    @property
    def breakpoints(self):
        return self.base.breakpoints

    def _eval(self, t):
        return self.base._eval(t) @ self.matrix.T + self.offset

    def _deriv(self, t, order):
        return self.base._deriv(t, order) @ self.matrix.T

    def translated(self, v):
        return AffineCurve(self.base, self.matrix, self.offset + vec(v))


class Reparametrized(Curve):
    """``C(phi(s))`` for a monotone change of parameter, via the chain rule."""

    def __init__(self, base: Curve, phi: Callable, dphi: Callable, d2phi: Callable,
                 d3phi: Callable, start_range=(-10.0, 10.0)):
        self.base = base
        self._phi = (phi, dphi, d2phi, d3phi)
        self.kind = base.kind
        self.start_range = start_range

    @classmethod
    def linear(cls, base: Curve, t0: float, scale: float) -> "Reparametrized":
        """``t = t0 + scale * s``."""
        zero = lambda s: np.zeros_like(np.asarray(s, float))
        r = cls(base, lambda s: t0 + scale * np.asarray(s, float),
                lambda s: np.full_like(np.asarray(s, float), scale), zero, zero)
        if base.period is not None:
            r.period = base.period / abs(scale)
        return r

    @property
    def is_point(self):
        return self.base.is_point

    def _eval(self, s):
        return self.base.eval(self._phi[0](s))

    def _deriv(self, s, order):
        p, p1, p2, p3 = (f(s) for f in self._phi)
        p1, p2, p3 = (np.asarray(x, float)[..., None] for x in (p1, p2, p3))
        c1 = self.base.derivative(p, 1)
        if order == 1:
            return c1 * p1
        c2 = self.base.derivative(p, 2)
        if order == 2:
            return c2 * p1 ** 2 + c1 * p2
        c3 = self.base.derivative(p, 3)
        return c3 * p1 ** 3 + 3 * c2 * p1 * p2 + c1 * p3


# ---------------------------------------------------------------------------
# Differential geometry
# ---------------------------------------------------------------------------

class CurvatureData(NamedTuple):
    kappa: float
    T: np.ndarray
    N: np.ndarray
    kappa_dot: float


def eval_point(curve: Curve, t) -> np.ndarray:
    return curve.eval(t)


def derivatives(curve: Curve, t, order: int = 1) -> np.ndarray:
    return curve.derivative(t, order)


def curvature_data(curve: Curve, t: float) -> CurvatureData:
    """Signed curvature, unit frame and arc-length derivative of curvature.

    ``N`` is ``T`` turned a quarter counterclockwise, so ``cross(T, N) = 1``
    and ``T' = kappa N`` with respect to arc length.
    """
    v1, v2, v3 = (curve.derivative(t, k) for k in (1, 2, 3))
    speed = float(norm(v1))
    if speed < 1e-12:
        raise SingularParametrizationError(f"|C'| = {speed:.3g} at t={t}")
    c12 = float(cross(v1, v2))
    kappa = c12 / speed ** 3
    # d(kappa)/dt, then divide by ds/dt
    dk_dt = (float(cross(v1, v3)) * speed ** 2 - 3.0 * c12 * float(dot(v1, v2))) / speed ** 5
    T = v1 / speed
    return CurvatureData(kappa, T, rot90(T), dk_dt / speed)


@dataclass(frozen=True)
class TangentCone:
    apex: np.ndarray
    left_tangent: np.ndarray
    right_tangent: np.ndarray

    @property
    def is_smooth(self) -> bool:
        return bool(np.allclose(self.left_tangent, self.right_tangent, atol=1e-12))

    def contains(self, v, tol: float = 1e-12) -> bool:
        """True iff ``v`` is a nonnegative combination of the two tangents."""
        v = vec(v)
        tm, tp = self.left_tangent, self.right_tangent
        det = float(cross(tm, tp))
        if abs(det) < 1e-14:
            return abs(float(cross(tm, v))) <= tol * max(1.0, float(norm(v))) and float(dot(tm, v)) >= -tol
        alpha = float(cross(v, tp)) / det
        beta = float(cross(tm, v)) / det
        return alpha >= -tol and beta >= -tol

    def meets_line(self, v, tol: float = 1e-12) -> bool:
        """True iff the line spanned by ``v`` meets the segment ``[T-, T+]``.

        This is the subdifferential condition ``0 in ch(T-, T+) x v``.
        """
        c1 = float(cross(self.left_tangent, v))
        c2 = float(cross(self.right_tangent, v))
        return c1 * c2 <= 0.0 or min(abs(c1), abs(c2)) <= tol


def one_sided_tangents(curve: Curve, t: float) -> TangentCone:
    apex = curve.eval(t)
    if not curve.is_breakpoint(t):
        T = unit(curve.derivative(t, 1))
        return TangentCone(apex, T, T)
    if not isinstance(curve, Polyline):
        raise BreakpointError("one-sided tangents are only available for polylines")
    m = len(curve.edges)
    k = int(round(float(t))) % m if curve.closed else int(round(float(t)))
    if curve.closed:
        tm, tp = curve.edges[(k - 1) % m], curve.edges[k]
    else:
        tm = curve.edges[max(k - 1, 0)]
        tp = curve.edges[min(k, m - 1)]
    tm, tp = unit(tm), unit(tp)
    if float(norm(tm + tp)) < 1e-12:
        raise CuspError("antipodal one-sided tangents (T- + T+ = 0)")
    return TangentCone(apex, tm, tp)


# ---------------------------------------------------------------------------
# Line intersections
# ---------------------------------------------------------------------------

def _bisect(f, lo, hi, tol):
    """Vectorized bisection on brackets with ``f(lo) * f(hi) <= 0``."""
    flo = f(lo)
    while np.max(hi - lo, initial=0.0) > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = flo * fm <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
    return 0.5 * (lo + hi)


def line_curve_intersections(p, direction, curve: Curve, exclude_near: Optional[float] = None,
                             window: float = 1e-8, samples: int = 256,
                             tol: float = 1e-12) -> list:
    """Sorted parameters where ``curve`` meets the line ``p + s * direction``."""
    p, d = vec(p), vec(direction)
    if norm(d) == 0:
        raise ValueError("direction must be nonzero")
    if isinstance(curve, Line):
        den = float(cross(d, curve.direction))
        if abs(den) < 1e-15:
            return []
        roots = [float(cross(d, p - curve.base)) / den]
    elif curve.is_point:
        return [0.0] if abs(float(cross(d, curve.position - p))) < 1e-12 else []
    else:
        lo, hi = curve.sample_range()
        if curve.period is None and curve.domain is None:
            raise DomainError("intersections need a closed or bounded curve")
        f = lambda t: cross(d, curve.eval(t) - p)
        closed = curve.period is not None
        ts = np.linspace(lo, hi, samples + (0 if closed else 1), endpoint=not closed)
        fs = f(ts)
        t_next = np.r_[ts[1:], hi] if closed else ts[1:]
        f_next = np.r_[fs[1:], fs[0]] if closed else fs[1:]
        t_cur = ts if closed else ts[:-1]
        f_cur = fs if closed else fs[:-1]
        exact = t_cur[f_cur == 0.0]
        # compare signs: the product of two tiny values can underflow to zero
        mask = np.sign(f_cur) * np.sign(f_next) < 0
        roots = list(exact)
        if np.any(mask):
            roots.extend(_bisect(f, t_cur[mask], t_next[mask], tol))
        if not closed and f_next[-1] == 0.0:
            roots.append(hi)
        roots = [float(curve.wrap(r)) for r in roots]
    roots = sorted(roots)
    if exclude_near is not None:
        if curve.period is not None:
            roots = [r for r in roots if circular_distance(r, exclude_near, curve.period) > window]
        else:
            roots = [r for r in roots if abs(r - exclude_near) > window]
    return roots
