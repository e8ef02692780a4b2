"""Billiard maps on closed convex curves.

inner area: ``P_{k+1}`` is the second point where the line through
``P_{k-1}`` parallel to the tangent at ``P_k`` meets the table.
perimeter: ordinary reflection in the tangent line.
outer area: an exterior point is reflected through a tangency point.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .curves import Curve, circular_distance, cross, dot, norm, unit, vec
from .errors import DegenerateStepError, DomainError, InsufficientDataError

MAPS = ("inner-area", "perimeter", "outer-area")
CLOSURE_TOL = 1e-8


@dataclass(frozen=True)
class BilliardState:
    prev: float
    curr: float


@dataclass
class BilliardOrbit:
    points: np.ndarray              # parameters (inner maps) or exterior points (outer map)
    closed: bool
    period: Optional[int]
    winding: Optional[int]
    closure_residual: float
    kind: str = "inner-area"
    xy: Optional[np.ndarray] = None
    unwrapped: Optional[np.ndarray] = None
    stopped: Optional[str] = None   # diagnostic when a degenerate step ended the orbit


def _require_closed(curve: Curve):
    if curve.period is None:
        raise DomainError("billiard tables must be closed curves")


def _polish(curve: Curve, p, d, t: float, iters: int = 4) -> float:
    """A few Newton steps on ``cross(d, C(t) - p) = 0``."""
    f = float(cross(d, curve.eval(t) - p))
    for _ in range(iters):
        df = float(cross(d, curve.derivative(t, 1)))
        if df == 0.0:
            break
        tn = t - f / df
        fn = float(cross(d, curve.eval(tn) - p))
        if abs(fn) >= abs(f):
            break
        t, f = tn, fn
    return float(curve.wrap(t))


def _second_intersection(curve: Curve, p, d, t_self: float, samples: int = 64) -> float:
    """The root of ``cross(d, C(t) - p)`` other than ``t_self`` on a convex table.

    Convexity leaves exactly two roots, so the sign just after ``t_self``
    persists until the wanted root; the first sample with the opposite sign
    brackets it.
    """
    per = curve.period
    f = lambda t: cross(d, curve.eval(t) - p)
    slope = float(cross(d, curve.derivative(t_self, 1)))
    scale = float(norm(d) * norm(curve.derivative(t_self, 1)))
    if abs(slope) < 1e-12 * scale:
        raise DegenerateStepError("line is tangent to the table (single intersection)")
    s0 = math.copysign(1.0, slope)
    ts = t_self + per * np.arange(1, samples) / samples
    fs = f(ts)
    flip = np.flatnonzero(s0 * fs <= 0)
    if flip.size == 0:
        # root beyond the last sample, where f still has the starting sign
        a, b = ts[-1], t_self + per * (1 - 1e-9)
    elif flip[0] == 0:
        a, b = t_self + per * 1e-9, ts[0]
    else:
        a, b = ts[flip[0] - 1], ts[flip[0]]
    fa, fb = float(f(a)), float(f(b))
    if np.sign(fa) * np.sign(fb) > 0:
        raise DegenerateStepError("could not bracket the second intersection")
    t = a if fa == 0 else (b if fb == 0 else brentq(lambda x: float(f(x)), a, b, xtol=1e-15))
    t = _polish(curve, p, d, float(t))
    if float(circular_distance(t, t_self, per)) < 1e-12:
        raise DegenerateStepError("second intersection coincides with the first")
    return t


def inner_area_step(curve: Curve, state: BilliardState) -> BilliardState:
    _require_closed(curve)
    if float(circular_distance(state.prev, state.curr, curve.period)) < 1e-12:
        raise DegenerateStepError("prev and curr coincide")
    p = curve.eval(state.prev)
    d = curve.derivative(state.curr, 1)
    return BilliardState(state.curr, _second_intersection(curve, p, d, state.prev))


def perimeter_step(curve: Curve, state: BilliardState) -> BilliardState:
    _require_closed(curve)
    p0, p1 = curve.eval(state.prev), curve.eval(state.curr)
    v = p1 - p0
    if float(norm(v)) < 1e-12:
        raise DegenerateStepError("incoming chord has zero length")
    T = unit(curve.derivative(state.curr, 1))
    r = 2.0 * float(dot(v, T)) * T - v
    if abs(float(cross(unit(r), T))) < 1e-12:
        raise DegenerateStepError("reflected ray grazes the table")
    return BilliardState(state.curr, _second_intersection(curve, p1, r, state.curr))


def tangency_points(curve: Curve, p, samples: int = 512) -> list:
    """Parameters of the points ``Q`` whose tangent line passes through ``p``."""
    _require_closed(curve)
    p = vec(p)
    lo, hi = curve.sample_range()
    f = lambda t: cross(curve.derivative(t, 1), curve.eval(t) - p)
    ts = np.linspace(lo, hi, samples, endpoint=False)
    fs = f(ts)
    tn = np.r_[ts[1:], hi]
    fn = np.r_[fs[1:], fs[0]]
    out = []
    for a, b, fa, fb in zip(ts, tn, fs, fn):
        if fa == 0.0:
            out.append(float(a))
        elif np.sign(fa) * np.sign(fb) < 0:
            out.append(float(brentq(lambda t: float(f(t)), a, b, xtol=1e-15)))
    return [float(curve.wrap(t)) for t in out]


def _inside(curve: Curve, p) -> bool:
    """Winding test against the sampled table."""
    pts = curve.sample(1024) - vec(p)
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    turn = np.diff(np.r_[ang, ang[0]])
    turn = (turn + math.pi) % (2 * math.pi) - math.pi
    return abs(float(np.sum(turn))) > math.pi


def outer_area_step(curve: Curve, p, branch: str = "right") -> np.ndarray:
    """``2Q - P`` for the tangency point ``Q``; ``right`` is the one clockwise as seen from ``P``."""
    if branch not in ("left", "right"):
        raise ValueError("branch must be 'left' or 'right'")
    p = vec(p)
    if _inside(curve, p):
        raise DomainError("point is not outside the table")
    roots = tangency_points(curve, p)
    if len(roots) != 2:
        raise DomainError(f"expected two tangency points, found {len(roots)}")
    q1, q2 = (curve.eval(t) for t in roots)
    # q1 is clockwise from q2 as seen from p when cross(q1 - p, q2 - p) > 0
    right_is_1 = float(cross(q1 - p, q2 - p)) > 0
    q = q1 if (branch == "right") == right_is_1 else q2
    return 2.0 * q - p


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------

_STEPS = {"inner-area": inner_area_step, "perimeter": perimeter_step}


def _increment(a: float, b: float, period: float) -> float:
    return float((b - a) % period)


def iterate(curve: Curve, kind: str, start, steps: int, branch: str = "right",
            closure_tol: float = CLOSURE_TOL) -> BilliardOrbit:
    """``steps`` map applications from ``start``.

    For inner maps ``start`` is ``(prev, curr)`` and the orbit lists
    ``steps + 2`` parameters.  The period is the smallest ``k`` with the
    state back at the start within ``closure_tol``.
    """
    if kind == "outer-area":
        return _iterate_outer(curve, start, steps, branch, closure_tol)
    if kind not in _STEPS:
        raise ValueError(f"unknown map {kind!r}")
    _require_closed(curve)
    step = _STEPS[kind]
    per = curve.period
    a, b = float(start[0]), float(start[1])
    state = BilliardState(float(curve.wrap(a)), float(curve.wrap(b)))
    ts = [state.prev, state.curr]
    u = [a, a + _increment(a, b, per)]
    period, resid, stopped = None, math.inf, None
    for k in range(1, steps + 1):
        try:
            state = step(curve, state)
        except DegenerateStepError as exc:
            stopped = f"step {k}: {exc}"
            break
        ts.append(state.curr)
        u.append(u[-1] + _increment(ts[-2], ts[-1], per))
        r = max(float(circular_distance(state.prev, ts[0], per)),
                float(circular_distance(state.curr, ts[1], per)))
        if period is None and r < closure_tol:
            period, resid = k, r
    ts = np.array(ts)
    winding = None
    if period is not None:
        winding = int(round((u[period] - u[0]) / per))
    elif stopped is None and len(ts) > 2:
        resid = max(float(circular_distance(ts[-2], ts[0], per)),
                    float(circular_distance(ts[-1], ts[1], per)))
    return BilliardOrbit(ts, period is not None, period, winding, resid, kind,
                         curve.eval(ts), np.array(u), stopped)


def _polar(curve: Curve, p) -> float:
    c = curve.sample(256).mean(axis=0)
    d = vec(p) - c
    return math.atan2(d[1], d[0])


def _iterate_outer(curve, start, steps, branch, closure_tol):
    p0 = vec(start)
    pts = [p0]
    period, resid, stopped = None, math.inf, None
    angle = 0.0
    angles = [0.0]
    for k in range(1, steps + 1):
        try:
            q = outer_area_step(curve, pts[-1], branch)
        except DomainError as exc:
            stopped = f"step {k}: {exc}"
            break
        dth = _polar(curve, q) - _polar(curve, pts[-1])
        angle += (dth + math.pi) % (2 * math.pi) - math.pi
        angles.append(angle)
        pts.append(q)
        r = float(norm(q - p0))
        if period is None and r < closure_tol * max(1.0, float(norm(p0))):
            period, resid = k, r
    pts = np.array(pts)
    winding = int(round(abs(angles[period]) / (2 * math.pi))) if period else None
    if period is None and stopped is None:
        resid = float(norm(pts[-1] - p0))
    return BilliardOrbit(pts, period is not None, period, winding, resid, "outer-area", pts,
                         np.array(angles), stopped)


def closure_residual(curve: Curve, kind: str, start, n: int) -> float:
    o = iterate(curve, kind, start, n)
    if o.stopped:
        return math.inf
    if kind == "outer-area":
        return float(norm(o.points[n] - o.points[0]))
    per = curve.period
    return max(float(circular_distance(o.points[n], o.points[0], per)),
               float(circular_distance(o.points[n + 1], o.points[1], per)))


def _return_map(curve, kind, x, n):
    """Signed closure defect after ``n`` steps (inner maps), or ``None``."""
    o = iterate(curve, kind, x, n + 1)
    if o.stopped:
        return None
    per = curve.period
    d = np.array([o.points[n] - o.points[0], o.points[n + 1] - o.points[1]])
    return (d + per / 2) % per - per / 2, o


def refine_closed(curve: Curve, kind: str, start, n: int, tol: float = 1e-12,
                  max_iters: int = 30, h: float = 1e-7):
    """Newton with a finite-difference Jacobian on the ``n``-step closure defect.

    The Jacobian is singular along orbit families, so steps are least-squares
    minimum-norm.  Returns the refined start.
    """
    x = np.array(start, float)
    out = _return_map(curve, kind, x, n)
    if out is None:
        return x
    f = out[0]
    for _ in range(max_iters):
        if float(np.max(np.abs(f))) < tol:
            break
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            a, b = _return_map(curve, kind, x + e, n), _return_map(curve, kind, x - e, n)
            if a is None or b is None:
                return x
            J[:, j] = (a[0] - b[0]) / (2 * h)
        step = np.linalg.lstsq(J, -f, rcond=1e-10)[0]
        lam = 1.0
        while lam > 1e-4:
            nxt = _return_map(curve, kind, x + lam * step, n)
            if nxt is not None and float(np.max(np.abs(nxt[0]))) < float(np.max(np.abs(f))):
                break
            lam *= 0.5
        else:
            break
        x = x + lam * step
        f = nxt[0]
    return x


def _same_orbit(a: np.ndarray, b: np.ndarray, per: float, tol: float) -> bool:
    sa, sb = np.sort(a % per), np.sort(b % per)
    if len(sa) != len(sb):
        return False
    return all(float(np.max(circular_distance(np.roll(sa, k), sb, per))) < tol for k in range(len(sa)))


def find_closed_orbits(curve: Curve, kind: str, n: int, w: int, grid: int = 24,
                       step_grid: Optional[int] = None, tol: float = CLOSURE_TOL) -> list:
    """Closed inner-map orbits of period ``n`` and winding ``w``.

    For every start ``t0`` on a grid the first step ``d`` is solved from
    ``(unwrapped t_n) - t0 = w * period`` with a bracketing root finder, then
    both starting parameters are polished on the closure defect.  Orbits whose
    vertex sets coincide are merged.
    """
    if kind not in _STEPS:
        raise ValueError("closed-orbit search supports the inner-area and perimeter maps")
    if n < (3 if kind == "inner-area" else 2):
        raise ValueError("period too small for this map")
    _require_closed(curve)
    per = curve.period
    m = step_grid or max(96, 12 * n)
    target = w * per
    found = []
    for t0 in np.linspace(0.0, per, grid, endpoint=False):

        def F(d):
            o = iterate(curve, kind, (t0, t0 + d), n - 1, closure_tol=0.0)
            if o.stopped:
                return math.nan
            return float(o.unwrapped[n] - o.unwrapped[0] - target)

        ds = np.linspace(0.0, per, m + 1)[1:-1]
        Fs = np.array([F(d) for d in ds])
        for j in range(len(ds) - 1):
            fa, fb = Fs[j], Fs[j + 1]
            if not (np.isfinite(fa) and np.isfinite(fb)) or np.sign(fa) * np.sign(fb) > 0 or abs(fa - fb) > per / 2:
                continue
            d = ds[j] if fa == 0 else float(brentq(F, ds[j], ds[j + 1], xtol=1e-14))
            x = refine_closed(curve, kind, (t0, t0 + d), n)
            orbit = iterate(curve, kind, x, n, closure_tol=tol)
            if not orbit.closed or orbit.period != n or orbit.winding != w:
                continue
            orbit.points = orbit.points[:n]
            orbit.xy = orbit.xy[:n]
            if not any(_same_orbit(orbit.points, o.points, per, 1e-6) for o in found):
                found.append(orbit)
    return found


# ---------------------------------------------------------------------------
# Caustics
# ---------------------------------------------------------------------------

def orbit_chords(curve: Curve, orbit: BilliardOrbit) -> np.ndarray:
    """Chords ``P_{k-1} P_{k+1}``, i.e. the lines parallel to the tangent at ``P_k``."""
    P = curve.eval(orbit.points) if orbit.xy is None else orbit.xy
    return np.stack([P[:-2], P[2:]], axis=1)


@dataclass
class ConicFit:
    dual: np.ndarray            # 3x3, normalized so the last entry is -1
    center: np.ndarray
    shape: np.ndarray           # S with ellipse = center + S^(1/2) * unit disk
    axes: np.ndarray            # semi-axes, descending
    axis_directions: np.ndarray  # columns
    is_ellipse: bool
    residual: float             # max support-function distance to the chords

    def support_distance(self, lines: np.ndarray) -> np.ndarray:
        n, p = lines[:, :2], lines[:, 2]
        h = np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", n, self.shape, n), 0.0))
        return np.abs(np.abs(p - n @ self.center) - h)


@dataclass
class CausticEnvelope:
    intersections: np.ndarray   # consecutive-chord meets
    tangency: np.ndarray        # touching points on the fitted conic
    fit: ConicFit


def _normal_form(chords: np.ndarray) -> np.ndarray:
    """Lines ``n . x = p`` with unit ``n`` as rows ``(n_x, n_y, p)``."""
    a, b = chords[:, 0], chords[:, 1]
    d = b - a
    L = norm(d)
    if np.any(L < 1e-14):
        raise InsufficientDataError("degenerate chord")
    n = np.stack([-d[:, 1], d[:, 0]], axis=1) / L[:, None]
    return np.column_stack([n, np.sum(n * a, axis=1)])


def fit_dual_conic(lines: np.ndarray) -> ConicFit:
    """Least-squares dual conic ``l^T C* l = 0`` over homogeneous lines ``(n, -p)``."""
    l = np.column_stack([lines[:, 0], lines[:, 1], -lines[:, 2]])
    x, y, z = l.T
    M = np.column_stack([x * x, 2 * x * y, y * y, 2 * x * z, 2 * y * z, z * z])
    scale = np.max(np.abs(M), axis=0)
    scale[scale == 0] = 1.0
    _, sv, Vt = np.linalg.svd(M / scale, full_matrices=False)
    if len(sv) < 6 or sv[-2] < 1e-9 * sv[0]:
        raise InsufficientDataError("chords do not determine a conic")
    c = Vt[-1] / scale
    C = np.array([[c[0], c[1], c[3]], [c[1], c[2], c[4]], [c[3], c[4], c[5]]])
    if abs(C[2, 2]) < 1e-300:
        raise InsufficientDataError("fitted conic is a parabola or degenerate")
    C = -C / C[2, 2]
    center = -C[:2, 2]
    S = C[:2, :2] + np.outer(center, center)
    S = 0.5 * (S + S.T)
    ev, vecs = np.linalg.eigh(S)
    is_ell = bool(np.all(ev > 0))
    order = np.argsort(ev)[::-1]
    axes = np.sqrt(np.abs(ev[order]))
    fit = ConicFit(C, center, S, axes, vecs[:, order], is_ell, math.nan)
    fit.residual = float(np.max(fit.support_distance(lines)))
    return fit


def caustic_envelope(chords, min_chords: int = 50) -> CausticEnvelope:
    chords = np.asarray(chords, float).reshape(-1, 2, 2)
    if len(chords) < min_chords:
        raise InsufficientDataError(f"need at least {min_chords} chords, got {len(chords)}")
    lines = _normal_form(chords)
    distinct = np.unique(np.round(lines, 9), axis=0)
    if len(distinct) < 6:
        raise InsufficientDataError(f"only {len(distinct)} distinct chords (closed orbit?)")
    pts = []
    for l1, l2 in zip(lines[:-1], lines[1:]):
        A = np.array([l1[:2], l2[:2]])
        if abs(np.linalg.det(A)) > 1e-12:
            pts.append(np.linalg.solve(A, [l1[2], l2[2]]))
    fit = fit_dual_conic(lines)
    h = np.column_stack([lines[:, 0], lines[:, 1], -lines[:, 2]]) @ fit.dual.T
    tang = h[:, :2] / h[:, 2:3]
    return CausticEnvelope(np.array(pts), tang, fit)


def orbit_csv(curve: Curve, orbit: BilliardOrbit) -> str:
    """Rows ``step, t, x, y``; ``t`` is empty for the outer map."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "t", "x", "y"])
    for k, xy in enumerate(orbit.xy):
        t = "" if orbit.kind == "outer-area" else f"{float(orbit.points[k]):.12g}"
        w.writerow([k, t, f"{float(xy[0]):.12g}", f"{float(xy[1]):.12g}"])
    return buf.getvalue()
