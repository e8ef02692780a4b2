"""Problem modifications with predicted index changes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import area
from .area import Configuration
from .curves import Circle, Curve, Point, cross, norm, rot90, unit, vec
from .errors import CountMismatchError, PreconditionError
from .morse import classify
from .solver import CriticalPolygon, SolverSettings, find_critical, make_critical, refine


def add_zigzag(config: Configuration, at: int) -> Configuration:
    """Insert the pair ``P_{i-1} P_i`` right after ``P_i`` (``i = at``).

    The new polygon is ``... P_{i-1} P_i P_{i-1} P_i P_{i+1} ...``; its area
    is unchanged and criticality is preserved.
    """
    n = config.n
    i = at % n
    prev = (i - 1) % n
    curves = list(config.curves)
    t = list(config.t)
    curves[i + 1:i + 1] = [config.curves[prev], config.curves[i]]
    t[i + 1:i + 1] = [config.t[prev], config.t[i]]
    return Configuration(tuple(curves), np.array(t))


# ---------------------------------------------------------------------------
# Tangent circles at point curves
# ---------------------------------------------------------------------------

def tangent_circle(config: Configuration, i: int, radius: float) -> tuple:
    """Circle touching the line through ``P_i`` parallel to ``P_{i-1}P_{i+1}``.

    The center is ``P_i + r n`` where ``n`` is the left normal of the small
    diagonal; the returned parameter puts the circle at ``P_i`` with
    ``C' = r u`` (``u`` the unit small diagonal).  ``radius = 0`` returns the
    point curve.
    """
    P = config.points()
    if radius == 0:
        return Point(P[i]), 0.0
    D = config.small_diagonals()[i]
    if float(norm(D)) < 1e-14:
        raise PreconditionError(f"small diagonal at vertex {i} vanishes")
    nl = rot90(unit(D))
    c = Circle(P[i] + radius * nl, radius, 1)
    return c, float(c.wrap(math.atan2(-nl[1], -nl[0])))


def grow_tangent_circle(config: Configuration, at: Sequence[int], radii: Sequence[float]) -> Configuration:
    """Replace the point curves at ``at`` by tangent circles of signed ``radii``.

    ``a_i = -r l_i`` for the new vertex, so a circle whose center lies left
    of the oriented small diagonal adds one to the index for small ``r``.
    """
    curves = list(config.curves)
    t = config.t.copy()
    for i, r in zip(at, radii):
        if not config.curves[i].is_point:
            raise PreconditionError(f"vertex {i} is not on a point curve")
        curves[i], t[i] = tangent_circle(config, i, float(r))
    return Configuration(tuple(curves), t)


def default_radius(config: Configuration) -> float:
    P = config.points()
    d = norm(P[:, None, :] - P[None, :, :])
    d = d[~np.eye(len(P), dtype=bool)]
    d = d[d > 0]
    return 1e-3 * float(np.min(d)) if d.size else 1e-3


def determinant_fit(config: Configuration, i: int, radii=(-2e-4, -1e-4, 1e-4, 2e-4)) -> tuple:
    """Least-squares fit of ``det H[r] = c1 r + c2 r^2`` over the given radii.

    Returns ``(c1, c2, predicted_c1)`` with the prediction ``a_i(1) det H_{n-1}``.
    """
    free_before = config.free_indices()
    dets = []
    for r in radii:
        cfg = grow_tangent_circle(config, [i], [r])
        dets.append(np.linalg.det(area.hessian(cfg).reduced(cfg.free_indices())))
    r = np.asarray(radii, float)
    coef = np.linalg.lstsq(np.stack([r, r * r], axis=1), np.array(dets), rcond=None)[0]
    a_unit = -float(norm(config.small_diagonals()[i]))
    H0 = area.hessian(config).reduced(free_before)
    pred = a_unit * (np.linalg.det(H0) if len(free_before) else 1.0)
    return float(coef[0]), float(coef[1]), float(pred)


# ---------------------------------------------------------------------------
# Centered circles
# ---------------------------------------------------------------------------

def _check_transversal(P: np.ndarray, tol: float = 1e-6):
    D = np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)
    Dn = np.roll(D, -1, axis=0)
    s = np.abs(cross(D, Dn)) / np.maximum(norm(D) * norm(Dn), 1e-300)
    bad = np.flatnonzero(s <= tol)
    if bad.size:
        raise PreconditionError(f"small diagonals {bad[0]} and {(bad[0] + 1) % len(P)} are not transversal")


def grow_centered_circle(config: Configuration, i: int, radius: Optional[float] = None,
                         angle_starts: int = 32, ball: float = 10.0,
                         settings: Optional[SolverSettings] = None) -> list:
    """Two critical polygons near ``config`` with ``P_i`` on a small circle around it.

    Newton starts at ``angle_starts`` positions on the circle; solutions whose
    vertices all stay within ``ball * radius`` of the original are kept.
    Sorted by index.
    """
    if not config.curves[i].is_point:
        raise PreconditionError(f"vertex {i} is not on a point curve")
    r = default_radius(config) if radius is None else float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")
    P0 = config.points()
    _check_transversal(P0)
    settings = settings or SolverSettings()
    g = area.gradient(config)[config.free_indices()]
    if np.max(np.abs(g), initial=0.0) > 1e-8:
        raise PreconditionError("input configuration is not critical")
    curves = list(config.curves)
    curves[i] = Circle(P0[i], r, 1)
    curves = tuple(curves)
    unknowns = np.array([k for k, c in enumerate(curves) if not c.is_point], dtype=int)
    found = []
    for th in np.linspace(0.0, 2 * math.pi, angle_starts, endpoint=False):
        t = config.t.copy()
        t[i] = th
        cfg, ok = refine(Configuration(curves, t), unknowns, settings)
        if not ok:
            continue
        if np.max(norm(cfg.points() - P0)) > ball * r:
            continue
        cp = make_critical(cfg, unknowns)
        if cp.grad_norm <= settings.newton_tol and all(
                float(norm(cp.config.points()[i] - o.config.points()[i])) > 1e-6 * r for o in found):
            found.append(cp)
    if len(found) != 2:
        raise CountMismatchError(f"expected 2 nearby critical polygons, found {len(found)}")
    return sorted(found, key=lambda c: c.index)


# ---------------------------------------------------------------------------
# Translations
# ---------------------------------------------------------------------------

@dataclass
class MorsifyReport:
    shifts: np.ndarray          # s_i
    curves: tuple               # translated curves C_i + s_i a_i
    before: list
    after: list
    min_abs_eig_before: float
    min_abs_eig_after: float

    @property
    def morse_after(self) -> bool:
        return all(cp.morse.nullity == 0 for cp in self.after)


def _min_abs_eig(criticals) -> float:
    vals = [min(abs(x) for x in cp.morse.eigenvalues) for cp in criticals if cp.morse.eigenvalues]
    return float(min(vals)) if vals else math.inf


def translate_curves(curves: Sequence[Curve], directions, shifts) -> tuple:
    A = np.asarray(directions, float).reshape(-1, 2)
    return tuple(c if s == 0 else c.translated(s * a) for c, a, s in zip(curves, A, shifts))


def morsify_by_translation(curves: Sequence[Curve], directions, rho: float, seed: int = 0,
                           settings: Optional[SolverSettings] = None, solve: bool = True) -> MorsifyReport:
    """Translate ``C_i`` by ``s_i a_i`` with random ``|s| <= rho`` and compare critical sets."""
    curves = tuple(curves)
    A = np.asarray(directions, float).reshape(-1, 2)
    if len(A) != len(curves):
        raise ValueError("one direction per curve")
    if np.linalg.matrix_rank(A, tol=1e-12) < 2:
        raise PreconditionError("directions must span the plane")
    rng = np.random.default_rng(seed)
    s = rng.normal(size=len(curves))
    s *= rho * rng.uniform() ** (1.0 / len(curves)) / max(float(np.linalg.norm(s)), 1e-300)
    moved = translate_curves(curves, A, s)
    before = find_critical(curves, settings) if solve else []
    after = find_critical(moved, settings) if solve else []
    return MorsifyReport(s, moved, before, after, _min_abs_eig(before), _min_abs_eig(after))
