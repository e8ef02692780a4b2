"""Critical configurations of the signed area.

Multi-start damped Newton on ``gradient = 0`` with the exact Hessian as
Jacobian, deduplication on the parameter torus, and the per-vertex
criticality verdicts for smooth and piecewise smooth curves.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from . import area
from .area import Configuration, SymTridiagCorner
from .curves import Curve, Polyline, circular_distance, cross, norm, one_sided_tangents, unit
from .errors import SlideAreaError
from .morse import MorseData, classify

log = logging.getLogger(__name__)

GAUGES = ("none", "fix_first_parameter")


@dataclass
class SolverSettings:
    starts: int = 512
    newton_tol: float = 1e-10
    max_iters: int = 60
    dedup_tol: float = 1e-6
    gauge: str = "none"
    gauge_value: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.gauge == "fix-first":
            self.gauge = "fix_first_parameter"
        if self.gauge not in GAUGES:
            raise ValueError(f"gauge must be one of {GAUGES}")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if min(self.newton_tol, self.dedup_tol) <= 0 or self.max_iters < 1:
            raise ValueError("tolerances and max_iters must be positive")


@dataclass
class CriticalPolygon:
    config: Configuration
    grad_norm: float
    hessian: SymTridiagCorner
    morse: MorseData
    free: np.ndarray
    degenerate_flags: list = field(default_factory=list)

    @property
    def t(self) -> np.ndarray:
        return self.config.t

    @property
    def index(self) -> int:
        return self.morse.index

    @property
    def area(self) -> float:
        return area.signed_area(self.config)

    def reduced_hessian(self) -> np.ndarray:
        return self.hessian.reduced(self.free)


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------

def newton(fun: Callable, jac: Callable, x0, tol: float = 1e-10, max_iters: int = 60,
           fallback_steps: int = 5):
    """Damped Newton for a square system ``fun(x) = 0``.

    Steps are halved until ``|fun|`` decreases.  When no halving helps, a few
    steepest-descent steps on ``|fun|^2 / 2`` are taken instead.  Returns
    ``(x, converged)``.
    """
    x = np.array(x0, dtype=float)
    try:
        f = np.asarray(fun(x), float)
    except SlideAreaError:
        return x, False
    fn = float(np.max(np.abs(f), initial=0.0))
    for _ in range(max_iters):
        if not np.isfinite(fn):
            return x, False
        if fn <= tol:
            return x, True
        J = np.asarray(jac(x), float)
        step = np.linalg.lstsq(J, -f, rcond=None)[0]
        accepted = False
        lam = 1.0
        for _ in range(30):
            try:
                f_new = np.asarray(fun(x + lam * step), float)
            except SlideAreaError:
                f_new = None
            if f_new is not None and np.all(np.isfinite(f_new)) and \
                    float(np.max(np.abs(f_new))) < fn:
                accepted = True
                break
            lam *= 0.5
        if accepted:
            x = x + lam * step
            f = f_new
            fn = float(np.max(np.abs(f)))
            continue
        # stalled: gradient steps on |f|^2 / 2
        improved = False
        for _ in range(fallback_steps):
            g = J.T @ f
            gn = float(g @ g)
            if gn == 0.0:
                break
            alpha = float(f @ f) / gn
            for _ in range(30):
                try:
                    f_new = np.asarray(fun(x - alpha * g), float)
                except SlideAreaError:
                    f_new = None
                if f_new is not None and np.all(np.isfinite(f_new)) and \
                        float(f_new @ f_new) < float(f @ f):
                    break
                alpha *= 0.5
            else:
                break
            x = x - alpha * g
            f = f_new
            improved = True
            J = np.asarray(jac(x), float)
        fn = float(np.max(np.abs(f)))
        if not improved:
            return x, fn <= tol
    return x, fn <= tol


# ---------------------------------------------------------------------------
# Problem setup
# ---------------------------------------------------------------------------

def _unknowns(curves: Sequence[Curve], settings: SolverSettings) -> np.ndarray:
    free = [i for i, c in enumerate(curves) if not c.is_point]
    if settings.gauge == "fix_first_parameter" and free and free[0] == 0:
        free = free[1:]
    return np.array(free, dtype=int)


def start_points(curves: Sequence[Curve], unknowns, count: int, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points mapped onto each unknown's parameter range."""
    d = len(unknowns)
    if d == 0:
        return np.zeros((1, 0))
    u = qmc.Halton(d=d, scramble=True, seed=seed).random(count)
    lo = np.array([curves[i].sample_range()[0] for i in unknowns])
    hi = np.array([curves[i].sample_range()[1] for i in unknowns])
    return lo + u * (hi - lo)


def _wrap_config(config: Configuration) -> Configuration:
    t = np.array([c.wrap(ti) if not c.is_point else 0.0 for c, ti in zip(config.curves, config.t)])
    return config.with_t(t)


def param_distance(curves: Sequence[Curve], t1, t2) -> float:
    d = 0.0
    for c, a, b in zip(curves, t1, t2):
        if c.is_point:
            continue
        if c.period is not None:
            d = max(d, float(circular_distance(a, b, c.period)))
        else:
            d = max(d, abs(float(a) - float(b)))
    return d


def degeneracy_flags(config: Configuration, morse: MorseData, tol: float = 1e-9) -> list:
    flags = []
    P = config.points()
    scale = max(float(np.max(norm(P - P.mean(axis=0)), initial=0.0)), 1.0)
    lengths = norm(config.small_diagonals())
    for i, L in enumerate(lengths):
        if not config.curves[i].is_point and L < tol * scale:
            flags.append(f"coincident:{i}")
    if morse.nullity:
        flags.append(f"nullity:{morse.nullity}")
    if not morse.agree:
        flags.append("sylvester_mismatch")
    return flags


def make_critical(config: Configuration, free) -> CriticalPolygon:
    config = _wrap_config(config)
    g = area.gradient(config)
    mov = config.free_indices()
    H = area.hessian(config)
    free = np.asarray(free, dtype=int)
    m = classify(H.reduced(free))
    gn = float(np.max(np.abs(g[mov]), initial=0.0))
    return CriticalPolygon(config, gn, H, m, free, degeneracy_flags(config, m))


def refine(config: Configuration, unknowns, settings: Optional[SolverSettings] = None):
    """Newton from ``config`` on the ``unknowns``; returns the config and a flag."""
    settings = settings or SolverSettings()
    unknowns = np.asarray(unknowns, dtype=int)
    base = config.t.copy()

    def full(x):
        t = base.copy()
        t[unknowns] = x
        return config.with_t(t)

    fun = lambda x: area.gradient(full(x))[unknowns]
    jac = lambda x: area.hessian(full(x)).reduced(unknowns)
    x, ok = newton(fun, jac, base[unknowns], settings.newton_tol, settings.max_iters)
    return full(x), ok


def dedup(curves, found: list, tol: float) -> list:
    out = []
    for cp in sorted(found, key=lambda c: tuple(np.round(c.t, 9))):
        if all(param_distance(curves, cp.t, o.t) > tol for o in out):
            out.append(cp)
    return out


def find_critical(curves: Sequence[Curve], settings: Optional[SolverSettings] = None,
                  t_init=None) -> list:
    """All critical polygons reachable from a deterministic lattice of starts."""
    settings = settings or SolverSettings()
    curves = tuple(curves)
    if len(curves) < 3:
        raise ValueError("need at least three curves")
    unknowns = _unknowns(curves, settings)
    base = np.zeros(len(curves)) if t_init is None else np.array(t_init, float)
    if settings.gauge == "fix_first_parameter" and not curves[0].is_point:
        base[0] = settings.gauge_value
    free_hess = unknowns
    found = []
    for x0 in start_points(curves, unknowns, settings.starts, settings.seed):
        t = base.copy()
        t[unknowns] = x0
        cfg, ok = refine(Configuration(curves, t), unknowns, settings)
        if not ok or not np.all(np.isfinite(cfg.t)) or np.max(np.abs(cfg.t), initial=0) > 1e8:
            continue
        cp = make_critical(cfg, free_hess)
        if cp.grad_norm <= settings.newton_tol:
            found.append(cp)
    out = dedup(curves, found, settings.dedup_tol)
    log.debug("find_critical: %d converged starts, %d distinct", len(found), len(out))
    return out


def index_histogram(criticals) -> dict:
    hist = {}
    for cp in criticals:
        hist[cp.index] = hist.get(cp.index, 0) + 1
    return dict(sorted(hist.items()))


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass
class CriticalityVerdict:
    branches: list       # per vertex: coincident | parallel | cone | point | neither
    residuals: np.ndarray
    critical: bool


def _smooth_branch(curve, t, D, tol):
    if curve.is_point:
        return "point", 0.0
    L = float(norm(D))
    if L < tol:
        return "coincident", L
    T = unit(curve.derivative(t, 1))
    r = abs(float(cross(T, D)))
    return ("parallel" if r < tol else "neither"), r


def check_critical_smooth(config: Configuration, tol: float = 1e-8) -> CriticalityVerdict:
    D = config.small_diagonals()
    branches, res = [], []
    for c, t, d in zip(config.curves, config.t, D):
        b, r = _smooth_branch(c, t, d, tol)
        branches.append(b)
        res.append(r)
    return CriticalityVerdict(branches, np.array(res), all(b != "neither" for b in branches))


def check_critical_piecewise(config: Configuration, tol: float = 1e-8) -> CriticalityVerdict:
    """Breakpoint vertices pass when the small diagonal's line meets the tangent cone."""
    D = config.small_diagonals()
    branches, res = [], []
    for c, t, d in zip(config.curves, config.t, D):
        if c.is_breakpoint(t):
            L = float(norm(d))
            if L < tol:
                branches.append("coincident")
                res.append(L)
                continue
            cone = one_sided_tangents(c, t)
            c1, c2 = float(cross(cone.left_tangent, d)), float(cross(cone.right_tangent, d))
            r = 0.0 if c1 * c2 <= 0 else min(abs(c1), abs(c2))
            branches.append("cone" if r < tol else "neither")
            res.append(r)
        else:
            b, r = _smooth_branch(c, t, d, tol)
            branches.append(b)
            res.append(r)
    return CriticalityVerdict(branches, np.array(res), all(b != "neither" for b in branches))
