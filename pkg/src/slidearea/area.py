"""Signed area of sliding polygons and its derivatives.

All area values follow the doubled convention: ``signed_area`` returns
``sum(P_i x P_{i+1})``, i.e. twice the algebraic area.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .curves import Curve, cross, curvature_data, dot, norm, rot90
from .errors import BreakpointError, NonsmoothError, UndefinedVertexError


@dataclass(frozen=True, eq=False)
class Configuration:
    """Polygon ``P_i = C_i(t_i)``; indices are cyclic mod ``n``.

    ``curves`` holds one curve per vertex; the same curve object may repeat
    (several vertices sliding on one curve).
    """

    curves: tuple
    t: np.ndarray

    def __post_init__(self):
        curves = tuple(self.curves)
        t = np.asarray(self.t, dtype=float).reshape(-1)
        if len(curves) < 3:
            raise ValueError("a configuration needs n >= 3 vertices")
        if len(curves) != len(t):
            raise ValueError("one parameter per curve is required")
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_registry(cls, registry: Mapping | Sequence, items) -> "Configuration":
        """Build from ``(curve_id, t)`` pairs resolved against ``registry``."""
        curves, ts = [], []
        for cid, t in items:
            try:
                curves.append(registry[cid])
            except (KeyError, IndexError, TypeError):
                raise KeyError(f"unknown curve id {cid!r}") from None
            ts.append(t)
        return cls(tuple(curves), np.array(ts, float))

    @property
    def n(self) -> int:
        return len(self.curves)

    def with_t(self, t) -> "Configuration":
        return Configuration(self.curves, t)

    def points(self) -> np.ndarray:
        return np.array([c.eval(ti) for c, ti in zip(self.curves, self.t)])

    def derivs(self, order: int) -> np.ndarray:
        out = np.empty((self.n, 2))
        for i, (c, ti) in enumerate(zip(self.curves, self.t)):
            try:
                out[i] = c.derivative(ti, order)
            except BreakpointError as exc:
                raise NonsmoothError(f"vertex {i} sits at a breakpoint: {exc}") from None
        return out

    def free_indices(self) -> np.ndarray:
        """Indices of vertices whose curve is not a point."""
        return np.array([i for i, c in enumerate(self.curves) if not c.is_point], dtype=int)

    def small_diagonals(self) -> np.ndarray:
        P = self.points()
        return np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)


@dataclass(frozen=True)
class SymTridiagCorner:
    """Corner-tridiagonal symmetric matrix: diagonal ``a``; ``b[i]`` couples ``i`` and ``i+1``."""

    a: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return len(self.a)

    def dense(self) -> np.ndarray:
        n = self.n
        H = np.diag(np.asarray(self.a, float))
        for i in range(n):
            j = (i + 1) % n
            H[i, j] += self.b[i]
            H[j, i] += self.b[i]
        return H

    def reduced(self, keep) -> np.ndarray:
        keep = np.asarray(keep, dtype=int)
        return self.dense()[np.ix_(keep, keep)]


def _as_config(config, t=None) -> Configuration:
    if isinstance(config, Configuration):
        return config if t is None else config.with_t(t)
    return Configuration(tuple(config), t)


def signed_area_points(P) -> float:
    P = np.asarray(P, float)
    return float(np.sum(cross(P, np.roll(P, -1, axis=0))))


def signed_area(config: Configuration) -> float:
    return signed_area_points(config.points())


def gradient(config: Configuration) -> np.ndarray:
    """``dA/dt_i = C_i'(t_i) x (P_{i+1} - P_{i-1})``."""
    return cross(config.derivs(1), config.small_diagonals())


def hessian(config: Configuration) -> SymTridiagCorner:
    """``a_i = C_i'' x (P_{i+1} - P_{i-1})``, ``b_i = C_i' x C_{i+1}'``; exact everywhere."""
    d1 = config.derivs(1)
    a = cross(config.derivs(2), config.small_diagonals())
    b = cross(d1, np.roll(d1, -1, axis=0))
    return SymTridiagCorner(np.asarray(a, float), np.asarray(b, float))


def hessian_matrix(config: Configuration, free=None) -> np.ndarray:
    H = hessian(config)
    if free is None:
        return H.dense()
    return H.reduced(free)


@dataclass(frozen=True)
class ThirdJet:
    """Third partial derivatives of the area in arc-length coordinates.

    ``diag[i]``     = d^3 A / ds_i^3
    ``forward[i]``  = d^3 A / ds_i^2 ds_{i+1}    (= -kappa_i cos alpha_i)
    ``backward[i]`` = d^3 A / ds_i ds_{i+1}^2    (= kappa_{i+1} cos alpha_i)
    Every other third partial is zero.
    """

    diag: np.ndarray
    forward: np.ndarray
    backward: np.ndarray
    kappa: np.ndarray
    kappa_dot: np.ndarray
    eps: np.ndarray
    lengths: np.ndarray
    alpha: np.ndarray
    flags: tuple = ()

    def tensor(self) -> np.ndarray:
        n = len(self.diag)
        T = np.zeros((n, n, n))
        for i in range(n):
            j = (i + 1) % n
            T[i, i, i] = self.diag[i]
            for idx in ((i, i, j), (i, j, i), (j, i, i)):
                T[idx] += self.forward[i]
            for idx in ((i, j, j), (j, i, j), (j, j, i)):
                T[idx] += self.backward[i]
        return T

    def cubic(self, ds) -> float:
        """The cubic Taylor term ``(1/6) sum a_ijk ds_i ds_j ds_k``."""
        ds = np.asarray(ds, float)
        return float(np.einsum("ijk,i,j,k->", self.tensor(), ds, ds, ds) / 6.0)


def third_jet(config: Configuration, coincidence_tol: float = 1e-12) -> ThirdJet:
    n = config.n
    D = config.small_diagonals()
    frames = []
    for c, ti in zip(config.curves, config.t):
        if c.is_point:
            frames.append(None)
        else:
            frames.append(curvature_data(c, ti))
    zero = np.zeros(2)
    T = np.array([f.T if f else zero for f in frames])
    N = np.array([f.N if f else zero for f in frames])
    kap = np.array([f.kappa if f else 0.0 for f in frames])
    kdot = np.array([f.kappa_dot if f else 0.0 for f in frames])
    # arc-length derivatives: C' = T, C'' = kappa N, C''' = kappa_dot N - kappa^2 T
    c2 = kap[:, None] * N
    c3 = kdot[:, None] * N - (kap ** 2)[:, None] * T
    lengths = norm(D)
    flags = []
    eps = np.sign(dot(T, D))
    for i in range(n):
        if lengths[i] < coincidence_tol and frames[i] is not None:
            flags.append(f"zero_diagonal:{i}")
            eps[i] = 0.0
    Tn = np.roll(T, -1, axis=0)
    alpha = np.arctan2(cross(T, Tn), dot(T, Tn))
    return ThirdJet(
        diag=cross(c3, D),
        forward=cross(c2, Tn),
        backward=cross(T, np.roll(c2, -1, axis=0)),
        kappa=kap, kappa_dot=kdot, eps=eps, lengths=lengths, alpha=alpha,
        flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# Tangential sliding
# ---------------------------------------------------------------------------

def _meet_tangents(Q: np.ndarray, V: np.ndarray) -> np.ndarray:
    n = len(Q)
    Qn, Vn = np.roll(Q, -1, axis=0), np.roll(V, -1, axis=0)
    den = cross(V, Vn)
    scale = norm(V) * norm(Vn)
    if np.any(np.abs(den) <= 1e-14 * np.maximum(scale, 1e-300)):
        bad = int(np.argmin(np.abs(den) / np.maximum(scale, 1e-300)))
        raise UndefinedVertexError(f"tangent lines at Q_{bad} and Q_{(bad + 1) % n} are parallel")
    lam = cross(Qn - Q, Vn) / den
    return Q + lam[:, None] * V


def tangential_vertices(config: Configuration) -> np.ndarray:
    """Vertex ``i`` is the meet of the tangent lines at ``Q_i`` and ``Q_{i+1}``."""
    return _meet_tangents(config.points(), config.derivs(1))


def tangential_area(config: Configuration) -> float:
    return signed_area_points(tangential_vertices(config))


def tangential_gradient(config: Configuration) -> np.ndarray:
    """Exact partial derivatives of the tangential area."""
    n = config.n
    Q = config.points()
    V = config.derivs(1)
    W = config.derivs(2)
    P = _meet_tangents(Q, V)
    # dA/dP_j = (P_{j+1} - P_{j-1}) rotated: dA = cross(dP_j, P_{j+1} - P_{j-1})
    diag = np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)
    g = np.zeros(n)
    for i in range(n):
        # P_{i-1} lies on lines i-1 and i; P_i on lines i and i+1.
        # Moving t_i slides each along the other line: dP = lam * C'_other with
        # lam = -cross(C_i'', P - Q_i) / cross(C_i', C'_other).
        for j, other in (((i - 1) % n, (i - 1) % n), (i, (i + 1) % n)):
            lam = -cross(W[i], P[j] - Q[i]) / cross(V[i], V[other])
            g[i] += cross(lam * V[other], diag[j])
    return g
