"""Morse index of symmetric Hessians: Jacobi eigenvalues and the Sylvester rule."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .area import SymTridiagCorner

MINOR_FLOOR = 1e-12


@dataclass(frozen=True)
class MorseData:
    index: int
    nullity: int
    eigenvalues: tuple
    method: str  # "eigen", "sylvester" or "both"
    eps: Optional[float] = None
    minors: tuple = ()
    agree: bool = True

    @property
    def is_morse(self) -> bool:
        return self.nullity == 0

    @property
    def positives(self) -> int:
        return len(self.eigenvalues) - self.index - self.nullity


def _dense(H) -> np.ndarray:
    if isinstance(H, SymTridiagCorner):
        return H.dense()
    M = np.asarray(H, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("Hessian must be square")
    return M


def jacobi_eigenvalues(M, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below ``tol``."""
    A = np.array(_dense(M), dtype=float)
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    # roundoff floor for large matrices
    target = max(tol, 1e-15 * float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = np.sqrt(max(float(np.sum(A * A) - np.sum(np.diag(A) ** 2)), 0.0))
        if off < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * (abs(A[p, p]) + abs(A[q, q])):
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A))


def default_degeneracy_tol(eigenvalues) -> float:
    ev = np.asarray(eigenvalues, float)
    return 1e-8 * max(float(np.max(np.abs(ev), initial=0.0)), 1.0)


def eigen_index(H, degeneracy_tol: Optional[float] = None) -> MorseData:
    ev = jacobi_eigenvalues(H)
    tol = default_degeneracy_tol(ev) if degeneracy_tol is None else degeneracy_tol
    return MorseData(
        index=int(np.sum(ev < -tol)),
        nullity=int(np.sum(np.abs(ev) <= tol)),
        eigenvalues=tuple(float(x) for x in ev),
        method="eigen",
    )


def leading_minors(H) -> np.ndarray:
    """``det H_1, ..., det H_n``.

    Dense determinants for ``n <= 8``; otherwise the LDL^T pivots without
    pivoting (``det H_k = prod d_1..d_k``), falling back to a dense
    determinant when a pivot vanishes.
    """
    M = _dense(H)
    n = M.shape[0]
    if n <= 8:
        return np.array([np.linalg.det(M[:k, :k]) for k in range(1, n + 1)])
    out = np.empty(n)
    A = M.copy()
    det = 1.0
    for k in range(n):
        d = A[k, k]
        if abs(d) < 1e-300:
            out[k:] = [np.linalg.det(M[:j, :j]) for j in range(k + 1, n + 1)]
            return out
        det *= d
        out[k] = det
        if k + 1 < n:
            l = A[k + 1:, k] / d
            A[k + 1:, k + 1:] -= np.outer(l, A[k, k + 1:])
    return out


def sign_changes(seq) -> int:
    s = np.sign(np.asarray(seq, float))
    return int(np.sum(s[1:] * s[:-1] < 0))


def sylvester_index(H, eps: Optional[float] = None, degeneracy_tol: Optional[float] = None) -> MorseData:
    """Index as the number of sign changes in ``1, det H_1, ..., det H_n``.

    If some minor is (numerically) zero, ``H + eps I`` is used instead, with
    ``eps`` halved from ``1e-6 * |H|`` until every minor clears the floor and
    the count agrees with the eigenvalue index.
    """
    M = _dense(H)
    minors = leading_minors(M)
    if np.all(np.abs(minors) >= MINOR_FLOOR) and eps is None:
        idx = sign_changes(np.r_[1.0, minors])
        return MorseData(index=idx, nullity=0, eigenvalues=(), method="sylvester",
                         minors=tuple(float(x) for x in minors))
    ref = eigen_index(M, degeneracy_tol)
    scale = max(float(np.linalg.norm(M)), 1.0)
    e = 1e-6 * scale if eps is None else float(eps)
    best = None
    for _ in range(21):
        pm = leading_minors(M + e * np.eye(len(M)))
        idx = sign_changes(np.r_[1.0, pm])
        ok = bool(np.all(np.abs(pm) >= MINOR_FLOOR))
        best = MorseData(index=idx, nullity=ref.nullity, eigenvalues=ref.eigenvalues, method="both",
                         eps=e, minors=tuple(float(x) for x in pm), agree=ok and idx == ref.index)
        if best.agree:
            return best
        e *= 0.5
    return best


def classify(H, degeneracy_tol: Optional[float] = None) -> MorseData:
    """Eigenvalue index cross-checked against the Sylvester count."""
    M = _dense(H)
    if M.shape[0] == 0:
        return MorseData(0, 0, (), "both")
    ed = eigen_index(M, degeneracy_tol)
    sd = sylvester_index(M, degeneracy_tol=degeneracy_tol)
    return MorseData(index=ed.index, nullity=ed.nullity, eigenvalues=ed.eigenvalues, method="both",
                     eps=sd.eps, minors=sd.minors, agree=sd.index == ed.index)
