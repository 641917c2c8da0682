"""Linear algebra on Minkowski 4-space and small real 3x3 operators.

Vectors are plain numpy arrays of length 4 with ``v[0]`` the timelike
coordinate; the metric has signature (-, +, +, +).
"""

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import NullVector, SingularMetric

ETA = np.array([-1.0, 1.0, 1.0, 1.0])


def _levi_civita4():
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


LEVI_CIVITA4 = _levi_civita4()


class CausalClass(enum.Enum):
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"
    NULL = "null"


def vec4(*components) -> np.ndarray:
    if len(components) == 1:
        components = components[0]
    v = np.asarray(components, dtype=float)
    if v.shape != (4,):
        raise ValueError(f"expected 4 components, got shape {v.shape}")
    return v


def inner4(a, b):
    """Minkowski inner product ``-a0*b0 + a1*b1 + a2*b2 + a3*b3`` (broadcasts over leading axes)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.sum(ETA * a * b, axis=-1)


def causal_class(v, tol: Tolerances = DEFAULT) -> CausalClass:
    v = np.asarray(v, dtype=float)
    q = inner4(v, v)
    scale = float(np.dot(v, v))
    if q < -tol.tau_null * scale:
        return CausalClass.TIMELIKE
    if q > tol.tau_null * scale:
        return CausalClass.SPACELIKE
    return CausalClass.NULL


def cross4(a, b, c) -> np.ndarray:
    """Return w with ``inner4(w, d) == det[a; b; c; d]`` for every d.

    Cofactor expansion gives the covariant components; the time component is
    then flipped to raise the index.  ``w`` is orthogonal to a, b and c, and
    vanishes when they are linearly dependent.
    """
    lower = np.einsum("abcd,a,b,c->d", LEVI_CIVITA4, a, b, c)
    return ETA * lower


def normalize4(v, tol: Tolerances = DEFAULT):
    """Scale ``v`` to unit length; returns ``(u, eps)`` with ``inner4(u, u) == eps``."""
    v = np.asarray(v, dtype=float)
    q = float(inner4(v, v))
    scale = float(np.dot(v, v))
    if abs(q) <= tol.tau_null * scale or scale == 0.0:
        raise NullVector(f"vector {v.tolist()} is null (<v,v> = {q:.3e})")
    eps = 1 if q > 0 else -1
    return v / np.sqrt(abs(q)), eps


def solve3(M, rhs, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Solve ``M x = rhs``; ``rhs`` may be a vector or a 3xk matrix."""
    M = np.asarray(M, dtype=float)
    scale = np.linalg.norm(M)
    det = np.linalg.det(M)
    if scale == 0.0 or abs(det) <= tol.tau_det * scale**3:
        raise SingularMetric(f"matrix is singular to tolerance (det = {det:.3e})")
    return np.linalg.solve(M, np.asarray(rhs, dtype=float))


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray            # (3,), descending
    eigenvectors: np.ndarray | None    # (3, 3), row i is the unit eigenvector for eigenvalues[i]
    is_real_diagonalizable: bool
    residual: float                    # max ||M v - lambda v||
    discriminant: float


def _char_poly(M):
    tr = np.trace(M)
    c2 = (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
          + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
          + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
    return tr, c2, np.linalg.det(M)


def _cubic_roots(tr, c2, det, tau_disc):
    """Real roots of l^3 - tr l^2 + c2 l - det, or None for a complex pair."""
    shift = tr / 3.0
    p = c2 - tr * tr / 3.0
    q = -2.0 * tr**3 / 27.0 + tr * c2 / 3.0 - det
    disc = -(4.0 * p**3 + 27.0 * q * q)
    size = 4.0 * abs(p) ** 3 + 27.0 * q * q
    if disc < -tau_disc * size:
        return None, disc
    if p >= 0.0:
        # only reachable as a (numerically) triple root
        return np.full(3, shift), disc
    m = 2.0 * np.sqrt(-p / 3.0)
    arg = np.clip(3.0 * q / (p * m), -1.0, 1.0)
    theta = np.arccos(arg) / 3.0
    roots = shift + m * np.cos(theta - 2.0 * np.pi * np.arange(3) / 3.0)
    return roots, disc


def _polish(roots, tr, c2, det, rel_gap, newton=True):
    """Newton-refine isolated roots; replace clustered ones by trace deflation."""
    roots = np.sort(roots)[::-1]
    scale = max(1.0, np.max(np.abs(roots)))
    close = np.abs(np.diff(roots)) <= rel_gap * scale
    if close.all():
        return np.full(3, tr / 3.0)
    out = roots.copy()
    for i in range(3):
        in_cluster = (i > 0 and close[i - 1]) or (i < 2 and close[i])
        if in_cluster or not newton:
            continue
        x = out[i]
        for _ in range(3):
            f = ((x - tr) * x + c2) * x - det
            df = (3.0 * x - 2.0 * tr) * x + c2
            if df == 0.0:
                break
            x -= f / df
        out[i] = x
    if close[0]:
        out[0] = out[1] = (tr - out[2]) / 2.0
    elif close[1]:
        out[1] = out[2] = (tr - out[0]) / 2.0
    return out


def _unit(v):
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def _fix_sign(v, eps=1e-9):
    for x in v:
        if abs(x) > eps:
            return v if x > 0 else -v
    return v


def _null_vector(A):
    """Unit vector spanning the (assumed 1-dim) null space of A."""
    cands = [np.cross(A[i], A[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    best = max(cands, key=np.linalg.norm)
    return _unit(best)


def _null_plane(A):
    """Orthonormal basis of {v : r . v = 0} for the dominant row r of a rank-1 A."""
    r = A[np.argmax(np.linalg.norm(A, axis=1))]
    r = _unit(r)
    axis = np.zeros(3)
    axis[np.argmin(np.abs(r))] = 1.0
    v1 = _unit(np.cross(r, axis))
    v2 = _unit(np.cross(r, v1))
    return v1, v2


def eig3(M, tol: Tolerances = DEFAULT) -> SpectralResult:
    """Eigen-decomposition of a real 3x3 matrix via the trigonometric cubic solution.

    Eigenvalues closer than ``tol.tau_dist`` (relative) are treated as one
    repeated eigenvalue; its eigenspace is extracted as a null plane.  A
    complex pair, or a repeated eigenvalue without a full eigenspace, yields
    ``is_real_diagonalizable=False``.  Clustered roots, whose values the
    characteristic polynomial determines poorly, are taken from LAPACK on the
    matrix itself.
    """
    M = np.asarray(M, dtype=float)
    tr, c2, det = _char_poly(M)
    mean = tr / 3.0
    if np.linalg.norm(M - mean * np.eye(3)) <= tol.tau_dist * max(1.0, abs(mean)):
        # numerically scalar: the discriminant is pure rounding noise here
        residual = float(np.linalg.norm(M - mean * np.eye(3)))
        return SpectralResult(np.full(3, mean), np.eye(3), True, residual, 0.0)
    roots, disc = _cubic_roots(tr, c2, det, tol.tau_disc)
    if roots is None:
        all_roots = np.linalg.eigvals(M)
        scale = max(1.0, float(np.max(np.abs(all_roots))))
        if np.max(np.abs(all_roots.imag)) > tol.tau_dist * scale:
            # one real root; report it alongside the real part of the pair
            vals = np.sort(all_roots.real)[::-1]
            return SpectralResult(vals, None, False, float("nan"), float(disc))
        # a pair this close to the real axis is a rounded double root
        roots = all_roots.real
        from_matrix = True
    else:
        from_matrix = False
    roots = np.sort(roots)[::-1]
    gap = np.min(np.abs(np.diff(roots)))
    big = max(1.0, np.max(np.abs(roots)))
    if tol.tau_dist * big < gap < np.sqrt(tol.tau_dist) * big:
        # clustered but distinct roots are ill-conditioned in the polynomial
        # coefficients; take them from the matrix instead
        direct = np.linalg.eigvals(M)
        if np.max(np.abs(direct.imag)) <= tol.tau_dist * max(1.0, np.max(np.abs(direct))):
            roots = np.sort(direct.real)[::-1]
            from_matrix = True
    lam = _polish(roots, tr, c2, det, tol.tau_dist, newton=not from_matrix)
    scale = max(1.0, np.max(np.abs(lam)), np.linalg.norm(M))
    vecs = np.zeros((3, 3))
    i = 0
    while i < 3:
        j = i
        while j + 1 < 3 and lam[j + 1] == lam[i]:
            j += 1
        mult = j - i + 1
        A = M - lam[i] * np.eye(3)
        if mult == 1:
            vecs[i] = _null_vector(A)
        elif mult == 2:
            vecs[i], vecs[i + 1] = _null_plane(A)
        else:
            vecs[:] = np.eye(3)
        i = j + 1
    vecs = np.array([_fix_sign(v) for v in vecs])
    residual = float(np.max(np.linalg.norm(vecs @ M.T - lam[:, None] * vecs, axis=1)))
    diagonalizable = residual <= 1e-6 * scale
    order = sorted(range(3), key=lambda k: (-lam[k], tuple(-vecs[k])))
    lam = lam[order]
    vecs = vecs[order]
    if not diagonalizable:
        return SpectralResult(lam, None, False, residual, float(disc))
    return SpectralResult(lam, vecs, True, residual, float(disc))
