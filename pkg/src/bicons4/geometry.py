"""Extrinsic geometry of a hypersurface patch in E^4_1.

Everything is computed from the third-order jet of the immersion at one chart
point: tangents and induced metric (valid to order 2), unit normal (order 2),
second fundamental form and shape operator (order 1), hence the mean
curvature together with its first partials.  No finite differences are used.

Conventions
-----------
* ``b_ij = <x_ij, N>`` and ``S = g^-1 b``; principal curvatures are the
  eigenvalues of ``S`` and ``H = (k1 + k2 + k3) / 3``.
* ``eps = <N, N>``; ``eps = -1`` exactly when the induced metric is
  Riemannian.
* ``N`` is the normalized ``cross4(x_s, x_t, x_u)`` flipped so its first
  nonzero component is positive (``orientation=-1`` flips it once more).
* Connection forms use ``omega[i, j, l] = eps_j <D_{e_l} e_i, e_j>`` so that
  the tangential part of ``D_{e_l} e_i`` is ``sum_j omega[i, j, l] e_j``;
  they satisfy ``omega[j, i, l] = -eps_i eps_j omega[i, j, l]``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import jets
from .config import DEFAULT, Tolerances
from .errors import (DegenerateMetric, NonDiagonalizable, NullNormal,
                     UmbilicPoint)
from .jets import Jet3
from .minkowski import ETA, SpectralResult, cross4, eig3, normalize4, solve3

RIEMANNIAN = "riemannian"
LORENTZIAN = "lorentzian"


@dataclass
class ImmersionPatch:
    """Chart box plus an evaluator mapping three seed jets to a point jet of shape (4,)."""

    domain: tuple
    evaluator: Callable
    params: dict = field(default_factory=dict)
    label: str = ""

    def __call__(self, s, t, u):
        return self.evaluator(s, t, u)

    def position(self, p):
        s, t, u = jets.seed(*p)
        return np.asarray(self.evaluator(s, t, u).value, dtype=float)

    def contains(self, p):
        return all(lo <= x <= hi for x, (lo, hi) in zip(p, self.domain))

    def shifted(self, offset):
        """Same hypersurface in the chart translated by ``-offset``."""
        ds, dt, du = (float(o) for o in offset)
        dom = tuple((lo - o, hi - o) for (lo, hi), o in zip(self.domain, (ds, dt, du)))
        ev = self.evaluator
        return ImmersionPatch(dom, lambda s, t, u: ev(s + ds, t + dt, u + du),
                              dict(self.params), self.label)


@dataclass(frozen=True)
class FrameData:
    tangents: np.ndarray        # (3, 4): x_s, x_t, x_u
    metric: np.ndarray          # (3, 3)
    metric_signature: str
    normal: np.ndarray          # (4,)
    epsilon: int
    second_form: np.ndarray     # (3, 3)
    shape: np.ndarray           # (3, 3)


@dataclass(frozen=True)
class CurvatureReport:
    k: np.ndarray               # (3,) with k[0] along grad H when grad H != 0
    directions: np.ndarray      # (3, 3) chart vectors, |g(e_i, e_i)| = 1
    frame_signs: np.ndarray     # (3,) eps_i = g(e_i, e_i)
    H: float
    gradH: np.ndarray           # chart components of grad H
    grad_norm: float
    epsilon: int
    distinct_count: int
    diagonalizable: bool

    @property
    def k1(self):
        return float(self.k[0])

    @property
    def k2(self):
        return float(self.k[1])

    @property
    def k3(self):
        return float(self.k[2])

    @property
    def epsilon1(self):
        return int(self.frame_signs[0])


@dataclass(frozen=True)
class ConnectionData:
    omega: np.ndarray           # (3, 3, 3): omega[i, j, l] = omega_ij(e_l)
    frame_signs: np.ndarray

    def __call__(self, i, j, l):
        """1-based accessor: ``conn(1, 2, 3)`` is omega_12(e_3)."""
        return float(self.omega[i - 1, j - 1, l - 1])

    def named_components(self, distinct_count):
        names = {"w12(e1)": (0, 1, 0), "w12(e3)": (0, 1, 2),
                 "w13(e1)": (0, 2, 0), "w13(e2)": (0, 2, 1)}
        if distinct_count == 3:
            names["w23(e1)"] = (1, 2, 0)
        return {k: float(self.omega[v]) for k, v in names.items()}


def _count_distinct(values, tau):
    vals = np.sort(np.asarray(values, dtype=float))[::-1]
    count = 1
    for a, b in zip(vals[:-1], vals[1:]):
        if abs(a - b) > tau * max(1.0, abs(a), abs(b)):
            count += 1
    return count


def _g_orthonormalize(vecs, lam, g, tau):
    """Make eigenvectors g-orthonormal inside each cluster of equal eigenvalues."""
    vecs = vecs.copy()
    i = 0
    while i < 3:
        j = i
        while j + 1 < 3 and abs(lam[j + 1] - lam[i]) <= tau * max(1.0, abs(lam[i])):
            j += 1
        block = vecs[i:j + 1]
        gram = block @ g @ block.T
        w, q = np.linalg.eigh(gram)
        new = q.T @ block
        new = new / np.sqrt(np.abs(w))[:, None]
        for n in range(len(new)):
            v = new[n]
            k = next((m for m in range(3) if abs(v[m]) > 1e-9 * np.max(np.abs(v))), 0)
            new[n] = v if v[k] > 0 else -v
        vecs[i:j + 1] = new
        lam[i:j + 1] = lam[i:j + 1].mean()
        i = j + 1
    return vecs, lam


class LocalGeometry:
    """Lazily computed jet data of a patch at one chart point."""

    def __init__(self, patch: ImmersionPatch, p, tol: Tolerances = DEFAULT, orientation: int = 1):
        self.patch = patch
        self.p = tuple(float(x) for x in p)
        self.tol = tol
        self.orientation = 1 if orientation >= 0 else -1
        s, t, u = jets.seed(*self.p)
        self.x = patch.evaluator(s, t, u)
        self.X = Jet3.stack([self.x.diff(a) for a in range(3)])
        self.g = (self.X.reshape(3, 1, 4) * (self.X.reshape(1, 3, 4) * ETA)).sum(axis=-1)
        g0 = self.g.value
        scale = np.linalg.norm(g0)
        det = np.linalg.det(g0)
        if scale == 0.0 or abs(det) <= tol.tau_det * scale**3:
            raise DegenerateMetric(f"induced metric degenerate at {self.p} (det g = {det:.3e})",
                                   point=self.p)

    # -- first and second order data --------------------------------------
    @cached_property
    def normal_jet(self):
        n = jets.cross4(self.X[0], self.X[1], self.X[2])
        nn = jets.minkowski_inner(n, n)
        q = nn.value
        n0 = n.value
        if abs(q) <= self.tol.tau_null * float(np.dot(n0, n0)):
            raise NullNormal(f"normal is null at {self.p}", point=self.p)
        eps = 1 if q > 0 else -1
        N = n * jets.reciprocal(jets.sqrt(nn * eps))
        v = N.value
        k = next(i for i in range(4) if abs(v[i]) > 1e-12 * np.max(np.abs(v)))
        sign = (1 if v[k] > 0 else -1) * self.orientation
        return N * sign, eps

    @property
    def epsilon(self):
        return self.normal_jet[1]

    @cached_property
    def X2(self):
        return Jet3.stack([Jet3.stack([self.X[i].diff(j) for j in range(3)]) for i in range(3)])

    @cached_property
    def b(self):
        N, _ = self.normal_jet
        return (self.X2 * (N * ETA).reshape(1, 1, 4)).sum(axis=-1)

    @cached_property
    def ginv(self):
        return jets.inverse(self.g, self.tol)

    @cached_property
    def S(self):
        return self.ginv @ self.b

    @cached_property
    def H_jet(self):
        S = self.S
        return (S[0, 0] + S[1, 1] + S[2, 2]) * (1.0 / 3.0)

    @cached_property
    def dH(self):
        return self.H_jet.gradient()

    @cached_property
    def gradH(self):
        return self.ginv.value @ self.dH

    def frame(self) -> FrameData:
        N, eps = self.normal_jet
        g0 = self.g.value
        sig = RIEMANNIAN if np.linalg.det(g0) > 0 else LORENTZIAN
        return FrameData(self.X.value.copy(), g0.copy(), sig, N.value.copy(), eps,
                         self.b.value.copy(), self.S.value.copy())

    # -- principal data ---------------------------------------------------
    @cached_property
    def spectral(self) -> SpectralResult:
        return eig3(self.S.value, self.tol)

    @cached_property
    def principal(self) -> CurvatureReport:
        spec = self.spectral
        if not spec.is_real_diagonalizable:
            raise NonDiagonalizable(
                f"shape operator not real-diagonalizable at {self.p} "
                f"(discriminant {spec.discriminant:.3e})", point=self.p)
        g0 = self.g.value
        lam = spec.eigenvalues.copy()
        vecs, lam = _g_orthonormalize(spec.eigenvectors, lam, g0, self.tol.tau_dist)
        signs = np.sign(np.einsum("ia,ab,ib->i", vecs, g0, vecs))
        grad = self.gradH
        comps = signs * (vecs @ g0 @ grad)
        grad_norm = float(np.sqrt(np.sum(comps**2)))
        order = list(range(3))
        if grad_norm > self.tol.tau_grad:
            first = int(np.argmax(np.abs(comps)))
            rest = sorted((i for i in range(3) if i != first), key=lambda i: -lam[i])
            order = [first] + rest
        k = lam[order]
        return CurvatureReport(
            k=k, directions=vecs[order], frame_signs=signs[order],
            H=float(np.sum(k) / 3.0), gradH=grad, grad_norm=grad_norm,
            epsilon=self.epsilon, distinct_count=_count_distinct(k, self.tol.tau_dist),
            diagonalizable=True)

    def connection(self) -> ConnectionData:
        rep = self.principal
        if rep.distinct_count < 2:
            raise UmbilicPoint(f"umbilic point at {self.p}; principal frame undetermined",
                               point=self.p)
        v = rep.directions
        lam = rep.k
        eps = rep.frame_signs
        tau = self.tol.tau_dist
        g0 = self.g.value
        db = self.b.gradient()          # (3, 3, 3): db[l] = d_l b
        dg = self.g.gradient()
        X = self.X.value                # (3, 4)
        X2 = self.X2.value              # (3, 3, 4)
        E = v @ X                       # ambient frame vectors
        # dv[i, l] = d_l of the eigenvector field v_i (chart components)
        dv = np.full((3, 3, 3), np.nan)
        for i in range(3):
            simple = all(abs(lam[i] - lam[j]) > tau * max(1.0, abs(lam[i])) for j in range(3) if j != i)
            if not simple:
                continue
            for l in range(3):
                coeff = np.zeros(3)
                for j in range(3):
                    if j == i:
                        coeff[j] = -0.5 * eps[i] * (v[i] @ dg[l] @ v[i])
                    else:
                        coeff[j] = eps[j] * (v[j] @ (db[l] - lam[i] * dg[l]) @ v[i]) / (lam[i] - lam[j])
                dv[i, l] = coeff @ v
        omega = np.full((3, 3, 3), np.nan)
        for i in range(3):
            if np.isnan(dv[i]).any():
                continue
            # dE[l] = d_l (sum_a v_i^a x_a)
            dE = dv[i] @ X + np.einsum("a,alk->lk", v[i], X2)
            for m in range(3):
                D = v[m] @ dE
                for j in range(3):
                    if j != i:
                        omega[i, j, m] = eps[j] * float(np.sum(ETA * D * E[j]))
        for i in range(3):
            for j in range(3):
                if i != j and np.isnan(omega[i, j]).any() and not np.isnan(omega[j, i]).any():
                    omega[i, j] = -eps[i] * eps[j] * omega[j, i]
        return ConnectionData(omega, eps)

    def gauss_codazzi(self):
        ginv = self.ginv
        D = Jet3.stack([self.g.diff(k) for k in range(3)])   # D[k, i, j] = d_k g_ij
        c = D.c
        lower = 0.5 * (np.einsum("zimj->zmij", c) + np.einsum("zjmi->zmij", c) - c)
        gamma = (ginv @ Jet3(lower).reshape(3, 9)).reshape(3, 3, 3)   # Gamma[l, i, j]
        G0 = gamma.value
        dG = gamma.gradient()                                        # dG[k, l, i, j]
        # R[m, k, i, j] = R^m_{kij}
        R = (np.einsum("imjk->mkij", dG) - np.einsum("jmik->mkij", dG)
             + np.einsum("mia,ajk->mkij", G0, G0) - np.einsum("mja,aik->mkij", G0, G0))
        g0 = self.g.value
        R_low = np.einsum("lm,mkij->lkij", g0, R)
        b0 = self.b.value
        eps = self.epsilon
        rhs = eps * (np.einsum("jk,il->lkij", b0, b0) - np.einsum("ik,jl->lkij", b0, b0))
        gauss = float(np.max(np.abs(R_low - rhs)))
        db = self.b.gradient()                                       # db[i, j, k] = d_i b_jk
        cov = db - np.einsum("mij,mk->ijk", G0, b0) - np.einsum("mik,jm->ijk", G0, b0)
        codazzi = float(np.max(np.abs(cov - cov.transpose(1, 0, 2))))
        return gauss, codazzi


def shape_operator_values(evaluator, p, tol: Tolerances = DEFAULT):
    """Plain arrays ``(S, g, eps)`` at ``p``; a lighter path than :class:`LocalGeometry`.

    Only second-order data is read off the point jet, so callers may feed
    profiles whose third derivative is unknown.
    """
    s, t, u = jets.seed(*p)
    c = evaluator(s, t, u).c
    unit = [tuple(1 if a == i else 0 for a in range(3)) for i in range(3)]
    X = np.stack([c[jets.INDEX[e]] for e in unit])
    X2 = np.empty((3, 3, 4))
    for i in range(3):
        for j in range(3):
            X2[i, j] = c[jets.INDEX[tuple(a + b for a, b in zip(unit[i], unit[j]))]]
    g = (X * ETA) @ X.T
    N, eps = normalize4(cross4(X[0], X[1], X[2]), tol)
    b = X2 @ (ETA * N)
    return solve3(g, b, tol), g, eps


def local(patch, p, tol: Tolerances = DEFAULT, orientation: int = 1) -> LocalGeometry:
    return LocalGeometry(patch, p, tol, orientation)


def frame_at(patch, p, tol: Tolerances = DEFAULT, orientation: int = 1) -> FrameData:
    return LocalGeometry(patch, p, tol, orientation).frame()


def principal_curvatures(patch, p, tol: Tolerances = DEFAULT, orientation: int = 1) -> CurvatureReport:
    return LocalGeometry(patch, p, tol, orientation).principal


def mean_curvature(patch, p, tol: Tolerances = DEFAULT) -> float:
    return float(LocalGeometry(patch, p, tol).H_jet.value)


def mean_curvature_partials(patch, p, tol: Tolerances = DEFAULT) -> np.ndarray:
    """(dH/ds, dH/dt, dH/du) at ``p``."""
    return LocalGeometry(patch, p, tol).dH


def mean_curvature_gradient(patch, p, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Chart components of grad H (index raised with the induced metric)."""
    return LocalGeometry(patch, p, tol).gradH


def connection_forms(patch, p, tol: Tolerances = DEFAULT) -> ConnectionData:
    return LocalGeometry(patch, p, tol).connection()


def gauss_codazzi_residual(patch, p, tol: Tolerances = DEFAULT):
    return LocalGeometry(patch, p, tol).gauss_codazzi()


# -- simple reference patches -------------------------------------------

def hyperplane(domain=((-1.0, 1.0),) * 3) -> ImmersionPatch:
    """Spacelike hyperplane x0 = 0."""
    return ImmersionPatch(tuple(domain), lambda s, t, u: Jet3.stack([s * 0.0, s, t, u]),
                          {}, "hyperplane")


def de_sitter(radius=1.0, domain=((-1.0, 1.0), (0.3, 2.8), (0.0, 6.0))) -> ImmersionPatch:
    """Patch of the de Sitter space <x, x> = radius^2."""
    r = float(radius)

    def ev(s, t, u):
        ch = jets.cosh(s)
        st = jets.sin(t)
        return Jet3.stack([jets.sinh(s), ch * st * jets.cos(u), ch * st * jets.sin(u),
                           ch * jets.cos(t)]) * r

    return ImmersionPatch(tuple(domain), ev, {"radius": r}, "de-sitter")
