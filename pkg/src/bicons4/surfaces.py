"""Spacelike/timelike surfaces of codimension two in E^4_1.

Used for the s = const slices of the classified hypersurfaces and for the
eleven model surfaces those slices are congruent to.

The normal plane of a non-degenerate surface is itself non-degenerate, so an
orthonormal normal frame always exists.  It is built from the mean curvature
vector ``Hv`` so that it is parallel whenever ``Hv`` is:

* ``Hv`` non-null: ``f3 = Hv / |Hv|`` and ``f4`` the unit normal orthogonal to it;
* ``Hv`` null and nonzero (marginally trapped): with ``l = Hv`` and ``m`` the
  null normal with ``<l, m> = -1``, ``f3 = (l + m)/sqrt2``, ``f4 = (l - m)/sqrt2``;
  the null pair ``(l, m)`` is reported as well;
* ``Hv = 0``: an arbitrary orthonormal normal frame.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import jets
from .config import DEFAULT, Tolerances
from .errors import BadParams, DegenerateMetric
from .jets import Jet3
from .minkowski import ETA, cross4, inner4, normalize4

LEMMA_CASES = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi")
THREE_DISTINCT_CASES = LEMMA_CASES[:7]


@dataclass
class SurfacePatch:
    domain: tuple               # ((t0, t1), (u0, u1))
    evaluator: Callable         # (t_jet, u_jet) -> point jet of shape (4,)
    label: str = ""
    params: dict = field(default_factory=dict)

    def position(self, p):
        t, u = _seed2(*p)
        return np.asarray(self.evaluator(t, u).value)


@dataclass(frozen=True)
class SurfaceFrame:
    f3: np.ndarray
    f4: np.ndarray
    eps3: int
    eps4: int
    null_pair: tuple | None     # (l, m) when the mean curvature vector is null


@dataclass(frozen=True)
class SliceReport:
    shape_op_f3: np.ndarray
    shape_op_f4: np.ndarray
    c1: float
    c2: float
    d1: float
    d2: float
    eps3: int
    eps4: int
    max_offdiag: float
    max_variance: float
    gauss_curvature: float
    max_abs_gauss_curvature: float
    gauss_equation_residual: float  # max |K - (eps3 det A3 + eps4 det A4)|
    mean_curvature_vec: np.ndarray
    pmc_residual: float
    signature: str
    is_flat: bool
    is_marginally_trapped: bool
    null_frame: tuple | None

    @property
    def flatness_relation(self):
        """``e1 d1 d2 - c1 c2`` with ``e1 = -eps3 eps4``; zero exactly when the Gauss equation gives K = 0."""
        return -self.eps3 * self.eps4 * self.d1 * self.d2 - self.c1 * self.c2

    def to_dict(self):
        return {
            "c1": self.c1, "c2": self.c2, "d1": self.d1, "d2": self.d2,
            "eps3": self.eps3, "eps4": self.eps4,
            "shape_op_f3": self.shape_op_f3.tolist(), "shape_op_f4": self.shape_op_f4.tolist(),
            "max_offdiag": self.max_offdiag, "max_variance": self.max_variance,
            "gauss_curvature": self.gauss_curvature,
            "max_abs_gauss_curvature": self.max_abs_gauss_curvature,
            "gauss_equation_residual": self.gauss_equation_residual,
            "mean_curvature_vec": self.mean_curvature_vec.tolist(),
            "pmc_residual": self.pmc_residual, "signature": self.signature,
            "is_flat": self.is_flat, "is_marginally_trapped": self.is_marginally_trapped,
            "flatness_relation": self.flatness_relation,
        }


def _seed2(t, u):
    return Jet3.variable(t, 1), Jet3.variable(u, 2)


def _normal_part(v, Y, ginv):
    """Component of ``v`` (shape (4,)) normal to the tangent plane spanned by rows of Y."""
    coef = ginv @ inner4(Y, v)
    return v - coef @ Y


class LocalSurface:
    def __init__(self, patch: SurfacePatch, p, tol: Tolerances = DEFAULT):
        self.p = tuple(float(x) for x in p)
        self.tol = tol
        t, u = _seed2(*self.p)
        self.y = patch.evaluator(t, u)
        self.Y = Jet3.stack([self.y.diff(1), self.y.diff(2)])
        self.g = (self.Y.reshape(2, 1, 4) * (self.Y.reshape(1, 2, 4) * ETA)).sum(axis=-1)
        g0 = self.g.value
        det = np.linalg.det(g0)
        if abs(det) <= tol.tau_det * np.linalg.norm(g0) ** 2:
            raise DegenerateMetric(f"surface metric degenerate at {self.p}", point=self.p)
        self.signature = "riemannian" if det > 0 else "lorentzian"

    @cached_property
    def ginv(self):
        return jets.inverse(self.g, self.tol)

    @cached_property
    def h(self):
        """Second fundamental form, vector valued, shape (2, 2, 4)."""
        Y2 = Jet3.stack([Jet3.stack([self.Y[a].diff(b + 1) for b in range(2)]) for a in range(2)])
        proj = (Y2.reshape(2, 2, 1, 4) * (self.Y.reshape(1, 1, 2, 4) * ETA)).sum(axis=-1)  # <Y_ab, Y_c>
        coef = proj.reshape(4, 2) @ self.ginv                                              # (ab, d)
        tang = (coef.reshape(2, 2, 2, 1) * self.Y.reshape(1, 1, 2, 4)).sum(axis=2)
        return Y2 - tang

    @cached_property
    def mean_curvature_jet(self):
        gi = self.ginv
        h = self.h
        return (h * gi.reshape(2, 2, 1)).sum(axis=0).sum(axis=0) * 0.5

    @property
    def mean_curvature_vec(self):
        return self.mean_curvature_jet.value

    def frame(self) -> SurfaceFrame:
        Y0 = self.Y.value
        gi0 = self.ginv.value
        Hv = self.mean_curvature_vec
        scale = float(np.dot(Hv, Hv))
        HH = float(inner4(Hv, Hv))
        tiny = 1e-24
        if scale > tiny and abs(HH) > self.tol.tau_null * scale:
            f3, e3 = normalize4(Hv, self.tol)
            f4, e4 = normalize4(cross4(Y0[0], Y0[1], f3), self.tol)
            return SurfaceFrame(f3, f4, e3, e4, None)
        if scale > tiny:
            ell = Hv
            k = int(np.argmax(np.abs(ell)))
            w = _normal_part(np.eye(4)[k], Y0, gi0)
            beta = -1.0 / float(inner4(ell, w))
            alpha = beta * beta * float(inner4(w, w)) / 2.0
            m = alpha * ell + beta * w
            r2 = np.sqrt(2.0)
            return SurfaceFrame((ell + m) / r2, (ell - m) / r2, -1, 1, (ell.copy(), m))
        # minimal point: any orthonormal normal frame
        cands = [_normal_part(e, Y0, gi0) for e in np.eye(4)]
        q = max(cands, key=lambda v: abs(float(inner4(v, v))))
        f3, e3 = normalize4(q, self.tol)
        f4, e4 = normalize4(cross4(Y0[0], Y0[1], f3), self.tol)
        return SurfaceFrame(f3, f4, e3, e4, None)

    def shape_operators(self, fr: SurfaceFrame | None = None):
        fr = fr or self.frame()
        h0 = self.h.value
        gi0 = self.ginv.value
        A3 = gi0 @ inner4(h0, fr.f3)
        A4 = gi0 @ inner4(h0, fr.f4)
        return A3, A4

    def pmc_residual(self, fr: SurfaceFrame | None = None):
        fr = fr or self.frame()
        Y0 = self.Y.value
        gi0 = self.ginv.value
        dH = self.mean_curvature_jet.gradient()[1:]          # along t and u
        worst = 0.0
        for v in dH:
            nv = _normal_part(v, Y0, gi0)
            comps = [float(inner4(nv, fr.f3)), float(inner4(nv, fr.f4))]
            worst = max(worst, float(np.hypot(*comps)))
        return worst

    def gauss_curvature(self):
        """Intrinsic curvature from the metric alone (Christoffel symbols)."""
        gi = self.ginv
        D = Jet3.stack([self.g.diff(k) for k in (1, 2)])      # D[k, i, j]
        c = D.c
        lower = 0.5 * (np.einsum("zimj->zmij", c) + np.einsum("zjmi->zmij", c) - c)
        gamma = (gi @ Jet3(lower).reshape(2, 4)).reshape(2, 2, 2)
        G0 = gamma.value
        dG = np.stack([gamma.c[jets.INDEX[(0, 1, 0)]], gamma.c[jets.INDEX[(0, 0, 1)]]])
        R = (np.einsum("imjk->mkij", dG) - np.einsum("jmik->mkij", dG)
             + np.einsum("mia,ajk->mkij", G0, G0) - np.einsum("mja,aik->mkij", G0, G0))
        g0 = self.g.value
        R_low = np.einsum("lm,mkij->lkij", g0, R)
        return float(R_low[0, 1, 0, 1] / np.linalg.det(g0))


def surface_frame(patch: SurfacePatch, p, tol: Tolerances = DEFAULT) -> SurfaceFrame:
    return LocalSurface(patch, p, tol).frame()


def _grid2(domain, n):
    (t0, t1), (u0, u1) = domain
    ts = np.linspace(t0, t1, n)
    us = np.linspace(u0, u1, n)
    return [(t, u) for t in ts for u in us]


def slice_check(patch: SurfacePatch, n: int = 20, tol: Tolerances = DEFAULT) -> SliceReport:
    """Evaluate the slice properties on an ``n x n`` grid over the patch domain."""
    pts = _grid2(patch.domain, n)
    A3s, A4s, Ks, flat_rel, pmc, trapped, sigs = [], [], [], [], [], [], set()
    center = None
    for idx, p in enumerate(pts):
        L = LocalSurface(patch, p, tol)
        fr = L.frame()
        A3, A4 = L.shape_operators(fr)
        A3s.append(A3)
        A4s.append(A4)
        K = L.gauss_curvature()
        Ks.append(K)
        flat_rel.append(K - (fr.eps3 * np.linalg.det(A3) + fr.eps4 * np.linalg.det(A4)))
        pmc.append(L.pmc_residual(fr))
        trapped.append(fr.null_pair is not None)
        sigs.add(L.signature)
        if idx == len(pts) // 2:
            center = (L, fr)
    A3s = np.array(A3s)
    A4s = np.array(A4s)
    offdiag = max(np.max(np.abs(A3s[:, 0, 1])), np.max(np.abs(A3s[:, 1, 0])),
                  np.max(np.abs(A4s[:, 0, 1])), np.max(np.abs(A4s[:, 1, 0])))
    diag = np.stack([A3s[:, 0, 0], A3s[:, 1, 1], A4s[:, 0, 0], A4s[:, 1, 1]])
    variance = float(np.max(np.var(diag, axis=1, ddof=1)))
    c1, c2, d1, d2 = (float(x) for x in diag.mean(axis=1))
    Ks = np.array(Ks)
    Lc, frc = center
    kmax = float(np.max(np.abs(Ks)))
    return SliceReport(
        shape_op_f3=A3s.mean(axis=0), shape_op_f4=A4s.mean(axis=0),
        c1=c1, c2=c2, d1=d1, d2=d2, eps3=frc.eps3, eps4=frc.eps4,
        max_offdiag=float(offdiag), max_variance=variance,
        gauss_curvature=float(np.mean(Ks)), max_abs_gauss_curvature=kmax,
        gauss_equation_residual=float(np.max(np.abs(flat_rel))),
        mean_curvature_vec=np.asarray(Lc.mean_curvature_vec, dtype=float),
        pmc_residual=float(np.max(pmc)),
        signature=sigs.pop() if len(sigs) == 1 else "mixed",
        is_flat=kmax < 1e-8, is_marginally_trapped=all(trapped),
        null_frame=frc.null_pair)


# -- model surfaces -----------------------------------------------------

def _need(params, *names):
    out = []
    for name in names:
        if name not in params or params[name] is None:
            raise BadParams(f"missing parameter {name!r}")
        v = float(params[name])
        if v == 0.0:
            raise BadParams(f"parameter {name!r} must be nonzero")
        out.append(v)
    return out


def build_lemma_surface(case: str, **params) -> SurfacePatch:
    """One of the eleven model slice surfaces, cases ``"i"`` .. ``"xi"``.

    Cases (viii)-(x) take ``r`` with the surface at Minkowski distance ``1/r``
    from the origin; the others take ``A`` and/or ``B``.
    """
    case = str(case).lower()
    C = Jet3.constant
    if case == "i":
        (B,) = _need(params, "B")
        ev = lambda t, u: Jet3.stack([C(1.0), t, jets.cos(u) * B, jets.sin(u) * B])
        dom = ((-1.0, 1.0), (0.0, 6.0))
    elif case == "ii":
        (A,) = _need(params, "A")
        ev = lambda t, u: Jet3.stack([jets.cosh(t) * A, jets.sinh(t) * A, u, C(1.0)])
        dom = ((-1.0, 1.0), (-1.0, 1.0))
    elif case == "iii":
        (B,) = _need(params, "B")
        ev = lambda t, u: Jet3.stack([t, jets.cos(u) * B, jets.sin(u) * B, C(1.0)])
        dom = ((-1.0, 1.0), (0.0, 6.0))
    elif case == "iv":
        (A,) = _need(params, "A")
        ev = lambda t, u: Jet3.stack([jets.sinh(t) * A, jets.cosh(t) * A, u, C(1.0)])
        dom = ((-1.0, 1.0), (-1.0, 1.0))
    elif case == "v":
        A, B = _need(params, "A", "B")
        ev = lambda t, u: Jet3.stack([jets.cosh(t) * A, jets.sinh(t) * A,
                                      jets.cos(u) * B, jets.sin(u) * B])
        dom = ((-1.0, 1.0), (0.0, 6.0))
    elif case == "vi":
        A, B = _need(params, "A", "B")
        ev = lambda t, u: Jet3.stack([jets.sinh(t) * A, jets.cosh(t) * A,
                                      jets.cos(u) * B, jets.sin(u) * B])
        dom = ((-1.0, 1.0), (0.0, 6.0))
    elif case == "vii":
        A, B = _need(params, "A", "B")

        def ev(t, u):
            q = t * t * A + u * u * B
            return Jet3.stack([q, t, u, q])
        dom = ((-1.0, 1.0), (-1.0, 1.0))
    elif case == "viii":
        (r,) = _need(params, "r")
        R = 1.0 / r
        ev = lambda t, u: Jet3.stack([C(0.0), jets.cos(t) * jets.sin(u) * R,
                                      jets.sin(t) * jets.sin(u) * R, jets.cos(u) * R])
        dom = ((0.0, 6.0), (0.3, np.pi - 0.3))
    elif case == "ix":
        (r,) = _need(params, "r")
        R = 1.0 / r
        ev = lambda t, u: Jet3.stack([jets.sinh(t) * R, jets.cosh(t) * jets.cos(u) * R,
                                      jets.cosh(t) * jets.sin(u) * R, C(0.0)])
        dom = ((-1.0, 1.0), (0.0, 6.0))
    elif case == "x":
        (r,) = _need(params, "r")
        R = 1.0 / r
        ev = lambda t, u: Jet3.stack([jets.cosh(t) * R, jets.sinh(t) * jets.cos(u) * R,
                                      jets.sinh(t) * jets.sin(u) * R, C(0.0)])
        dom = ((0.3, 2.0), (0.0, 6.0))
    elif case == "xi":
        (A,) = _need(params, "A")

        def ev(t, u):
            q = (t * t + u * u) * A
            return Jet3.stack([q, t, u, q])
        dom = ((-1.0, 1.0), (-1.0, 1.0))
    else:
        raise BadParams(f"unknown model surface case {case!r}")
    return SurfacePatch(dom, ev, f"lemma-{case}", {k: float(v) for k, v in params.items()
                                                  if v is not None})


def slice_of(patch, s0, domain=None) -> SurfacePatch:
    """The s = s0 slice of a hypersurface patch as a surface in (t, u)."""
    s0 = float(s0)
    ev = patch.evaluator
    s_jet = Jet3.constant(s0)
    dom = domain or (patch.domain[1], patch.domain[2])
    return SurfacePatch(tuple(dom), lambda t, u: ev(s_jet, t, u),
                        f"{patch.label}@s={s0:g}", dict(patch.params))
