"""The biconservative condition ``S(grad H) + eps (3H/2) grad H = 0`` and its checks.

For a hypersurface of E^4_1 with ``eps = <N, N>`` this is the vanishing of the
tangential part of the bitension field.  With ``k1`` the principal curvature
along ``grad H`` it reduces to ``k1 = -(3 eps / 2) H``, i.e.

* Riemannian (eps = -1):  ``k1 = k2 + k3``
* Lorentzian (eps = +1):  ``-3 k1 = k2 + k3``
"""

import enum
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import BiconsError, GradTooSmall, NonDiagonalizable
from .geometry import CurvatureReport, LocalGeometry


class Case(enum.Enum):
    CMC = "CMC"
    TWO_DISTINCT = "TwoDistinct"
    THREE_DISTINCT = "ThreeDistinct"
    UMBILIC = "Umbilic"
    NON_DIAGONALIZABLE = "NonDiagonalizable"


@dataclass(frozen=True)
class BiconservativeReport:
    residual_vec: np.ndarray          # chart components of S grad H + eps (3H/2) grad H
    residual_norm: float
    scalar_riemannian: float          # k1 - (k2 + k3)
    scalar_lorentzian: float          # 3 k1 + (k2 + k3)
    epsilon: int                      # <N, N>
    epsilon1: int                     # <e1, e1> for the direction of k1
    grad_norm: float
    H: float
    k: np.ndarray
    case: Case
    threshold: float                  # residual_norm must stay below this to pass

    @property
    def passed(self):
        return self.residual_norm < self.threshold

    def k1_relation(self):
        return abs(self.k[0] + 1.5 * self.epsilon * self.H)


def _frame_norm(vec, directions, signs, g):
    """Positive-definite norm of a chart vector in the g-orthonormal principal frame."""
    comps = signs * (directions @ g @ vec)
    return float(np.sqrt(np.sum(comps**2)))


def _abs_metric_norm(vec, g):
    w, V = np.linalg.eigh(g)
    return float(np.sqrt(vec @ (V * np.abs(w)) @ V.T @ vec))


def residual_from_local(L: LocalGeometry) -> BiconservativeReport:
    tol = L.tol
    S0 = L.S.value
    grad = L.gradH
    H = float(L.H_jet.value)
    eps = L.epsilon
    r = S0 @ grad + eps * 1.5 * H * grad
    g0 = L.g.value
    try:
        rep = L.principal
    except NonDiagonalizable:
        gn = _abs_metric_norm(grad, g0)
        rn = _abs_metric_norm(r, g0)
        kmax = float(np.max(np.abs(np.linalg.eigvals(S0))))
        return BiconservativeReport(r, rn, math.nan, math.nan, eps, 0, gn, H,
                                    np.full(3, math.nan), Case.NON_DIAGONALIZABLE,
                                    tol.tau_bic * max(1.0, kmax * gn))
    rn = _frame_norm(r, rep.directions, rep.frame_signs, g0)
    k = rep.k
    if rep.grad_norm <= tol.tau_grad:
        case = Case.CMC
    elif rep.distinct_count == 1:
        case = Case.UMBILIC
    elif rep.distinct_count == 2:
        case = Case.TWO_DISTINCT
    else:
        case = Case.THREE_DISTINCT
    kmax = float(np.max(np.abs(k)))
    return BiconservativeReport(
        residual_vec=r, residual_norm=rn,
        scalar_riemannian=float(k[0] - (k[1] + k[2])),
        scalar_lorentzian=float(3.0 * k[0] + (k[1] + k[2])),
        epsilon=eps, epsilon1=rep.epsilon1, grad_norm=rep.grad_norm, H=H, k=k, case=case,
        threshold=tol.tau_bic * max(1.0, kmax * rep.grad_norm))


def residual(patch, p, tol: Tolerances = DEFAULT) -> BiconservativeReport:
    return residual_from_local(LocalGeometry(patch, p, tol))


def check_k1_relation(report: CurvatureReport, tol: Tolerances = DEFAULT) -> float:
    """``|k1 + (3 eps / 2) H|``; only meaningful where ``grad H`` does not vanish."""
    if report.grad_norm <= tol.tau_grad:
        raise GradTooSmall(f"|grad H| = {report.grad_norm:.3e} is below tau_grad; "
                           "k1 is not determined by grad H")
    return abs(report.k1 + 1.5 * report.epsilon * report.H)


# -- grid verification ---------------------------------------------------------

@dataclass(frozen=True)
class PointResult:
    index: int
    point: tuple
    report: BiconservativeReport
    gauss: float
    codazzi: float
    connection: dict
    dH: np.ndarray
    separation: float
    signature: str


@dataclass(frozen=True)
class VerifySummary:
    max_residual: float
    mean_residual: float
    epsilon: int                     # common eps, 0 when the patch changes signature
    case: str                        # most frequent case
    worst_point: list
    n_points: int
    passed: bool
    signature_consistent: bool
    signature: str
    case_histogram: dict
    distinct_count_histogram: dict
    epsilon1_histogram: dict
    max_gauss_residual: float
    max_codazzi_residual: float
    connection_maxima: dict
    max_dH_dt: float
    max_dH_du: float
    max_k1_relation: float
    max_scalar_riemannian: float
    max_scalar_lorentzian: float
    min_curvature_separation: float
    max_abs_curvature: float
    tolerances: dict = field(default_factory=dict)
    points: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "epsilon": self.epsilon,
            "case": self.case,
            "worst_point": self.worst_point,
            "n_points": self.n_points,
            "passed": self.passed,
            "signature_consistent": self.signature_consistent,
            "signature": self.signature,
            "case_histogram": self.case_histogram,
            "distinct_count_histogram": self.distinct_count_histogram,
            "epsilon1_histogram": self.epsilon1_histogram,
            "max_gauss_residual": self.max_gauss_residual,
            "max_codazzi_residual": self.max_codazzi_residual,
            "connection_maxima": self.connection_maxima,
            "max_dH_dt": self.max_dH_dt,
            "max_dH_du": self.max_dH_du,
            "max_k1_relation": self.max_k1_relation,
            "max_scalar_riemannian": self.max_scalar_riemannian,
            "max_scalar_lorentzian": self.max_scalar_lorentzian,
            "min_curvature_separation": self.min_curvature_separation,
            "max_abs_curvature": self.max_abs_curvature,
            "tolerances": self.tolerances,
        }


def grid_points(domain, shape):
    """Tensor grid over ``domain`` including the end points, in s-major order."""
    axes = []
    for (lo, hi), n in zip(domain, shape):
        n = int(n)
        if n < 2:
            raise ValueError("grid needs at least two points per axis")
        axes.append(np.linspace(lo, hi, n))
    return [(float(s), float(t), float(u)) for s in axes[0] for t in axes[1] for u in axes[2]]


def thread_count():
    raw = os.environ.get("BICONS4_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, min(n, 32))


def _evaluate(patch, index, p, tol):
    try:
        L = LocalGeometry(patch, p, tol)
        rep = residual_from_local(L)
        gauss, codazzi = L.gauss_codazzi()
        conn = {}
        sep = math.nan
        if rep.case is not Case.NON_DIAGONALIZABLE:
            k = np.sort(rep.k)
            sep = float(np.min(np.diff(k)))
            if rep.case is not Case.UMBILIC and L.principal.distinct_count >= 2:
                conn = L.connection().named_components(L.principal.distinct_count)
        sig = "riemannian" if rep.epsilon == -1 else "lorentzian"
        return PointResult(index, p, rep, gauss, codazzi, conn, L.dH.copy(), sep, sig)
    except BiconsError as exc:
        if exc.point is None:
            exc.point = p
        exc.args = (f"{exc.args[0] if exc.args else exc} (at grid point s,t,u = {p})",)
        raise


def _nanmax(values, default=0.0):
    vals = [v for v in values if v is not None and not math.isnan(v)]
    return max(vals) if vals else default


def grid_verify(patch, shape=(8, 8, 8), tol: Tolerances = DEFAULT, threads=None,
                domain=None) -> VerifySummary:
    """Evaluate the residual and the structural checks on a tensor grid.

    Points may be processed concurrently; results are reduced in grid order,
    so the summary does not depend on the number of threads.
    """
    pts = grid_points(domain or patch.domain, shape)
    n_threads = threads or thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(lambda ip: _evaluate(patch, ip[0], ip[1], tol),
                                    enumerate(pts)))
    else:
        results = [_evaluate(patch, i, p, tol) for i, p in enumerate(pts)]
    results.sort(key=lambda r: r.index)
    res = [r.report.residual_norm for r in results]
    worst = max(range(len(res)), key=lambda i: (res[i], -i))
    eps_set = sorted({r.report.epsilon for r in results})
    consistent = len(eps_set) == 1
    cases = Counter(r.report.case.value for r in results)
    case = max(sorted(cases), key=lambda c: cases[c])
    distinct = Counter()
    for r in results:
        if r.report.case is Case.NON_DIAGONALIZABLE:
            distinct["nondiagonalizable"] += 1
        else:
            distinct[str(_distinct(r, tol))] += 1
    eps1 = Counter(str(r.report.epsilon1) for r in results)
    conn_keys = sorted({k for r in results for k in r.connection})
    conn_max = {k: _nanmax(abs(r.connection[k]) for r in results if k in r.connection)
                for k in conn_keys}
    k1rel = [r.report.k1_relation() for r in results if r.report.grad_norm > tol.tau_grad]
    passed = all(r.report.passed for r in results) and consistent
    return VerifySummary(
        max_residual=float(res[worst]),
        mean_residual=float(math.fsum(res) / len(res)),
        epsilon=eps_set[0] if consistent else 0,
        case=case,
        worst_point=list(results[worst].point),
        n_points=len(results),
        passed=bool(passed),
        signature_consistent=consistent,
        signature=results[0].signature if consistent else "mixed",
        case_histogram={k: cases[k] for k in sorted(cases)},
        distinct_count_histogram={k: distinct[k] for k in sorted(distinct)},
        epsilon1_histogram={k: eps1[k] for k in sorted(eps1)},
        max_gauss_residual=float(max(r.gauss for r in results)),
        max_codazzi_residual=float(max(r.codazzi for r in results)),
        connection_maxima=conn_max,
        max_dH_dt=float(max(abs(r.dH[1]) for r in results)),
        max_dH_du=float(max(abs(r.dH[2]) for r in results)),
        max_k1_relation=float(max(k1rel)) if k1rel else 0.0,
        max_scalar_riemannian=float(_nanmax(abs(r.report.scalar_riemannian) for r in results)),
        max_scalar_lorentzian=float(_nanmax(abs(r.report.scalar_lorentzian) for r in results)),
        min_curvature_separation=float(min((r.separation for r in results
                                            if not math.isnan(r.separation)), default=math.nan)),
        max_abs_curvature=float(_nanmax(float(np.max(np.abs(r.report.k))) for r in results)),
        tolerances={"tau_bic": tol.tau_bic, "tau_dist": tol.tau_dist, "tau_grad": tol.tau_grad,
                    "delta_guard": tol.delta_guard},
        points=results,
    )


def _distinct(r: PointResult, tol):
    k = np.sort(r.report.k)[::-1]
    count = 1
    for a, b in zip(k[:-1], k[1:]):
        if abs(a - b) > tol.tau_dist * max(1.0, abs(a), abs(b)):
            count += 1
    return count
