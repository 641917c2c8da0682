"""Catalog of the classified biconservative hypersurface families.

Every family is a *skeleton* -- a parametrization ``x(s, t, u)`` written with
jet arithmetic in terms of one profile function ``f(s)`` -- plus a way of
producing that profile:

* ``closed``: an explicit ``f'`` (and sometimes ``f``), tabulated by quadrature;
* ``ode``: an explicit second-order ODE integrated with RK4;
* ``synthesized``: ``f''`` obtained at every step by solving the scalar
  biconservativity condition of the skeleton itself (:func:`profile_synthesize`).

The ``signature`` parameter selects which scalar condition / closed branch is
*imposed*; the signature a built patch actually has is measured by the
geometry pipeline and reported separately.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import jets
from .config import DEFAULT, Tolerances
from .errors import BadParams, EmptyDomain, IntervalMismatch, NoBracket
from .geometry import LORENTZIAN, RIEMANNIAN, ImmersionPatch, de_sitter, hyperplane, shape_operator_values
from .jets import Jet3, compose
from .profiles import (Guard, ProfileSolution, Provenance, ROTATIONAL_GUARDS, ode_rk4,
                       tabulate_closed_form)
from .surfaces import LEMMA_CASES, build_lemma_surface

SIGNATURES = (RIEMANNIAN, LORENTZIAN)
TWO_PI = 2.0 * math.pi


class FamilyId(enum.Enum):
    X1 = "x1"
    X2 = "x2"
    X3 = "x3"
    X4 = "x4"
    CYL_E3 = "cyl-e3"
    CYL_E31_RIEM = "cyl-e31-riem"
    CYL_E31_LOR = "cyl-e31-lor"
    ROT_COSH_SINH = "rot-cosh"
    ROT_SINH_COSH = "rot-sinh"
    NULL_CONE = "nullcone"
    NULL_CONE_AB0 = "nullcone-ab0"
    LEMMA_SURFACE = "lemma"
    DE_SITTER = "de-sitter"
    HYPERPLANE = "hyperplane"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str                  # "float", "choice", "init", "interval"
    required: bool = False
    default: object = None
    choices: tuple = ()
    help: str = ""

    def to_dict(self):
        d = {"name": self.name, "type": self.kind, "required": self.required}
        if self.default is not None:
            d["default"] = list(self.default) if isinstance(self.default, tuple) else self.default
        if self.choices:
            d["choices"] = list(self.choices)
        if self.help:
            d["help"] = self.help
        return d


@dataclass(frozen=True)
class Family:
    id: FamilyId
    description: str
    source: str
    signatures: tuple
    profile: str                        # "closed" | "ode" | "synthesized" | "none"
    params: tuple
    skeleton: Callable | None = None    # (profile_jet, params) -> evaluator(s, t, u)
    chart: tuple = ((-1.0, 1.0), (-1.0, 1.0))
    probe: tuple = (0.0, 0.0)
    guards: tuple = ()
    distinct: int | None = None         # number of distinct principal curvatures expected

    @property
    def name(self):
        return self.id.value

    def to_dict(self):
        return {"name": self.name, "description": self.description, "source": self.source,
                "signatures": list(self.signatures), "profile": self.profile,
                "distinct_principal_curvatures": self.distinct,
                "params": [p.to_dict() for p in self.params]}


# -- skeletons ---------------------------------------------------------------

def _x1(F, prm):
    def ev(s, t, u):
        su = jets.sin(u)
        return Jet3.stack([F(s), s * jets.cos(t) * su, s * jets.sin(t) * su, s * jets.cos(u)])
    return ev


def _x2(F, prm):
    def ev(s, t, u):
        st = jets.sin(t)
        return Jet3.stack([s * jets.sinh(u) * st, s * jets.cosh(u) * st, s * jets.cos(t), F(s)])
    return ev


def _x3(F, prm):
    # the third component carries the factor s so that the slices are
    # hyperbolic spheres of radius s, as for x1 and x2
    def ev(s, t, u):
        sh = jets.sinh(t)
        return Jet3.stack([s * jets.cosh(t), s * sh * jets.sin(u), s * sh * jets.cos(u), F(s)])
    return ev


def _x4(F, prm):
    def ev(s, t, u):
        f = F(s)
        q = s * (t * t + u * u) * 0.5 + f
        return Jet3.stack([q + s, s * t, s * u, q])
    return ev


def _cyl_e3(F, prm):
    def ev(s, t, u):
        return Jet3.stack([u, s * jets.cos(t), s * jets.sin(t), F(s)])
    return ev


def _cyl_e31(F, prm):
    def ev(s, t, u):
        return Jet3.stack([F(s), s * jets.cos(t), s * jets.sin(t), u])
    return ev


def _rot_cosh(F, prm):
    def ev(s, t, u):
        f = F(s)
        return Jet3.stack([s * jets.cosh(t), s * jets.sinh(t), f * jets.cos(u), f * jets.sin(u)])
    return ev


def _rot_sinh(F, prm):
    def ev(s, t, u):
        f = F(s)
        return Jet3.stack([s * jets.sinh(t), s * jets.cosh(t), f * jets.cos(u), f * jets.sin(u)])
    return ev


def _nullcone(F, prm):
    a = float(prm["a"])

    def ev(s, t, u):
        q = s * (t * t + u * u) * 0.5 + u * u * a + F(s)
        return Jet3.stack([q + s, s * t, (s + 2.0 * a) * u, q])
    return ev


def _nullcone_ab0(F, prm):
    def ev(s, t, u):
        q = s * t * t * 0.5 + F(s)
        return Jet3.stack([q + s, s * t, q, u])
    return ev


# -- registry ------------------------------------------------------------------

_SIG = ParamSpec("signature", "choice", False, RIEMANNIAN, SIGNATURES,
                 "signature whose biconservativity condition is imposed")
_S = ParamSpec("s", "interval", False, None, (), "s-interval lo:hi (default from the domain guard)")
_INIT = ParamSpec("init", "init", False, None, (), "initial data s0,f0,f0'")
_STEP = ParamSpec("step", "float", False, 1e-3, (), "RK4 step")
_SYNTH = (_SIG, _INIT, _STEP, _S)
_NONZERO_S = (Guard("s != 0", lambda s, f, fp: s),)
_LIGHTCONE = (Guard("s != 0", lambda s, f, fp: s),
              Guard("2f'+1 != 0", lambda s, f, fp: 2.0 * fp + 1.0))
_CAUSAL = (Guard("s != 0", lambda s, f, fp: s),
           Guard("f'^2 != 1", lambda s, f, fp: fp * fp - 1.0))

_FAMILIES = [
    Family(FamilyId.X1, "rotation hypersurface with round-sphere slices, time-axis profile",
           "two distinct principal curvatures; x = (f(s), s*S^2)", SIGNATURES, "closed",
           (ParamSpec("c1", "float", True, None, (), "profile constant"),
            ParamSpec("branch", "choice", False, "minus", ("minus", "plus"),
                      "sign under the root: f' = c s^2/sqrt(c^2 s^4 -+ 1) (riemannian), "
                      "c/sqrt(c^2 -+ s^(4/3)) (lorentzian)"),
            _SIG, _S),
           _x1, ((0.0, TWO_PI), (0.4, math.pi - 0.4)), (0.7, 1.1), (), 2),
    Family(FamilyId.X2, "hypersurface with de Sitter 2-sphere slices, spacelike-axis profile",
           "two distinct principal curvatures; x = (s*S^2_1, f(s))", (LORENTZIAN,), "synthesized",
           _SYNTH, _x2, ((0.4, math.pi - 0.4), (-1.0, 1.0)), (1.1, 0.3), _NONZERO_S, 2),
    Family(FamilyId.X3, "hypersurface with hyperbolic-plane slices, spacelike-axis profile",
           "two distinct principal curvatures; x = (s*H^2, f(s))", SIGNATURES, "synthesized",
           _SYNTH, _x3, ((0.3, 1.5), (0.0, TWO_PI)), (0.8, 0.5), _CAUSAL, 2),
    Family(FamilyId.X4, "hypersurface with flat (null-cone) slices",
           "two distinct principal curvatures; x = (s(t^2+u^2)/2 + s + f, st, su, s(t^2+u^2)/2 + f)",
           SIGNATURES, "synthesized", _SYNTH, _x4, ((-1.0, 1.0), (-1.0, 1.0)), (0.3, -0.2),
           _LIGHTCONE, 2),
    Family(FamilyId.CYL_E3, "cylinder over a rotational surface of E^3 along a timelike line",
           "three distinct principal curvatures, one identically zero", (LORENTZIAN,),
           "synthesized", _SYNTH, _cyl_e3, ((0.0, TWO_PI), (-1.0, 1.0)), (0.5, 0.2), _NONZERO_S, 3),
    Family(FamilyId.CYL_E31_RIEM, "cylinder over a spacelike rotational surface of E^3_1",
           "one principal curvature identically zero; |f'| < 1", (RIEMANNIAN,), "synthesized",
           _SYNTH, _cyl_e31, ((0.0, TWO_PI), (-1.0, 1.0)), (0.5, 0.2), _CAUSAL, 3),
    Family(FamilyId.CYL_E31_LOR, "cylinder over a timelike rotational surface of E^3_1",
           "three distinct principal curvatures, one identically zero; |f'| > 1", (LORENTZIAN,),
           "synthesized", _SYNTH, _cyl_e31, ((0.0, TWO_PI), (-1.0, 1.0)), (0.5, 0.2), _CAUSAL, 3),
    Family(FamilyId.ROT_COSH_SINH, "hypersurface (s cosh t, s sinh t, f cos u, f sin u)",
           "three distinct principal curvatures; explicit ODE", SIGNATURES, "ode",
           (_SIG, ParamSpec("variant", "choice", False, "exact", ("exact", "alt-sign"),
                            "exact: ODE equivalent to the biconservative condition; alt-sign: "
                            "the variant with the opposite relative signs of the curvatures"),
            _INIT, _STEP, _S),
           _rot_cosh, ((-1.0, 1.0), (0.0, TWO_PI)), (0.3, 0.4), ROTATIONAL_GUARDS, 3),
    Family(FamilyId.ROT_SINH_COSH, "hypersurface (s sinh t, s cosh t, f cos u, f sin u)",
           "three distinct principal curvatures; explicit ODE; x_t is timelike", SIGNATURES, "ode",
           (ParamSpec("signature", "choice", False, LORENTZIAN, SIGNATURES,
                      "lorentzian: exact ODE; riemannian: only the alt-sign variant exists"),
            ParamSpec("variant", "choice", False, "exact", ("exact", "alt-sign")),
            _INIT, _STEP, _S),
           _rot_sinh, ((-1.0, 1.0), (0.0, TWO_PI)), (0.3, 0.4),
           (Guard("s != 0", lambda s, f, fp: s), Guard("f != 0", lambda s, f, fp: f)), 3),
    Family(FamilyId.NULL_CONE, "hypersurface with flat slices built on the null cone, a != 0",
           "three distinct principal curvatures; closed-form profile", SIGNATURES, "closed",
           (ParamSpec("a", "float", True, None, (), "nonzero shift"),
            ParamSpec("c1", "float", True, None, (), "profile constant"), _SIG, _S),
           _nullcone, ((-1.0, 1.0), (-1.0, 1.0)), (0.3, -0.4),
           (Guard("s != 0", lambda s, f, fp: s),), 3),
    Family(FamilyId.NULL_CONE_AB0, "degenerate (a = 0 direction collapsed) null-cone construction",
           "one principal curvature identically zero; closed-form profile 2f'+1 = c s^-2 or c s^(2/3)",
           SIGNATURES, "closed",
           (ParamSpec("c1", "float", True, None, (), "profile constant"), _SIG, _S),
           _nullcone_ab0, ((-1.0, 1.0), (-1.0, 1.0)), (0.3, 0.2), _LIGHTCONE, 3),
    Family(FamilyId.LEMMA_SURFACE, "model slice surfaces (codimension two), cases i..xi",
           "flat or pseudo-spherical surfaces with parallel normal frame", (), "none",
           (ParamSpec("case", "choice", True, None, LEMMA_CASES),
            ParamSpec("A", "float"), ParamSpec("B", "float"), ParamSpec("r", "float"))),
    Family(FamilyId.DE_SITTER, "de Sitter space (umbilic, constant mean curvature)",
           "reference patch", (LORENTZIAN,), "none",
           (ParamSpec("radius", "float", False, 1.0),), None,
           ((0.3, 2.8), (0.0, TWO_PI)), (1.0, 1.0), (), 1),
    Family(FamilyId.HYPERPLANE, "spacelike hyperplane x0 = 0 (totally geodesic)",
           "reference patch", (RIEMANNIAN,), "none", (), None,
           ((-1.0, 1.0), (-1.0, 1.0)), (0.0, 0.0), (), 1),
]

REGISTRY = {f.name: f for f in _FAMILIES}


def get_family(family) -> Family:
    if isinstance(family, Family):
        return family
    key = family.value if isinstance(family, FamilyId) else str(family).lower()
    try:
        return REGISTRY[key]
    except KeyError:
        raise BadParams(f"unknown family {family!r}; known: {', '.join(REGISTRY)}") from None


# -- parameters --------------------------------------------------------------

def _float(params, name, required=True, nonzero=False):
    v = params.get(name)
    if v is None:
        if required:
            raise BadParams(f"missing required parameter {name!r}")
        return None
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise BadParams(f"parameter {name!r} must be a number, got {v!r}") from None
    if not math.isfinite(v) or (nonzero and v == 0.0):
        raise BadParams(f"parameter {name!r} must be finite{' and nonzero' if nonzero else ''}")
    return v


def _signature(fam, params):
    sig = str(params.get("signature") or next(p.default for p in fam.params if p.name == "signature")).lower()
    if sig not in fam.signatures:
        raise BadParams(f"family {fam.name} has no {sig} variant (allowed: {', '.join(fam.signatures)})")
    return sig


def _interval(params, name="s"):
    v = params.get(name)
    if v is None:
        return None
    lo, hi = (float(x) for x in v)
    if not lo < hi:
        raise BadParams(f"interval {name} must satisfy lo < hi, got {lo}:{hi}")
    return lo, hi


# -- domain guards --------------------------------------------------------------

def domain_guard(family, params, tol: Tolerances = DEFAULT):
    """Open s-intervals on which the closed-form profile and the metric are regular.

    Each bound keeps the relevant square-root argument or denominator above
    ``delta_guard``.  Families whose profile comes from an ODE only get the
    ``s > delta`` restriction; their remaining singular loci are guarded
    during integration.
    """
    fam = get_family(family)
    d = tol.delta_guard
    inf = math.inf
    if fam.id is FamilyId.X1:
        c = _float(params, "c1", nonzero=True)
        sig = _signature(fam, params)
        branch = params.get("branch") or "minus"
        if branch not in ("minus", "plus"):
            raise BadParams(f"branch must be 'minus' or 'plus', got {branch!r}")
        if branch == "plus":
            out = [(d, inf)]
        elif sig == RIEMANNIAN:       # c^2 s^4 - 1 > delta
            out = [(max(d, ((1.0 + d) / (c * c)) ** 0.25), inf)]
        else:                         # c^2 - s^(4/3) > delta
            out = [(d, (c * c - d) ** 0.75)] if c * c > d else []
    elif fam.id is FamilyId.NULL_CONE:
        a = _float(params, "a", nonzero=True)
        _float(params, "c1", nonzero=True)
        out = [(max(0.0, -2.0 * a) + d, inf)]          # s > 0 and s + 2a > 0
    elif fam.id is FamilyId.NULL_CONE_AB0:
        _float(params, "c1", nonzero=True)
        out = [(d, inf)]
    elif fam.id in (FamilyId.LEMMA_SURFACE,):
        out = [(-inf, inf)]
    elif fam.id is FamilyId.DE_SITTER:
        out = [(-inf, inf)]
    elif fam.id is FamilyId.HYPERPLANE:
        out = [(-inf, inf)]
    else:
        out = [(d, inf)]
    out = [(lo, hi) for lo, hi in out if hi - lo > d]
    if not out:
        raise EmptyDomain(f"no admissible s-interval for {fam.name} with {params}")
    return out


def default_interval(family, params, tol: Tolerances = DEFAULT):
    fam = get_family(family)
    lo, hi = domain_guard(fam, params, tol)[0]
    if fam.id is FamilyId.X1 and (params.get("branch") or "minus") == "minus":
        if math.isinf(hi):
            return 1.1 * lo, 2.5 * lo
        return 0.2 * hi, 0.9 * hi
    if fam.id is FamilyId.NULL_CONE:
        base = max(lo, 0.0)
        return base + 0.5, base + 3.0
    if fam.id in (FamilyId.DE_SITTER,):
        return -1.0, 1.0
    if fam.id is FamilyId.HYPERPLANE:
        return -1.0, 1.0
    if math.isinf(hi):
        lo = max(lo, 0.5)
        return lo, lo + 2.0
    return lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)


# -- closed-form profiles -------------------------------------------------------

def _closed_fp(fam, params, sig):
    """Return ``(fp_jet, f_jet or None)`` for a closed-form family."""
    if fam.id is FamilyId.X1:
        c = _float(params, "c1", nonzero=True)
        comp = (params.get("branch") or "minus") == "plus"
        if sig == RIEMANNIAN:
            def fp(s):
                q = s * s
                root = jets.sqrt((q * q) * (c * c) + 1.0) if comp else jets.sqrt((q * q) * (c * c) - 1.0)
                return q * c / root
        else:
            def fp(s):
                q = jets.pow_const(s, 4.0 / 3.0)
                root = jets.sqrt(q + c * c) if comp else jets.sqrt((q * -1.0) + c * c)
                return Jet3.constant(c) / root if isinstance(root, Jet3) else c / root
        return fp, None
    if fam.id is FamilyId.NULL_CONE:
        a = _float(params, "a", nonzero=True)
        c = _float(params, "c1", nonzero=True)
        if sig == RIEMANNIAN:
            k = 8.0 * c * a**3

            def fp(s):
                w = s * (s + 2.0 * a)
                return (k / (w * w) - 1.0) * 0.5

            def f(s):
                s2 = s + 2.0 * a
                return (jets.ln(s2) - jets.ln(s) - a / s - a / s2) * c - s * 0.5
            return fp, f

        def fp(s):
            return jets.pow_const(s * (s + 2.0 * a), 2.0 / 3.0) * c - 0.5
        return fp, None
    if fam.id is FamilyId.NULL_CONE_AB0:
        c = _float(params, "c1", nonzero=True)
        if sig == RIEMANNIAN:
            def fp(s):
                return (c / (s * s) - 1.0) * 0.5

            def f(s):
                return (c / s + s) * -0.5
            return fp, f

        def fp(s):
            return (jets.pow_const(s, 2.0 / 3.0) * c - 1.0) * 0.5

        def f(s):
            return (jets.pow_const(s, 5.0 / 3.0) * (0.6 * c) - s) * 0.5
        return fp, f
    raise BadParams(f"family {fam.name} has no closed-form profile")


def profile_closed_form(family, params, n=201, tol: Tolerances = DEFAULT) -> ProfileSolution:
    """Tabulate a closed-form profile on the requested (guarded) s-interval.

    ``f`` vanishes at the left end of the interval (the integration constant
    only translates the hypersurface).
    """
    fam = get_family(family)
    sig = _signature(fam, params)
    guards = domain_guard(fam, params, tol)
    s_int = _interval(params) or default_interval(fam, params, tol)
    if not any(lo <= s_int[0] and s_int[1] <= hi for lo, hi in guards):
        raise BadParams(f"s-interval {s_int[0]}:{s_int[1]} leaves the admissible domain "
                        f"{[(lo, hi) for lo, hi in guards]}")
    fp, f = _closed_fp(fam, params, sig)
    meta = {"family": fam.name, "signature": sig}
    meta.update({k: params[k] for k in ("c1", "a", "branch") if params.get(k) is not None})
    return tabulate_closed_form(fp, s_int[0], s_int, n=n, f_jet=f, meta=meta)


# -- explicit ODE profiles ---------------------------------------------------------

def rotational_rhs(family, signature, variant="exact"):
    """Right-hand side ``F(s, f, f')`` of the profile ODE of the rotational families."""
    fam = get_family(family)
    if variant not in ("exact", "alt-sign"):
        raise BadParams(f"variant must be 'exact' or 'alt-sign', got {variant!r}")
    if fam.id is FamilyId.ROT_COSH_SINH:
        sign = 1.0 if variant == "alt-sign" else -1.0
        if signature == RIEMANNIAN:
            return lambda s, f, fp: sign * (fp * fp - 1.0) * (f * fp + s) / (s * f)
        return lambda s, f, fp: -sign * (fp * fp - 1.0) * (f * fp + s) / (3.0 * s * f)
    if fam.id is FamilyId.ROT_SINH_COSH:
        if variant == "alt-sign":
            if signature != RIEMANNIAN:
                raise BadParams("rot-sinh alt-sign variant is the riemannian-labelled equation")
            return lambda s, f, fp: (fp * fp + 1.0) * (f * fp + s) / (s * f)
        if signature != LORENTZIAN:
            raise BadParams("rot-sinh is Lorentzian for every profile (x_t is timelike); "
                            "use signature lorentzian or variant alt-sign")
        return lambda s, f, fp: (fp * fp + 1.0) * (s - f * fp) / (3.0 * s * f)
    raise BadParams(f"family {fam.name} has no explicit profile ODE")


_DEFAULT_INIT = {
    ("rot-cosh", RIEMANNIAN): (1.0, 1.0, 2.0),
    ("rot-cosh", LORENTZIAN): (1.0, 1.0, 0.5),
    ("rot-sinh", LORENTZIAN): (1.0, 1.0, 0.5),
    ("rot-sinh", RIEMANNIAN): (1.0, 1.0, 0.5),
    ("x2", LORENTZIAN): (1.0, 0.0, 0.5),
    ("x3", RIEMANNIAN): (1.0, 0.0, 2.0),
    ("x3", LORENTZIAN): (1.0, 0.0, 0.5),
    ("x4", RIEMANNIAN): (1.0, 0.0, -1.0),
    ("x4", LORENTZIAN): (1.0, 0.0, 0.0),
    ("cyl-e3", LORENTZIAN): (1.0, 0.0, 0.5),
    ("cyl-e31-riem", RIEMANNIAN): (1.0, 0.0, 0.5),
    ("cyl-e31-lor", LORENTZIAN): (1.0, 0.0, 2.0),
}


def _init_and_interval(fam, sig, params):
    init = params.get("init") or _DEFAULT_INIT[(fam.name, sig)]
    if len(init) != 3:
        raise BadParams("init needs three numbers s0,f0,f0'")
    init = tuple(float(x) for x in init)
    step = _float(params, "step", required=False)
    step = 1e-3 if step is None else step
    if not step > 0:
        raise BadParams(f"step must be positive, got {step}")
    s_int = _interval(params) or (init[0], init[0] + 0.5)
    return init, step, s_int


def profile_ode(family, params, tol: Tolerances = DEFAULT) -> ProfileSolution:
    fam = get_family(family)
    sig = _signature(fam, params)
    variant = params.get("variant") or "exact"
    F = rotational_rhs(fam, sig, variant)
    init, step, s_int = _init_and_interval(fam, sig, params)
    meta = {"family": fam.name, "signature": sig, "variant": variant, "init": list(init)}
    return ode_rk4(F, init, step, s_int, guards=fam.guards, delta=tol.delta_guard, meta=meta)


# -- synthesis -----------------------------------------------------------------

def scalar_condition(S, signature):
    """Scalar biconservativity condition with ``k1`` the curvature along ``d/ds``.

    Riemannian: ``k1 - (k2 + k3)``; Lorentzian: ``3 k1 + (k2 + k3)``.
    """
    vals, vecs = np.linalg.eig(S)
    col = np.abs(vecs[0]) / np.linalg.norm(vecs, axis=0)
    i = int(np.argmax(col))
    k1 = float(vals[i].real)
    rest = float(np.trace(S)) - k1
    return k1 - rest if signature == RIEMANNIAN else 3.0 * k1 + rest


def _solve_fpp(cond, s, guess):
    w = 1e-3 * max(1.0, abs(guess))
    lo_v = hi_v = None
    for _ in range(80):
        a, b = guess - w, guess + w
        try:
            lo_v, hi_v = cond(a), cond(b)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError):
            lo_v = hi_v = math.nan
        if math.isfinite(lo_v) and math.isfinite(hi_v) and lo_v * hi_v <= 0.0:
            if lo_v == 0.0:
                return a
            if hi_v == 0.0:
                return b
            return brentq(cond, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        w *= 2.0
    raise NoBracket(f"no sign change of the biconservativity condition in f'' at s = {s:.12g}",
                    s=s)


def profile_synthesize(family, signature, init, interval, step=1e-3, params=None,
                       tol: Tolerances = DEFAULT, probe=None) -> ProfileSolution:
    """Integrate the profile whose ``f''`` makes the skeleton biconservative.

    At every RK4 stage the scalar condition (see :func:`scalar_condition`) is
    evaluated at the fixed chart point ``(s, t0, u0)`` as a function of
    ``f''`` alone, bracketed by doubling and solved with Brent's method.
    """
    fam = get_family(family)
    params = dict(params or {})
    if fam.skeleton is None:
        raise BadParams(f"family {fam.name} has no profile to synthesize")
    if signature not in SIGNATURES:
        raise BadParams(f"unknown signature {signature!r}")
    t0, u0 = probe or fam.probe
    last = {"fpp": 0.0}

    def F(s, f, fp):
        def cond(fpp):
            ev = fam.skeleton(lambda sj: compose(sj, (f, fp, fpp, 0.0)), params)
            S, _, _ = shape_operator_values(ev, (s, t0, u0), tol)
            return scalar_condition(S, signature)
        root = _solve_fpp(cond, s, last["fpp"])
        last["fpp"] = root
        return root

    meta = {"family": fam.name, "signature": signature, "init": [float(x) for x in init]}
    return ode_rk4(F, init, step, interval, guards=fam.guards, delta=tol.delta_guard,
                   provenance=Provenance.SYNTHESIZED, meta=meta)


# -- dispatch ----------------------------------------------------------------------

def make_profile(family, params, tol: Tolerances = DEFAULT) -> ProfileSolution | None:
    """Default profile for ``family`` from its parameters."""
    fam = get_family(family)
    if fam.profile == "closed":
        return profile_closed_form(fam, params, tol=tol)
    if fam.profile == "ode":
        return profile_ode(fam, params, tol)
    if fam.profile == "synthesized":
        sig = _signature(fam, params)
        init, step, s_int = _init_and_interval(fam, sig, params)
        return profile_synthesize(fam, sig, init, s_int, step, params, tol)
    return None


def build_family(family, params=None, profile: ProfileSolution | None = None,
                 s_interval=None, tol: Tolerances = DEFAULT):
    """Build the patch of ``family``; lemma surfaces return a surface patch.

    The s-range is ``s_interval``, else the ``s`` parameter, else the
    profile's valid interval.
    """
    fam = get_family(family)
    params = dict(params or {})
    if fam.id is FamilyId.LEMMA_SURFACE:
        case = params.get("case")
        if case is None:
            raise BadParams("missing required parameter 'case'")
        return build_lemma_surface(case, **{k: params[k] for k in ("A", "B", "r")
                                            if params.get(k) is not None})
    if fam.id is FamilyId.DE_SITTER:
        r = _float(params, "radius", required=False) or 1.0
        s_int = s_interval or _interval(params) or (-1.0, 1.0)
        return de_sitter(r, (tuple(s_int),) + fam.chart)
    if fam.id is FamilyId.HYPERPLANE:
        s_int = s_interval or _interval(params) or (-1.0, 1.0)
        return hyperplane((tuple(s_int),) + fam.chart)
    if profile is None:
        profile = make_profile(fam, params, tol)
    s_int = tuple(s_interval or _interval(params) or profile.valid_interval)
    if not s_int[0] < s_int[1]:
        raise BadParams(f"empty s-interval {s_int}")
    profile.check_interval(*s_int)
    ev = fam.skeleton(profile.jet, params)
    label = fam.name
    return ImmersionPatch((tuple(float(x) for x in s_int),) + fam.chart, ev,
                          {k: v for k, v in params.items() if v is not None}, label)
