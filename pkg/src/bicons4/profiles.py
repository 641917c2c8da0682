"""One-variable profile functions and the numerical tools that produce them.

A :class:`ProfileSolution` tabulates ``f, f', f''`` on an increasing grid and
interpolates them with the quintic Hermite polynomial matching all three
values at both ends of every cell, so ``f'''`` (needed by third-order jets)
is the derivative of a genuinely C^2 interpolant.  Closed-form profiles carry
an ``analytic`` callable instead and are never interpolated.
"""

import csv
import enum
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import BPoly

from .errors import GuardHit, IntervalMismatch, NoConvergence, SingularEndpoint
from .jets import INDEX, Jet3, compose

CSV_HEADER = ("s", "f", "fp", "fpp")


class Provenance(enum.Enum):
    QUADRATURE = "Quadrature"
    EXPLICIT_ODE = "ExplicitODE"
    SYNTHESIZED = "Synthesized"
    IMPORTED = "Imported"


# -- quadrature -----------------------------------------------------------

def integrate(fn, a, b, tol=1e-10, limit=200):
    """Adaptive Gauss-Kronrod quadrature of ``fn`` over ``[a, b]``.

    Raises :class:`SingularEndpoint` if ``fn`` is not finite at an endpoint
    and :class:`NoConvergence` if the error estimate stays above ``tol``.
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    for end in (a, b):
        try:
            v = float(fn(end))
        except (ZeroDivisionError, ValueError, OverflowError):
            v = math.nan
        if not math.isfinite(v):
            raise SingularEndpoint(f"integrand not finite at endpoint {end}", point=end)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with np.errstate(all="ignore"):
            try:
                res = quad(fn, a, b, epsabs=tol, epsrel=0.0, limit=limit, full_output=1)
            except (ZeroDivisionError, ValueError, OverflowError) as exc:
                raise NoConvergence(f"quadrature on [{a}, {b}] failed: {exc}") from None
    value, err = res[0], res[1]
    if len(res) > 3 or not math.isfinite(value) or not err <= tol:
        raise NoConvergence(f"quadrature on [{a}, {b}] did not converge "
                            f"(estimate {value!r}, error {err!r})")
    return float(value)


# -- profile container ----------------------------------------------------

@dataclass(frozen=True)
class ProfileSolution:
    grid: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    provenance: Provenance
    valid_interval: tuple
    analytic: Callable | None = None    # s -> (f, f', f'', f''') for closed forms
    meta: dict = field(default_factory=dict)
    _interp: object = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        for name in ("grid", "f", "fp", "fpp"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.grid.ndim != 1 or len(self.grid) < 2:
            raise ValueError("profile grid needs at least two samples")
        if not np.all(np.diff(self.grid) > 0):
            raise ValueError("profile grid must be strictly increasing")
        if not (len(self.f) == len(self.fp) == len(self.fpp) == len(self.grid)):
            raise ValueError("profile arrays have mismatched lengths")
        lo, hi = self.valid_interval
        object.__setattr__(self, "valid_interval", (float(lo), float(hi)))
        if self.analytic is None:
            y = np.stack([self.f, self.fp, self.fpp], axis=1)
            object.__setattr__(self, "_interp", BPoly.from_derivatives(self.grid, y))

    @property
    def interval(self):
        return float(self.grid[0]), float(self.grid[-1])

    def check_interval(self, lo, hi):
        a, b = self.valid_interval
        slack = 1e-12 * max(1.0, abs(a), abs(b))
        if lo < a - slack or hi > b + slack:
            raise IntervalMismatch(f"requested s-interval [{lo}, {hi}] not inside the "
                                   f"profile's valid interval [{a}, {b}]")

    def derivs(self, s):
        """``(f, f', f'', f''')`` at ``s``."""
        s = float(s)
        if self.analytic is not None:
            return tuple(float(v) for v in self.analytic(s))
        a, b = self.interval
        if not (a - 1e-12 * max(1.0, abs(a)) <= s <= b + 1e-12 * max(1.0, abs(b))):
            raise IntervalMismatch(f"s = {s} outside the tabulated profile [{a}, {b}]")
        p = self._interp
        return tuple(float(p(s, nu=k)) for k in range(4))

    def __call__(self, s):
        return self.derivs(s)[0]

    def jet(self, s_jet: Jet3) -> Jet3:
        """Lift ``f`` to a jet by composition with the chart variable ``s``."""
        return compose(s_jet, self.derivs(s_jet.value))

    # -- CSV ---------------------------------------------------------------
    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(self.grid, self.f, self.fp, self.fpp):
            w.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source):
        """Read a profile from a path or an open text stream."""
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, newline="") as fh:
                text = fh.read()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(h.strip() for h in rows[0]) != CSV_HEADER:
            raise ValueError(f"profile CSV must start with header {','.join(CSV_HEADER)}")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        if data.ndim != 2 or data.shape[0] < 2:
            raise ValueError("profile CSV needs at least two data rows")
        g = data[:, 0]
        return cls(g, data[:, 1], data[:, 2], data[:, 3], Provenance.IMPORTED,
                   (float(g[0]), float(g[-1])))


def tabulate_closed_form(fp_jet, s0, interval, n=201, f0=0.0, f_jet=None, tol=1e-11,
                         meta=None):
    """Closed-form profile given ``f'`` as a jet-capable function of ``s``.

    ``f`` is obtained by quadrature from ``s0`` (``f(s0) = f0``) unless an
    explicit antiderivative ``f_jet`` is supplied.  ``f'``, ``f''`` and ``f'''``
    come from the jet of ``fp_jet`` and are exact.
    """
    lo, hi = (float(x) for x in interval)
    s0 = float(s0)

    def fp_val(s):
        return float(fp_jet(Jet3.constant(s)).value)

    def fp_derivs(s):
        j = fp_jet(Jet3.variable(s, 0))
        c = j.c
        return float(c[0]), float(c[INDEX[(1, 0, 0)]]), float(c[INDEX[(2, 0, 0)]])

    grid = np.linspace(lo, hi, n)
    if f_jet is None:
        # cumulative quadrature outward from s0, one cell at a time
        nodes = np.union1d(grid, [s0])
        k0 = int(np.searchsorted(nodes, s0))
        fvals = np.empty(len(nodes))
        fvals[k0] = f0
        for k in range(k0 + 1, len(nodes)):
            fvals[k] = fvals[k - 1] + integrate(fp_val, nodes[k - 1], nodes[k], tol)
        for k in range(k0 - 1, -1, -1):
            fvals[k] = fvals[k + 1] - integrate(fp_val, nodes[k], nodes[k + 1], tol)

        def f_val(s):
            k = int(np.clip(np.searchsorted(nodes, s), 0, len(nodes) - 1))
            if k > 0 and abs(nodes[k - 1] - s) < abs(nodes[k] - s):
                k -= 1
            return fvals[k] + integrate(fp_val, nodes[k], s, tol)
    else:
        shift = f0 - float(f_jet(Jet3.constant(s0)).value)

        def f_val(s):
            return float(f_jet(Jet3.constant(s)).value) + shift

    def analytic(s):
        fp, fpp, fppp = fp_derivs(s)
        return f_val(s), fp, fpp, fppp

    rows = np.array([analytic(s) for s in grid])
    return ProfileSolution(grid, rows[:, 0], rows[:, 1], rows[:, 2], Provenance.QUADRATURE,
                           (lo, hi), analytic=analytic, meta=dict(meta or {}))


# -- explicit second-order ODEs -------------------------------------------

@dataclass(frozen=True)
class Guard:
    """Signed quantity ``fn(s, f, fp)`` that must stay away from zero.

    Along an integration ``|fn| > delta`` must hold and ``fn`` must keep the
    sign it has at the initial point, so a step that jumps across the
    singular locus is rejected as well.
    """
    name: str
    fn: Callable


ROTATIONAL_GUARDS = (
    Guard("s != 0", lambda s, f, fp: s),
    Guard("f != 0", lambda s, f, fp: f),
    Guard("f'^2 != 1", lambda s, f, fp: fp * fp - 1.0),
)


def _rk4_step(F, s, y, h):
    def rhs(s_, y_):
        return np.array([y_[1], F(s_, y_[0], y_[1])])
    k1 = rhs(s, y)
    k2 = rhs(s + h / 2, y + h / 2 * k1)
    k3 = rhs(s + h / 2, y + h / 2 * k2)
    k4 = rhs(s + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _guard_values(guards, s, y):
    with np.errstate(all="ignore"):
        return [float(g.fn(s, float(y[0]), float(y[1]))) for g in guards]


def _violated(guards, delta, s, y, signs=None):
    """Name of the first guard that fails at ``(s, y)``, else ``None``."""
    for k, (g, v) in enumerate(zip(guards, _guard_values(guards, s, y))):
        if not (math.isfinite(v) and abs(v) > delta):
            return g.name
        if signs is not None and np.sign(v) != signs[k]:
            return g.name
    return None


def _march(F, s0, y0, end, step, guards, delta, max_halvings, signs):
    out = [(s0, y0[0], y0[1])]
    s, y = s0, np.array(y0, dtype=float)
    direction = 1.0 if end > s0 else -1.0
    h_nom = step * direction
    # nodes are anchor + k h_nom (no drift from repeated addition); a halved
    # step moves the anchor
    anchor, k = s0, 0
    tiny = 1e-12 * max(1.0, abs(end))
    while direction * (end - s) > tiny:
        h = h_nom if direction * (end - (s + h_nom)) > 0 else end - s
        for _ in range(max_halvings + 1):
            with np.errstate(all="ignore"):
                try:
                    y_new = _rk4_step(F, s, y, h)
                except (ZeroDivisionError, ValueError, OverflowError, ArithmeticError):
                    y_new = np.array([math.nan, math.nan])
            bad = None if np.all(np.isfinite(y_new)) else "finite right-hand side"
            bad = bad or _violated(guards, delta, s + h, y_new, signs)
            if bad is None:
                break
            h /= 2.0
        else:
            raise GuardHit(f"integration stopped at s = {s:.12g}: guard '{bad}' violated",
                           s=s, guard=bad)
        if h == end - s:
            s = end
        elif h == h_nom:
            k += 1
            s = anchor + k * h_nom
        else:
            anchor, k = s + h, 0
            s = anchor
        if direction * (end - s) <= tiny:
            s = end
        y = y_new
        out.append((s, y[0], y[1]))
    return out


def ode_rk4(F, init, step, interval=None, guards=(), delta=1e-4, max_halvings=20,
            provenance=Provenance.EXPLICIT_ODE, meta=None):
    """Classical RK4 for ``f'' = F(s, f, f')`` from ``init = (s0, f0, f0')``.

    The fixed ``step`` is halved (up to ``max_halvings`` times) whenever a full
    step would leave the guarded region or produce non-finite values; if that
    does not help, :class:`GuardHit` reports the last safe ``s``.  ``interval``
    may extend on either side of ``s0``; the default is ``[s0, s0 + 1]``.
    """
    s0, f0, fp0 = (float(x) for x in init)
    step = float(step)
    if not step > 0:
        raise ValueError("step must be positive")
    lo, hi = (s0, s0 + 1.0) if interval is None else (float(interval[0]), float(interval[1]))
    if not lo <= s0 <= hi or lo == hi:
        raise ValueError(f"initial point s0 = {s0} must lie in the interval [{lo}, {hi}]")
    name = _violated(guards, delta, s0, (f0, fp0))
    if name is not None:
        raise GuardHit(f"initial data violates guard '{name}'", s=s0, guard=name)
    signs = np.sign(_guard_values(guards, s0, (f0, fp0)))
    args = (step, guards, delta, max_halvings, signs)
    fwd = _march(F, s0, (f0, fp0), hi, *args) if hi > s0 else [(s0, f0, fp0)]
    bwd = _march(F, s0, (f0, fp0), lo, *args) if lo < s0 else [(s0, f0, fp0)]
    rows = bwd[::-1] + fwd[1:]
    s = np.array([r[0] for r in rows])
    f = np.array([r[1] for r in rows])
    fp = np.array([r[2] for r in rows])
    fpp = np.array([F(si, fi, fpi) for si, fi, fpi in rows])
    return ProfileSolution(s, f, fp, fpp, provenance, (lo, hi), meta=dict(meta or {}))
