"""Third-order forward-mode jets in three chart variables (s, t, u).

A :class:`Jet3` stores, for every multi-index ``(i, j, k)`` with
``i + j + k <= 3``, the plain partial derivative
``d^(i+j+k) f / ds^i dt^j du^k`` at the base point (no factorial scaling).
That is 20 coefficients.  Coefficients live on the leading axis of ``c``; any
trailing axes make the jet tensor-valued (a point of E^4_1 is a jet of shape
``(4,)``, a metric is a jet of shape ``(3, 3)``) and arithmetic broadcasts
over them.

After :meth:`Jet3.diff` the top-order coefficients of the result are unknown
and set to zero, so a jet obtained by k differentiations is only trustworthy
up to order ``3 - k``.  Products never mix a wrong high-order coefficient
into a lower order, so callers just have to read the orders they trust.
"""

import math

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DivisionNearZero, DomainError, OrderOverflow

ORDER = 3


def _multi_indices():
    out = []
    for d in range(ORDER + 1):
        for i in range(d, -1, -1):
            for j in range(d - i, -1, -1):
                out.append((i, j, d - i - j))
    return out


MULTI_INDICES = _multi_indices()
NCOEF = len(MULTI_INDICES)
INDEX = {m: n for n, m in enumerate(MULTI_INDICES)}
DEGREE = np.array([sum(m) for m in MULTI_INDICES])


def _product_table():
    rows_a, rows_b, rows_out, weights = [], [], [], []
    for g, gamma in enumerate(MULTI_INDICES):
        for a, alpha in enumerate(MULTI_INDICES):
            if any(x > y for x, y in zip(alpha, gamma)):
                continue
            beta = tuple(y - x for x, y in zip(alpha, gamma))
            rows_a.append(a)
            rows_b.append(INDEX[beta])
            rows_out.append(g)
            weights.append(math.prod(math.comb(y, x) for x, y in zip(alpha, gamma)))
    scatter = np.zeros((NCOEF, len(rows_a)))
    scatter[rows_out, np.arange(len(rows_a))] = weights
    return np.array(rows_a), np.array(rows_b), scatter


_PA, _PB, _SCATTER = _product_table()


def _shift_table(axis):
    src = np.zeros(NCOEF, dtype=int)
    keep = np.zeros(NCOEF, dtype=bool)
    for n, m in enumerate(MULTI_INDICES):
        if sum(m) < ORDER:
            up = list(m)
            up[axis] += 1
            src[n] = INDEX[tuple(up)]
            keep[n] = True
    return src, keep


_SHIFT = [_shift_table(a) for a in range(3)]


def _pad(c, ndim):
    extra = ndim - (c.ndim - 1)
    if extra <= 0:
        return c
    return c.reshape((c.shape[0],) + (1,) * extra + c.shape[1:])


def _align(a, b):
    """Pad trailing shapes so numpy broadcasting matches the tensor axes."""
    nd = max(a.ndim, b.ndim) - 1
    return _pad(a, nd), _pad(b, nd)


def _scatter(products):
    shape = products.shape[1:]
    flat = products.reshape(products.shape[0], -1)
    return (_SCATTER @ flat).reshape((NCOEF,) + shape)


class Jet3:
    """Truncated third-order Taylor data of a (possibly tensor-valued) map."""

    __slots__ = ("c",)
    __array_priority__ = 100

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.shape[0] != NCOEF:
            raise ValueError(f"leading axis must have {NCOEF} coefficients")

    @classmethod
    def constant(cls, value):
        value = np.asarray(value, dtype=float)
        c = np.zeros((NCOEF,) + value.shape)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, value, axis):
        c = np.zeros(NCOEF)
        c[0] = value
        c[INDEX[tuple(1 if a == axis else 0 for a in range(3))]] = 1.0
        return cls(c)

    @classmethod
    def from_univariate(cls, derivs, axis=0):
        """Jet of ``g(s)`` (or of t/u for ``axis=1,2``) from ``[g, g', g'', g''']``."""
        c = np.zeros(NCOEF)
        for k, d in enumerate(derivs[: ORDER + 1]):
            c[INDEX[tuple(k if a == axis else 0 for a in range(3))]] = d
        return cls(c)

    @classmethod
    def stack(cls, jets, axis=0):
        return cls(np.stack([_as_jet(j).c for j in jets], axis=axis + 1))

    # -- structure -------------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[1:]

    @property
    def value(self):
        v = self.c[0]
        return v if v.ndim else float(v)

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet3(self.c[(slice(None),) + key])

    def __len__(self):
        return self.c.shape[1]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def reshape(self, *shape):
        return Jet3(self.c.reshape((NCOEF,) + tuple(shape)))

    @property
    def T(self):
        axes = (0,) + tuple(range(self.c.ndim - 1, 0, -1))
        return Jet3(self.c.transpose(axes))

    def sum(self, axis=None):
        if axis is None:
            return Jet3(self.c.reshape(NCOEF, -1).sum(axis=1))
        axis = axis if axis < 0 else axis + 1
        return Jet3(self.c.sum(axis=axis))

    def extract(self, idx):
        idx = tuple(idx)
        if sum(idx) > ORDER:
            raise OrderOverflow(f"multi-index {idx} exceeds order {ORDER}")
        v = self.c[INDEX[idx]]
        return v if v.ndim else float(v)

    def gradient(self):
        """First partials, stacked on a new leading axis of length 3."""
        return np.stack([self.c[INDEX[(1, 0, 0)]], self.c[INDEX[(0, 1, 0)]], self.c[INDEX[(0, 0, 1)]]])

    def diff(self, axis):
        """Jet of the partial derivative along ``axis`` (valid one order lower)."""
        src, keep = _SHIFT[axis]
        c = self.c[src].copy()
        c[~keep] = 0.0
        return Jet3(c)

    def base(self):
        """Copy with the constant term removed."""
        c = self.c.copy()
        c[0] = 0.0
        return Jet3(c)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        a, b = _align(self.c, _as_jet(other).c)
        return Jet3(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.c)

    def __sub__(self, other):
        a, b = _align(self.c, _as_jet(other).c)
        return Jet3(a - b)

    def __rsub__(self, other):
        return _as_jet(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            other = np.asarray(other, dtype=float)
            return Jet3(_pad(self.c, other.ndim) * other)
        a, b = _align(self.c, other.c)
        return Jet3(_scatter(a[_PA] * b[_PB]))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet3):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise DivisionNearZero("division by zero constant")
            return Jet3(_pad(self.c, other.ndim) / other)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return _as_jet(other) * reciprocal(self)

    def __pow__(self, p):
        return pow_const(self, p)

    def __matmul__(self, other):
        if not isinstance(other, Jet3):
            other = Jet3.constant(other)
        return Jet3(_scatter(np.matmul(self.c[_PA], other.c[_PB])))

    def __rmatmul__(self, other):
        return Jet3.constant(other) @ self

    def __repr__(self):
        return f"Jet3(value={self.c[0]!r}, shape={self.shape})"


def _as_jet(x):
    return x if isinstance(x, Jet3) else Jet3.constant(x)


def seed(s, t, u):
    """Coordinate jets for the three chart variables at ``(s, t, u)``."""
    return Jet3.variable(s, 0), Jet3.variable(t, 1), Jet3.variable(u, 2)


def compose(a: Jet3, derivs) -> Jet3:
    """``g(a)`` given ``derivs = [g, g', g'', g''']`` evaluated at ``a.value``.

    Implements Faa di Bruno's formula to third order by expanding in the
    zero-mean part of ``a``.
    """
    d = a.base()
    d2 = d * d
    d3 = d2 * d
    g0, g1, g2, g3 = (np.asarray(x, dtype=float) for x in derivs)
    out = d * g1 + d2 * (g2 / 2.0) + d3 * (g3 / 6.0)
    out.c[0] = out.c[0] + g0
    return out


def apply(a, f, *args, tol: Tolerances = DEFAULT):
    """Apply one of the named elementary functions to a jet.

    ``pow_const`` takes the exponent as an extra positional argument.
    """
    if f == "pow_const":
        return pow_const(_as_jet(a), *args)
    try:
        fn = _FUNCTIONS[f]
    except KeyError:
        raise ValueError(f"unknown jet function {f!r}") from None
    return fn(_as_jet(a), tol=tol) if f in ("ln", "sqrt") else fn(_as_jet(a))


def sin(a):
    x = a.value
    s, c = np.sin(x), np.cos(x)
    return compose(a, [s, c, -s, -c])


def cos(a):
    x = a.value
    s, c = np.sin(x), np.cos(x)
    return compose(a, [c, -s, -c, s])


def sinh(a):
    x = a.value
    s, c = np.sinh(x), np.cosh(x)
    return compose(a, [s, c, s, c])


def cosh(a):
    x = a.value
    s, c = np.sinh(x), np.cosh(x)
    return compose(a, [c, s, c, s])


def exp(a):
    e = np.exp(a.value)
    return compose(a, [e, e, e, e])


def ln(a, tol: Tolerances = DEFAULT):
    x = np.asarray(a.value, dtype=float)
    if np.any(x <= 0):
        raise DomainError(f"ln of non-positive value {x.tolist()}")
    return compose(a, [np.log(x), 1 / x, -1 / x**2, 2 / x**3])


def pow_const(a, p):
    x = np.asarray(a.value, dtype=float)
    p = float(p)
    if p == int(p) and p >= 0:
        n = int(p)
        coeffs = [x**n, n * x ** max(n - 1, 0), n * (n - 1) * x ** max(n - 2, 0),
                  n * (n - 1) * (n - 2) * x ** max(n - 3, 0)]
        return compose(a, coeffs)
    if np.any(x <= 0) and p != int(p):
        raise DomainError(f"fractional power {p} of non-positive value {x.tolist()}")
    if np.any(x == 0):
        raise DivisionNearZero(f"negative power {p} of zero")
    return compose(a, [x**p, p * x ** (p - 1), p * (p - 1) * x ** (p - 2),
                       p * (p - 1) * (p - 2) * x ** (p - 3)])


def sqrt(a, tol: Tolerances = DEFAULT):
    x = np.asarray(a.value, dtype=float)
    if np.any(x <= 0):
        raise DomainError(f"sqrt of non-positive value {x.tolist()}")
    r = np.sqrt(x)
    return compose(a, [r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)])


def reciprocal(a, tol: Tolerances = DEFAULT):
    x = np.asarray(a.value, dtype=float)
    if np.any(np.abs(x) <= tol.tau_null):
        raise DivisionNearZero(f"division by near-zero jet value {x.tolist()}")
    return compose(a, [1 / x, -1 / x**2, 2 / x**3, -6 / x**4])


_FUNCTIONS = {
    "sin": sin, "cos": cos, "sinh": sinh, "cosh": cosh, "exp": exp,
    "ln": ln, "sqrt": sqrt,
}


jet_fn = apply


def jet_arith(op, a, b, tol: Tolerances = DEFAULT):
    a, b = _as_jet(a), _as_jet(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op in ("*", "x", "×"):
        return a * b
    if op in ("/", "÷"):
        return a * reciprocal(b, tol)
    raise ValueError(f"unknown operator {op!r}")


def extract(a: Jet3, idx):
    return a.extract(idx)


# -- tensor helpers ------------------------------------------------------

def minkowski_inner(a: Jet3, b: Jet3) -> Jet3:
    """Minkowski product over the last axis of two point-valued jets."""
    from .minkowski import ETA

    return (a * (b * ETA)).sum(axis=-1)


def cross4(a: Jet3, b: Jet3, c: Jet3) -> Jet3:
    from .minkowski import ETA, LEVI_CIVITA4

    abc = a.reshape(4, 1, 1) * b.reshape(1, 4, 1)
    abc = abc * c.reshape(1, 1, 4)
    lower = np.tensordot(abc.c, LEVI_CIVITA4, axes=([1, 2, 3], [0, 1, 2]))
    return Jet3(lower * ETA)


def inverse(m: Jet3, tol: Tolerances = DEFAULT) -> Jet3:
    """Inverse of a square-matrix jet by the truncated Neumann series."""
    from .minkowski import solve3

    m0 = m.value
    n = m0.shape[0]
    inv0 = solve3(m0, np.eye(n), tol) if n == 3 else np.linalg.inv(m0)
    step = -(Jet3.constant(inv0) @ m.base())
    term = Jet3.constant(inv0)
    out = term
    for _ in range(ORDER):
        term = step @ term
        out = out + term
    return out
