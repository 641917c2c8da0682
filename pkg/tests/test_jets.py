import itertools
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from bicons4 import jets
from bicons4.errors import DivisionNearZero, DomainError, OrderOverflow
from bicons4.jets import MULTI_INDICES, Jet3, extract, jet_arith, jet_fn, seed


def test_seed_coefficients():
    s, t, u = seed(2.0, 0.0, 0.0)
    assert extract(s, (0, 0, 0)) == 2.0
    assert extract(s, (1, 0, 0)) == 1.0
    assert all(extract(s, m) == 0 for m in MULTI_INDICES if m not in ((0, 0, 0), (1, 0, 0)))
    assert extract(t, (0, 1, 0)) == 1.0
    assert extract(s * t, (1, 1, 0)) == 1.0


def test_arith_examples():
    s, t, u = seed(1.5, 0.5, 2.0)
    assert extract(s * s, (2, 0, 0)) == 2.0
    a = jets.sin(s) + t * u
    b = jets.exp(t)
    assert (a * b).value == pytest.approx(a.value * b.value)
    q = jet_arith("/", a, a)
    np.testing.assert_allclose(q.c[0], 1.0)
    np.testing.assert_allclose(q.c[1:], 0.0, atol=1e-14)


def test_elementary_examples():
    s, _, _ = seed(0.0, 0.0, 0.0)
    sj = jet_fn(s, "sin")
    assert extract(sj, (1, 0, 0)) == 1.0
    assert extract(sj, (3, 0, 0)) == -1.0
    s1, _, _ = seed(1.0, 0.0, 0.0)
    lj = jet_fn(s1, "ln")
    assert extract(lj, (1, 0, 0)) == 1.0
    assert extract(lj, (2, 0, 0)) == -1.0
    with pytest.raises(DomainError):
        jet_fn(Jet3.constant(-1.0), "sqrt")
    with pytest.raises(DivisionNearZero):
        jets.reciprocal(Jet3.constant(0.0))
    c = Jet3.constant(3.0)
    assert all(extract(c, m) == 0 for m in MULTI_INDICES if sum(m) >= 1)
    p = jet_fn(s1 * 2.0, "pow_const", 1.5)
    assert extract(p, (1, 0, 0)) == pytest.approx(2 * 1.5 * 2.0**0.5)


def test_extract_rejects_high_order():
    s, _, _ = seed(1.0, 0.0, 0.0)
    with pytest.raises(OrderOverflow):
        extract(s, (2, 2, 0))


def test_diff_lowers_order():
    s, t, u = seed(0.3, 0.2, 0.1)
    f = jets.sin(s) * t
    d = f.diff(0)
    assert d.value == pytest.approx(np.cos(0.3) * 0.2)
    assert extract(d, (1, 1, 0)) == pytest.approx(-np.sin(0.3))


# -- oracles -----------------------------------------------------------------------

S, T, U = sp.symbols("s t u")
SYM = sp.sin(S * T) + sp.exp(U) * sp.sqrt(S**2 + 1) / sp.cosh(T) + sp.log(2 + S * U) * sp.cos(U) \
    + (S + T**2) ** sp.Rational(3, 2)


def jet_map(s, t, u):
    return (jets.sin(s * t) + jets.exp(u) * jets.sqrt(s * s + 1.0) / jets.cosh(t)
            + jets.ln(s * u + 2.0) * jets.cos(u) + jets.pow_const(s + t * t, 1.5))


def plain_map(x):
    s, t, u = x
    return (np.sin(s * t) + np.exp(u) * np.sqrt(s * s + 1) / np.cosh(t)
            + np.log(2 + s * u) * np.cos(u) + (s + t * t) ** 1.5)


points = st.tuples(st.floats(0.2, 1.5), st.floats(-1, 1), st.floats(0, 1))


@given(points)
def test_jet_vs_finite_differences(p):
    j = jet_map(*seed(*p))
    h = 1e-4
    x0 = np.array(p)
    for m in MULTI_INDICES:
        if not 1 <= sum(m) <= 2:
            continue
        axes = [a for a in range(3) for _ in range(m[a])]
        if len(axes) == 1:
            e = np.eye(3)[axes[0]] * h
            fd = (plain_map(x0 + e) - plain_map(x0 - e)) / (2 * h)
        else:
            ea, eb = np.eye(3)[axes[0]] * h, np.eye(3)[axes[1]] * h
            fd = (plain_map(x0 + ea + eb) - plain_map(x0 + ea - eb)
                  - plain_map(x0 - ea + eb) + plain_map(x0 - ea - eb)) / (4 * h * h)
        got = extract(j, m)
        assert abs(got - fd) <= 1e-5 * max(1.0, abs(got)), (m, got, fd)


@given(points)
def test_jet_vs_symbolic_third_order(p):
    j = jet_map(*seed(*p))
    subs = dict(zip((S, T, U), p))
    for m in MULTI_INDICES:
        expr = SYM
        for var, k in zip((S, T, U), m):
            if k:
                expr = sp.diff(expr, var, k)
        exact = float(expr.evalf(subs=subs))
        assert extract(j, m) == pytest.approx(exact, rel=1e-11, abs=1e-11)


@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9), points)
def test_matrix_inverse_jet(entries, p):
    s, t, u = seed(*p)
    base = np.array(entries).reshape(3, 3) + 4 * np.eye(3)
    M = Jet3.stack([Jet3.stack([jets.sin(s * (i + 1)) * 0.3 + t * u * (j - i) + base[i, j]
                                for j in range(3)]) for i in range(3)])
    inv = jets.inverse(M)
    prod = M @ inv
    np.testing.assert_allclose(prod.c[0], np.eye(3), atol=1e-12)
    np.testing.assert_allclose(prod.c[1:], 0.0, atol=1e-10)


def test_tensor_broadcasting():
    s, t, u = seed(0.5, 0.1, 0.2)
    v = Jet3.stack([s, t, u, s * t])
    w = v * 2.0 + np.array([1.0, 0, 0, 0])
    np.testing.assert_allclose(w.value, [2.0, 0.2, 0.4, 0.1])
    scaled = v * s
    for k, comp in enumerate(v):
        np.testing.assert_allclose(scaled[k].c, (comp * s).c)


def test_leibniz_table_is_complete():
    # every pair of multi-indices with total degree <= 3 contributes exactly once
    s, t, u = seed(0.0, 0.0, 0.0)
    x = s + t + u
    for k in range(1, 4):
        m = x
        for _ in range(k - 1):
            m = m * x
        for idx in MULTI_INDICES:
            expected = float(math.factorial(k)) if sum(idx) == k else 0.0
            if sum(idx) == k:
                assert extract(m, idx) == expected
            elif idx != (0, 0, 0):
                assert extract(m, idx) == 0.0


@pytest.mark.parametrize("fn,ref", [("sinh", np.sinh), ("cosh", np.cosh), ("exp", np.exp),
                                    ("cos", np.cos)])
def test_univariate_derivatives(fn, ref):
    x = 0.37
    j = jet_fn(Jet3.variable(x, 1), fn)
    h = 1e-3
    for k in range(4):
        # k-th derivative by a symmetric finite-difference stencil
        coeffs = {0: [1], 1: [-0.5, 0, 0.5], 2: [1, -2, 1], 3: [-0.5, 1, 0, -1, 0.5]}[k]
        n = len(coeffs) // 2
        fd = sum(c * ref(x + (i - n) * h) for i, c in enumerate(coeffs)) / h**k
        assert extract(j, (0, k, 0)) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_multi_index_order():
    assert MULTI_INDICES[0] == (0, 0, 0)
    assert len(MULTI_INDICES) == 20
    degs = [sum(m) for m in MULTI_INDICES]
    assert degs == sorted(degs)
    assert set(MULTI_INDICES) == {m for m in itertools.product(range(4), repeat=3) if sum(m) <= 3}
