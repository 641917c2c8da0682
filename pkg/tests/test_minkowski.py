import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bicons4.errors import NullVector, SingularMetric
from bicons4.minkowski import (CausalClass, causal_class, cross4, eig3, inner4, normalize4,
                               solve3)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec4s = arrays(float, 4, elements=finite)


def test_inner4_examples():
    assert inner4([1, 0, 0, 0], [1, 0, 0, 0]) == -1
    assert inner4([1, 1, 0, 0], [1, 1, 0, 0]) == 0
    assert inner4([3, 1, 2, 2], [3, 1, 2, 2]) == 0


def test_causal_class():
    assert causal_class([1, 0, 0, 0]) is CausalClass.TIMELIKE
    assert causal_class([0, 1, 0, 0]) is CausalClass.SPACELIKE
    assert causal_class([3, 1, 2, 2]) is CausalClass.NULL


def test_cross4_basis():
    e = np.eye(4)
    np.testing.assert_array_equal(cross4(e[1], e[2], e[3]), [1, 0, 0, 0])


@given(vec4s, vec4s, vec4s, vec4s)
def test_cross4_is_determinant(a, b, c, d):
    w = cross4(a, b, c)
    with np.errstate(divide="ignore", invalid="ignore"):   # LU warns on singular rows
        det = np.linalg.det(np.stack([a, b, c, d]))
    scale = 1 + np.abs(np.stack([a, b, c, d])).max() ** 4
    assert abs(inner4(w, d) - det) <= 1e-9 * scale
    for v in (a, b, c):
        assert abs(inner4(w, v)) <= 1e-9 * scale


@given(vec4s, vec4s)
def test_cross4_repeated_row_vanishes(a, c):
    np.testing.assert_allclose(cross4(a, a, c), 0.0, atol=1e-9)


def test_normalize4_examples():
    u, eps = normalize4([2, 0, 0, 0])
    np.testing.assert_array_equal(u, [1, 0, 0, 0])
    assert eps == -1
    u, eps = normalize4([0, 0, 0, 5])
    np.testing.assert_array_equal(u, [0, 0, 0, 1])
    assert eps == 1
    with pytest.raises(NullVector):
        normalize4([1, 1, 0, 0])


@given(vec4s)
def test_normalize4_unit(v):
    q = inner4(v, v)
    assume(abs(q) > 1e-3 * (1 + v @ v))
    u, eps = normalize4(v)
    assert inner4(u, u) == pytest.approx(eps, abs=1e-12)


def test_solve3_examples():
    np.testing.assert_allclose(solve3(np.eye(3), [1, 2, 3]), [1, 2, 3])
    np.testing.assert_allclose(solve3(2 * np.eye(3), [2, 4, 6]), [1, 2, 3])
    with pytest.raises(SingularMetric):
        solve3([[1, 2, 3], [2, 4, 6], [0, 1, 1]], [1, 1, 1])


# -- eig3 against an independent bisection oracle -------------------------------

def _bisection_roots(M, n_scan=4000):
    """Real roots of det(M - l I) by sign scanning and plain bisection."""
    def p(x):
        return np.linalg.det(M - x * np.eye(3))
    bound = 1 + np.abs(M).sum()
    xs = np.linspace(-bound, bound, n_scan)
    vals = [p(x) for x in xs]
    roots = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            for _ in range(200):
                m = 0.5 * (a + b)
                fm = p(m)
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    return np.sort(roots)[::-1]


def test_eig3_diag_example():
    res = eig3(np.diag([2.0, 1.0, 1.0]))
    np.testing.assert_allclose(res.eigenvalues, [2, 1, 1])
    assert res.is_real_diagonalizable


def test_eig3_complex_pair():
    c, s = np.cos(0.7), np.sin(0.7)
    M = np.array([[c, -s, 0], [s, c, 0], [0, 0, 2.0]])
    assert not eig3(M).is_real_diagonalizable


def test_eig3_jordan_block_not_diagonalizable():
    M = np.array([[1.0, 1.0, 0], [0, 1.0, 0], [0, 0, 3.0]])
    assert not eig3(M).is_real_diagonalizable


def test_eig3_scalar_matrix():
    res = eig3(-np.eye(3) + 1e-17)
    assert res.is_real_diagonalizable
    np.testing.assert_allclose(res.eigenvalues, -1.0)


@given(arrays(float, (3, 3), elements=st.floats(-3, 3)))
def test_eig3_symmetric_matches_bisection(A):
    M = A + A.T
    oracle = _bisection_roots(M)
    assume(len(oracle) == 3 and np.min(np.abs(np.diff(oracle))) > 1e-3)
    res = eig3(M)
    assert res.is_real_diagonalizable
    np.testing.assert_allclose(res.eigenvalues, oracle, atol=1e-10)
    for lam, v in zip(res.eigenvalues, res.eigenvectors):
        np.testing.assert_allclose(M @ v, lam * v, atol=1e-8)


@given(arrays(float, 3, elements=st.floats(-4, 4)), arrays(float, (3, 3), elements=st.floats(-1, 1)))
def test_eig3_nonsymmetric_real_spectrum(lams, P):
    P = P + 2 * np.eye(3)
    assume(abs(np.linalg.det(P)) > 0.5)
    lams = np.sort(lams)[::-1]
    assume(np.min(np.abs(np.diff(lams))) > 0.05)
    M = P @ np.diag(lams) @ np.linalg.inv(P)
    res = eig3(M)
    assert res.is_real_diagonalizable
    np.testing.assert_allclose(res.eigenvalues, lams, atol=1e-8)


@given(st.floats(-1, 1), st.floats(1e-5, 1e-3), arrays(float, (3, 3), elements=st.floats(-1, 1)))
def test_eig3_near_double_root_stays_real(a, gap, P):
    # a rounded double root must not be mistaken for a complex pair
    P = P + 2 * np.eye(3)
    assume(abs(np.linalg.det(P)) > 0.5)
    b = a + gap * max(1.0, abs(a))
    M = P @ np.diag([a, b, b]) @ np.linalg.inv(P)
    res = eig3(M)
    assert res.is_real_diagonalizable
    np.testing.assert_allclose(np.sort(res.eigenvalues), [a, b, b], atol=1e-8)
