import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bicons4.errors import BadParams
from bicons4.families import build_family
from bicons4.minkowski import inner4
from bicons4.surfaces import (LEMMA_CASES, THREE_DISTINCT_CASES, LocalSurface, build_lemma_surface,
                              slice_check, slice_of, surface_frame)

PARAMS = {"i": dict(B=2.0), "ii": dict(A=2.0), "iii": dict(B=2.0), "iv": dict(A=2.0),
          "v": dict(A=2.0, B=3.0), "vi": dict(A=2.0, B=3.0), "vii": dict(A=1.0, B=2.0),
          "viii": dict(r=2.0), "ix": dict(r=2.0), "x": dict(r=2.0), "xi": dict(A=1.0)}


def test_positions():
    np.testing.assert_allclose(build_lemma_surface("v", A=2, B=3).position((0, 0)), [2, 0, 3, 0])
    np.testing.assert_allclose(build_lemma_surface("i", B=1).position((0, 0)), [1, 0, 1, 0])
    np.testing.assert_allclose(build_lemma_surface("vii", A=1, B=1).position((1, 1)), [2, 1, 1, 2])


@pytest.fixture(scope="module")
def reports():
    return {c: slice_check(build_lemma_surface(c, **PARAMS[c]), n=12) for c in LEMMA_CASES}


@pytest.mark.parametrize("case", LEMMA_CASES)
def test_slice_properties(reports, case):
    r = reports[case]
    assert r.max_offdiag < 1e-8
    assert r.max_variance < 1e-8
    assert r.pmc_residual < 1e-8
    assert r.gauss_equation_residual < 1e-8
    assert r.is_flat == (case in THREE_DISTINCT_CASES or case == "xi")


@pytest.mark.parametrize("case", THREE_DISTINCT_CASES)
def test_flatness_relation(reports, case):
    assert abs(reports[case].flatness_relation) < 1e-8


def test_signatures(reports):
    assert reports["ii"].signature == "riemannian"
    assert reports["iv"].signature == "lorentzian"
    for c in ("iii", "vi", "ix"):
        assert reports[c].signature == "lorentzian"


def test_curved_spheres(reports):
    # oracle: a round sphere (or pseudo-sphere) of radius 1/r has K = +-r^2
    assert reports["viii"].gauss_curvature == pytest.approx(4.0, abs=1e-9)
    assert reports["ix"].gauss_curvature == pytest.approx(4.0, abs=1e-9)
    assert reports["x"].gauss_curvature == pytest.approx(-4.0, abs=1e-9)
    np.testing.assert_allclose(np.abs(reports["viii"].shape_op_f3), 2 * np.eye(2), atol=1e-9)


def test_marginally_trapped(reports):
    assert reports["xi"].is_marginally_trapped
    assert reports["vii"].is_marginally_trapped
    for c in ("i", "v", "viii", "x"):
        assert not reports[c].is_marginally_trapped
    H = reports["xi"].mean_curvature_vec
    assert abs(inner4(H, H)) < 1e-12 and np.linalg.norm(H) > 0.1


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_null_frame_is_pseudo_orthonormal(t, u):
    fr = surface_frame(build_lemma_surface("xi", A=1.0), (t, u))
    assert fr.null_pair is not None
    ell, m = fr.null_pair
    assert abs(inner4(ell, ell)) < 1e-12
    assert abs(inner4(m, m)) < 1e-12
    assert inner4(ell, m) == pytest.approx(-1.0, abs=1e-12)
    assert inner4(fr.f3, fr.f3) == pytest.approx(fr.eps3, abs=1e-12)
    assert inner4(fr.f4, fr.f4) == pytest.approx(fr.eps4, abs=1e-12)
    assert abs(inner4(fr.f3, fr.f4)) < 1e-12


@given(st.floats(-1, 1), st.floats(0, 6))
def test_frame_is_normal(t, u):
    patch = build_lemma_surface("v", A=2.0, B=3.0)
    L = LocalSurface(patch, (t, u))
    fr = L.frame()
    for v in L.Y.value:
        assert abs(inner4(fr.f3, v)) < 1e-12
        assert abs(inner4(fr.f4, v)) < 1e-12
    assert fr.eps3 * fr.eps4 == -1


@pytest.mark.parametrize("case,missing", [("v", dict(A=1.0)), ("i", {}), ("viii", dict(A=1.0)),
                                          ("xi", dict(A=0.0))])
def test_bad_params(case, missing):
    with pytest.raises(BadParams):
        build_lemma_surface(case, **missing)


def test_unknown_case():
    with pytest.raises(BadParams):
        build_lemma_surface("xii", A=1.0)


def test_slice_of_nullcone_family():
    patch = build_family("nullcone", {"signature": "riemannian", "a": 1.0, "c1": -1.0})
    surf = slice_of(patch, 1.0, domain=((-1.0, 1.0), (-1.0, 1.0)))
    r = slice_check(surf, n=6)
    assert r.max_offdiag < 1e-8
    assert r.max_variance < 1e-8
    assert r.pmc_residual < 1e-8
    assert r.is_flat
    assert abs(r.flatness_relation) < 1e-8
