import math

import numpy as np
import pytest

from bicons4.biconservative import grid_verify
from bicons4.errors import BadParams
from bicons4.families import (REGISTRY, FamilyId, build_family, get_family, profile_closed_form,
                              profile_ode, profile_synthesize, rotational_rhs, scalar_condition)
from bicons4.geometry import shape_operator_values
from bicons4.profiles import ode_rk4

R, L = "riemannian", "lorentzian"

# Profile ODEs equivalent to the scalar biconservative condition, derived by
# hand from the principal curvatures of each skeleton.  Synthesis never sees
# them, so they are independent oracles.
ORACLE_ODES = {
    ("x2", L, (1.0, 0.0, 0.5)): lambda s, f, p: -2 * p * (1 + p * p) / (3 * s),
    ("x3", R, (1.0, 0.0, 2.0)): lambda s, f, p: 2 * p * (1 - p * p) / s,
    ("x3", L, (1.0, 0.0, 0.5)): lambda s, f, p: -2 * p * (1 - p * p) / (3 * s),
    ("x4", R, (1.0, 0.0, -1.0)): lambda s, f, p: -2 * (2 * p + 1) / s,
    ("x4", L, (1.0, 0.0, 0.0)): lambda s, f, p: 2 * (2 * p + 1) / (3 * s),
    ("cyl-e3", L, (1.0, 0.0, 0.5)): lambda s, f, p: -p * (1 + p * p) / (3 * s),
    ("cyl-e31-riem", R, (1.0, 0.0, 0.5)): lambda s, f, p: p * (1 - p * p) / s,
    ("cyl-e31-lor", L, (1.0, 0.0, 2.0)): lambda s, f, p: -p * (1 - p * p) / (3 * s),
}


def test_registry_complete():
    assert set(REGISTRY) == {f.value for f in FamilyId}
    assert get_family("x1") is get_family(FamilyId.X1)
    with pytest.raises(BadParams):
        get_family("x9")


@pytest.mark.parametrize("key", list(ORACLE_ODES), ids=lambda k: f"{k[0]}-{k[1]}")
def test_synthesis_matches_oracle_ode(key):
    fam, sig, init = key
    interval = (init[0], init[0] + 0.5)
    synth = profile_synthesize(fam, sig, init, interval, 1e-2)
    oracle = ode_rk4(ORACLE_ODES[key], init, 1e-2, interval)
    np.testing.assert_allclose(synth.grid, oracle.grid)
    assert np.max(np.abs(synth.f - oracle.f)) < 1e-10
    assert np.max(np.abs(synth.fpp - oracle.fpp)) < 1e-8


@pytest.mark.parametrize("key", list(ORACLE_ODES), ids=lambda k: f"{k[0]}-{k[1]}")
def test_synthesized_families_are_biconservative(key):
    fam, sig, init = key
    patch = build_family(fam, {"signature": sig, "init": init})
    summary = grid_verify(patch, (4, 4, 4), threads=1)
    assert summary.passed
    assert summary.max_residual < 1e-5
    expected_eps = -1 if sig == R else 1
    assert summary.epsilon == expected_eps


def test_x4_closed_forms():
    # 2f'+1 = C s^-4 (riemannian) and C s^(4/3) (lorentzian)
    r = profile_synthesize("x4", R, (1.0, 0.0, 0.0), (1.0, 2.0), 1e-2)
    for s, fp in zip(r.grid, r.fp):
        assert 2 * fp + 1 == pytest.approx(s**-4, abs=1e-8)
    lo = profile_synthesize("x4", L, (1.0, 0.0, 0.0), (1.0, 2.0), 1e-2)
    for s, fp in zip(lo.grid, lo.fp):
        assert 2 * fp + 1 == pytest.approx(s ** (4 / 3), abs=1e-8)


def test_x1_branches_and_scalar_conditions():
    rows = {}
    for branch in ("minus", "plus"):
        for sig in (R, L):
            patch = build_family("x1", {"signature": sig, "c1": 1.0 if sig == R else 2.0,
                                        "branch": branch})
            rows[(branch, sig)] = grid_verify(patch, (4, 3, 3), threads=1)
    # each branch satisfies exactly one of the two scalar conditions
    for branch in ("minus", "plus"):
        hits = [s for s in (R, L)
                if min(rows[(branch, s)].max_scalar_riemannian,
                       rows[(branch, s)].max_scalar_lorentzian) < 1e-6 and rows[(branch, s)].passed]
        assert len(hits) == 1, (branch, hits)
    assert rows[("plus", R)].passed and rows[("plus", R)].epsilon == -1
    assert rows[("minus", L)].passed and rows[("minus", L)].epsilon == 1
    assert rows[("minus", R)].epsilon == 1 and not rows[("minus", R)].passed
    assert rows[("plus", L)].epsilon == -1 and not rows[("plus", L)].passed


def test_x1_synthesis_recovers_plus_branch():
    prof = profile_closed_form("x1", {"signature": R, "c1": 1.0, "branch": "plus", "s": (1.0, 2.0)})
    f0, fp0 = prof.derivs(1.0)[:2]
    synth = profile_synthesize("x1", R, (1.0, f0, fp0), (1.0, 1.5), 1e-3)
    for s, f in zip(synth.grid[::50], synth.f[::50]):
        assert f == pytest.approx(prof(s), abs=1e-9)


def test_nullcone_synthesis_matches_closed_form():
    params = {"signature": R, "a": 1.0, "c1": -1.0, "s": (0.5, 3.0)}
    prof = profile_closed_form("nullcone", params)
    f0, fp0 = prof.derivs(0.5)[:2]
    synth = profile_synthesize("nullcone", R, (0.5, f0, fp0), (0.5, 1.5), 1e-3, params=params)
    assert np.max(np.abs(synth.f - np.array([prof(s) for s in synth.grid]))) < 1e-9


def test_nullcone_closed_form_identity():
    # 2 phi' + 1 = 8 c a^3 / (s^2 (s + 2a)^2)
    a, c = 1.5, -0.7
    prof = profile_closed_form("nullcone", {"signature": R, "a": a, "c1": c, "s": (0.5, 3.0)})
    for s in np.linspace(0.5, 3.0, 11):
        f, fp, fpp, _ = prof.derivs(s)
        assert 2 * fp + 1 == pytest.approx(8 * c * a**3 / (s**2 * (s + 2 * a) ** 2), abs=1e-12)
        assert -fpp / (2 * fp + 1) - (1 / s + 1 / (s + 2 * a)) == pytest.approx(0, abs=1e-10)


def test_nullcone_position():
    params = {"signature": R, "a": 1.0, "c1": -1.0, "s": (0.5, 3.0)}
    patch = build_family("nullcone", params)
    phi = profile_closed_form("nullcone", params)(1.0)
    np.testing.assert_allclose(patch.position((1.0, 0.0, 0.0)), [1 + phi, 0, 0, phi], atol=1e-14)


def test_x3_position():
    patch = build_family("x3", {"signature": L})
    f = patch.evaluator
    p = patch.position((1.2, 0.0, 0.4))
    assert p[0] == pytest.approx(1.2) and p[1] == 0 and p[2] == 0


def test_nullcone_ab0_has_zero_curvature():
    for sig, c in ((L, 1.0), (R, -1.0)):
        patch = build_family("nullcone-ab0", {"signature": sig, "c1": c})
        summary = grid_verify(patch, (3, 3, 3), threads=1)
        assert summary.passed
        kmin = min(float(np.min(np.abs(r.report.k))) for r in summary.points)
        assert kmin < 1e-7
    lor = grid_verify(build_family("nullcone-ab0", {"signature": L, "c1": 1.0}), (3, 3, 3))
    assert lor.distinct_count_histogram == {"3": 27}


def test_rotational_exact_variants():
    for fam, sig in (("rot-cosh", R), ("rot-cosh", L), ("rot-sinh", L)):
        patch = build_family(fam, {"signature": sig, "step": 1e-3})
        summary = grid_verify(patch, (4, 4, 4), threads=1)
        assert summary.passed, (fam, sig, summary.max_residual)
        assert summary.case == "ThreeDistinct"


def test_rotational_rhs_validation():
    with pytest.raises(BadParams):
        rotational_rhs("rot-sinh", R)
    with pytest.raises(BadParams):
        rotational_rhs("x1", R)
    with pytest.raises(BadParams):
        rotational_rhs("rot-cosh", R, variant="other")


def test_profile_ode_step_validation():
    with pytest.raises(BadParams):
        profile_ode("rot-cosh", {"signature": R, "step": 0.0})


def test_scalar_condition_picks_s_direction():
    S = np.diag([3.0, 1.0, 2.0])
    assert scalar_condition(S, R) == 0.0
    assert scalar_condition(S, L) == 12.0


def test_build_family_errors():
    with pytest.raises(BadParams):
        build_family("x1", {"signature": R})
    with pytest.raises(BadParams):
        build_family("x2", {"signature": R})
    with pytest.raises(BadParams):
        build_family("nullcone", {"signature": L, "a": 0.0, "c1": 1.0})


def test_probe_point_independence():
    # the synthesized profile does not depend on the chart point where the condition is imposed
    a = profile_synthesize("x3", R, (1.0, 0.0, 2.0), (1.0, 1.3), 1e-2)
    b = profile_synthesize("x3", R, (1.0, 0.0, 2.0), (1.0, 1.3), 1e-2, probe=(1.2, 2.0))
    assert np.max(np.abs(a.f - b.f)) < 1e-10


def test_values_path_condition_vanishes_on_solution():
    patch = build_family("cyl-e3", {"signature": L})
    S, g, eps = shape_operator_values(patch.evaluator, (1.2, 0.5, 0.3))
    assert abs(scalar_condition(S, L)) < 1e-9
    assert eps == 1
    assert math.isfinite(np.linalg.det(g))
