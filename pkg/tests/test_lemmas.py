"""Positivity lemmas for the n=4 curved certificates, in half-angle coordinates."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from isoplp.lemmas import (
    CASES,
    G,
    G_diag_peak,
    H,
    LemmaVars,
    S_table,
    check_factorization,
    critical_system,
    curve_distance,
    dG_dt,
    dGdp_identity,
    default_grid_ranges,
    hyperbolic_slope_sign_matches,
    slice_max_t,
    solve_critical_points,
    verify_H_nonneg,
)
from isoplp.spaceform import ModelParams, candle, candle_anti, candle_anti2, candle_prime


@pytest.mark.parametrize(
    "case,kappa,sub,ell_hi",
    [("spherical", 1.0, np.tan, 3.0), ("hyperbolic", -1.0, np.tanh, 4.0)],
)
def test_S_table_is_candle_ladder(case, kappa, sub, ell_hi):
    # under t = tan(ell/2) (tanh for kappa < 0) the four table entries are
    # the candle derivative ladder: s', s, its first and second antiderivatives
    params = ModelParams(4, kappa)
    ell = np.linspace(0.05, ell_hi, 37)
    t = sub(ell / 2.0)
    s1, s0, sm1, sm2 = S_table(case, t)
    for got, ref in zip(
        (s1, s0, sm1, sm2),
        (candle_prime(params, ell), candle(params, ell), candle_anti(params, ell), candle_anti2(params, ell)),
    ):
        assert_allclose(got, ref, rtol=1e-13, atol=1e-13)


def test_S_table_hyperbolic_domain():
    with pytest.raises(ValueError):
        S_table("hyperbolic", 1.0)
    with pytest.raises(ValueError):
        S_table("hyperbolic", -0.1)
    with pytest.raises(ValueError):
        S_table("euclidean", 0.5)


def test_lemma_vars_validation():
    LemmaVars("spherical", 2.0, 0.3, 4.0)
    LemmaVars("hyperbolic", 0.9, 0.4, 0.5)
    with pytest.raises(ValueError):
        LemmaVars("hyperbolic", 1.0, 0.4, 0.5)
    with pytest.raises(ValueError):
        LemmaVars("hyperbolic", 0.5, 0.2, 0.5)
    with pytest.raises(ValueError):
        LemmaVars("spherical", -0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        LemmaVars("spherical", 0.5, 0.0, 1.0)


@pytest.mark.parametrize("case,p_lo", [("spherical", 0.2), ("hyperbolic", 0.6)])
def test_peak_closed_form_matches_raw(case, p_lo):
    # away from the hyperbolic p -> 1/3 pole the naive S_table route agrees
    ps = np.linspace(p_lo, 5.0, 23)
    assert_allclose(G_diag_peak(case, ps), G(case, 1.0 / (3.0 * ps), ps, ps), rtol=0, atol=5e-15)


def test_peak_closed_form_stable_near_pole():
    # the raw route loses all digits here; the closed form stays smooth
    ps = 1.0 / 3.0 + 10.0 ** np.linspace(-10.0, -2.0, 17)
    vals = G_diag_peak("hyperbolic", ps)
    assert np.all(np.isfinite(vals))
    assert np.all(np.diff(vals) < 0.0)


def test_peak_small_p_limit():
    # G_diag_peak(p) -> 2 pi/3 - (8/3) p + O(p^3) as p -> 0
    for p in (1e-4, 1e-6):
        assert_allclose(G_diag_peak("spherical", p), 2.0 * math.pi / 3.0 - (8.0 / 3.0) * p, rtol=1e-14)


@given(
    t=st.floats(min_value=0.05, max_value=3.0),
    p=st.floats(min_value=0.1, max_value=5.0),
    q=st.floats(min_value=0.1, max_value=5.0),
)
@settings(max_examples=60, deadline=None)
def test_H_symmetric_in_pq_spherical(t, p, q):
    assert_allclose(H("spherical", t, p, q), H("spherical", t, q, p), rtol=1e-12, atol=1e-13)


@given(
    t=st.floats(min_value=0.05, max_value=0.95),
    p=st.floats(min_value=0.4, max_value=5.0),
    q=st.floats(min_value=0.4, max_value=5.0),
)
@settings(max_examples=60, deadline=None)
def test_H_symmetric_in_pq_hyperbolic(t, p, q):
    assert_allclose(H("hyperbolic", t, p, q), H("hyperbolic", t, q, p), rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("case,s_lo", [("spherical", 0.2), ("hyperbolic", 0.5)])
def test_H_vanishes_on_curve(case, s_lo):
    s = np.linspace(s_lo, 4.0, 29)
    assert_allclose(H(case, 1.0 / (3.0 * s), s, s), 0.0, rtol=0, atol=5e-15)


@pytest.mark.parametrize("case", CASES)
def test_H_nonneg_on_grid(case):
    report = verify_H_nonneg(case, grid=60)
    assert report.passed
    assert report.min_value >= -1e-9
    assert report.rays_ok
    assert report.grid_shape == (60, 60, 60)
    # the discrete argmin hugs the vanishing curve
    assert report.argmin_curve_distance < 0.1


def test_H_nonneg_anisotropic_grid():
    report = verify_H_nonneg("spherical", grid=(40, 30, 20))
    assert report.grid_shape == (40, 30, 20)
    assert report.min_value >= -1e-9


def test_dG_dt_matches_finite_difference():
    h = 1e-6
    for case, pts in (
        ("spherical", [(0.5, 1.0, 2.0), (2.0, 0.3, 0.7), (1.0, 1.0, 1.0)]),
        ("hyperbolic", [(0.5, 1.0, 2.0), (0.3, 0.6, 0.9), (0.8, 2.5, 1.1)]),
    ):
        for t, p, q in pts:
            fd = (G(case, t + h, p, q) - G(case, t - h, p, q)) / (2.0 * h)
            assert_allclose(dG_dt(case, t, p, q), fd, rtol=1e-7, atol=1e-7)


def test_gradient_of_H_matches_finite_difference():
    h = 1e-6
    for case, pts in (
        ("spherical", [(1.0, 1.0, 2.0), (0.5, 2.0, 0.3), (2.0, 0.7, 1.3)]),
        ("hyperbolic", [(0.5, 1.0, 2.0), (0.3, 0.6, 0.9), (0.8, 2.5, 1.1)]),
    ):
        system = critical_system(case)
        for t, p, q in pts:
            got = system.gradient_of_H(t, p, q)
            fd = (
                (H(case, t + h, p, q) - H(case, t - h, p, q)) / (2.0 * h),
                (H(case, t, p + h, q) - H(case, t, p - h, q)) / (2.0 * h),
                (H(case, t, p, q + h) - H(case, t, p, q - h)) / (2.0 * h),
            )
            assert_allclose(got, fd, rtol=1e-6, atol=1e-7)


def test_gradient_numerator_values_at_unit_point():
    # frozen oracle: the p-numerator evaluates to 848 at (1, 1, 1), so
    # dH/dp there is (8/3) * 848 / ((9+1)^2 (1+1)^3) = 2.82666...
    system = critical_system("spherical")
    et, ep, eq = system.eval(1.0, 1.0, 1.0)
    assert et == -8.0
    assert ep == 848.0
    assert eq == 848.0
    _, dp, dq = system.gradient_of_H(1.0, 1.0, 1.0)
    assert_allclose(dp, (8.0 / 3.0) * 848.0 / 800.0, rtol=1e-15)
    assert_allclose(dq, dp, rtol=1e-15)


def test_polysystem_jacobian_matches_finite_difference():
    h = 1e-7
    for case in CASES:
        system = critical_system(case)
        t, p, q = (0.7, 1.2, 0.8) if case == "spherical" else (0.6, 0.9, 1.4)
        jac = system.jacobian(t, p, q)
        for j, dx in enumerate(np.eye(3) * h):
            fd = (system.eval(t + dx[0], p + dx[1], q + dx[2]) - system.eval(t - dx[0], p - dx[1], q - dx[2])) / (2.0 * h)
            assert_allclose(jac[:, j], fd, rtol=1e-6, atol=1e-4)


@given(p=st.floats(min_value=0.05, max_value=5.0), t=st.floats(min_value=0.0, max_value=5.0))
@settings(max_examples=80, deadline=None)
def test_factorization_identity(p, t):
    assert abs(check_factorization(p, t, relative=True)) <= 1e-12


def test_factorization_roots():
    # both printed factors vanish on the product: 3pt = 1, and the cubic root
    p = 0.8
    lhs = 12.0 * p ** 2 * (1.0 / (3 * p)) ** 4 - 16.0 * p * (1.0 / (3 * p)) ** 3 \
        + (4.0 - 12.0 * p ** 2) * (1.0 / (3 * p)) ** 2 + 4.0 / 3.0
    rhs = 4.0 * (3.0 * p * (1.0 / (3 * p)) - 1.0)
    assert_allclose(lhs * rhs, 0.0, atol=1e-12)
    assert abs(check_factorization(p, 1.0 / (3.0 * p))) <= 1e-14


def test_dGdp_identity_values():
    chk1 = dGdp_identity(1.0)
    assert_allclose(chk1.closed, 2.16, rtol=0, atol=0)
    assert abs(chk1.residual) <= 1e-5
    chk2 = dGdp_identity(2.0)
    assert_allclose(chk2.closed, 3456.0 / 1369.0, rtol=1e-15)
    assert abs(chk2.residual) <= 1e-5
    with pytest.raises(ValueError):
        dGdp_identity(0.0)


@pytest.mark.parametrize("case", CASES)
def test_slice_max_sits_on_curve(case):
    for p in (0.5, 1.0, 2.0):
        assert abs(slice_max_t(case, p) - 1.0 / (3.0 * p)) <= 5e-7


def test_slice_max_flat_small_p():
    # the spherical peak flattens as p -> 0; locate it at reduced accuracy
    assert abs(slice_max_t("spherical", 0.05) - 1.0 / 0.15) <= 1e-4


def test_slice_max_domain_guards():
    with pytest.raises(ValueError):
        slice_max_t("hyperbolic", 0.3)
    with pytest.raises(ValueError):
        slice_max_t("spherical", 0.0)


def test_hyperbolic_slope_sign():
    t = np.linspace(0.05, 0.95, 19)[:, None] + 0.00371
    p = np.linspace(0.4, 5.0, 17)[None, :] + 0.00113
    assert np.all(hyperbolic_slope_sign_matches(t, p))


def test_curve_distance_zero_on_curve():
    for s in (0.4, 1.0, 3.0):
        assert curve_distance(1.0 / (3.0 * s), s, s) <= 1e-7
    assert curve_distance(1.0, 1.0, 1.0) > 0.4


@pytest.mark.parametrize("case", CASES)
def test_critical_points_lie_on_curve(case):
    result = solve_critical_points(critical_system(case), n_starts=150, seed=0)
    assert len(result) > 5
    assert result.n_converged > 0
    for root in result:
        assert root.curve_distance <= 1e-6
        assert root.residual <= 1e-10
    # runs are reproducible
    again = solve_critical_points(critical_system(case), n_starts=150, seed=0)
    assert [(r.t, r.p, r.q) for r in again] == [(r.t, r.p, r.q) for r in result]


def test_critical_search_bookkeeping():
    result = solve_critical_points(critical_system("hyperbolic"), n_starts=150, seed=0)
    total = result.n_converged + result.n_singular + result.n_stalled
    assert total == 150
    assert result.n_out_of_domain + result.n_degenerate <= result.n_converged
    assert result.n_degenerate >= 0
    first = result[0]
    assert hasattr(first, "n_merged") and first.n_merged >= 1


def test_default_grid_ranges_inside_domain():
    (t0, t1), (p0, p1), (q0, q1) = default_grid_ranges("hyperbolic")
    assert 0.0 < t0 < t1 < 1.0
    assert p0 > 1.0 / 3.0 and q0 > 1.0 / 3.0
    sph = default_grid_ranges("spherical")
    assert all(lo > 0.0 and hi > lo for lo, hi in sph)
