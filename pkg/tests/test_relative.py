"""Multiplicity-m ball bound: quotient measures and their equality cases."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from isoplp.relative import (
    RelativeCase,
    orbifold_measure,
    relative_bound,
    verify_relative_equality,
)
from isoplp.spaceform import ModelParams, ball_from_volume, max_ball_volume


def test_worked_flat_examples():
    # area-halving mirror of the flat disk: V = pi/2 per sheet, bound pi
    assert relative_bound(RelativeCase(ModelParams(2, 0.0), 2, math.pi / 2.0)) == pytest.approx(
        math.pi, rel=1e-14
    )
    # flat 4-ball split four ways
    assert relative_bound(
        RelativeCase(ModelParams(4, 0.0), 4, math.pi ** 2 / 8.0)
    ) == pytest.approx(math.pi ** 2 / 2.0, rel=1e-14)


def test_m1_reduces_to_plain_ball():
    for params, V in ((ModelParams(2, 0.0), 1.7), (ModelParams(4, -1.0), 0.9), (ModelParams(2, 1.0), 1.1)):
        case = RelativeCase(params, 1, V)
        assert relative_bound(case) == pytest.approx(ball_from_volume(params, V).area, rel=0, abs=0)


@pytest.mark.parametrize(
    "params,m,V",
    [
        (ModelParams(2, 0.0), 2, 1.0),
        (ModelParams(4, 1.0), 3, 0.4),
        (ModelParams(4, 0.0), 4, 1.0),
        (ModelParams(2, -1.0), 5, 0.8),
    ],
)
def test_equality_residuals_small(params, m, V):
    report = verify_relative_equality(RelativeCase(params, m, V), 160)
    assert report.max_abs <= 1e-12
    assert report.passed()
    assert report.passed(tol=1e-10)


def test_equality_report_fails_at_absurd_tolerance():
    report = verify_relative_equality(RelativeCase(ModelParams(2, 0.0), 2, 1.0), 160)
    assert not report.passed(tol=0.0)


def test_orbifold_measure_mass_scales_inversely_in_m():
    params = ModelParams(2, 0.0)
    base = orbifold_measure(RelativeCase(params, 1, 2.0), 80)
    # same total volume split over two sheets: same ball B0, half the mass
    half = orbifold_measure(RelativeCase(params, 2, 1.0), 80)
    assert half.total_mass == pytest.approx(base.total_mass / 2.0, rel=1e-14)


def test_bound_monotone_in_multiplicity():
    # at fixed per-sheet volume, higher multiplicity means less boundary per sheet
    params = ModelParams(2, 0.0)
    bounds = [relative_bound(RelativeCase(params, m, 1.0)) for m in (1, 2, 4, 8)]
    assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
    # flat n=2 closed form: 2 sqrt(pi V / m)
    for m, b in zip((1, 2, 4, 8), bounds):
        assert b == pytest.approx(2.0 * math.sqrt(math.pi * 1.0 / m), rel=1e-13)


@given(m=st.integers(min_value=1, max_value=12), V=st.floats(min_value=0.05, max_value=5.0))
@settings(max_examples=40, deadline=None)
def test_bound_between_flat_neighbors(m, V):
    # hyperbolic boundary beats flat at equal volume; spherical trails it
    flat = relative_bound(RelativeCase(ModelParams(2, 0.0), m, V))
    hyp = relative_bound(RelativeCase(ModelParams(2, -1.0), m, V))
    assert hyp > flat


def test_hemisphere_validation():
    params = ModelParams(2, 1.0)
    cap = max_ball_volume(params)
    RelativeCase(params, 2, cap / 2.0 * 0.999)
    with pytest.raises(ValueError):
        RelativeCase(params, 2, cap / 2.0 * 1.01)


def test_multiplicity_validation():
    with pytest.raises(ValueError):
        RelativeCase(ModelParams(2, 0.0), 0, 1.0)
    with pytest.raises(ValueError):
        RelativeCase(ModelParams(2, 0.0), 2.0, 1.0)
    with pytest.raises(ValueError):
        RelativeCase(ModelParams(2, 0.0), 2, -1.0)


def test_smallness_enforced_only_when_length_given():
    params = ModelParams(4, -1.0)
    # no L: accepted regardless
    RelativeCase(params, 2, 50.0)
    # small L passes, huge L trips the tanh product
    RelativeCase(params, 2, 50.0, L=0.2)
    with pytest.raises(ValueError):
        RelativeCase(params, 2, 50.0, L=50.0)
