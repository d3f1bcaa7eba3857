import math

import numpy as np
import pytest

from jetelastica.analysis import (
    EndpointKind,
    MotionClass,
    action,
    classify,
    classify_profile,
    decompose_band,
    first_return,
    fit_curvature,
    period_shift,
    periodicity_defect,
)
from jetelastica.core import JetPoint, Polynomial, ReducedMomenta
from jetelastica.dynamics import GeodesicState, integrate
from jetelastica.synthesis import CurvatureSpec, FProfile, build_profile, synthesize
from scipy.integrate import quad


def profile(coeffs, k=None):
    return FProfile.from_polynomial(Polynomial(coeffs), k)


def test_linear_profile_is_circle():
    prof = profile([0.0, 1.0])
    (iv,) = decompose_band(prof)
    assert (iv.lo.x, iv.hi.x) == pytest.approx((-1.0, 1.0))
    assert classify(iv, prof.p) is MotionClass.PERIODIC
    pd = period_shift(prof, iv)
    assert abs(pd.L - 2 * math.pi) < 1e-12 and abs(pd.tau) < 1e-12
    assert pd.action == pytest.approx(math.pi, abs=1e-12)


def test_convict_band_has_critical_centre():
    prof = profile([-1.0, 0.0, 1.0])
    band = decompose_band(prof)
    assert [(iv.lo.x, iv.hi.x) for iv in band] == [
        pytest.approx((-math.sqrt(2), 0.0), abs=1e-7),
        pytest.approx((0.0, math.sqrt(2)), abs=1e-7),
    ]
    assert band.intervals[0].hi.kind is EndpointKind.CRITICAL
    assert band.intervals[0].hi.multiplicity == 2
    assert all(classify(iv, prof.p) is MotionClass.ASYMPTOTIC_ONE_LINE for iv in band)
    assert math.isinf(period_shift(prof, band.intervals[1]).L)


def test_vertical_line_and_straight_line():
    assert classify_profile(profile([1.0], 1))[0][1] is MotionClass.DEGENERATE_VERTICAL_LINE
    ((iv, cls),) = classify_profile(profile([0.3], 1))
    assert cls is MotionClass.STRAIGHT_LINE and iv.lo.kind is EndpointKind.WINDOW


def test_profile_outside_band_is_degenerate():
    assert decompose_band(profile([2.0], 1)).degenerate


def test_period_against_adaptive_quadrature():
    prof = profile([0.1, 0.7, 0.0, -0.4])
    for iv in decompose_band(prof):
        if classify(iv, prof.p) is not MotionClass.PERIODIC:
            continue
        F = prof.F
        ref, _ = quad(lambda x: 2 / math.sqrt(max(1 - F(x) ** 2, 1e-300)), iv.lo.x, iv.hi.x,
                      limit=500, epsabs=1e-13)
        assert period_shift(prof, iv).L == pytest.approx(ref, rel=1e-8)


def test_period_matches_first_return_of_flow():
    spec = CurvatureSpec(Polynomial([0.0, 2.0]), 0.0, -0.3)
    prof = build_profile(spec, 2)
    iv = decompose_band(prof).locate(0.0)
    L = period_shift(prof, iv).L
    arc = synthesize(spec, 2, s_span=1.5 * L)
    assert first_return(arc) == pytest.approx(L, abs=1e-7)


def test_action_derivative_is_period():
    prof = profile([0.0, 1.0])
    (iv,) = decompose_band(prof)
    h = 1e-4
    dI = (action(prof, iv, 0.5 + h) - action(prof, iv, 0.5 - h)) / (2 * h)
    assert dI == pytest.approx(2 * math.pi, abs=1e-6)
    # for F = x the loop is a disc of radius sqrt(2H)
    assert action(prof, iv, 2.0) == pytest.approx(4 * math.pi, abs=1e-10)


def test_curvature_fit_recovers_polynomial():
    P = ReducedMomenta((0.6, 0.8, 0.5, -0.3, 0.7))
    arc = integrate(GeodesicState(JetPoint.origin(3), P), 30.0)
    p, res = fit_curvature(arc, 2)
    assert res < 1e-7
    # dkappa/dx = P_4 and dP_4/dx = -P_5 along the arc
    assert 2 * p.coefficients[2] == pytest.approx(-P[5], abs=1e-6)


def test_periodicity_defect_needs_span():
    arc = synthesize(CurvatureSpec(Polynomial([1.0])), 1, s_span=3.0)
    with pytest.raises(ValueError):
        periodicity_defect(arc, 2 * math.pi, 0.0)
    with pytest.raises(ValueError):
        periodicity_defect(arc, math.inf, 0.0)
