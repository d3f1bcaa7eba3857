import math

import numpy as np
import pytest

from jetelastica.core import JetPoint, ReducedMomenta
from jetelastica.dynamics import (
    GeodesicState,
    curvature_along,
    integrate,
    position_rhs,
    reduced_rhs,
)
from jetelastica.poisson import casimirs


def state(P, q=None):
    P = ReducedMomenta(tuple(P))
    return GeodesicState(q or JetPoint.origin(P.k), P)


def test_reduced_rhs_is_hamiltonian_vector_field():
    # dP_i/ds = {P_i, H} with H = (P_1^2 + P_2^2)/2
    Z = np.array([0.3, -0.7, 1.1, 0.4, -2.0])
    d = reduced_rhs(Z)
    assert d == pytest.approx([Z[2] * Z[1], -Z[2] * Z[0], -Z[0] * Z[3], -Z[0] * Z[4], 0.0])


def test_position_rhs_is_horizontal():
    q = np.array([0.0, 2.0, 3.0, 5.0])  # x, u_2, u_1, y
    v = position_rhs(q, np.array([1.5, -1.0, 0.0, 0.0]))
    assert v == pytest.approx([1.5, -1.0, 2.0 * 1.5, 3.0 * 1.5])


def test_heisenberg_circle():
    arc = integrate(state([1.0, 0.0, -1.0]), 2 * math.pi, n_samples=401)
    assert np.max(np.abs(arc.x - np.sin(arc.s))) < 1e-8
    assert np.max(np.abs(arc.u_top - (1 - np.cos(arc.s)))) < 1e-8
    assert np.all(arc.kappa == 1.0)


def test_vertical_line():
    arc = integrate(state([0.0, 1.0, 0.0, 0.0]), 3.0)
    assert np.all(arc.x == 0.0)
    assert arc.u_top[-1] == pytest.approx(3.0)
    trace = curvature_along(arc)
    assert trace.consistent


def test_straight_line_in_k1():
    arc = integrate(state([0.6, 0.8, 0.0]), 5.0)
    assert arc.x[-1] == pytest.approx(3.0) and arc.u_top[-1] == pytest.approx(4.0)


def test_backward_integration_is_sorted_and_reversible():
    init = state([0.6, 0.8, 0.3, -0.2])
    fwd = integrate(init, 4.0)
    end = GeodesicState(JetPoint.from_array(fwd.q[-1]), ReducedMomenta(tuple(fwd.P[-1])), 4.0)
    back = integrate(end, 0.0)
    assert np.all(np.diff(back.s) > 0)
    assert back.q[0] == pytest.approx(fwd.q[0], abs=1e-8)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_invariants_conserved(k):
    rng = np.random.default_rng(10 + k)
    Z = rng.normal(size=k + 2)
    Z[:2] /= np.hypot(Z[0], Z[1])
    arc = integrate(state(Z), 40.0)
    assert arc.H[0] == pytest.approx(0.5)
    assert arc.max_invariant_drift < 1e-8
    assert arc.casimir[0] == pytest.approx(casimirs(k).values(Z))


def test_curvature_matches_heading_rate():
    arc = integrate(state([0.6, 0.8, 0.5, -0.3]), 20.0, n_samples=4001)
    trace = curvature_along(arc)
    assert trace.geometric_defect is not None and trace.consistent


def test_dense_output_agrees_with_samples():
    arc = integrate(state([0.6, 0.8, 0.5, -0.3]), 10.0, n_samples=11)
    q, P = arc.evaluate(arc.s[3])
    assert q == pytest.approx(arc.q[3]) and P == pytest.approx(arc.P[3])
    with pytest.raises(ValueError):
        arc.evaluate(11.0)


def test_step_grid():
    arc = integrate(state([1.0, 0.0, 1.0]), 1.0, step=0.25)
    assert list(arc.s) == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])


def test_bad_inputs():
    with pytest.raises(ValueError):
        integrate(state([1.0, 0.0, 1.0]), 1.0, rel_tol=0.0)
    with pytest.raises(ValueError):
        GeodesicState(JetPoint.origin(2), ReducedMomenta((1.0, 0.0, 1.0)))
    with pytest.raises(ValueError):
        state([math.nan, 0.0, 1.0])


def test_unit_speed_and_horizontality():
    P = (0.6, 0.8, 0.5, -0.3, 0.7)
    # 1e-9 on the speed needs tolerances below the 1e-10 default over this span
    arc = integrate(state(P), 20.0, rel_tol=1e-12, abs_tol=1e-12)
    assert np.max(np.abs(np.hypot(arc.P[:, 0], arc.P[:, 1]) - 1.0)) < 1e-9
    # Pfaffian constraints: du_{i-1}/ds = u_i dx/ds and dy/ds = u_1 dx/ds
    h = 1e-5
    s = arc.s[10:-10:50]
    dq = (arc.evaluate(s + h)[0] - arc.evaluate(s - h)[0]) / (2 * h)
    q = arc.evaluate(s)[0]
    assert np.max(np.abs(dq[:, 2:] - q[:, 1:-1] * dq[:, :1])) < 1e-6


def test_vertical_line_flags_degenerate_curvature():
    trace = curvature_along(integrate(state([0.0, 1.0, 0.0, 0.0]), 10.0))
    assert trace.degenerate.all() and trace.geometric_defect is None
    assert np.all(trace.kappa == 0.0)
