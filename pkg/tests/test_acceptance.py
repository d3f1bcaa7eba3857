"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with its worst measured value.
Run directly (``python3 tests/test_acceptance.py``) for the summary alone.
"""

from __future__ import annotations

import math
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from jetelastica.analysis import (
    MotionClass,
    action,
    classify,
    decompose_band,
    fit_curvature,
    period_shift,
    periodicity_defect,
)
from jetelastica.core import JetPoint, Polynomial, ReducedMomenta
from jetelastica.dynamics import GeodesicState, integrate
from jetelastica.gallery import (
    ConvictParams,
    convict_profile,
    convict_spec,
    figure1_suite,
    graph_profile,
    theta_ode_defect,
)
from jetelastica.poisson import (
    annihilation_defect,
    casimir_paper,
    casimirs,
    jacobi_defect,
    poisson_tensor,
    tensor_rank,
)
from jetelastica.synthesis import CurvatureSpec, build_profile, roundtrip_residual, synthesize

SEED = 20240617
RESULTS: dict[int, bool] = {}


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        RESULTS[n] = ok
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}")
        assert ok, detail

    return emit


def unit_momenta(rng, k):
    Z = rng.normal(size=k + 2)
    Z[:2] /= math.hypot(Z[0], Z[1])
    return Z


def random_periodic_specs(rng, count, ks=(1, 2, 3, 4), max_period=20.0):
    """Curvature specs whose anchor interval is Periodic with L < max_period.

    Rejection keeps only oscillating arcs short enough for several turning
    points inside a span of 50.
    """
    out = []
    while len(out) < count:
        k = int(rng.choice(ks))
        spec = CurvatureSpec(
            Polynomial(rng.normal(size=k)), 0.0, float(rng.uniform(-0.9, 0.9)), int(rng.choice([-1, 1]))
        )
        prof = build_profile(spec, k)
        iv = decompose_band(prof).locate(0.0)
        if iv is None or classify(iv, prof.p) is not MotionClass.PERIODIC:
            continue
        pd = period_shift(prof, iv)
        if pd.L < max_period:
            out.append((spec, k, prof, iv, pd))
    return out


def test_criterion_01_brackets(report):
    rng = np.random.default_rng(SEED + 1)
    worst_anti = worst_jac = 0.0
    ranks_ok = True
    for k in range(1, 7):
        for _ in range(1000):
            Z = rng.normal(size=k + 2)
            B = poisson_tensor(Z)
            worst_anti = max(worst_anti, float(np.max(np.abs(B + B.T))))
            worst_jac = max(worst_jac, jacobi_defect(k, Z))
            ranks_ok &= tensor_rank(Z) == 2 == np.linalg.matrix_rank(B)
        # the centre: rank drops to 0 exactly when P_3..P_{k+2} vanish
        Z = rng.normal(size=k + 2)
        Z[2:] = 0.0
        ranks_ok &= tensor_rank(Z) == 0 == np.linalg.matrix_rank(poisson_tensor(Z))
        Z[-1] = 1e-3
        ranks_ok &= tensor_rank(Z) == 2
    ok = worst_anti == 0.0 and worst_jac == 0.0 and ranks_ok
    report(1, ok, f"antisymmetry {worst_anti:.1e}, Jacobi {worst_jac:.1e}, ranks in {{0,2}}: {ranks_ok}")


def test_criterion_02_casimirs(report):
    rng = np.random.default_rng(SEED + 2)
    worst, jac_ok, c1_ok = 0.0, True, True
    closed_low = 0.0
    closed_high = {}
    for k in range(1, 7):
        C = casimirs(k)
        for _ in range(1000):
            Z = rng.normal(size=k + 2)
            worst = max(worst, max(annihilation_defect(c, Z) for c in C))
        Z = rng.normal(size=k + 2)
        J = np.array([c.gradient(Z) for c in C])
        jac_ok &= np.linalg.matrix_rank(J) == k
        c1_ok &= dict(C[0].terms) == {tuple(int(m == k + 1) for m in range(k + 2)): 1.0}
        for i in range(2, k + 1):
            f = lambda z, i=i: casimir_paper(i, z)  # noqa: E731
            d = max(annihilation_defect(f, rng.normal(size=k + 2), mode="fd") for _ in range(20))
            if i == 2:
                closed_low = max(closed_low, abs(casimir_paper(2, Z) - C[1](Z)))
            else:
                closed_high[(k, i)] = d
    high = max(closed_high.values())
    ok = worst < 1e-12 and jac_ok and c1_ok and closed_low < 1e-12
    report(2, ok, f"annihilation {worst:.1e}, rank k: {jac_ok}, C_1=P_(k+2): {c1_ok}, "
                  f"closed form i=2 mismatch {closed_low:.1e}, closed form i>=3 defect up to {high:.2g} (documented)")


def test_criterion_03_conservation(report):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for k in range(1, 5):
        for _ in range(20):
            Z = unit_momenta(rng, k)
            arc = integrate(GeodesicState(JetPoint.origin(k), ReducedMomenta(tuple(Z))), 100.0,
                            rel_tol=1e-10, abs_tol=1e-10)
            worst = max(worst, arc.max_invariant_drift)
    report(3, worst < 1e-8, f"max relative drift of H and C_i over 80 arcs: {worst:.2e}")


def _circle_fit(x, y):
    A = np.column_stack([x, y, np.ones_like(x)])
    b = x**2 + y**2
    (a1, a2, a3), *_ = np.linalg.lstsq(A, b, rcond=None)
    cx, cy = a1 / 2, a2 / 2
    return cx, cy, math.sqrt(a3 + cx**2 + cy**2)


def test_criterion_04_heisenberg(report):
    rng = np.random.default_rng(SEED + 4)
    worst_fit = 0.0
    for _ in range(10):
        Z = unit_momenta(rng, 1)
        arc = integrate(GeodesicState(JetPoint.origin(1), ReducedMomenta(tuple(Z))), 10.0)
        cx, cy, _ = _circle_fit(arc.x, arc.u_top)
        r = np.hypot(arc.x - cx, arc.u_top - cy)
        worst_fit = max(worst_fit, float(np.max(np.abs(r - 1 / abs(Z[2])))))
    # (sin s, cos s - 1) is traced with P_3 = +1; P_3 = -1 gives the mirror (sin s, 1 - cos s)
    arc = integrate(GeodesicState(JetPoint.origin(1), ReducedMomenta((1.0, 0.0, 1.0))), 2 * math.pi)
    stated = max(np.max(np.abs(arc.x - np.sin(arc.s))), np.max(np.abs(arc.u_top - (np.cos(arc.s) - 1))))
    arc = integrate(GeodesicState(JetPoint.origin(1), ReducedMomenta((1.0, 0.0, -1.0))), 2 * math.pi)
    mirror = max(np.max(np.abs(arc.x - np.sin(arc.s))), np.max(np.abs(arc.u_top - (1 - np.cos(arc.s)))))
    ok = worst_fit < 1e-7 and stated < 1e-8 and mirror < 1e-8
    report(4, ok, f"radius residual {worst_fit:.1e}, closed form (P_3=+1) {stated:.1e}, "
                  f"mirror (P_3=-1) {mirror:.1e}")


def test_criterion_05_curvature_polynomial(report):
    rng = np.random.default_rng(SEED + 5)
    worst_hi, worst_lo, skipped = 0.0, math.inf, 0
    for k in (2, 3, 4):
        used = 0
        while used < 5:
            Z = unit_momenta(rng, k)
            arc = integrate(GeodesicState(JetPoint.origin(k), ReducedMomenta(tuple(Z))), 40.0)
            # best uniform error of any lower-degree fit: |lead| * h^(k-1) / 2^(k-2)
            # on an x-range of half-width h, with lead = P_(k+2) / (k-1)! up to sign
            h = np.ptp(arc.x) / 2
            floor = abs(Z[-1]) / math.factorial(k - 1) * h ** (k - 1) / 2 ** (k - 2)
            if floor < 2e-2:
                skipped += 1  # arc too short in x to tell the degrees apart
                continue
            used += 1
            worst_hi = max(worst_hi, fit_curvature(arc, k - 1)[1])
            worst_lo = min(worst_lo, fit_curvature(arc, k - 2)[1])
    ok = worst_hi < 1e-6 and worst_lo > 1e-2
    report(5, ok, f"degree k-1 residual {worst_hi:.1e}, degree k-2 residual >= {worst_lo:.2e} "
                  f"({skipped} near-degenerate draws skipped)")


def test_criterion_06_roundtrip(report):
    rng = np.random.default_rng(SEED + 6)
    worst, min_turns = 0.0, math.inf
    for spec, k, prof, _, _ in random_periodic_specs(rng, 12):
        arc = synthesize(spec, k, s_span=50.0)
        turns = int(np.sum(np.diff(np.sign(arc.P[:, 0])) != 0))
        min_turns = min(min_turns, turns)
        worst = max(worst, roundtrip_residual(arc, prof))
    ok = worst < 1e-6 and min_turns >= 2
    report(6, ok, f"roundtrip residual {worst:.1e} over 12 specs, fewest turning points {min_turns}")


def test_criterion_07_period_law(report):
    prof = build_profile(CurvatureSpec(Polynomial([1.0])), 1)
    (iv,) = decompose_band(prof)
    pd = period_shift(prof, iv)
    err_L, err_tau = abs(pd.L - 2 * math.pi), abs(pd.tau)

    rng = np.random.default_rng(SEED + 7)
    sin_prof = convict_profile(ConvictParams(2, 1.0, 0.0))
    sin_spec = CurvatureSpec(sin_prof.p, 0.0, float(sin_prof.F(0.0)))
    sin_iv = decompose_band(sin_prof).locate(0.0)
    cases = [(sin_spec, 2, period_shift(sin_prof, sin_iv))]
    cases += [(spec, k, pd) for spec, k, _, _, pd in random_periodic_specs(rng, 3, ks=(2, 3, 4))]
    worst = 0.0
    for spec, k, pd in cases:
        arc = synthesize(spec, k, s_span=3 * pd.L, n_samples=3001)
        worst = max(worst, *periodicity_defect(arc, pd.L, pd.tau))
    ok = err_L < 1e-10 and err_tau < 1e-10 and worst < 1e-6
    report(7, ok, f"F=x: |L-2pi| {err_L:.1e}, |tau| {err_tau:.1e}; "
                  f"shift defect on 4 arcs {worst:.1e}")


def test_criterion_08_action_period(report):
    rng = np.random.default_rng(SEED + 8)
    h = 1e-4
    worst = 0.0
    for _, _, prof, iv, pd in random_periodic_specs(rng, 5, ks=(2, 3, 4)):
        dI = (action(prof, iv, 0.5 + h) - action(prof, iv, 0.5 - h)) / (2 * h)
        worst = max(worst, abs(dI - pd.L))
    report(8, worst < 1e-4, f"|dI/dH - L| over 5 profiles: {worst:.1e}")


def test_criterion_09_classification(report):
    convict_ok = True
    for k in (2, 3, 4):
        prof = convict_profile(ConvictParams(k, 1.0, 1.0))
        for iv in decompose_band(prof):
            convict_ok &= classify(iv, prof.p) is MotionClass.ASYMPTOTIC_ONE_LINE
            convict_ok &= math.isinf(period_shift(prof, iv).L)
    graph_ok, monotone_ok, excursion = True, True, 0.0
    for m in (3, 4, 5):
        prof = graph_profile(m)
        iv = decompose_band(prof).locate(0.0)
        graph_ok &= classify(iv, prof.p) is MotionClass.ASYMPTOTIC_TWO_LINES
        spec = CurvatureSpec(prof.p, 0.0, float(prof.F(0.0)))
        for span in (200.0, -200.0):
            arc = synthesize(spec, m, s_span=span, n_samples=4001)
            excursion = max(excursion, float(np.max(np.abs(arc.x))) - 1.0)
            if m % 2:
                dx = np.diff(arc.x)
                monotone_ok &= bool(np.all(dx >= 0) or np.all(dx <= 0))
    ok = convict_ok and graph_ok and monotone_ok and excursion <= 1e-6
    report(9, ok, f"convict one-line with L=inf: {convict_ok}, graphs two-line: {graph_ok}, "
                  f"max |x|-1 = {excursion:.1e}, odd graphs monotone: {monotone_ok}")


def test_criterion_10_theta_ode(report):
    worst = 0.0
    for k in (2, 3, 4):
        for a in (1.0, 2.0):
            for alpha in (0.0, 1.0):
                params = ConvictParams(k, a, alpha)
                arc = synthesize(convict_spec(params), k, s_span=50.0, rel_tol=1e-12, abs_tol=1e-12)
                worst = max(worst, theta_ode_defect(arc, params))
    report(10, worst < 1e-8, f"worst heading-equation defect over 12 cases: {worst:.1e}")


def test_criterion_11_figure1(report):
    curves = {c.name: c for c in figure1_suite()}
    svg_ok = all(ET.fromstring(c.svg).tag.endswith("svg") for c in curves.values())
    sinus = curves["pseudo-sinusoid"].classes == ["Periodic"]
    conv = curves["convict"]
    one_line = conv.classes == ["AsymptoticOneLine"] * 2
    # each half-interval arc runs into the same vertical line x = 0 at both ends
    ends = max(abs(arc.x[i]) for arc in conv.arcs for i in (0, -1))
    lem = curves["pseudo-lemniscate"]
    ok = svg_ok and sinus and one_line and ends < 1e-3 and lem.intersections_per_period == 1
    report(11, ok, f"SVGs ok: {svg_ok}, alpha=0 periodic: {sinus}, alpha=1 one line per half "
                   f"(ends at |x| <= {ends:.1e}): {one_line}, lemniscate crossings per period: "
                   f"{lem.intersections_per_period}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
