"""Named families: generalized convict curves, geodesic graphs, and the
three classic k = 2 elastica."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import MotionClass, PeriodData, classify, decompose_band, period_shift
from .core import JetPoint, Polynomial
from .dynamics import GeodesicArc
from .synthesis import CurvatureSpec, FProfile, synthesize


@dataclass(frozen=True)
class ConvictParams:
    k: int
    a: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("convict curves need k >= 2")
        if not self.a > 0:
            raise ValueError("length scale a must be positive")


def convict_profile(params: ConvictParams) -> FProfile:
    """F(x) = x^k / a^k - alpha, whose curvature k x^(k-1) / a^k is a pure power."""
    k, a = params.k, params.a
    coeffs = [-params.alpha] + [0.0] * (k - 1) + [a ** (-k)]
    return FProfile.from_polynomial(Polynomial(coeffs), k)


def graph_profile(m: int) -> FProfile:
    """Profiles on [-1, 1] with critical ends at x = +-1, so that the arc is a graph.

    Odd m: F = -(x^m - m x) / (m - 1).  Even m = 2j: F = -(x^m - j x^2) / (1 - j).
    """
    if m < 3:
        raise ValueError("geodesic graphs need order >= 3")
    c = np.zeros(m + 1)
    c[m] = 1.0
    if m % 2:
        c[1] = -m
        c /= -(m - 1)
    else:
        j = m // 2
        c[2] = -j
        c /= -(1 - j)
    return FProfile.from_polynomial(Polynomial(c), m)


def theta_ode_defect(arc: GeodesicArc, params: ConvictParams, floor: float = 1e-12) -> float:
    """Worst |kappa^2 - (k/a)^2 (P_2 + alpha)^(2(k-1)/k)| over samples with x >= 0.

    This is the heading equation of the convict family written with
    P_2 = sin(theta) as the vertical component of the unit tangent.
    """
    k, a, alpha = params.k, params.a, params.alpha
    sel = arc.x >= 0
    if not np.any(sel):
        raise ValueError("arc has no samples with x >= 0")
    base = arc.P[sel, 1] + alpha
    if np.min(base) < -floor:
        raise ValueError(f"heading left the domain: P_2 + alpha = {np.min(base):.3g} < 0")
    base = np.maximum(base, 0.0)
    rhs = (k / a) ** 2 * base ** (2.0 * (k - 1) / k)
    return float(np.max(np.abs(arc.kappa[sel] ** 2 - rhs)))


def convict_spec(params: ConvictParams, duds: float = 0.2) -> CurvatureSpec:
    """Anchor on x > 0 where the slope du/ds equals ``duds``."""
    x_star = params.a * (params.alpha + duds) ** (1.0 / params.k)
    prof = convict_profile(params)
    return CurvatureSpec(prof.p, x_star, float(prof.F(x_star)), 1)


def self_intersections(x: np.ndarray, u: np.ndarray) -> int:
    """Number of proper crossings between non-adjacent segments of a polyline."""
    p = np.column_stack([x, u])
    a, b = p[:-1], p[1:]
    d = b - a
    count = 0
    for i in range(len(a) - 2):
        j = slice(i + 2, len(a))
        r, s = d[i], d[j]
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        qp = a[j] - a[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
            w = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / denom
        hit = (denom != 0) & (t > 0) & (t < 1) & (w > 0) & (w < 1)
        count += int(np.sum(hit))
    return count


@dataclass
class FigureCurve:
    name: str
    alpha: float
    arcs: list[GeodesicArc]
    classes: list[str]
    periods: list[PeriodData]
    intersections_per_period: int | None = None
    svg: str = field(default="", repr=False)


def _two_sided(spec: CurvatureSpec, k: int, half_span: float, n: int) -> GeodesicArc:
    """Arc through the anchor covering s in [-half_span, half_span]."""
    back = synthesize(spec, k, s_span=(0.0, -half_span), n_samples=n)
    fwd = synthesize(spec, k, s_span=(0.0, half_span), n_samples=n)
    keep = slice(0, -1)  # drop the duplicated anchor sample
    stitched = {
        name: np.concatenate([getattr(back, name)[keep], getattr(fwd, name)])
        for name in ("s", "q", "P", "theta", "kappa", "H", "casimir")
    }
    return GeodesicArc(
        k=k, rel_tol=fwd.rel_tol, abs_tol=fwd.abs_tol,
        max_invariant_drift=max(back.max_invariant_drift, fwd.max_invariant_drift),
        _dense=None, **stitched,
    )


def figure1_suite(a: float = 1.0, half_span: float = 12.0, n: int = 1201) -> list[FigureCurve]:
    """The convict curve (alpha = 1), pseudo-sinusoid (0) and pseudo-lemniscate (0.65222)."""
    from .io import svg_document

    out = []
    for name, alpha in (("convict", 1.0), ("pseudo-sinusoid", 0.0), ("pseudo-lemniscate", 0.65222)):
        params = ConvictParams(2, a, alpha)
        prof = convict_profile(params)
        band = decompose_band(prof)
        classes = [classify(iv, prof.p).value for iv in band]
        periods = [period_shift(prof, iv) for iv in band]
        if alpha == 1.0:
            # one kink per half of the band, each anchored where du/ds = 0
            arcs = []
            for x_star in (a, -a):
                spec = CurvatureSpec(prof.p, x_star, float(prof.F(x_star)), 1)
                arcs.append(_two_sided(spec, 2, half_span, n))
            curve = FigureCurve(name, alpha, arcs, classes, periods)
        else:
            L = periods[0].L
            spec = CurvatureSpec(prof.p, 0.0, float(prof.F(0.0)), 1)
            arc = synthesize(spec, 2, JetPoint(0.0, (0.0, 0.0), 0.0), s_span=2 * L, n_samples=n)
            # a window a bit shorter than L, started off the centre, holds both
            # passes through the double point but not the near-closure overlap
            one = (arc.s >= 0.25 * L) & (arc.s <= 1.15 * L)
            crossings = self_intersections(arc.x[one], arc.u_top[one])
            curve = FigureCurve(name, alpha, [arc], classes, periods, crossings)
        curve.svg = svg_document([(arc.x, arc.u_top) for arc in curve.arcs])
        out.append(curve)
    return out
