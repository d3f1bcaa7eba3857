"""Band structure of F, motion classes, periods, action, and curvature fits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate as _spi
from scipy.optimize import brentq

from .core import Polynomial, poly_eval
from .dynamics import GeodesicArc
from .roots import cauchy_bound, real_roots
from .synthesis import FProfile


class QuadratureError(RuntimeError):
    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3g})")
        self.estimate = estimate


class EndpointKind(str, enum.Enum):
    REGULAR = "Regular"
    CRITICAL = "Critical"
    # only for constant profiles, whose band is cut by the window itself
    WINDOW = "Window"


class MotionClass(str, enum.Enum):
    PERIODIC = "Periodic"
    ASYMPTOTIC_ONE_LINE = "AsymptoticOneLine"
    ASYMPTOTIC_TWO_LINES = "AsymptoticTwoLines"
    DEGENERATE_VERTICAL_LINE = "DegenerateVerticalLine"
    STRAIGHT_LINE = "StraightLine"


@dataclass(frozen=True)
class BandEndpoint:
    x: float
    level: float
    kind: EndpointKind
    multiplicity: int = 1

    @property
    def critical(self) -> bool:
        return self.kind is EndpointKind.CRITICAL


class BandInterval(NamedTuple):
    lo: BandEndpoint
    hi: BandEndpoint

    @property
    def width(self) -> float:
        return self.hi.x - self.lo.x

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo.x - slack <= x <= self.hi.x + slack


@dataclass(frozen=True)
class BandDecomposition:
    intervals: tuple[BandInterval, ...]
    degenerate: bool
    window: tuple[float, float]
    # the admissible set reaches past the window edge
    truncated: bool = False

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def locate(self, x: float) -> BandInterval | None:
        for iv in self.intervals:
            if iv.contains(x):
                return iv
        return None


@dataclass(frozen=True)
class PeriodData:
    L: float  # math.inf when an endpoint is critical
    tau: float | None
    action: float | None
    error_estimate: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.L)


def _as_F(prof) -> Polynomial:
    return prof.F if isinstance(prof, FProfile) else prof


def default_window(F: Polynomial, c: float = 1.0) -> tuple[float, float]:
    """Smallest interval holding every real root of F^2 - c^2, padded by 10%."""
    if F.is_constant():
        return (-1.0, 1.0)
    roots = []
    for level in (c, -c):
        G = F - level
        B = cauchy_bound(G)
        roots += [r.x for r in real_roots(G, -B - 1.0, B + 1.0)]
    if not roots:
        return (-1.0, 1.0)
    lo, hi = min(roots), max(roots)
    pad = 0.1 * (hi - lo) if hi > lo else 0.1 * max(1.0, abs(lo))
    return (lo - pad, hi + pad)


def _critical(F: Polynomial, x: float, scale: float) -> bool:
    d1 = poly_eval(F.derivative(), x)
    d2 = poly_eval(F.derivative(2), x)
    return abs(d1) < 1e-10 * (1.0 + abs(d2) * scale)


def _level_points(F: Polynomial, c: float, a: float, b: float) -> list[BandEndpoint]:
    width = b - a
    eps = 1e-12 * max(1.0, abs(a), abs(b))
    pts = []
    for level in (c, -c):
        for r in real_roots(F - level, a - eps, b + eps):
            kind = EndpointKind.CRITICAL if _critical(F, r.x, width) else EndpointKind.REGULAR
            pts.append(BandEndpoint(r.x, level, kind, r.multiplicity))
    return sorted(pts, key=lambda e: e.x)


def decompose_band(prof, window: tuple[float, float] | None = None, c: float = 1.0) -> BandDecomposition:
    """Split {x : |F(x)| <= c} inside ``window`` into closed intervals.

    Interior points where F touches +-c split intervals, so every interval has
    |F| < c strictly inside and |F| = c at both ends.
    """
    F = _as_F(prof)
    if window is None:
        window = default_window(F, c)
    a, b = map(float, window)
    if not a < b:
        raise ValueError(f"inverted window [{a}, {b}]")
    if F.is_constant():
        v = F.coefficients[0]
        if abs(v) >= c:
            return BandDecomposition((), True, (a, b))
        ends = (BandEndpoint(a, v, EndpointKind.WINDOW, 0), BandEndpoint(b, v, EndpointKind.WINDOW, 0))
        return BandDecomposition((BandInterval(*ends),), False, (a, b), truncated=True)

    pts = _level_points(F, c, a, b)
    inside = lambda t: abs(poly_eval(F, t)) < c  # noqa: E731
    intervals = [
        BandInterval(lo, hi)
        for lo, hi in zip(pts, pts[1:])
        if hi.x > lo.x and inside(0.5 * (lo.x + hi.x))
    ]
    if pts:
        truncated = (pts[0].x > a and inside(0.5 * (a + pts[0].x))) or (
            pts[-1].x < b and inside(0.5 * (pts[-1].x + b))
        )
    else:
        truncated = inside(0.5 * (a + b))
    return BandDecomposition(tuple(intervals), not intervals, (a, b), truncated)


def classify(interval: BandInterval, p: Polynomial | None = None) -> MotionClass:
    """Motion class from whether the curvature vanishes at each band end."""
    lo, hi = interval
    if lo.kind is EndpointKind.WINDOW:
        return MotionClass.STRAIGHT_LINE
    if p is None:
        z0, z1 = lo.critical, hi.critical
    else:
        scale = interval.width
        dp = p.derivative()
        zero = lambda x: abs(poly_eval(p, x)) < 1e-10 * (1.0 + abs(poly_eval(dp, x)) * scale)  # noqa: E731
        z0, z1 = zero(lo.x), zero(hi.x)
    if z0 and z1:
        return MotionClass.ASYMPTOTIC_TWO_LINES
    if z0 or z1:
        return MotionClass.ASYMPTOTIC_ONE_LINE
    return MotionClass.PERIODIC


def classify_profile(prof, window=None) -> list[tuple[BandInterval | None, MotionClass]]:
    """Classify every band interval; a profile stuck at +-1 is the vertical line."""
    F = _as_F(prof)
    if F.is_constant() and abs(F.coefficients[0]) == 1.0:
        return [(None, MotionClass.DEGENERATE_VERTICAL_LINE)]
    band = decompose_band(F, window)
    p = F.derivative()
    return [(iv, classify(iv, p)) for iv in band]


# -- quadrature ---------------------------------------------------------------

def _deflate(Q: Polynomial, x0: float, x1: float) -> Polynomial:
    """Q / ((x - x0)(x1 - x)), dropping the (rounding-level) remainder."""
    quot, _ = np.polynomial.polynomial.polydiv(Q.coefficients, [-x0 * x1, x0 + x1, -1.0])
    return Polynomial(quot)


def _periodic_trapezoid(h, tol: float, n0: int = 16, nmax: int = 1 << 16) -> tuple[float, float, bool]:
    """Integral over [0, pi/2] of a smooth function that is even and pi-periodic.

    For such integrands the equispaced rule on [0, pi) converges
    geometrically, so doubling N until successive values agree gives both the
    value and a (pessimistic) error estimate.
    """
    n = n0
    prev = None
    while n <= nmax:
        phi = np.arange(n) * (np.pi / n)
        val = 0.5 * (np.pi / n) * float(np.sum(h(phi)))
        if prev is not None:
            err = abs(val - prev)
            if err <= tol:
                return val, err, True
        prev = val
        n *= 2
    return prev, err, False


def _sqrt_weighted(Q: Polynomial, f, x0: float, x1: float, power: float, tol: float) -> tuple[float, float]:
    """Integral of f(x) * Q(x)**power over [x0, x1] for power = +-1/2.

    Q must have simple roots at both ends and be positive inside; the
    substitution x = x0 + (x1 - x0) sin^2(phi) removes the square-root
    behaviour at the ends.
    """
    d = x1 - x0
    g = _deflate(Q, x0, x1)
    probe = np.linspace(x0, x1, 257)
    if np.min(g(probe)) <= 0:
        raise QuadratureError("integrand vanishes inside the interval (near tangency)", math.inf)

    def h(phi):
        x = x0 + d * np.sin(phi) ** 2
        gx = np.maximum(g(x), 0.0)
        if power < 0:
            return 2.0 * f(x) / np.sqrt(gx)
        return 2.0 * d * d * (np.sin(phi) * np.cos(phi)) ** 2 * np.sqrt(gx) * f(x)

    val, err, ok = _periodic_trapezoid(h, tol)
    if ok:
        return val, err
    val2, err2 = _spi.quad(h, 0.0, np.pi / 2, epsabs=tol, epsrel=0.0, limit=2000)
    if err2 > tol:
        raise QuadratureError("tolerance not achievable", min(err, err2))
    return float(val2), float(err2)


def period_shift(prof: FProfile, interval: BandInterval, tol: float = 1e-12) -> PeriodData:
    """Period L and vertical shift tau over one oscillation across ``interval``."""
    lo, hi = interval
    if interval.width <= 0:
        raise ValueError("degenerate interval")
    if lo.kind is EndpointKind.WINDOW:
        raise ValueError("a constant profile does not oscillate")
    act = action(prof, interval, 0.5, tol)
    if lo.critical or hi.critical:
        return PeriodData(math.inf, None, act, 0.0)
    F = _as_F(prof)
    Q = 1.0 - F * F
    L, eL = _sqrt_weighted(Q, lambda x: np.full_like(x, 2.0), lo.x, hi.x, -0.5, tol)
    tau, et = _sqrt_weighted(Q, lambda x: 2.0 * F(x), lo.x, hi.x, -0.5, tol)
    return PeriodData(L, tau, act, max(eL, et))


def action(prof, interval: BandInterval, H: float = 0.5, tol: float = 1e-12) -> float:
    """Loop integral of P_1 dx at energy H: 2 * integral of sqrt(2H - F^2).

    The integration range is the connected part of {F^2 <= 2H} that contains
    the midpoint of ``interval``.
    """
    if H <= 0:
        raise ValueError("H must be positive")
    F = _as_F(prof)
    c = math.sqrt(2.0 * H)
    mid = 0.5 * (interval.lo.x + interval.hi.x)
    Q = 2.0 * H - F * F
    if poly_eval(Q, mid) < 0:
        raise ValueError(f"empty admissible set at H={H}")
    if F.is_constant():
        return 2.0 * interval.width * math.sqrt(poly_eval(Q, mid))
    w = max(interval.width, 1e-3)
    pts = _level_points(F, c, interval.lo.x - w, interval.hi.x + w)
    left = [e for e in pts if e.x < mid]
    right = [e for e in pts if e.x > mid]
    if not left or not right:
        raise ValueError("admissible component not bounded near the interval")
    a, b = left[-1], right[0]
    if a.critical or b.critical:
        # sqrt(Q) is only Lipschitz at a tangency; adaptive quadrature copes
        val, err = _spi.quad(lambda x: math.sqrt(max(poly_eval(Q, x), 0.0)), a.x, b.x,
                             epsabs=tol, epsrel=0.0, limit=2000)
        return 2.0 * val
    val, _ = _sqrt_weighted(Q, lambda x: np.ones_like(x), a.x, b.x, 0.5, tol)
    return 2.0 * val


# -- checks on integrated arcs ------------------------------------------------

def fit_curvature(arc: GeodesicArc, max_degree: int, min_speed: float = 0.05) -> tuple[Polynomial, float]:
    """Least-squares kappa = p(x) on the longest run with |dx/ds| >= min_speed.

    The residual is measured over every sample of the arc, so it also tests
    that the relation survives turning points.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    fast = np.abs(arc.P[:, 0]) >= min_speed
    best, start = (0, 0), None
    for i, flag in enumerate(np.append(fast, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    sel = slice(*best)
    xs, ks = arc.x[sel], arc.kappa[sel]
    if np.unique(xs).size < max_degree + 2:
        raise ValueError("not enough distinct x values on a sub-arc with |dx/ds| >= %g" % min_speed)
    fit = np.polynomial.Polynomial.fit(xs, ks, max_degree).convert()
    p = Polynomial(fit.coef)
    residual = float(np.max(np.abs(arc.kappa - p(arc.x))))
    return p, residual


def periodicity_defect(arc: GeodesicArc, L: float, tau: float) -> tuple[float, float]:
    """Worst |x(s+L) - x(s)| and |u(s+L) - u(s) - tau| over the arc."""
    if L is None or not math.isfinite(L) or L <= 0:
        raise ValueError("periodicity needs a finite positive period")
    s = arc.s[arc.s + L <= arc.s[-1]]
    if s.size == 0:
        raise ValueError(f"arc span {arc.s[-1] - arc.s[0]:.6g} is shorter than the period {L:.6g}")
    q_now, _ = arc.evaluate(s)
    q_later, _ = arc.evaluate(s + L)
    dx = float(np.max(np.abs(q_later[:, 0] - q_now[:, 0])))
    du = float(np.max(np.abs(q_later[:, 1] - q_now[:, 1] - tau)))
    return dx, du


def first_return(arc: GeodesicArc) -> float:
    """Arclength until (x, sign dx/ds) first returns to its starting value."""
    x0 = arc.x[0]
    sgn = np.sign(arc.P[0, 0])
    if sgn == 0:
        raise ValueError("start point is a turning point; return map undefined")
    g = sgn * (arc.x - x0)
    f = lambda t: sgn * (arc.evaluate(t)[0][0] - x0)  # noqa: E731
    # the return crossing is the first passage from below x0 (in the
    # direction of motion) back through it
    for i in range(1, len(arc) - 1):
        if g[i] < 0 <= g[i + 1]:
            if f(arc.s[i + 1]) == 0.0:
                return float(arc.s[i + 1] - arc.s[0])
            return float(brentq(f, arc.s[i], arc.s[i + 1], xtol=1e-14, rtol=1e-15) - arc.s[0])
    raise ValueError("no return within the integrated span")
