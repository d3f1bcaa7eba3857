"""Geodesic flow on J^k: reduced momentum equations plus the horizontal lift."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.integrate import solve_ivp

from .core import JetDim, JetPoint, ReducedMomenta
from .poisson import casimirs


class IntegrationError(RuntimeError):
    def __init__(self, message: str, s: float | None = None):
        super().__init__(message if s is None else f"{message} (at s={s:.17g})")
        self.s = s


@dataclass(frozen=True)
class GeodesicState:
    q: JetPoint
    P: ReducedMomenta
    s: float = 0.0

    def __post_init__(self):
        if self.q.k != self.P.k:
            raise ValueError(f"dimension mismatch: point k={self.q.k}, momenta k={self.P.k}")
        if not (np.all(np.isfinite(self.q.as_array())) and np.all(np.isfinite(self.P.as_array()))):
            raise ValueError("non-finite initial state")


@dataclass(frozen=True)
class ArcSample:
    s: float
    q: JetPoint
    P: ReducedMomenta
    theta: float
    kappa: float
    H: float
    casimir_values: tuple[float, ...]


def reduced_rhs(P) -> np.ndarray:
    P = np.asarray(P.P if isinstance(P, ReducedMomenta) else P, dtype=float)
    d = np.empty_like(P)
    d[0] = P[2] * P[1]
    d[1] = -P[2] * P[0]
    d[2:-1] = -P[0] * P[3:]
    d[-1] = 0.0
    return d


def position_rhs(q, P) -> np.ndarray:
    """Velocity of the lifted curve, i.e. P_1 X_1 + P_2 X_2 in canonical order."""
    q = np.asarray(q.as_array() if isinstance(q, JetPoint) else q, dtype=float)
    P = np.asarray(P.P if isinstance(P, ReducedMomenta) else P, dtype=float)
    d = np.empty_like(q)
    d[0] = P[0]
    d[1] = P[1]
    # q[1:-1] is (u_k, ..., u_1): each u_{i-1} moves at u_i * P_1, y at u_1 * P_1
    d[2:] = q[1:-1] * P[0]
    return d


def _full_rhs(k: int):
    n = k + 2

    def rhs(_s, Y):
        out = np.empty_like(Y)
        q, P = Y[:n], Y[n : 2 * n]
        out[:n] = position_rhs(q, P)
        out[n : 2 * n] = reduced_rhs(P)
        # heading turns at the rotation rate of (P_1, P_2)
        out[-1] = -P[2]
        return out

    return rhs


@dataclass(frozen=True, eq=False)
class GeodesicArc:
    """Sampled geodesic with dense output and conservation diagnostics.

    Array rows follow the sample grid ``s``; ``q`` columns are in canonical
    coordinate order and ``P`` columns are P_1..P_{k+2}.
    """

    k: int
    s: np.ndarray
    q: np.ndarray
    P: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    H: np.ndarray
    casimir: np.ndarray
    rel_tol: float
    abs_tol: float
    max_invariant_drift: float
    _dense: object = field(repr=False, default=None)

    @property
    def dim(self) -> JetDim:
        return JetDim(self.k)

    @property
    def x(self) -> np.ndarray:
        return self.q[:, 0]

    @property
    def u_top(self) -> np.ndarray:
        """The u_k column, the vertical coordinate of the planar projection."""
        return self.q[:, 1]

    def __len__(self):
        return self.s.size

    def samples(self) -> Iterator[ArcSample]:
        for i in range(self.s.size):
            yield ArcSample(
                float(self.s[i]),
                JetPoint.from_array(self.q[i]),
                ReducedMomenta(self.P[i]),
                float(self.theta[i]),
                float(self.kappa[i]),
                float(self.H[i]),
                tuple(self.casimir[i]),
            )

    def evaluate(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Dense-output (q, P) at arbitrary ``s`` inside the integrated span."""
        if self._dense is None:
            raise ValueError("arc carries no dense output")
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        lo, hi = self.s[0], self.s[-1]
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(s_arr < lo - slack) or np.any(s_arr > hi + slack):
            raise ValueError(f"s outside integrated span [{lo}, {hi}]")
        Y = np.atleast_2d(self._dense(s_arr).T)
        n = self.k + 2
        q, P = Y[:, :n], Y[:, n : 2 * n]
        if np.ndim(s) == 0:
            return q[0], P[0]
        return q, P


def _anchor_heading(theta_int: np.ndarray, P: np.ndarray) -> np.ndarray:
    base = np.arctan2(P[:, 1], P[:, 0])
    speed = np.hypot(P[:, 0], P[:, 1])
    turns = np.round((theta_int - base) / (2 * np.pi))
    return np.where(speed > 0, base + 2 * np.pi * turns, theta_int)


def _drift(values: np.ndarray) -> float:
    ref = values[0]
    return float(np.max(np.abs(values - ref) / np.maximum(1.0, np.abs(ref)))) if values.size else 0.0


def output_grid(s0: float, s_end: float, n_samples: int | None = None, step: float | None = None) -> np.ndarray:
    span = s_end - s0
    if step is not None:
        if step <= 0:
            raise ValueError("output step must be positive")
        m = int(np.floor(abs(span) / step + 1e-9))
        grid = s0 + np.sign(span) * step * np.arange(m + 1)
        if abs(grid[-1] - s_end) > 1e-12 * max(1.0, abs(s_end)):
            grid = np.append(grid, s_end)
        return grid
    grid = np.linspace(s0, s_end, 2001 if n_samples is None else int(n_samples))
    if grid.size < 2:
        raise ValueError("need at least two output samples")
    return grid


def solve_flow(k: int, Y0: np.ndarray, s0: float, s_end: float, rel_tol: float, abs_tol: float, events=None):
    """Run DOP853 on the stacked state (q, P, heading) with dense output."""
    with np.errstate(over="raise", invalid="raise"):
        try:
            sol = solve_ivp(
                _full_rhs(k), (s0, s_end), Y0, method="DOP853",
                rtol=rel_tol, atol=abs_tol, dense_output=True, events=events,
            )
        except FloatingPointError as exc:
            raise IntegrationError("non-finite state") from exc
    if sol.status == -1:
        at = float(sol.t[-1]) if sol.t.size else s0
        raise IntegrationError(f"integrator failed: {sol.message}", at)
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationError("non-finite state", float(sol.t[-1]))
    return sol


def assemble_arc(k: int, s: np.ndarray, Y: np.ndarray, rel_tol: float, abs_tol: float, dense) -> GeodesicArc:
    """Build an arc from stacked rows (q, P, integrated heading) on the grid ``s``."""
    if s[-1] < s[0]:
        Y, s = Y[::-1], s[::-1]
    n = k + 2
    q, P = Y[:, :n], Y[:, n : 2 * n]
    theta = _anchor_heading(Y[:, -1], P)
    H = 0.5 * (P[:, 0] ** 2 + P[:, 1] ** 2)
    C = casimirs(k).values_many(P)
    drift = max(_drift(H), *(_drift(C[:, i]) for i in range(k)))
    return GeodesicArc(
        k=k, s=s, q=q, P=P, theta=theta, kappa=-P[:, 2], H=H, casimir=C,
        rel_tol=rel_tol, abs_tol=abs_tol, max_invariant_drift=drift, _dense=dense,
    )


def initial_vector(init: GeodesicState) -> np.ndarray:
    theta0 = float(np.arctan2(init.P.P[1], init.P.P[0]))
    return np.concatenate([init.q.as_array(), init.P.as_array(), [theta0]])


def integrate(
    init: GeodesicState,
    s_end: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-10,
    n_samples: int | None = None,
    step: float | None = None,
) -> GeodesicArc:
    """Integrate the geodesic equations from ``init.s`` to ``s_end``.

    Uses the Dormand-Prince 8(5,3) pair; samples come from its dense output on
    a uniform grid given either as ``step`` or ``n_samples`` (default 2001).
    """
    if not (rel_tol > 0 and abs_tol > 0):
        raise ValueError("tolerances must be positive")
    s0 = float(init.s)
    if s_end == s0:
        raise ValueError("empty integration span")
    grid = output_grid(s0, s_end, n_samples, step)
    sol = solve_flow(init.q.k, initial_vector(init), s0, s_end, rel_tol, abs_tol)
    Y = sol.sol(grid).T
    if not np.all(np.isfinite(Y)):
        raise IntegrationError("non-finite state", float(grid[np.argmax(~np.isfinite(Y).all(axis=1))]))
    return assemble_arc(init.q.k, grid, Y, rel_tol, abs_tol, sol.sol)


@dataclass(frozen=True)
class CurvatureTrace:
    s: np.ndarray
    x: np.ndarray
    kappa: np.ndarray
    # samples where the planar heading is undefined or x never moves
    degenerate: np.ndarray
    geometric_defect: float | None
    tolerance: float

    @property
    def consistent(self) -> bool:
        return self.geometric_defect is None or self.geometric_defect <= self.tolerance


def curvature_along(arc: GeodesicArc, speed_floor: float = 1e-8) -> CurvatureTrace:
    """Curvature -P_3 along the arc, checked against the turning rate of the heading.

    The check differentiates the unwrapped planar heading over s with second
    order differences and compares in the interior of the grid.
    """
    if len(arc) == 0:
        raise ValueError("empty arc")
    speed = np.hypot(arc.P[:, 0], arc.P[:, 1])
    x_static = np.ptp(arc.x) <= speed_floor and np.all(np.abs(arc.P[:, 0]) <= speed_floor)
    degenerate = speed <= speed_floor
    if x_static:
        degenerate = np.ones_like(degenerate)
    ds = float(np.max(np.diff(arc.s))) if len(arc) > 1 else 0.0
    tol = max(1e-6, 10 * ds**2)
    defect = None
    if len(arc) > 2 and not np.any(degenerate):
        heading = np.unwrap(np.arctan2(arc.P[:, 1], arc.P[:, 0]))
        rate = np.gradient(heading, arc.s, edge_order=2)
        # (P_1, P_2) rotates at rate -P_3 whatever the speed
        defect = float(np.max(np.abs(rate[1:-1] - arc.kappa[1:-1])))
    return CurvatureTrace(arc.s.copy(), arc.x.copy(), arc.kappa.copy(), degenerate, defect, tol)
