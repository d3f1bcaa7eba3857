"""Build geodesics from a prescribed polynomial curvature law kappa = p(x)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from scipy.integrate import solve_ivp

from .core import JetDim, JetPoint, Polynomial, ReducedMomenta, poly_antiderivative
from .dynamics import (
    GeodesicArc,
    GeodesicState,
    IntegrationError,
    assemble_arc,
    initial_vector,
    integrate,
    output_grid,
    solve_flow,
)


@dataclass(frozen=True)
class CurvatureSpec:
    p: Polynomial
    anchor_x: float = 0.0
    anchor_duds: float = 0.0
    sigma: int = 1

    def __post_init__(self):
        if not isinstance(self.p, Polynomial):
            object.__setattr__(self, "p", Polynomial(self.p))
        if not abs(self.anchor_duds) < 1:
            raise ValueError(
                f"anchor slope du/ds must lie strictly inside (-1, 1), got {self.anchor_duds}"
            )
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")

    @classmethod
    def from_json(cls, doc: dict | str) -> tuple["CurvatureSpec", int]:
        """Parse ``{"k", "p", "anchor": {"x", "duds"}, "sigma"}``; returns (spec, k)."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            k = int(doc["k"])
            anchor = doc.get("anchor", {})
            spec = cls(
                Polynomial([float(c) for c in doc["p"]]),
                float(anchor.get("x", 0.0)),
                float(anchor.get("duds", 0.0)),
                int(doc.get("sigma", 1)),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed curvature spec: {exc}") from exc
        return spec, k

    def to_json(self, k: int) -> dict:
        return {
            "k": k,
            "p": list(self.p.coefficients),
            "anchor": {"x": self.anchor_x, "duds": self.anchor_duds},
            "sigma": self.sigma,
        }


@dataclass(frozen=True)
class FProfile:
    """The slope profile F with F' = p, and its derivatives up to order k."""

    k: int
    F: Polynomial
    derivatives: tuple[Polynomial, ...]  # F', F'', ..., F^(k)

    @classmethod
    def from_polynomial(cls, F: Polynomial, k: int | None = None) -> "FProfile":
        k = max(1, int(F.degree)) if k is None else k
        if F.degree > k:
            raise ValueError(f"profile of degree {F.degree} exceeds k={k}")
        ders, d = [], F
        for _ in range(k):
            d = d.derivative()
            ders.append(d)
        return cls(k, F, tuple(ders))

    @property
    def p(self) -> Polynomial:
        return self.derivatives[0]

    def nth(self, i: int) -> Polynomial:
        return self.F if i == 0 else self.derivatives[i - 1]

    def momenta_ladder(self, x) -> np.ndarray:
        """(F, -F', F'', ..., (-1)^k F^(k)) at x; the P_2..P_{k+2} values."""
        x = np.asarray(x, dtype=float)
        return np.stack([(-1) ** i * self.nth(i)(x) for i in range(self.k + 1)], axis=-1)


def build_profile(spec: CurvatureSpec, dim: JetDim | int) -> FProfile:
    k = dim.k if isinstance(dim, JetDim) else int(dim)
    if spec.p.degree > k - 1:
        raise ValueError(f"curvature polynomial of degree {spec.p.degree} needs k >= {spec.p.degree + 1}")
    F = poly_antiderivative(spec.p, (spec.anchor_x, spec.anchor_duds))
    return FProfile.from_polynomial(F, k)


def momenta_from_F(prof: FProfile, x: float, sigma: int = 1) -> ReducedMomenta:
    f = float(prof.F(x))
    if abs(f) > 1:
        raise ValueError(f"|F({x})| = {abs(f)} > 1: outside the admissible band")
    P1 = sigma * np.sqrt(max(0.0, 1.0 - f * f))
    return ReducedMomenta((P1, *prof.momenta_ladder(x)))


def synthesize(
    spec: CurvatureSpec,
    dim: JetDim | int,
    initial: JetPoint | None = None,
    s_span: float | tuple[float, float] = 50.0,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-10,
    n_samples: int | None = None,
) -> GeodesicArc:
    """Geodesic whose planar curvature obeys kappa(s) = p(x(s)).

    The seed momenta come from :func:`momenta_from_F` at the anchor and
    turning points are crossed by the flow itself. When the band interval
    around the anchor ends at a critical point of F the arc approaches a
    relative equilibrium, which forward integration cannot follow for long;
    see :func:`_capture_equilibrium`.
    """
    k = dim.k if isinstance(dim, JetDim) else int(dim)
    prof = build_profile(spec, k)
    if initial is None:
        initial = JetPoint(spec.anchor_x, (0.0,) * k, 0.0)
    if initial.k != k:
        raise ValueError(f"initial point has k={initial.k}, expected {k}")
    if initial.x != spec.anchor_x:
        raise ValueError("initial point must sit at the anchor abscissa")
    s0, s1 = (0.0, float(s_span)) if np.isscalar(s_span) else map(float, s_span)
    P0 = momenta_from_F(prof, spec.anchor_x, spec.sigma)
    init = GeodesicState(initial, P0, s0)

    targets = _critical_ends(prof, spec.anchor_x)
    if not targets:
        return integrate(init, s1, rel_tol, abs_tol, n_samples=n_samples)
    return _capture_equilibrium(prof, init, s1, targets, rel_tol, abs_tol, n_samples)


def _critical_ends(prof: FProfile, x: float):
    from .analysis import decompose_band  # analysis depends on this module

    if prof.F.is_constant():
        return []
    iv = decompose_band(prof).locate(x)
    if iv is None:
        return []
    return [(e, +1 if e is iv.hi else -1, iv.width) for e in iv if e.critical]


class _CapturedDense:
    """Dense output stitched from the free flow and the equilibrium approach."""

    def __init__(self, k, s_switch, forward, first, second, to_full):
        self.k, self.s_switch, self.forward = k, s_switch, forward
        self.first, self.second, self.to_full = first, second, to_full

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        late = s > self.s_switch if self.forward else s < self.s_switch
        out = np.empty((2 * (self.k + 2) + 1, s.size))
        if np.any(~late):
            out[:, ~late] = self.first(s[~late])
        if np.any(late):
            out[:, late] = self.to_full(self.second(s[late])).T
        return out


def _capture_equilibrium(prof, init, s1, targets, rel_tol, abs_tol, n_samples) -> GeodesicArc:
    """Follow the free flow until the arc is within a small gap of a critical
    band end, then switch to the logarithmic gap v = log|x - x_c|.

    In that variable the approach is a regular ODE with the momenta read off
    F(x); the arc can no longer cross x_c, which the exact solution only
    reaches as s -> infinity.
    """
    k = init.q.k
    s0 = float(init.s)
    x_start = init.q.x
    events, meta = [], []
    for end, side, width in targets:
        gap = min(1e-3 * width, 0.5 * abs(x_start - end.x))
        level = end.x - side * gap

        def ev(_s, Y, level=level):
            return Y[0] - level

        ev.terminal = True
        events.append(ev)
        meta.append((end, side))

    grid = output_grid(s0, s1, n_samples)
    sol = solve_flow(k, initial_vector(init), s0, s1, rel_tol, abs_tol, events=events)
    hit = [i for i, t in enumerate(sol.t_events) if t.size]
    if not hit:
        Y = sol.sol(grid).T
        return assemble_arc(k, grid, Y, rel_tol, abs_tol, sol.sol)

    which = min(hit, key=lambda i: abs(sol.t_events[i][0] - s0))
    end, side = meta[which]
    s_e = float(sol.t_events[which][0])
    Y_e = sol.sol(s_e)
    n = k + 2
    sign_v = float(np.sign(Y_e[n]))  # sign of P_1 at the switch

    xc = end.x
    # Taylor shift F(xc - side*d) and strip the vanishing low orders of 1 - F^2
    shifted = Polynomial(
        [float(prof.nth(j)(xc)) * (-side) ** j / math.factorial(j) for j in range(prof.k + 1)]
    )
    Q = (1.0 - shifted * shifted).coefficients
    m = max(end.multiplicity, 2)
    G = Polynomial(Q[m:] if len(Q) > m else [0.0])
    if G(0.0) <= 0:
        raise IntegrationError("critical end point is not an isolated equilibrium", s_e)

    def speed(v):
        d = np.exp(v)
        return d ** (m / 2) * np.sqrt(np.maximum(G(d), 0.0)), d

    def rhs(_s, Z):
        v, u = Z[0], Z[1:]  # u: (u_k, ..., u_1, y)
        spd, d = speed(v)
        x = xc - side * d
        P1 = sign_v * spd
        out = np.empty_like(Z)
        # d|gap|/ds = -side * dx/ds, divided through by the gap itself
        out[0] = -side * sign_v * d ** (m / 2 - 1) * np.sqrt(max(G(d), 0.0))
        out[1] = prof.F(x)
        out[2:] = u[:-1] * P1
        return out

    ladder_e = prof.momenta_ladder(Y_e[0])
    turns = np.round((Y_e[-1] - np.arctan2(ladder_e[0], Y_e[n])) / (2 * np.pi))

    def to_full(Zs):
        Zs = np.atleast_2d(Zs).T
        v, u = Zs[:, 0], Zs[:, 1:]
        spd, d = speed(v)
        x = xc - side * d
        P = np.column_stack([sign_v * spd, prof.momenta_ladder(x)])
        heading = np.arctan2(P[:, 1], P[:, 0]) + 2 * np.pi * turns
        return np.column_stack([x, u, P, heading])

    Z0 = np.concatenate([[np.log(abs(Y_e[0] - xc))], Y_e[1:n]])
    sol2 = solve_ivp(rhs, (s_e, s1), Z0, method="DOP853", rtol=rel_tol, atol=abs_tol, dense_output=True)
    if sol2.status == -1:
        raise IntegrationError(f"integrator failed: {sol2.message}", float(sol2.t[-1]))

    forward = s1 > s0
    dense = _CapturedDense(k, s_e, forward, sol.sol, sol2.sol, to_full)
    Y = dense(grid).T
    if not np.all(np.isfinite(Y)):
        raise IntegrationError("non-finite state", s_e)
    return assemble_arc(k, grid, Y, rel_tol, abs_tol, dense)


def roundtrip_residual(arc: GeodesicArc, prof: FProfile) -> float:
    """Worst mismatch between the arc's momenta and the ladder read off F at x(s)."""
    x = arc.x
    ladder = prof.momenta_ladder(x)
    res = np.abs(arc.P[:, 1] - ladder[:, 0])
    res += np.abs(arc.kappa - prof.p(x))
    res += np.sum(np.abs(arc.P[:, 2:] - ladder[:, 1:]), axis=1)
    return float(np.max(res))
