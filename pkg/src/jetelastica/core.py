"""Points, momenta and frame of the jet space J^k, plus one-variable polynomials.

Coordinates are always laid out as ``(x, u_k, ..., u_1, y)`` and reduced
momenta as ``(P_1, ..., P_{k+2})``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class JetDim:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"jet order must be a positive integer, got {self.k!r}")

    @property
    def manifold_dim(self) -> int:
        return self.k + 2

    algebra_dim = manifold_dim


@dataclass(frozen=True)
class JetPoint:
    """A point of J^k. ``u[i-1]`` holds u_i, so ``u`` runs u_1..u_k."""

    x: float
    u: tuple[float, ...]
    y: float

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(v) for v in self.u))
        if len(self.u) < 1:
            raise ValueError("a jet point needs at least one derivative coordinate")

    @property
    def k(self) -> int:
        return len(self.u)

    def as_array(self) -> np.ndarray:
        """Coordinates in canonical order (x, u_k, ..., u_1, y)."""
        return np.array([self.x, *self.u[::-1], self.y])

    @classmethod
    def from_array(cls, arr) -> "JetPoint":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 1 or arr.size < 3:
            raise ValueError("expected (x, u_k, ..., u_1, y) with k >= 1")
        return cls(float(arr[0]), tuple(arr[1:-1][::-1]), float(arr[-1]))

    @classmethod
    def origin(cls, k: int) -> "JetPoint":
        return cls(0.0, (0.0,) * k, 0.0)


@dataclass(frozen=True)
class CanonicalMomenta:
    """Cotangent fibre coordinates; ``p[i-1]`` is conjugate to u_i."""

    p_x: float
    p: tuple[float, ...]
    p_y: float

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))

    @property
    def k(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class ReducedMomenta:
    P: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "P", tuple(float(v) for v in self.P))
        if len(self.P) < 3:
            raise ValueError("reduced momenta need k+2 >= 3 components")

    @property
    def k(self) -> int:
        return len(self.P) - 2

    @property
    def Z(self) -> tuple[float, ...]:
        """The tail (P_3, ..., P_{k+2}) that controls the Poisson tensor."""
        return self.P[2:]

    def __getitem__(self, i: int) -> float:
        # 1-based, matching P_1..P_{k+2}
        if not 1 <= i <= len(self.P):
            raise IndexError(f"P_{i} out of range for k={self.k}")
        return self.P[i - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.P)


@dataclass(frozen=True)
class PlanarPoint:
    x: float
    u: float


def power_functions(q: JetPoint, m: CanonicalMomenta) -> ReducedMomenta:
    if q.k != m.k:
        raise ValueError(f"dimension mismatch: point has k={q.k}, momenta k={m.k}")
    k = q.k
    u, p = q.u, m.p
    P1 = m.p_x + u[0] * m.p_y + sum(u[i - 1] * p[i - 2] for i in range(2, k + 1))
    P2 = p[k - 1]
    tail = [p[i - 1] for i in range(k - 1, 0, -1)] + [m.p_y]
    return ReducedMomenta((P1, P2, *tail))


def hamiltonian(P) -> float:
    P = P.P if isinstance(P, ReducedMomenta) else P
    return 0.5 * (P[0] ** 2 + P[1] ** 2)


def project_plane(q: JetPoint) -> PlanarPoint:
    return PlanarPoint(q.x, q.u[-1])


def horizontal_velocity(q: JetPoint, a: float, b: float) -> np.ndarray:
    """``a X_1 + b X_2`` at ``q`` in canonical coordinate order."""
    k = q.k
    v = np.zeros(k + 2)
    v[0] = a
    v[1] = b
    # slot 1 + (k - i) holds u_i; X_1 moves u_{i-1} at rate u_i
    for i in range(2, k + 1):
        v[1 + (k - (i - 1))] = q.u[i - 1] * a
    v[-1] = q.u[0] * a
    return v


class Polynomial:
    """Real polynomial with ascending coefficients.

    Trailing zeros are trimmed, so ``degree`` is the index of the last nonzero
    coefficient and ``-inf`` for the zero polynomial.
    """

    __slots__ = ("_c",)

    def __init__(self, coefficients=(0.0,)):
        c = [float(v) for v in np.atleast_1d(np.asarray(coefficients, dtype=float))]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        self._c = tuple(c)

    @property
    def coefficients(self) -> tuple[float, ...]:
        return self._c

    @property
    def degree(self) -> float:
        if len(self._c) == 1 and self._c[0] == 0.0:
            return -np.inf
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return self.degree == -np.inf

    def is_constant(self) -> bool:
        return len(self._c) == 1

    @property
    def leading(self) -> float:
        return self._c[-1]

    def __call__(self, x):
        return poly_eval(self, x)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return f"Polynomial({list(self._c)})"

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self._c), len(other._c))
        a = np.zeros(n)
        a[: len(self._c)] += self._c
        a[: len(other._c)] += other._c
        return Polynomial(a)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self._c])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def derivative(self, order: int = 1) -> "Polynomial":
        p = self
        for _ in range(order):
            p = poly_derivative(p)
        return p


def _as_poly(v) -> Polynomial:
    return v if isinstance(v, Polynomial) else Polynomial([v])


def poly_eval(p: Polynomial, x):
    """Horner evaluation; works elementwise on arrays."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x) + p.coefficients[-1]
    for c in reversed(p.coefficients[:-1]):
        acc = acc * x + c
    return acc if acc.ndim else float(acc)


def poly_derivative(p: Polynomial) -> Polynomial:
    c = p.coefficients
    if len(c) == 1:
        return Polynomial([0.0])
    return Polynomial([i * c[i] for i in range(1, len(c))])


def poly_antiderivative(p: Polynomial, anchor: tuple[float, float] = (0.0, 0.0)) -> Polynomial:
    """Antiderivative ``F`` with ``F(anchor[0]) == anchor[1]``."""
    x0, f0 = anchor
    c = [0.0] + [c / (i + 1) for i, c in enumerate(p.coefficients)]
    F = Polynomial(c)
    return Polynomial([c[0] + f0 - poly_eval(F, x0), *c[1:]])
