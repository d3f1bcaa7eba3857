"""Lie-Poisson structure of the jet algebra and its Casimir functions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import JetDim, ReducedMomenta


def _as_vec(Z) -> np.ndarray:
    return np.asarray(Z.P if isinstance(Z, ReducedMomenta) else Z, dtype=float)


def bracket_form(i: int, j: int, k: int) -> dict[int, int]:
    """{P_i, P_j} as an integer linear form ``{m: coefficient}`` in the P's."""
    n = k + 2
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"bracket indices ({i}, {j}) out of range 1..{n}")
    if i == 1 and 2 <= j <= k + 1:
        return {j + 1: 1}
    if j == 1 and 2 <= i <= k + 1:
        return {i + 1: -1}
    return {}


def structure_bracket(i: int, j: int, Z) -> float:
    z = _as_vec(Z)
    k = z.size - 2
    return float(sum(c * z[m - 1] for m, c in bracket_form(i, j, k).items()))


def poisson_tensor(Z) -> np.ndarray:
    z = _as_vec(Z)
    k = z.size - 2
    B = np.zeros((k + 2, k + 2))
    # only row/column 1 against 2..k+1 is populated
    B[0, 1 : k + 1] = z[2:]
    B[1 : k + 1, 0] = -z[2:]
    return B


def tensor_rank(Z, tol: float = 1e-12) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = _as_vec(Z)
    return 2 if np.linalg.norm(z[2:]) > tol else 0


def jacobi_defect(k: int, Z) -> float:
    """Largest cyclic sum {P_i,{P_j,P_l}} + ... over all index triples at Z.

    Nested brackets are expanded through the integer structure constants, so
    for a genuine Lie algebra the forms cancel exactly before evaluation.
    """
    z = _as_vec(Z)
    worst = 0.0
    for i, j, l in combinations(range(1, k + 3), 3):
        total: dict[int, int] = {}
        for a, b, c in ((i, j, l), (j, l, i), (l, i, j)):
            for m, cm in bracket_form(b, c, k).items():
                for n, cn in bracket_form(a, m, k).items():
                    total[n] = total.get(n, 0) + cm * cn
        val = sum(c * z[n - 1] for n, c in total.items())
        worst = max(worst, abs(val))
    return worst


@dataclass(frozen=True)
class MultiPoly:
    """Polynomial in the momenta P_1..P_n, stored as ``{exponents: coefficient}``."""

    n: int
    terms: tuple[tuple[tuple[int, ...], float], ...]

    @classmethod
    def from_dict(cls, n: int, d: dict) -> "MultiPoly":
        return cls(n, tuple(sorted((tuple(e), float(c)) for e, c in d.items() if c != 0.0)))

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def __call__(self, Z) -> float:
        z = _as_vec(Z)
        return float(sum(c * np.prod(z ** np.array(e)) for e, c in self.terms))

    def partial(self, m: int) -> "MultiPoly":
        """Exact derivative with respect to P_m (1-based)."""
        out: dict = {}
        for e, c in self.terms:
            if e[m - 1]:
                e2 = list(e)
                e2[m - 1] -= 1
                out[tuple(e2)] = out.get(tuple(e2), 0.0) + c * e[m - 1]
        return MultiPoly.from_dict(self.n, out)

    def gradient(self, Z) -> np.ndarray:
        return np.array([self.partial(m)(Z) for m in range(1, self.n + 1)])

    def variables(self) -> set[int]:
        return {m + 1 for e, _ in self.terms for m, p in enumerate(e) if p}

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "terms": [{"exps": list(e), "coef": c} for e, c in self.terms],
        }


@dataclass(frozen=True)
class CasimirSet:
    k: int
    functions: tuple[MultiPoly, ...]

    def __len__(self):
        return len(self.functions)

    def __getitem__(self, i):
        return self.functions[i]

    def __iter__(self):
        return iter(self.functions)

    def values(self, Z) -> np.ndarray:
        return np.array([C(Z) for C in self.functions])

    def values_many(self, P: np.ndarray) -> np.ndarray:
        """Evaluate on a stack of momentum rows, returning shape (N, k)."""
        P = np.atleast_2d(P)
        out = np.zeros((P.shape[0], self.k))
        for col, C in enumerate(self.functions):
            for e, c in C.terms:
                out[:, col] += c * np.prod(P ** np.array(e), axis=1)
        return out

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "casimirs": [C.to_json() for C in self.functions]}, indent=2)


def casimirs(dim: JetDim | int) -> CasimirSet:
    """The k independent Casimirs, built as invariants of the shift flow.

    The vector field annihilated by a Casimir is dP_m = P_{m+1} (m = 2..k+1)
    with P_{k+2} = c fixed. Flowing to the time t* = -P_{k+1}/c where P_{k+1}
    vanishes and reading off P_{k+2-i}(t*) gives an invariant; multiplying by
    c^(i-1) clears the denominators.
    """
    k = dim.k if isinstance(dim, JetDim) else int(dim)
    if k < 1:
        raise ValueError("k must be >= 1")
    n = k + 2

    def mono(powers: dict[int, int]) -> tuple[int, ...]:
        e = [0] * n
        for m, p in powers.items():
            e[m - 1] += p
        return tuple(e)

    funcs = [MultiPoly.from_dict(n, {mono({n: 1}): 1.0})]
    for i in range(2, k + 1):
        d: dict = {}
        # c^(i-1) * sum_j P_{k+2-i+j} (-P_{k+1}/c)^j / j!, with j = i-1 and
        # j = i both collapsing to pure powers of P_{k+1}
        for j in range(0, i - 1):
            e = mono({n: i - 1 - j, n - i + j: 1, k + 1: j})
            d[e] = d.get(e, 0.0) + (-1) ** j / math.factorial(j)
        tail = mono({k + 1: i})
        d[tail] = d.get(tail, 0.0) + (-1) ** (i - 1) / (math.factorial(i - 2) * i)
        funcs.append(MultiPoly.from_dict(n, d))
    return CasimirSet(k, tuple(funcs))


def casimir_paper(i: int, Z, k: int | None = None) -> float:
    """Reference closed form with the literal index pattern P_{k+2-j} in the sum.

    Kept for comparison with :func:`casimirs`. It is a Casimir only for i <= 2;
    the sum needs P_{k+2-i+j} instead.
    """
    z = _as_vec(Z)
    k = z.size - 2 if k is None else k
    if not 2 <= i <= k:
        raise IndexError(f"closed form covers 2 <= i <= k, got i={i}, k={k}")
    P = lambda m: z[m - 1]  # noqa: E731
    top, sub = P(k + 2), P(k + 1)
    val = top ** (i - 1) * P(k + 2 - i)
    for j in range(1, i - 1):
        val += (-1) ** j * top ** (i - (j + 1)) * P(k + 2 - j) * sub**j / math.factorial(j)
    val += (-1) ** (i - 1) * sub**i / (math.factorial(i - 2) * i)
    return float(val)


def annihilation_defect(C, Z, mode: str = "exact", step: float = 1e-6) -> float:
    """Norm of B(Z) grad C(Z); zero exactly when C is a Casimir at Z.

    ``C`` is a :class:`MultiPoly` (exact gradient) or any callable on the
    momentum vector, which is differentiated by relative central differences.
    """
    z = _as_vec(Z)
    if isinstance(C, MultiPoly) and mode == "exact":
        g = C.gradient(z)
    else:
        g = np.empty_like(z)
        for m in range(z.size):
            h = step * max(1.0, abs(z[m]))
            zp, zm = z.copy(), z.copy()
            zp[m] += h
            zm[m] -= h
            g[m] = (C(zp) - C(zm)) / (2 * h)
    return float(np.linalg.norm(poisson_tensor(z) @ g))
