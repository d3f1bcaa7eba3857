"""Real root isolation for polynomials via Sturm sequences and bisection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Polynomial, poly_eval

_ZERO_REL = 1e-12


def _trim(c: np.ndarray, scale: float) -> np.ndarray:
    c = np.array(c, dtype=float)
    while c.size > 1 and abs(c[-1]) <= _ZERO_REL * scale:
        c = c[:-1]
    return c


def _polyrem(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = a.astype(float).copy()
    db = b.size - 1
    while a.size - 1 >= db and a.size > 0:
        q = a[-1] / b[-1]
        a[-1 - db :] -= q * b
        a = a[:-1]
    return a if a.size else np.zeros(1)


def sturm_sequence(p: Polynomial) -> list[np.ndarray]:
    """Ascending-coefficient Sturm chain p, p', -rem(...), ...

    Remainders below a relative threshold of the running scale are treated as
    zero, which ends the chain at (an approximation of) gcd(p, p').
    """
    c0 = np.array(p.coefficients, dtype=float)
    scale = float(np.max(np.abs(c0))) or 1.0
    seq = [c0, np.array(p.derivative().coefficients, dtype=float)]
    while seq[-1].size > 1:
        r = -_polyrem(seq[-2], seq[-1])
        r = _trim(r, max(scale, float(np.max(np.abs(seq[-2])))))
        if r.size == 1 and abs(r[0]) <= _ZERO_REL * max(scale, float(np.max(np.abs(seq[-2])))):
            break
        seq.append(r)
    return seq


def _sign_changes(seq: list[np.ndarray], x: float) -> int:
    vals = [np.polynomial.polynomial.polyval(x, c) for c in seq]
    signs = [np.sign(v) for v in vals if v != 0.0]
    return int(sum(1 for a, b in zip(signs, signs[1:]) if a != b))


def count_roots(seq: list[np.ndarray], a: float, b: float) -> int:
    """Distinct real roots in (a, b]."""
    return _sign_changes(seq, a) - _sign_changes(seq, b)


def cauchy_bound(p: Polynomial) -> float:
    c = p.coefficients
    if len(c) == 1:
        return 0.0
    return 1.0 + max(abs(v) for v in c[:-1]) / abs(c[-1])


@dataclass(frozen=True)
class Root:
    x: float
    multiplicity: int


def _bisect_sign(f, a: float, b: float, rtol: float) -> float:
    fa = f(a)
    if fa == 0.0:
        return a
    for _ in range(200):
        m = 0.5 * (a + b)
        if b - a <= rtol * abs(m) or m in (a, b):
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _multiplicity(p: Polynomial, x: float, tol: float) -> int:
    deg = int(p.degree)
    m = 1
    d = p.derivative()
    while m < deg:
        size = sum(abs(c) * abs(x) ** j for j, c in enumerate(d.coefficients))
        if abs(poly_eval(d, x)) >= tol * max(1.0, size):
            break
        m += 1
        d = d.derivative()
    return m


def real_roots(p: Polynomial, a: float, b: float, rtol: float = 1e-15, mult_tol: float = 1e-10) -> list[Root]:
    """All distinct real roots of ``p`` in ``(a, b]`` with their multiplicities.

    Sturm counts isolate each root to a narrow bracket; odd-multiplicity roots
    are then refined by sign bisection on ``p`` and even ones on ``p'``.
    """
    if a >= b:
        raise ValueError("inverted interval")
    if p.degree < 1:
        return []
    seq = sturm_sequence(p)
    out: list[Root] = []

    def isolate(lo: float, hi: float, n: int):
        if n == 0:
            return
        if n == 1 and (hi - lo) <= 1e-6 * max(1.0, abs(lo), abs(hi)):
            out.append(_refine(p, lo, hi, rtol, mult_tol))
            return
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(lo)):
            # clustered beyond resolution: report once
            out.append(_refine(p, lo, hi, rtol, mult_tol))
            return
        mid = 0.5 * (lo + hi)
        nl = count_roots(seq, lo, mid)
        isolate(lo, mid, nl)
        isolate(mid, hi, n - nl)

    isolate(a, b, count_roots(seq, a, b))
    return sorted(out, key=lambda r: r.x)


def _refine(p: Polynomial, lo: float, hi: float, rtol: float, mult_tol: float) -> Root:
    f = lambda t: poly_eval(p, t)  # noqa: E731
    if np.sign(f(lo)) != np.sign(f(hi)) or f(hi) == 0.0:
        x = _bisect_sign(f, lo, hi, rtol)
    else:
        # even multiplicity: p' changes sign through the root
        dp = p.derivative()
        g = lambda t: poly_eval(dp, t)  # noqa: E731
        x = _bisect_sign(g, lo, hi, rtol) if np.sign(g(lo)) != np.sign(g(hi)) else 0.5 * (lo + hi)
    return Root(float(x), _multiplicity(p, x, mult_tol))
