"""Orthogonal polynomials used by the beamsplitter and amplifier formulas."""

from __future__ import annotations

from math import comb


def jacobi(n: int, a: int, b: int, x: float) -> float:
    """Jacobi polynomial ``P_n^{(a, b)}(x)`` for integer parameters.

    Uses the finite sum
    ``sum_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)``,
    which stays valid for the negative integer ``a`` or ``b`` that occur in
    beamsplitter matrix elements (``n + a >= 0`` and ``n + b >= 0``).
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n + a < 0 or n + b < 0:
        raise ValueError("need n + a >= 0 and n + b >= 0")
    lo, hi = (x - 1) / 2, (x + 1) / 2
    return sum(comb(n + a, n - s) * comb(n + b, s) * lo**s * hi ** (n - s) for s in range(n + 1))


def laguerre(n: int, a: float, x: float) -> float:
    """Generalized Laguerre polynomial ``L_n^{(a)}(x)`` by three-term recurrence."""
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + a - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur


def scaled_laguerre_sequence(n_max: int, a: float, y: float, s: float) -> list:
    """Return ``y^n L_n^{(a)}(x)`` for ``n = 0..n_max`` with ``x * y = -s``.

    The amplifier formulas need ``((G-1)/G)^n L_n^{(a)}(|b|^2 / (1-G))``,
    whose argument diverges as ``G -> 1`` while the product stays finite.
    Here ``y = (G-1)/G`` and ``s = |b|^2 / G``; the recurrence is carried
    out on the scaled values so ``G = 1`` needs no special case.
    """
    out = [1.0]
    if n_max == 0:
        return out
    out.append(y * (1.0 + a) + s)
    for k in range(1, n_max):
        nxt = ((y * (2 * k + 1 + a) + s) * out[k] - y * y * (k + a) * out[k - 1]) / (k + 1)
        out.append(nxt)
    return out
