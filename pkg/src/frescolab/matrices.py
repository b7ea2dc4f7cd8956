"""Dense exact matrices, just large enough for induced-action eigenstructure.

Matrices here are tiny (side = B-rank of a module), so simplicity wins:
Faddeev-LeVerrier for the characteristic polynomial and rank of powers for
the minimal polynomial.  Eigenvalues are always rational and come from a
known finite grid, so factoring is exact trial division.
"""

from __future__ import annotations

from typing import List, Optional

from .errors import RankUnstable
from .polynomials import RationalPolynomial
from .rationals import ONE, QQ, ZERO

Matrix = List[List[object]]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    m = len(b[0]) if b else 0
    out = [[ZERO] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for k, aik in enumerate(ai):
            if aik == 0:
                continue
            bk = b[k]
            for j in range(m):
                if bk[j] != 0:
                    oi[j] += aik * bk[j]
    return out


def mat_add_scalar(a: Matrix, c) -> Matrix:
    n = len(a)
    return [
        [a[i][j] + (c if i == j else ZERO) for j in range(n)] for i in range(n)
    ]


def trace(a: Matrix):
    return sum((a[i][i] for i in range(len(a))), ZERO)


def rank(a: Matrix) -> int:
    rows = [list(r) for r in a]
    n = len(rows)
    m = len(rows[0]) if rows else 0
    r = 0
    col = 0
    while r < n and col < m:
        piv = next((i for i in range(r, n) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        lead = rows[r][col]
        for i in range(r + 1, n):
            f = rows[i][col]
            if f == 0:
                continue
            f = f / lead
            for j in range(col, m):
                rows[i][j] -= f * rows[r][j]
        r += 1
        col += 1
    return r


def charpoly(a: Matrix) -> RationalPolynomial:
    """Characteristic polynomial det(xI - A) by Faddeev-LeVerrier."""
    n = len(a)
    if n == 0:
        return RationalPolynomial.one()
    coeffs = [ZERO] * (n + 1)
    coeffs[n] = ONE
    m = identity(n)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        c = -trace(am) / k
        coeffs[n - k] = c
        m = mat_add_scalar(am, c)
    return RationalPolynomial(coeffs)


def minimal_polynomial(
    a: Matrix, char: RationalPolynomial, grid
) -> RationalPolynomial:
    """Minimal polynomial from a factored characteristic polynomial.

    ``grid`` is the candidate root list; both polynomials factor completely
    over it or the truncation is inconsistent.
    """
    factors = char.factors or char.factor_on_grid(grid)
    if factors is None:
        raise RankUnstable("characteristic polynomial does not split on the eigenvalue grid")
    n = len(a)
    out = RationalPolynomial.one()
    min_factors = []
    for root, mult in factors:
        shifted = mat_add_scalar(a, -root)
        power = shifted
        nu = 1
        while n - rank(power) < mult:
            power = mat_mul(power, shifted)
            nu += 1
            if nu > mult:
                raise RankUnstable("nilpotency index exceeded algebraic multiplicity")
        min_factors.append((root, nu))
        for _ in range(nu):
            out = out * RationalPolynomial.x_plus(-root)
    out._factors = sorted(min_factors, key=lambda t: t[0], reverse=True)
    return out
