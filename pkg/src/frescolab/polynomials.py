"""Monic polynomials over the rationals.

Coefficients are stored ascending (constant term first).  Everything the
package produces factors completely over Q with rational roots of the form
-(alpha + m), so the factored form is computed by exact trial division
against a caller-supplied candidate grid, never by numerical root finding.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .rationals import ONE, QQ, ZERO, as_rational, format_rational


class RationalPolynomial:
    """Polynomial over Q, normally monic, with an optional factored form."""

    __slots__ = ("coeffs", "_factors")

    def __init__(self, coeffs: Sequence, factors=None):
        cs = [as_rational(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._factors = factors

    # -- constructors ----------------------------------------------------

    @classmethod
    def one(cls) -> "RationalPolynomial":
        return cls((ONE,))

    @classmethod
    def x_plus(cls, c) -> "RationalPolynomial":
        """The linear factor x + c."""
        return cls((as_rational(c), ONE))

    @classmethod
    def from_roots(cls, roots: Iterable) -> "RationalPolynomial":
        p = cls.one()
        for r in roots:
            p = p * cls.x_plus(-as_rational(r))
        return p

    # -- basic queries ----------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_monic(self) -> bool:
        return self.coeffs[-1] == 1

    def is_one(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 1

    def __call__(self, x):
        x = as_rational(x)
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                terms.append(format_rational(c))
            else:
                xp = "x" if i == 1 else f"x^{i}"
                if c == 1:
                    terms.append(xp)
                elif c == -1:
                    terms.append("-" + xp)
                else:
                    terms.append(f"{format_rational(c)}*{xp}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        a, b = self.coeffs, other.coeffs
        out = [ZERO] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca == 0:
                continue
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return RationalPolynomial(out)

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RationalPolynomial(
            [(a[i] if i < len(a) else ZERO) + (b[i] if i < len(b) else ZERO) for i in range(n)]
        )

    def __sub__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RationalPolynomial(
            [(a[i] if i < len(a) else ZERO) - (b[i] if i < len(b) else ZERO) for i in range(n)]
        )

    def divmod(self, other: "RationalPolynomial"):
        if all(c == 0 for c in other.coeffs):
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        d = other.degree
        lead = other.coeffs[-1]
        if len(rem) - 1 < d:
            return RationalPolynomial((ZERO,)), RationalPolynomial(rem)
        quo = [ZERO] * (len(rem) - d)
        for i in range(len(rem) - 1, d - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            f = c / lead
            quo[i - d] = f
            for j in range(d + 1):
                rem[i - d + j] -= f * other.coeffs[j]
        return RationalPolynomial(quo), RationalPolynomial(rem)

    def divides(self, other: "RationalPolynomial") -> bool:
        """True when self divides other exactly."""
        _, r = other.divmod(self)
        return all(c == 0 for c in r.coeffs)

    def shift(self, c) -> "RationalPolynomial":
        """Substitute x -> x + c."""
        c = as_rational(c)
        out = RationalPolynomial((ZERO,))
        xc = RationalPolynomial.x_plus(c)
        power = RationalPolynomial.one()
        for coeff in self.coeffs:
            if coeff != 0:
                out = out + RationalPolynomial((coeff,)) * power
            power = power * xc
        return out

    # -- roots & factors -----------------------------------------------------

    def factor_on_grid(self, candidates: Iterable) -> Optional[list]:
        """Factor completely by trial division against candidate roots.

        Returns [(root, multiplicity), ...] sorted by descending root, or
        None when a nontrivial factor remains after the grid is exhausted.
        """
        p = self
        factors = {}
        for r in candidates:
            r = as_rational(r)
            lin = RationalPolynomial.x_plus(-r)
            while p.degree >= 1:
                q, rem = p.divmod(lin)
                if any(c != 0 for c in rem.coeffs):
                    break
                factors[r] = factors.get(r, 0) + 1
                p = q
            if p.degree == 0:
                break
        if p.degree != 0 or p.coeffs[0] != 1:
            return None
        out = sorted(factors.items(), key=lambda t: t[0], reverse=True)
        self._factors = out
        return out

    @property
    def factors(self):
        """Cached (root, multiplicity) list; None if never factored."""
        return self._factors

    def roots(self) -> list:
        if self._factors is None:
            raise ValueError("polynomial has not been factored")
        return [r for r, _ in self._factors]

    def has_root(self, r) -> bool:
        return self(as_rational(r)) == 0

    def is_squarefree(self) -> bool:
        if self._factors is not None:
            return all(m == 1 for _, m in self._factors)
        der = RationalPolynomial(
            [i * c for i, c in enumerate(self.coeffs)][1:] or [ZERO]
        )
        return _poly_gcd(self, der).degree == 0

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        data = {"monic_coeffs": [format_rational(c) for c in self.coeffs]}
        if self._factors is not None:
            data["factors"] = [
                {"root": format_rational(r), "mult": m} for r, m in self._factors
            ]
        return data

    @classmethod
    def from_json(cls, data: dict) -> "RationalPolynomial":
        p = cls([as_rational(c) for c in data["monic_coeffs"]])
        if "factors" in data:
            p._factors = [
                (as_rational(f["root"]), int(f["mult"])) for f in data["factors"]
            ]
        return p


def _poly_gcd(a: RationalPolynomial, b: RationalPolynomial) -> RationalPolynomial:
    while any(c != 0 for c in b.coeffs):
        _, r = a.divmod(b)
        a, b = b, r
    lead = a.coeffs[-1]
    if lead != 1 and lead != 0:
        a = RationalPolynomial([c / lead for c in a.coeffs])
    return a


def product(polys: Iterable[RationalPolynomial]) -> RationalPolynomial:
    out = RationalPolynomial.one()
    for p in polys:
        out = out * p
    return out
