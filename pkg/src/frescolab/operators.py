"""Exact arithmetic in the algebra generated by a over truncated b-series.

Normal form keeps b-series to the left of a-powers.  All rewriting flows
from the single commutation rule

    a S(b) = S(b) a + b^2 S'(b),      iterated:
    a^k S(b) = sum_i C(k,i) D^i(S) a^(k-i)   with  D(S) = b^2 S'.

D raises the b-order, so composition and linear division are exact through
the shared truncation order; only series inversion inside structure words
consumes reported validity (one order per inversion and one per linear
factor, conservatively).
"""

from __future__ import annotations

from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import NonUnitSeries, NotHomogeneous, NotMonic
from .polynomials import RationalPolynomial
from .rationals import ONE, QQ, ZERO, as_rational, format_rational
from .xi import Gen, XiElement, act


class BSeries:
    """Truncated power series in b with exact rational coefficients.

    The truncation order is explicit; trailing zeros are meaningful.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence, trunc_order: Optional[int] = None):
        cs = [as_rational(c) for c in coeffs]
        if trunc_order is not None:
            if len(cs) > trunc_order + 1:
                cs = cs[: trunc_order + 1]
            else:
                cs += [ZERO] * (trunc_order + 1 - len(cs))
        self.coeffs = tuple(cs)

    @property
    def trunc_order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def zero(cls, trunc_order: int) -> "BSeries":
        return cls((), trunc_order)

    @classmethod
    def constant(cls, c, trunc_order: int) -> "BSeries":
        return cls((as_rational(c),), trunc_order)

    @classmethod
    def b_power(cls, p: int, trunc_order: int, coeff=1) -> "BSeries":
        cs = [ZERO] * (trunc_order + 1)
        if p <= trunc_order:
            cs[p] = as_rational(coeff)
        return cls(cs)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def __eq__(self, other):
        return isinstance(other, BSeries) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "BSeries") -> "BSeries":
        n = min(self.trunc_order, other.trunc_order)
        return BSeries([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)])

    def __sub__(self, other: "BSeries") -> "BSeries":
        n = min(self.trunc_order, other.trunc_order)
        return BSeries([self.coeffs[i] - other.coeffs[i] for i in range(n + 1)])

    def scale(self, c) -> "BSeries":
        c = as_rational(c)
        return BSeries([v * c for v in self.coeffs])

    def __mul__(self, other: "BSeries") -> "BSeries":
        n = min(self.trunc_order, other.trunc_order)
        out = [ZERO] * (n + 1)
        for i, ci in enumerate(self.coeffs[: n + 1]):
            if ci == 0:
                continue
            for j in range(n + 1 - i):
                cj = other.coeffs[j]
                if cj != 0:
                    out[i + j] += ci * cj
        return BSeries(out)

    def shift_derivative(self) -> "BSeries":
        """D(S) = b^2 S', the correction term of the commutation rule."""
        out = [ZERO] * (self.trunc_order + 1)
        for p, c in enumerate(self.coeffs[:-1]):
            if p and c != 0:
                out[p + 1] = p * c
        return BSeries(out)

    def reciprocal(self) -> "BSeries":
        """Truncated inverse; the constant term must be nonzero."""
        if not self.is_unit():
            raise NonUnitSeries("series has zero constant term")
        c0 = self.coeffs[0]
        out = [ONE / c0]
        for n in range(1, self.trunc_order + 1):
            acc = ZERO
            for k in range(1, n + 1):
                if self.coeffs[k] != 0:
                    acc += self.coeffs[k] * out[n - k]
            out.append(-acc / c0)
        return BSeries(out)

    def support(self) -> List[int]:
        return [p for p, c in enumerate(self.coeffs) if c != 0]

    def __repr__(self):
        terms = []
        for p, c in enumerate(self.coeffs):
            if c == 0:
                continue
            base = "1" if p == 0 else ("b" if p == 1 else f"b^{p}")
            if p == 0:
                terms.append(format_rational(c))
            elif c == 1:
                terms.append(base)
            else:
                terms.append(f"{format_rational(c)}*{base}")
        body = " + ".join(terms).replace("+ -", "- ") if terms else "0"
        return f"({body} + O(b^{self.trunc_order + 1}))"

    def to_json(self) -> list:
        return [format_rational(c) for c in self.coeffs]


class ABOperator:
    """Normal-form operator: sum over q of S_q(b) * a^q."""

    __slots__ = ("rows", "trunc_order", "validity_order")

    def __init__(self, rows: Dict[int, BSeries], trunc_order: int,
                 validity_order: Optional[int] = None):
        clean = {}
        for q, s in rows.items():
            s = BSeries(s.coeffs, trunc_order)
            if not s.is_zero():
                clean[q] = s
        self.rows = clean
        self.trunc_order = trunc_order
        self.validity_order = trunc_order if validity_order is None else validity_order

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, trunc_order: int) -> "ABOperator":
        return cls({}, trunc_order)

    @classmethod
    def identity(cls, trunc_order: int) -> "ABOperator":
        return cls({0: BSeries.constant(1, trunc_order)}, trunc_order)

    @classmethod
    def a(cls, trunc_order: int) -> "ABOperator":
        return cls({1: BSeries.constant(1, trunc_order)}, trunc_order)

    @classmethod
    def b(cls, trunc_order: int, power: int = 1) -> "ABOperator":
        return cls({0: BSeries.b_power(power, trunc_order)}, trunc_order)

    @classmethod
    def linear(cls, lam, trunc_order: int) -> "ABOperator":
        """The factor a - lam*b."""
        return cls(
            {
                1: BSeries.constant(1, trunc_order),
                0: BSeries.b_power(1, trunc_order, -as_rational(lam)),
            },
            trunc_order,
        )

    # -- queries --------------------------------------------------------------

    @property
    def a_degree(self) -> int:
        return max(self.rows, default=0)

    def total_degree(self) -> int:
        """Largest q + p over nonzero terms S_q[p] * b^p * a^q."""
        deg = 0
        for q, s in self.rows.items():
            sup = s.support()
            if sup:
                deg = max(deg, q + sup[-1])
        return deg

    def is_zero(self) -> bool:
        return not self.rows

    def __eq__(self, other):
        return (
            isinstance(other, ABOperator)
            and self.trunc_order == other.trunc_order
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.trunc_order, frozenset(self.rows.items())))

    def __repr__(self):
        if not self.rows:
            return "0"
        bits = []
        for q in sorted(self.rows, reverse=True):
            ap = "" if q == 0 else (" a" if q == 1 else f" a^{q}")
            bits.append(f"{self.rows[q]!r}{ap}")
        return " + ".join(bits)

    # -- linear structure -------------------------------------------------------

    def __add__(self, other: "ABOperator") -> "ABOperator":
        trunc = min(self.trunc_order, other.trunc_order)
        rows = {q: BSeries(s.coeffs, trunc) for q, s in self.rows.items()}
        for q, s in other.rows.items():
            rows[q] = rows[q] + s if q in rows else BSeries(s.coeffs, trunc)
        return ABOperator(rows, trunc, min(self.validity_order, other.validity_order))

    def __sub__(self, other: "ABOperator") -> "ABOperator":
        return self + other.scale(-1)

    def scale(self, c) -> "ABOperator":
        c = as_rational(c)
        return ABOperator(
            {q: s.scale(c) for q, s in self.rows.items()},
            self.trunc_order,
            self.validity_order,
        )

    # -- serialization ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "trunc_order": self.trunc_order,
            "validity_order": self.validity_order,
            "rows": {str(q): s.to_json() for q, s in sorted(self.rows.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "ABOperator":
        trunc = int(data["trunc_order"])
        rows = {
            int(q): BSeries([as_rational(c) for c in coeffs], trunc)
            for q, coeffs in data["rows"].items()
        }
        return cls(rows, trunc, data.get("validity_order"))


def compose(p: ABOperator, q: ABOperator) -> ABOperator:
    """Normal form of the product p * q."""
    trunc = min(p.trunc_order, q.trunc_order)
    rows: Dict[int, BSeries] = {}
    for q1, s1 in p.rows.items():
        for q2, s2 in q.rows.items():
            # move a^q1 across s2
            term = BSeries(s2.coeffs, trunc)
            for i in range(q1 + 1):
                coeffed = (s1 * term).scale(comb(q1, i))
                deg = q1 - i + q2
                rows[deg] = rows[deg] + coeffed if deg in rows else coeffed
                if i < q1:
                    term = term.shift_derivative()
    return ABOperator(rows, trunc, min(p.validity_order, q.validity_order))


def compose_all(ops: Sequence[ABOperator]) -> ABOperator:
    out = None
    for op in ops:
        out = op if out is None else compose(out, op)
    if out is None:
        raise ValueError("empty product")
    return out


def apply_operator(p: ABOperator, x: XiElement) -> XiElement:
    """Evaluate sum_q S_q(b) a^q x through the public truncation-charging
    actions; each nonzero b^p a^q term costs p + q certified degrees."""
    out = XiElement.zero(x.ambient, x.cert_degree)
    for q, s in p.rows.items():
        u = x
        for _ in range(q):
            u = act(Gen.A, u)
        w = u
        top = s.support()[-1]
        for power in range(top + 1):
            c = s.coeffs[power]
            if c != 0:
                out = out + w.scale(c)
            if power < top:
                w = act(Gen.B, w)
    return out


def divide_linear(p: ABOperator, lam) -> Tuple[ABOperator, BSeries]:
    """Right division p = q_out * (a - lam*b) + r with r a plain b-series.

    Descending elimination of the top a-degree; exact through the stored
    truncation order.
    """
    lam = as_rational(lam)
    trunc = p.trunc_order
    rem: Dict[int, BSeries] = {k: BSeries(s.coeffs, trunc) for k, s in p.rows.items()}
    q_rows: Dict[int, BSeries] = {}
    for k in range(p.a_degree, 0, -1):
        sk = rem.pop(k, None)
        if sk is None or sk.is_zero():
            continue
        q_rows[k - 1] = q_rows[k - 1] + sk if k - 1 in q_rows else sk
        # subtract s_k a^(k-1) (a - lam b); the a^k term cancels and
        # a^(k-1) b = sum_i C(k-1,i) i! b^(i+1) a^(k-1-i)
        for i in range(k):
            coeff = lam * comb(k - 1, i) * factorial(i)
            piece = (sk * BSeries.b_power(i + 1, trunc)).scale(coeff)
            deg = k - 1 - i
            rem[deg] = rem[deg] + piece if deg in rem else piece
    r = rem.get(0, BSeries.zero(trunc))
    return (
        ABOperator(q_rows, trunc, p.validity_order),
        r,
    )


def homogeneous_symbol(p: ABOperator) -> Tuple[int, Dict[int, object]]:
    """Degree and coefficients {q: c_q} of a homogeneous operator
    sum_q c_q b^(deg-q) a^q; raises NotHomogeneous otherwise."""
    if p.is_zero():
        raise NotHomogeneous("zero operator")
    deg = p.total_degree()
    coeffs = {}
    for q, s in p.rows.items():
        sup = s.support()
        if sup != [deg - q]:
            raise NotHomogeneous(
                f"row {q} carries b-powers {sup}, expected [{deg - q}]"
            )
        coeffs[q] = s.coeffs[deg - q]
    return deg, coeffs


def bernstein_homogeneous(p: ABOperator) -> RationalPolynomial:
    """Bernstein polynomial of a homogeneous operator monic in a.

    Acting on a formal pure monomial of exponent beta gives
    p . e_beta = rho(beta) e_(beta+deg) with
    rho(beta) = N(beta) / prod_(i<deg)(beta+i),
    N(beta) = sum_q c_q prod_(i<q)(beta+i); the polynomial returned is
    (-1)^deg N(-x), normalized so that the operator satisfies
    (-b)^deg B(-b^-1 a) = p.
    """
    deg, coeffs = homogeneous_symbol(p)
    if coeffs.get(deg) != 1:
        raise NotMonic(f"coefficient of a^{deg} is {coeffs.get(deg, 0)}, expected 1")
    poly = RationalPolynomial((ZERO,))
    for q, c in coeffs.items():
        term = RationalPolynomial((as_rational(c),))
        for i in range(q):
            # factor (beta + i) evaluated at beta = -x contributes (i - x)
            term = term * RationalPolynomial((QQ(i), QQ(-1)))
        poly = poly + term
    if deg % 2:
        poly = RationalPolynomial([-c for c in poly.coeffs])
    return poly


def rho_at(p: ABOperator, beta) -> object:
    """Evaluate the symbol factor rho(beta) of a homogeneous operator,
    independent brute-force route for cross-checking the polynomial."""
    deg, coeffs = homogeneous_symbol(p)
    beta = as_rational(beta)
    acc = ZERO
    for q, c in coeffs.items():
        denom = ONE
        for i in range(q, deg):
            denom *= beta + i
        acc += as_rational(c) / denom
    return acc


class StructureWord:
    """Alternating product of linear factors (a - lam b) and unit series."""

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[Tuple]):
        self.factors = list(factors)

    @classmethod
    def linear_word(cls, lams) -> "StructureWord":
        return cls([("linear", as_rational(lam)) for lam in lams])

    def to_json(self) -> dict:
        out = []
        for f in self.factors:
            if f[0] == "linear":
                out.append({"linear": format_rational(f[1])})
            else:
                _, series, inverted = f
                out.append({"unit": series.to_json(), "inverted": inverted})
        return {"word": out}

    @classmethod
    def from_json(cls, data: dict, trunc_order: int) -> "StructureWord":
        factors = []
        for f in data["word"]:
            if "linear" in f:
                factors.append(("linear", as_rational(f["linear"])))
            else:
                series = BSeries([as_rational(c) for c in f["unit"]], trunc_order)
                factors.append(("unit", series, bool(f.get("inverted", False))))
        return cls(factors)


def expand_word(word: StructureWord, trunc_order: int) -> ABOperator:
    """Normal-form product of the word's factors.

    Reported validity drops by one order per linear factor and per series
    inversion; the arithmetic itself is exact through the truncation.
    """
    ops = []
    cost = 0
    for f in word.factors:
        if f[0] == "linear":
            lam = f[1]
            if not lam > 0:
                raise ValueError("linear factors need positive rational shifts")
            ops.append(ABOperator.linear(lam, trunc_order))
            cost += 1
        else:
            _, series, inverted = f
            series = BSeries(series.coeffs, trunc_order)
            if not series.is_unit():
                raise NonUnitSeries("structure word unit has zero constant term")
            if inverted:
                series = series.reciprocal()
                cost += 1
            ops.append(ABOperator({0: series}, trunc_order))
    out = compose_all(ops)
    return ABOperator(out.rows, out.trunc_order, trunc_order - cost)
