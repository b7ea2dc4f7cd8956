"""Truncated spaces of log-asymptotic expansions and the a, b actions.

Elements are finite rational combinations of monomials

    s^(alpha + m - 1) * (Log s)^j / j!   tensored with a basis vector v_k,

with alpha a reduced rational in (0, 1], m, j, k nonnegative integers.  The
1/j! normalization makes the inverse-shift action diagonal plus a single
down-shift in j.  For the class alpha = 1 the uni-valued part (j = 0) is
quotiented away: such monomials are deleted eagerly so that elements are
always canonical and equality is a map comparison.

Generator actions on a basis monomial, writing beta = alpha + m:

    a:      (m, j) -> (m+1, j)
    b:      (m, j) -> sum_{i=0..j} (-1)^i beta^-(i+1) (m+1, j-i)
    b^-1 a: (m, j) -> beta (m, j) + (m, j-1)

a and b raise the s-degree; the public ``act`` charges one unit of
certified truncation degree for them, so identical expressions computed
along different operator orderings truncate identically.  The module
closure engine uses the window-exact variant ``act_window`` instead, which
is exact through the ambient degree cap.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, NamedTuple, Tuple

from .errors import GuardExhausted
from .rationals import ONE, QQ, as_rational, format_rational


@dataclass(frozen=True, order=True)
class ExponentClass:
    """A reduced rational alpha with 0 < alpha <= 1 naming an exponent class."""

    alpha: object

    def __post_init__(self):
        a = as_rational(self.alpha)
        if not (0 < a <= 1):
            raise ValueError(f"exponent class must lie in (0, 1], got {a}")
        object.__setattr__(self, "alpha", a)

    def __str__(self):
        return format_rational(self.alpha)


def as_exponent_class(value) -> ExponentClass:
    if isinstance(value, ExponentClass):
        return value
    return ExponentClass(as_rational(value))


class Gen(enum.Enum):
    A = "A"
    B = "B"
    B_INV_A = "B_INV_A"


class LogMonomial(NamedTuple):
    alpha: object  # rational in (0, 1]
    m: int
    j: int
    k: int

    @property
    def beta(self):
        """The full exponent alpha + m."""
        return self.alpha + self.m

    @property
    def nilpotent_degree(self) -> int:
        """Contribution of this monomial to d(x): j+1 off the integer class, j on it."""
        return self.j if self.alpha == 1 else self.j + 1


def monomial_sort_key(mon: LogMonomial):
    return (mon.beta, mon.j, mon.k)


@dataclass(frozen=True)
class Ambient:
    """Shared shape of a truncated expansion space."""

    alpha_set: Tuple
    log_bound: int
    value_dim: int
    cert_degree: int

    def __post_init__(self):
        alphas = tuple(sorted({as_rational(a) for a in self.alpha_set}))
        for a in alphas:
            if not (0 < a <= 1):
                raise ValueError(f"alpha {a} outside (0, 1]")
        object.__setattr__(self, "alpha_set", alphas)
        if self.log_bound < 0 or self.value_dim < 1 or self.cert_degree < 0:
            raise ValueError("bad ambient parameters")

    def log_range(self, alpha) -> range:
        # SXi_1 drops j = 0 and gains one level from the quotient shift.
        if alpha == 1:
            return range(1, self.log_bound + 2)
        return range(0, self.log_bound + 1)

    def check_monomial(self, mon: LogMonomial):
        if mon.alpha not in self.alpha_set:
            raise ValueError(f"alpha {mon.alpha} not in ambient alpha set")
        if mon.j not in self.log_range(mon.alpha):
            raise ValueError(f"log degree {mon.j} out of range for alpha {mon.alpha}")
        if not (0 <= mon.k < self.value_dim):
            raise ValueError(f"value index {mon.k} out of range")
        if mon.m < 0:
            raise ValueError("negative integer shift")

    def monomials(self) -> Iterable[LogMonomial]:
        """All window monomials sorted by (s-valuation, log degree, value index)."""
        out = []
        for a in self.alpha_set:
            for m in range(self.cert_degree + 1):
                for j in self.log_range(a):
                    for k in range(self.value_dim):
                        out.append(LogMonomial(a, m, j, k))
        out.sort(key=monomial_sort_key)
        return out

    def to_json(self) -> dict:
        return {
            "alpha_set": [format_rational(a) for a in self.alpha_set],
            "log_bound": self.log_bound,
            "value_dim": self.value_dim,
            "cert_degree": self.cert_degree,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Ambient":
        return cls(
            alpha_set=tuple(as_rational(a) for a in data["alpha_set"]),
            log_bound=int(data["log_bound"]),
            value_dim=int(data["value_dim"]),
            cert_degree=int(data["cert_degree"]),
        )


class XiElement:
    """Canonical sparse element of a truncated expansion space.

    ``terms`` maps LogMonomial to a nonzero rational.  ``cert_degree`` is
    the degree through which the stored coefficients are certified; all
    monomials satisfy m <= cert_degree.
    """

    __slots__ = ("ambient", "terms", "cert_degree")

    def __init__(self, ambient: Ambient, terms: Dict[LogMonomial, object], cert_degree=None):
        cert = ambient.cert_degree if cert_degree is None else cert_degree
        if cert < 0:
            raise GuardExhausted("certified degree went negative")
        clean = {}
        for mon, coeff in terms.items():
            c = as_rational(coeff)
            if c == 0:
                continue
            if mon.alpha == 1 and mon.j == 0:
                continue  # uni-valued part is quotiented away
            if mon.m > cert:
                continue
            ambient.check_monomial(mon)
            clean[mon] = c
        self.ambient = ambient
        self.terms = clean
        self.cert_degree = min(cert, ambient.cert_degree)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, ambient: Ambient, cert_degree=None) -> "XiElement":
        return cls(ambient, {}, cert_degree)

    @classmethod
    def monomial(cls, ambient, alpha, m, j, k=0, coeff=1, cert_degree=None) -> "XiElement":
        mon = LogMonomial(as_rational(alpha), int(m), int(j), int(k))
        return cls(ambient, {mon: as_rational(coeff)}, cert_degree)

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def support(self):
        return sorted(self.terms, key=monomial_sort_key)

    def coeff(self, alpha, m, j, k=0):
        return self.terms.get(LogMonomial(as_rational(alpha), m, j, k), QQ(0))

    def valuation(self):
        """Smallest exponent alpha + m in the support, or None for zero."""
        if not self.terms:
            return None
        return min(mon.beta for mon in self.terms)

    def classes(self):
        return sorted({mon.alpha for mon in self.terms})

    def __eq__(self, other) -> bool:
        # cert_degree is bookkeeping, not part of the value
        return (
            isinstance(other, XiElement)
            and self.ambient == other.ambient
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ambient, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for mon in self.support():
            c = self.terms[mon]
            v = f"e({format_rational(mon.alpha)},{mon.m},{mon.j},{mon.k})"
            bits.append(v if c == 1 else f"{format_rational(c)}*{v}")
        return " + ".join(bits).replace("+ -", "- ")

    # -- linear structure ---------------------------------------------------

    def _require_compatible(self, other: "XiElement"):
        if self.ambient != other.ambient:
            raise ValueError("elements from different ambient spaces")

    def __add__(self, other: "XiElement") -> "XiElement":
        self._require_compatible(other)
        terms = dict(self.terms)
        for mon, c in other.terms.items():
            terms[mon] = terms.get(mon, QQ(0)) + c
        return XiElement(self.ambient, terms, min(self.cert_degree, other.cert_degree))

    def __sub__(self, other: "XiElement") -> "XiElement":
        return self + (-other)

    def __neg__(self) -> "XiElement":
        return XiElement(
            self.ambient, {m: -c for m, c in self.terms.items()}, self.cert_degree
        )

    def scale(self, c) -> "XiElement":
        c = as_rational(c)
        if c == 0:
            return XiElement.zero(self.ambient, self.cert_degree)
        return XiElement(
            self.ambient, {m: c * v for m, v in self.terms.items()}, self.cert_degree
        )

    __rmul__ = scale

    def truncate(self, degree: int) -> "XiElement":
        return XiElement(
            self.ambient,
            {m: c for m, c in self.terms.items() if m.m <= degree},
            min(self.cert_degree, degree),
        )

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        data = self.ambient.to_json()
        data["cert_degree"] = self.cert_degree
        data["terms"] = [
            {
                "alpha": format_rational(mon.alpha),
                "m": mon.m,
                "j": mon.j,
                "k": mon.k,
                "coeff": format_rational(c),
            }
            for mon in self.support()
            for c in [self.terms[mon]]
        ]
        return data

    @classmethod
    def from_json(cls, data: dict, ambient: Ambient = None) -> "XiElement":
        amb = ambient if ambient is not None else Ambient.from_json(data)
        terms = {}
        for t in data["terms"]:
            mon = LogMonomial(as_rational(t["alpha"]), int(t["m"]), int(t["j"]), int(t["k"]))
            terms[mon] = as_rational(t["coeff"])
        return cls(amb, terms, int(data["cert_degree"]))


# -- generator actions ----------------------------------------------------


def _basis_action(gen: Gen, mon: LogMonomial):
    """Expand one generator on one basis monomial as (monomial, coeff) pairs."""
    beta = mon.beta
    if gen is Gen.A:
        return [(LogMonomial(mon.alpha, mon.m + 1, mon.j, mon.k), ONE)]
    if gen is Gen.B:
        out = []
        sign = ONE
        power = ONE / beta
        for i in range(mon.j + 1):
            out.append((LogMonomial(mon.alpha, mon.m + 1, mon.j - i, mon.k), sign * power))
            sign = -sign
            power = power / beta
        return out
    if gen is Gen.B_INV_A:
        out = [(mon, beta)]
        if mon.j >= 1:
            out.append((LogMonomial(mon.alpha, mon.m, mon.j - 1, mon.k), ONE))
        return out
    raise ValueError(f"unknown generator {gen}")


def _apply_basis(x: XiElement, gen: Gen, cert: int) -> XiElement:
    terms: Dict[LogMonomial, object] = {}
    for mon, c in x.terms.items():
        for tmon, tc in _basis_action(gen, mon):
            terms[tmon] = terms.get(tmon, QQ(0)) + c * tc
    return XiElement(x.ambient, terms, cert)


def act(gen: Gen, x: XiElement) -> XiElement:
    """Apply a generator with conservative truncation accounting.

    a and b consume one unit of certified degree, so results computed along
    different orderings of the same operator word are identical maps.  The
    inverse-shift composite preserves degree and costs nothing.

    Raises GuardExhausted when the certified degree would go negative.
    """
    if gen is Gen.B_INV_A:
        return _apply_basis(x, gen, x.cert_degree)
    if x.cert_degree - 1 < 0:
        raise GuardExhausted("no certified degree left for a degree-raising action")
    return _apply_basis(x, gen, x.cert_degree - 1)


def act_window(gen: Gen, x: XiElement) -> XiElement:
    """Apply a generator exactly through the ambient degree cap.

    A coefficient of the result in degree m is determined by input
    coefficients in degrees <= m, so when the input is exact through its
    certified degree c the result is exact through min(c + 1, cap) for the
    degree-raising generators and through c for the inverse shift.
    """
    if gen is Gen.B_INV_A:
        return _apply_basis(x, gen, x.cert_degree)
    cert = min(x.cert_degree + 1, x.ambient.cert_degree)
    return _apply_basis(x, gen, cert)


def project_class(x: XiElement, cls) -> XiElement:
    """Keep exactly the terms in one exponent class; certification unchanged."""
    alpha = as_exponent_class(cls).alpha
    return XiElement(
        x.ambient,
        {m: c for m, c in x.terms.items() if m.alpha == alpha},
        x.cert_degree,
    )


def nilpotent_order_elem(x: XiElement) -> int:
    """Length of the log ladder carried by x; zero for the zero element."""
    if not x.terms:
        return 0
    return max(mon.nilpotent_degree for mon in x.terms)


# -- coordinate tables ------------------------------------------------------


class Coordinates:
    """Integer-indexed monomial basis of an ambient window with action tables.

    Index order is ascending (s-valuation, log degree, value index); all
    module-level linear algebra works on sparse {index: coeff} dicts.
    """

    def __init__(self, ambient: Ambient):
        self.ambient = ambient
        self.mons = list(ambient.monomials())
        self.index = {mon: i for i, mon in enumerate(self.mons)}
        self.mdeg = [mon.m for mon in self.mons]
        self.nildeg = [mon.nilpotent_degree for mon in self.mons]
        n = len(self.mons)
        self.a_map = [None] * n
        self.b_map = [()] * n
        self.bia_map = [()] * n
        for i, mon in enumerate(self.mons):
            if mon.m + 1 <= ambient.cert_degree:
                self.a_map[i] = self.index[LogMonomial(mon.alpha, mon.m + 1, mon.j, mon.k)]
                # targets with alpha = 1, j = 0 fall into the quotient
                self.b_map[i] = tuple(
                    (self.index[t], c)
                    for t, c in _basis_action(Gen.B, mon)
                    if t in self.index
                )
            self.bia_map[i] = tuple(
                (self.index[t], c)
                for t, c in _basis_action(Gen.B_INV_A, mon)
                if t in self.index
            )

    def to_vec(self, x: XiElement) -> dict:
        return {self.index[mon]: c for mon, c in x.terms.items()}

    def from_vec(self, vec: dict, cert_degree=None) -> XiElement:
        return XiElement(
            self.ambient,
            {self.mons[i]: c for i, c in vec.items()},
            cert_degree,
        )

    def apply_gen(self, vec: dict, gen: Gen) -> dict:
        """Window-exact sparse generator action on a coordinate vector."""
        out: dict = {}
        if gen is Gen.A:
            for i, c in vec.items():
                t = self.a_map[i]
                if t is not None:
                    out[t] = out.get(t, QQ(0)) + c
        elif gen is Gen.B:
            for i, c in vec.items():
                for t, tc in self.b_map[i]:
                    out[t] = out.get(t, QQ(0)) + c * tc
        else:
            for i, c in vec.items():
                for t, tc in self.bia_map[i]:
                    out[t] = out.get(t, QQ(0)) + c * tc
        return {i: c for i, c in out.items() if c != 0}


@lru_cache(maxsize=None)
def coordinates(ambient: Ambient) -> Coordinates:
    return Coordinates(ambient)
