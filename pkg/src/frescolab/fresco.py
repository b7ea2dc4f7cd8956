"""Structure theory of one-generator modules.

Covers the single-generator test, Jordan-Holder chains with their exponent
data, the level-polynomial formula computed on the unsaturated filtration
with a variable shift, realization of an operator's kernel inside an
expansion window, monomial Jordan chains, and a bounded witness search.

Shift convention: passing from a rank-1 subquotient of co-rank r to the
ambient fresco moves Bernstein roots up by r.  As polynomials this is the
substitution x -> x - r; the convention is the one under which the two
higher-Bernstein definitions agree on the rank-3 example with exponents
(1/2 + 1, log^2) + 1/2, which serves as the calibration case.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    EmptyKernel,
    IndexOutOfRange,
    NoRoot,
    RankUnstable,
    SearchExhausted,
    SearchFailed,
    WitnessNotFound,
)
from .linalg import Echelon, kernel_of, vec_add
from .modules import (
    SubModule,
    bernstein,
    bernstein_of_quotient,
    eigenvalue_grid,
    generate,
    higher_bernstein,
    normalize_in,
    primitive_quotient,
)
from .operators import ABOperator
from .polynomials import RationalPolynomial, product
from .rationals import ONE, QQ, ZERO, as_rational
from .xi import Ambient, Gen, LogMonomial, XiElement, as_exponent_class, coordinates


def is_fresco(m: SubModule) -> bool:
    """True when the module is generated by a single element, tested as
    dim M / (aM + bM) == 1 at both certification thresholds."""
    if m.is_zero():
        return False
    ech = Echelon()
    coords = m._coords
    for row in m._ech.rows.values():
        ech.insert(coords.apply_gen(row, Gen.A))
        ech.insert(coords.apply_gen(row, Gen.B))
    t1, t2 = m.thresholds
    mdeg = coords.mdeg
    d1 = m._ech.rank_below(mdeg, t1) - ech.rank_below(mdeg, t1)
    d2 = m._ech.rank_below(mdeg, t2) - ech.rank_below(mdeg, t2)
    if d1 != d2:
        raise RankUnstable("co-generator dimension unstable; raise truncation")
    return d1 == 1


@dataclass
class JordanHolderData:
    """Chain of normal submodules with rank-1 quotients and its exponents."""

    chain: List[SubModule]
    quotient_exponents: List
    co_ranks: List[int]

    def to_json(self) -> dict:
        from .rationals import format_rational

        return {
            "quotient_exponents": [format_rational(x) for x in self.quotient_exponents],
            "co_ranks": list(self.co_ranks),
        }


def _jh_candidate_exponents(m: SubModule, char: RationalPolynomial) -> List:
    """Possible rank-1 quotient exponents: char roots shifted by 0..rank-1."""
    rank = char.degree
    roots = char.roots()
    grid = set()
    for r in roots:
        for k in range(rank):
            lam = -r + k
            if lam > 0:
                grid.add(lam)
    return sorted(grid)


def jordan_holder(f: SubModule) -> JordanHolderData:
    """Build an increasing chain of normal submodules with rank-1 quotients.

    Scans the finite exponent grid for elements x with (a - gamma b) x
    falling in the part already built, normalizes, and records the exponent
    of each new rank-1 quotient.
    """
    rank = f.b_rank()
    _, char = bernstein(f)
    candidates = _jh_candidate_exponents(f, char)
    coords = f._coords
    f_rows = list(f._ech.rows.values())
    a_imgs = [coords.apply_gen(r, Gen.A) for r in f_rows]
    b_imgs = [coords.apply_gen(r, Gen.B) for r in f_rows]
    ambient = f.ambient
    zero = SubModule._from_vectors(ambient, [], f.closure_set, f.guard, f.window,
                                   assume_closed=True)
    chain: List[SubModule] = [zero]
    exponents: List = []
    cur = chain[0]
    for _step in range(rank):
        found = None
        for gamma in candidates:
            shadows = [
                cur._ech.reduce(vec_add(a_imgs[i], b_imgs[i], -gamma))
                for i in range(len(f_rows))
            ]
            for combo in kernel_of(shadows):
                x: Dict = {}
                for i, c in combo.items():
                    x = vec_add(x, f_rows[i], c)
                if x and not cur._ech.contains(x):
                    found = x
                    break
            if found is not None:
                break
        if found is None:
            raise SearchFailed(
                "no normal rank-1 extension found on the exponent grid;"
                " raise truncation"
            )
        grown = SubModule._from_vectors(
            ambient, list(cur._ech.rows.values()) + [found],
            f.closure_set, f.guard, f.window,
        )
        nxt = normalize_in(grown, f)
        if nxt.b_rank() != cur.b_rank() + 1:
            raise SearchFailed("chain step did not raise the rank by one")
        minimal, _ = bernstein_of_quotient(nxt, cur)
        if minimal.degree != 1:
            raise SearchFailed("chain quotient is not rank one")
        exponents.append(minimal.coeffs[0])
        chain.append(nxt)
        cur = nxt
    co_ranks = [rank - s.b_rank() for s in chain[1:]]
    return JordanHolderData(chain=chain, quotient_exponents=exponents, co_ranks=co_ranks)


def higher_bernstein_shifted(f: SubModule, j: int) -> RationalPolynomial:
    """Level polynomial computed from the unsaturated filtration.

    Takes the Bernstein polynomial of S_j(F)/S_(j-1)(F) and moves its roots
    up by the co-rank of S_j(F) in F (substitution x -> x - r_j).
    """
    chain = f.semisimple_filtration()
    d = len(chain) - 1
    if not 1 <= j <= d:
        raise IndexOutOfRange(f"level {j} outside [1, {d}]")
    minimal, _ = bernstein_of_quotient(chain[j], chain[j - 1])
    r_j = f.b_rank() - chain[j].b_rank()
    return minimal.shift(-r_j)


def _window_apply_operator(p: ABOperator, coords, vec: Dict) -> Dict:
    """Window-exact evaluation of an operator on a coordinate vector."""
    out: Dict = {}
    for q, s in p.rows.items():
        u = dict(vec)
        for _ in range(q):
            u = coords.apply_gen(u, Gen.A)
        top = s.support()
        if not top:
            continue
        w = u
        for power in range(top[-1] + 1):
            c = s.coeffs[power]
            if c != 0:
                out = vec_add(out, w, c)
            if power < top[-1]:
                w = coords.apply_gen(w, Gen.B)
    return out


def kernel_realize(p: ABOperator, ambient: Ambient,
                   guard: int = 8) -> List[XiElement]:
    """Echelon basis of {e in the window : p e = 0 through the window}.

    Solutions supported entirely in the last total-degree-of-p degrees of
    the window satisfy no actual constraint beyond it and are discarded;
    what remains is certified through the window and extends degree by
    degree (the system is block triangular in the integer shift).
    """
    coords = coordinates(ambient)
    deg = p.total_degree()
    images = [
        _window_apply_operator(p, coords, {i: ONE}) for i in range(len(coords.mons))
    ]
    combos = kernel_of(images)
    cutoff = ambient.cert_degree - deg - guard
    rows = []
    ech = Echelon()
    for combo in combos:
        piv = ech.insert(dict(combo))
        if piv is not None and coords.mdeg[piv] <= cutoff:
            rows.append(piv)
    out = [coords.from_vec(ech.rows[piv], ambient.cert_degree) for piv in sorted(rows)]
    if not out:
        raise EmptyKernel("operator has no certified kernel in this window")
    return out


def kernel_generator(solutions: List[XiElement]) -> XiElement:
    """Solution with the maximal log-degree head (first in pivot order)."""
    def head(x: XiElement) -> Tuple:
        mon = x.support()[0]
        return (-mon.j, mon.beta, mon.k)

    return sorted(solutions, key=head)[0]


def _chain_monomials(ambient: Ambient, alpha, m: int, p: int, k: int) -> List[LogMonomial]:
    """Pure-monomial ladder of length p at exponent alpha + m.

    Off the integer class the ladder runs over log degrees 0..p-1; on it,
    over 1..p (the quotient removed the degree-0 layer).
    """
    base = 0 if alpha != 1 else 1
    return [LogMonomial(alpha, m, base + j, k) for j in range(p)]


def find_jordan_chain(f: SubModule, cls, p: int) -> Tuple[int, List[XiElement]]:
    """Find w_1..w_p in F with a w_j = (alpha+m) b w_j + b w_(j-1).

    Scans integer shifts for a pure-monomial ladder inside the saturation
    (its top member suffices: the lower ones are its inverse-shift images),
    then multiplies by the b-power needed to land inside F itself.
    """
    alpha = as_exponent_class(cls).alpha
    prim = primitive_quotient(f, alpha)
    d_prim = prim.saturate().nilpotent_order()
    if not 1 <= p <= d_prim:
        raise NoRoot(f"no level-{p} ladder in class {alpha}: depth is {d_prim}")
    if all(higher_bernstein(prim, p)(-(alpha + m)) != 0
           for m in range(f.window + 1)):
        raise NoRoot(f"level {p} polynomial has no root at class {alpha}")
    if alpha == 1 and p > f.ambient.log_bound + 1:
        raise SearchExhausted("ladder exceeds the ambient log bound")
    if alpha != 1 and p > f.ambient.log_bound + 1:
        raise SearchExhausted("ladder exceeds the ambient log bound")
    sat = f.saturate()
    coords = f._coords
    limit = f.window - f.guard
    for k in range(f.ambient.value_dim):
        for m in range(limit + 1):
            mons = _chain_monomials(f.ambient, alpha, m, p, k)
            top = {coords.index[mons[-1]]: ONE}
            if not sat._ech.contains(top):
                continue
            vecs = [{coords.index[mon]: ONE} for mon in mons]
            for q in range(limit - m + 1):
                if all(f._ech.contains(v) for v in vecs):
                    return m + q, [
                        coords.from_vec(v, f.window) for v in vecs
                    ]
                vecs = [coords.apply_gen(v, Gen.B) for v in vecs]
    raise SearchExhausted("no pure-monomial ladder found; raise truncation")


def verify_jordan_chain(f: SubModule, m: int, chain: Sequence[XiElement]) -> bool:
    """Direct check of a w_j = (alpha+m) b w_j + b w_(j-1) inside the window."""
    coords = f._coords
    prev: Dict = {}
    for w in chain:
        alpha = w.support()[0].alpha
        v = coords.to_vec(w)
        lhs = coords.apply_gen(v, Gen.A)
        rhs = vec_add(coords.apply_gen(v, Gen.B), prev, None) if prev else coords.apply_gen(v, Gen.B)
        rhs = vec_add(coords.apply_gen(v, Gen.B), prev) if prev else coords.apply_gen(v, Gen.B)
        rhs = {i: c * (alpha + m) for i, c in coords.apply_gen(v, Gen.B).items()}
        if prev:
            rhs = vec_add(rhs, prev)
        diff = vec_add(lhs, rhs, QQ(-1))
        if diff:
            return False
        prev = coords.apply_gen(v, Gen.B)
    return True


def find_witness_fresco(e: SubModule, j: int, beta, seed: int = 0,
                        budget: int = 64) -> XiElement:
    """Generator z of a one-generator submodule witnessing a level-j root.

    Accepts z when some level h >= j polynomial of the module it generates
    has a root beta - n for n a nonnegative integer (the integer shifts run
    downward); when j is the full depth of the class part, the root must be
    beta itself.
    """
    beta = as_rational(beta)
    if higher_bernstein(e, j)(beta) != 0:
        raise NoRoot(f"{beta} is not a root of the level-{j} polynomial")
    alpha = beta - int(beta) + (1 if beta == int(beta) else 0)
    alpha = -beta - int(-beta)
    if alpha <= 0:
        alpha += 1
    cls = as_exponent_class(alpha)
    exact_needed = j == e.saturate().nilpotent_order() and j == primitive_quotient(
        e, cls
    ).saturate().nilpotent_order()
    sat = e.saturate()
    chain = sat.semisimple_filtration()
    top = min(j, len(chain) - 1)
    layer_rows = chain[top].basis_vectors()
    lower = chain[top - 1]._ech if top >= 1 else None
    coords = e._coords

    def accept(z_vec: Dict) -> Optional[XiElement]:
        x = coords.from_vec(z_vec, e.window)
        if not e.contains(x):
            # witness generators must come from the module itself
            q = 0
            while not e.contains(x) and q <= e.guard:
                z_vec = coords.apply_gen(z_vec, Gen.B)
                x = coords.from_vec(z_vec, e.window)
                q += 1
            if not e.contains(x):
                return None
        fz = generate([x], f_closure(e), guard=e.guard)
        try:
            dz = fz.saturate().nilpotent_order()
        except RankUnstable:
            return None
        for h in range(j, dz + 1):
            poly = higher_bernstein(fz, h)
            n = 0
            while beta - n >= -(e.window + 1):
                if poly(beta - n) == 0:
                    if exact_needed and n != 0:
                        break
                    return x
                if exact_needed:
                    break
                n += 1
        return None

    def f_closure(mod):
        from .modules import CLOSURE_AB

        return CLOSURE_AB

    # deterministic candidates first: layer basis rows off the lower layer
    for row in layer_rows:
        if lower is not None and lower.contains(row):
            continue
        got = accept(dict(row))
        if got is not None:
            return got
    rng = Random(seed)
    n_rows = len(layer_rows)
    for _ in range(budget):
        picks = rng.sample(range(n_rows), k=min(n_rows, rng.randint(1, 3)))
        z: Dict = {}
        for i in picks:
            z = vec_add(z, layer_rows[i], QQ(rng.randint(1, 5), rng.randint(1, 3)))
        if not z or (lower is not None and lower.contains(z)):
            continue
        got = accept(z)
        if got is not None:
            return got
    raise WitnessNotFound(
        f"no witness found for level {j} root {beta} within budget {budget}"
    )
