"""Finitely generated submodules of truncated expansion spaces.

A SubModule is the exact truncation, through a working degree window, of a
module generated by finitely many expansion elements and closed under a
chosen set of algebra generators.  Because the degree-raising generators
determine a result coefficient in degree m from input coefficients in
degrees below m, the truncated span computed by the closure loop equals
the truncation of the infinite module, and every operation downstream
(saturation, quotients, induced eigenstructure) is exact linear algebra on
the window.

Quantities that depend on the window being wide enough (ranks, dimensions)
are computed at two certification thresholds and must agree; disagreement
raises RankUnstable rather than returning a guess.
"""

from __future__ import annotations

import heapq
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    GuardExhausted,
    IndexOutOfRange,
    NotNormal,
    RankUnstable,
)
from .linalg import Echelon, TagEchelon, kernel_of, span_of, vec_add, vec_scale, vec_trunc
from .matrices import charpoly, minimal_polynomial
from .polynomials import RationalPolynomial
from .rationals import QQ, ZERO, as_rational
from .xi import (
    Ambient,
    Gen,
    XiElement,
    as_exponent_class,
    coordinates,
)

DEFAULT_GUARD = 8

CLOSURE_AB = frozenset((Gen.A, Gen.B))
CLOSURE_FULL = frozenset((Gen.A, Gen.B, Gen.B_INV_A))


def eigenvalue_grid(ambient: Ambient, max_m: Optional[int] = None) -> List:
    """Candidate roots -(alpha + m) of every induced -b^-1 a action."""
    top = ambient.cert_degree if max_m is None else max_m
    out = []
    for a in ambient.alpha_set:
        for m in range(top + 1):
            out.append(-(a + m))
    return sorted(out, reverse=True)


def _close(ech: Echelon, coords, gens: Sequence[Gen], seeds: Iterable[Dict], window: int,
           seed_gens: Optional[Sequence[Gen]] = None):
    """Grow the staircase until it is closed under the generators.

    Every basis row, pre-existing or new, has its generator images pushed
    back in exactly once; the span is finite-dimensional so this stops.
    Rows are processed in ascending pivot order so the staircase is fully
    reduced below the frontier and intermediate tails stay sparse.

    ``seed_gens`` restricts the probes applied to pre-existing rows (used
    by saturation, whose input is already closed under a and b).
    """
    mdeg = coords.mdeg
    cap = coords.ambient.cert_degree
    gens = tuple(gens)
    heap: List[Tuple[int, Tuple[Gen, ...]]] = []
    for p in list(ech.rows):
        heapq.heappush(heap, (p, gens if seed_gens is None else tuple(seed_gens)))
    for v in seeds:
        if window < cap:
            v = vec_trunc(v, mdeg, window)
        p = ech.insert(v)
        if p is not None:
            heapq.heappush(heap, (p, gens))
    while heap:
        p, probe = heapq.heappop(heap)
        row = ech.rows[p]
        for g in probe:
            img = coords.apply_gen(row, g)
            if window < cap:
                img = vec_trunc(img, mdeg, window)
            q = ech.insert(img)
            if q is not None:
                heapq.heappush(heap, (q, gens))


class SubModule:
    """Truncated realization of a finitely generated (a,b)-submodule."""

    def __init__(self, ambient: Ambient, ech: Echelon, closure_set, guard: int,
                 window: Optional[int] = None, generators: Optional[List[XiElement]] = None):
        self.ambient = ambient
        self.closure_set = frozenset(closure_set)
        self.guard = guard
        self.window = ambient.cert_degree if window is None else window
        if self.window - guard - 2 < 0:
            raise GuardExhausted(
                f"window {self.window} cannot certify ranks with guard {guard}"
            )
        self._coords = coordinates(ambient)
        self._ech = ech
        self.generators = list(generators) if generators else []
        self._cache: Dict[str, object] = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def _from_vectors(cls, ambient, vecs, closure_set, guard, window=None,
                      generators=None, assume_closed=False) -> "SubModule":
        coords = coordinates(ambient)
        w = ambient.cert_degree if window is None else window
        ech = Echelon()
        if assume_closed:
            for v in vecs:
                ech.insert(v)
        else:
            _close(ech, coords, sorted(closure_set, key=lambda g: g.value), vecs, w)
        return cls(ambient, ech, closure_set, guard, w, generators)

    # -- presentation ---------------------------------------------------------

    @property
    def basis(self) -> List[XiElement]:
        """Unique reduced-echelon basis, ordered by (s-valuation, log degree)."""
        if "basis" not in self._cache:
            self._cache["basis"] = [
                self._coords.from_vec(v, self.window)
                for v in self._ech.canonical_rows()
            ]
        return self._cache["basis"]

    def basis_vectors(self) -> List[Dict]:
        return [self._ech.rows[p] for p in self._ech.pivots()]

    @property
    def dim_window(self) -> int:
        return self._ech.rank

    def is_zero(self) -> bool:
        return self._ech.rank == 0

    def __repr__(self):
        return (
            f"SubModule(window dim {self._ech.rank}, "
            f"closure {{{', '.join(sorted(g.value for g in self.closure_set))}}})"
        )

    def __eq__(self, other):
        return (
            isinstance(other, SubModule)
            and self.ambient == other.ambient
            and self.spans_same(other)
        )

    def __hash__(self):
        return hash((self.ambient, tuple(self._ech.pivots())))

    def spans_same(self, other: "SubModule") -> bool:
        if self._ech.rank != other._ech.rank:
            return False
        return all(other._ech.contains(v) for v in self.basis_vectors())

    def contains(self, x: XiElement) -> bool:
        return self._ech.contains(self._coords.to_vec(x))

    def contains_span(self, other: "SubModule") -> bool:
        return all(self._ech.contains(v) for v in other.basis_vectors())

    # -- degree bookkeeping ----------------------------------------------------

    @property
    def thresholds(self) -> Tuple[int, int]:
        return self.window - self.guard, self.window - self.guard - 2

    def _stable_dim(self, ech: Echelon, what: str) -> int:
        t1, t2 = self.thresholds
        mdeg = self._coords.mdeg
        d1 = self._ech.rank_below(mdeg, t1) - ech.rank_below(mdeg, t1)
        d2 = self._ech.rank_below(mdeg, t2) - ech.rank_below(mdeg, t2)
        if d1 != d2:
            raise RankUnstable(
                f"{what} differs between degree thresholds ({d1} at {t1}, {d2} at {t2});"
                " raise the truncation degree"
            )
        return d1

    # -- generator images --------------------------------------------------------

    def _image_span(self, gen: Gen) -> Echelon:
        key = f"img_{gen.value}"
        if key not in self._cache:
            mdeg = self._coords.mdeg
            cap = self.ambient.cert_degree
            e = Echelon()
            for row in self._ech.rows.values():
                img = self._coords.apply_gen(row, gen)
                if self.window < cap:
                    img = vec_trunc(img, mdeg, self.window)
                e.insert(img)
            self._cache[key] = e
        return self._cache[key]

    # -- spec operations -----------------------------------------------------------

    def b_rank(self) -> int:
        """dim of M / bM, certified at two degree thresholds.

        b maps the degree <= t-1 part of the span bijectively onto the
        degree <= t part of its image, so the quotient dimension at
        threshold t is the number of basis pivots of degree exactly t.
        """
        if Gen.B not in self.closure_set:
            raise ValueError("b_rank needs a span closed under b")
        if "b_rank" not in self._cache:
            t1, t2 = self.thresholds
            mdeg = self._coords.mdeg
            r1 = self._ech.rank_below(mdeg, t1) - self._ech.rank_below(mdeg, t1 - 1)
            r2 = self._ech.rank_below(mdeg, t2) - self._ech.rank_below(mdeg, t2 - 1)
            if r1 != r2:
                raise RankUnstable(
                    f"B-rank differs between degree thresholds ({r1} at {t1},"
                    f" {r2} at {t2}); raise the truncation degree"
                )
            self._cache["b_rank"] = r1
        return self._cache["b_rank"]

    def is_simple_pole(self) -> bool:
        """a M ⊆ b M, tested as b^-1 a M ⊆ M since b is injective."""
        return all(
            self._ech.contains(self._coords.apply_gen(row, Gen.B_INV_A))
            for row in self._ech.rows.values()
        )

    def saturate(self) -> "SubModule":
        """Closure under the inverse shift; result has a simple pole.

        The result records the smallest verified n with b^n * result
        contained in the original module (finite codimension certificate).
        """
        if "sat" in self._cache:
            return self._cache["sat"]
        if Gen.B_INV_A in self.closure_set:
            self._cache["sat"] = self
            self.codim_power = 0
            return self
        if not CLOSURE_AB <= self.closure_set:
            raise ValueError("saturation needs a span closed under a and b")
        ech = self._ech.copy()
        # existing rows are already closed under a and b, so they only need
        # their inverse-shift images pushed in
        _close(ech, self._coords, (Gen.A, Gen.B, Gen.B_INV_A), (), self.window,
               seed_gens=(Gen.B_INV_A,))
        sat = SubModule(self.ambient, ech, CLOSURE_FULL, self.guard, self.window,
                        self.generators)
        power = 0
        mdeg = self._coords.mdeg
        cap = self.ambient.cert_degree
        for p in sorted(set(ech.rows) - set(self._ech.rows)):
            v = ech.rows[p]
            q = 0
            while not self._ech.contains(v):
                v = self._coords.apply_gen(v, Gen.B)
                if self.window < cap:
                    v = vec_trunc(v, mdeg, self.window)
                q += 1
                if q > self.window:
                    raise GuardExhausted("saturation codimension certificate not found")
            power = max(power, q)
        sat.codim_power = power
        sat._cache["sat"] = sat
        self._cache["sat"] = sat
        return sat

    def nilpotent_order(self) -> int:
        """Largest log-ladder length carried by the span; 0 for the zero module."""
        if "nilp" not in self._cache:
            nd = self._coords.nildeg
            best = 0
            for row in self._ech.rows.values():
                for i in row:
                    if nd[i] > best:
                        best = nd[i]
            self._cache["nilp"] = best
        return self._cache["nilp"]

    def _layer_span(self, j: int) -> List[Dict]:
        """Vectors spanning {x in span : every monomial has ladder depth <= j}."""
        nd = self._coords.nildeg
        rows = list(self._ech.rows.values())
        shadows = [{i: c for i, c in row.items() if nd[i] > j} for row in rows]
        combos = kernel_of(shadows)
        out = []
        for combo in combos:
            v: Dict = {}
            for i, c in combo.items():
                v = vec_add(v, rows[i], c)
            if v:
                out.append(v)
        return out

    def semisimple_filtration(self) -> List["SubModule"]:
        """The chain S_0 = 0 through S_d = M of elements of bounded ladder depth.

        Each S_j is a coordinate-subspace intersection, hence closed under
        all three generator actions; each is verified normal in M.
        """
        if "filt" in self._cache:
            return self._cache["filt"]
        d = self.nilpotent_order()
        chain = [
            SubModule._from_vectors(
                self.ambient, [], self.closure_set, self.guard, self.window,
                assume_closed=True,
            )
        ]
        for j in range(1, d + 1):
            vecs = self._layer_span(j) if j < d else list(self._ech.rows.values())
            sj = SubModule._from_vectors(
                self.ambient, vecs, self.closure_set, self.guard, self.window,
                assume_closed=True,
            )
            if not is_normal_in(sj, self):
                raise RankUnstable(
                    f"semi-simple layer {j} not normal at this truncation"
                )
            chain.append(sj)
        self._cache["filt"] = chain
        return chain

    # -- serialization ----------------------------------------------------------

    def to_json(self, include_basis: bool = True) -> dict:
        data = {
            "ambient": self.ambient.to_json(),
            "closure": sorted(g.value for g in self.closure_set),
            "guard": self.guard,
            "generators": [g.to_json() for g in self.generators],
        }
        if include_basis:
            data["basis"] = [x.to_json() for x in self.basis]
        return data


def zero_module(ambient: Ambient, closure_set=CLOSURE_AB, guard: int = DEFAULT_GUARD) -> SubModule:
    return SubModule._from_vectors(ambient, [], closure_set, guard, assume_closed=True)


def generate(gens: Sequence[XiElement], closure_set=CLOSURE_AB,
             guard: int = DEFAULT_GUARD, ambient: Optional[Ambient] = None) -> SubModule:
    """Smallest truncated span containing the generators and closed under
    the requested algebra generators."""
    gens = list(gens)
    closure = frozenset(closure_set)
    if Gen.B not in closure:
        raise ValueError("closure set must contain b")
    if not gens:
        if ambient is None:
            raise ValueError("empty generator list needs an explicit ambient")
        return zero_module(ambient, closure, guard)
    amb = gens[0].ambient
    if ambient is not None and ambient != amb:
        raise ValueError("generators do not live in the requested ambient")
    for g in gens[1:]:
        if g.ambient != amb:
            raise ValueError("generators share no common ambient")
    coords = coordinates(amb)
    window = min([amb.cert_degree] + [g.cert_degree for g in gens])
    vecs = [coords.to_vec(g) for g in gens]
    return SubModule._from_vectors(
        amb, vecs, closure, guard, window=window, generators=gens
    )


def b_rank(m: SubModule) -> int:
    return m.b_rank()


def saturate(m: SubModule) -> SubModule:
    return m.saturate()


def is_simple_pole(m: SubModule) -> bool:
    return m.is_simple_pole()


def nilpotent_order(m: SubModule) -> int:
    return m.nilpotent_order()


def semisimple_filtration(m: SubModule) -> List[SubModule]:
    return m.semisimple_filtration()


def is_normal_in(f: SubModule, e: SubModule) -> bool:
    """Check F ∩ bE = bF within the window."""
    from .linalg import intersect

    span_b_e = e._image_span(Gen.B)
    span_b_f = f._image_span(Gen.B)
    meet = intersect(f.basis_vectors(), span_b_e)
    meet_ech = span_of(meet)
    if meet_ech.rank != span_b_f.rank:
        return False
    return all(meet_ech.contains(v) for v in span_b_f.rows.values())


def normalize_in(f: SubModule, e: SubModule) -> SubModule:
    """Smallest normal submodule of E containing F.

    Iterates the b-preimage of the current span inside E, interleaved with
    closure under E's generators, until the span stabilizes.

    Near the top of the degree window the preimage test loses strength (a
    vector supported in the last k degrees constrains nothing after k shift
    steps), so step k only accepts preimage vectors pivoted at least k
    degrees below the top; the closure pass regenerates the top band from
    the certified content.  The result is certified by comparing its
    B-rank with F's, which normalization preserves.
    """
    if not e.contains_span(f):
        raise ValueError("normalization needs F contained in E")
    coords = e._coords
    mdeg = coords.mdeg
    cur = Echelon()
    for v in f.basis_vectors():
        cur.insert(v)
    e_rows = list(e._ech.rows.values())
    b_imgs = [coords.apply_gen(r, Gen.B) for r in e_rows]
    gens = sorted(e.closure_set, key=lambda g: g.value)
    stabilized = False
    for step in range(1, e.guard + 1):
        reduced = [cur.reduce(img) for img in b_imgs]
        combos = kernel_of(reduced)
        fresh = []
        for combo in combos:
            v: Dict = {}
            for i, c in combo.items():
                v = vec_add(v, e_rows[i], c)
            r = cur.reduce(v)
            if r and mdeg[min(r)] <= e.window - step:
                cur.store_reduced(r)
                fresh.append(v)
        if not fresh:
            stabilized = True
            break
        _close(cur, coords, gens, fresh, e.window)
    if not stabilized:
        raise GuardExhausted("normalization did not stabilize within the guard")
    out = SubModule(e.ambient, cur, e.closure_set, e.guard, e.window)
    if not f.is_zero() and out.b_rank() != f.b_rank():
        raise RankUnstable("normalization changed the B-rank; raise truncation")
    return out


def _induced_action(ambient: Ambient, x_rows: List[Dict], y_vecs: List[Dict],
                    window: int) -> Tuple[List[List], List[Dict]]:
    """Matrix of -b^-1 a on span(x_rows)/span(y_vecs) plus the transversal.

    The quotient must be stable under the inverse shift; a nonzero
    remainder means the window was too small.
    """
    coords = coordinates(ambient)
    te = TagEchelon()
    for v in y_vecs:
        te.insert(v, {})
    transversal: List[Dict] = []
    for r in x_rows:
        p = te.insert(r, {len(transversal): QQ(1)})
        if p is not None:
            # tags refer to the vectors as inserted, so the transversal
            # must keep the originals, not the normalized stored rows
            transversal.append(r)
    n = len(transversal)
    matrix = [[ZERO] * n for _ in range(n)]
    for col, t in enumerate(transversal):
        v = vec_scale(coords.apply_gen(t, Gen.B_INV_A), QQ(-1))
        rem, tags = te.reduce(v)
        if rem:
            raise RankUnstable(
                "induced inverse-shift action escaped the quotient; raise truncation"
            )
        for row_idx, c in tags.items():
            matrix[row_idx][col] = c
    return matrix, transversal


def _poly_pair(ambient: Ambient, matrix) -> Tuple[RationalPolynomial, RationalPolynomial]:
    grid = eigenvalue_grid(ambient)
    char = charpoly(matrix)
    if char.factor_on_grid(grid) is None:
        raise RankUnstable("eigenvalues escaped the rational grid")
    minimal = minimal_polynomial(matrix, char, grid)
    return minimal, char


def bernstein(m: SubModule) -> Tuple[RationalPolynomial, RationalPolynomial]:
    """Minimal and characteristic polynomial of -b^-1 a on sat(M)/b sat(M).

    The minimal polynomial is the module's Bernstein polynomial in general;
    for a fresco the characteristic polynomial is the one the structure
    theory names, and both are returned so callers pick explicitly.
    """
    if "bernstein" in m._cache:
        return m._cache["bernstein"]
    sat = m.saturate()
    x_rows = list(sat._ech.rows.values())
    y_vecs = [sat._coords.apply_gen(r, Gen.B) for r in x_rows]
    matrix, transversal = _induced_action(m.ambient, x_rows, y_vecs, sat.window)
    if len(transversal) != sat.b_rank():
        raise RankUnstable("transversal dimension disagrees with certified B-rank")
    pair = _poly_pair(m.ambient, matrix)
    m._cache["bernstein"] = pair
    return pair


def higher_bernstein(m: SubModule, j: int) -> RationalPolynomial:
    """Bernstein polynomial of the j-th semi-simple layer of the saturation."""
    sat = m.saturate()
    d = sat.nilpotent_order()
    if not 1 <= j <= d:
        raise IndexOutOfRange(f"level {j} outside [1, {d}]")
    key = f"hb_{j}"
    if key in m._cache:
        return m._cache[key]
    chain = sat.semisimple_filtration()
    x_rows = chain[j].basis_vectors()
    y_vecs = list(chain[j - 1].basis_vectors())
    y_vecs += [sat._coords.apply_gen(r, Gen.B) for r in x_rows]
    matrix, transversal = _induced_action(m.ambient, x_rows, y_vecs, sat.window)
    if len(transversal) != chain[j].b_rank() - chain[j - 1].b_rank():
        raise RankUnstable("semi-simple layer dimension disagrees with rank difference")
    minimal, _char = _poly_pair(m.ambient, matrix)
    m._cache[key] = minimal
    return minimal


def primitive_quotient(m: SubModule, cls) -> SubModule:
    """Image of the span in a single exponent class, realized in that class."""
    alpha = as_exponent_class(cls).alpha
    target = Ambient(
        (alpha,), m.ambient.log_bound, m.ambient.value_dim, m.ambient.cert_degree
    )
    tcoords = coordinates(target)
    vecs = []
    for x in (m._coords.from_vec(row, m.window) for row in m._ech.rows.values()):
        terms = {mon: c for mon, c in x.terms.items() if mon.alpha == alpha}
        if terms:
            vecs.append(tcoords.to_vec(XiElement(target, terms, m.window)))
    return SubModule._from_vectors(
        target, vecs, m.closure_set, m.guard, window=m.window, assume_closed=True
    )


class QuotientModule:
    """Coset space E/F with induced generator matrices on a transversal."""

    def __init__(self, total: SubModule, sub: SubModule):
        if total.ambient != sub.ambient:
            raise ValueError("quotient of modules in different ambients")
        if not total.contains_span(sub):
            raise NotNormal("submodule is not contained in the total module")
        if not is_normal_in(sub, total):
            raise NotNormal("submodule is not normal (F ∩ bE != bF)")
        self.total = total
        self.sub = sub
        self._coords = total._coords
        te = TagEchelon()
        for v in sub.basis_vectors():
            te.insert(v, {})
        reps: List[Dict] = []
        for r in total.basis_vectors():
            p = te.insert(r, {len(reps): QQ(1)})
            if p is not None:
                reps.append(r)
        self._te = te
        self._reps = reps
        self.transversal = [self._coords.from_vec(r, total.window) for r in reps]
        self.matrices: Dict[Gen, Optional[List[List]]] = {}
        for g in (Gen.A, Gen.B, Gen.B_INV_A):
            self.matrices[g] = self._induced_matrix(g)

    def _induced_matrix(self, gen: Gen) -> Optional[List[List]]:
        n = len(self._reps)
        matrix = [[ZERO] * n for _ in range(n)]
        for col, r in enumerate(self._reps):
            img = self._coords.apply_gen(r, gen)
            rem, tags = self._te.reduce(img)
            if rem:
                if gen is Gen.B_INV_A:
                    return None  # total module need not be shift-stable
                raise RankUnstable(
                    f"induced {gen.value} action escaped the quotient; raise truncation"
                )
            for row_idx, c in tags.items():
                matrix[row_idx][col] = c
        return matrix

    @property
    def dim_window(self) -> int:
        return len(self._reps)

    def is_zero(self) -> bool:
        return not self._reps

    def b_rank(self) -> int:
        span = self.sub._ech.copy()
        for r in self.total.basis_vectors():
            span.insert(self._coords.apply_gen(r, Gen.B))
        t1, t2 = self.total.thresholds
        mdeg = self._coords.mdeg
        d1 = self.total._ech.rank_below(mdeg, t1) - span.rank_below(mdeg, t1)
        d2 = self.total._ech.rank_below(mdeg, t2) - span.rank_below(mdeg, t2)
        if d1 != d2:
            raise RankUnstable("quotient B-rank unstable between thresholds")
        return d1

    def bernstein(self) -> Tuple[RationalPolynomial, RationalPolynomial]:
        """Bernstein data of E/F via sat(E) modulo the normalization of F."""
        return bernstein_of_quotient(self.total, self.sub)

    def layer_preimage(self, j: int) -> SubModule:
        """Preimage in E of the depth-<= j part of E/F (a submodule of E)."""
        nd = self._coords.nildeg
        f_rows = self.sub.basis_vectors()
        e_rows = self.total.basis_vectors()
        shadow_f = span_of([{i: c for i, c in r.items() if nd[i] > j} for r in f_rows])
        shadows = [shadow_f.reduce({i: c for i, c in r.items() if nd[i] > j}) for r in e_rows]
        combos = kernel_of(shadows)
        vecs = [v for v in f_rows]
        for combo in combos:
            v: Dict = {}
            for i, c in combo.items():
                v = vec_add(v, e_rows[i], c)
            if v:
                vecs.append(v)
        return SubModule._from_vectors(
            self.total.ambient, vecs, self.total.closure_set, self.total.guard,
            window=self.total.window, assume_closed=False,
        )

    def nilpotent_order(self) -> int:
        d = 0
        while self.layer_preimage(d).dim_window < self.total.dim_window:
            d += 1
            if d > self.total.nilpotent_order() + 1:
                raise RankUnstable("quotient nilpotent order scan failed")
        return d


def quotient(e: SubModule, f: SubModule) -> QuotientModule:
    return QuotientModule(e, f)


def bernstein_of_quotient(e: SubModule, f: SubModule) -> Tuple[RationalPolynomial, RationalPolynomial]:
    """Bernstein data of E/F without building the full coset structure.

    The saturated quotient of E/F is sat(E) modulo the normalization of F
    inside sat(E); the induced quotient dimension must match the rank
    difference or the window is too small.
    """
    sat = e.saturate()
    norm = normalize_in(f, sat)
    x_rows = list(sat._ech.rows.values())
    y_vecs = list(norm.basis_vectors())
    y_vecs += [sat._coords.apply_gen(r, Gen.B) for r in x_rows]
    matrix, transversal = _induced_action(e.ambient, x_rows, y_vecs, sat.window)
    if len(transversal) != sat.b_rank() - (0 if f.is_zero() else f.b_rank()):
        raise RankUnstable("quotient dimension disagrees with rank difference")
    return _poly_pair(e.ambient, matrix)
