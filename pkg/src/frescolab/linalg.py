"""Sparse exact reduced row echelon over the rationals.

Vectors are {coordinate index: nonzero rational} dicts; coordinate order is
the ambient monomial order, so a row's pivot is its smallest index, which
is its lowest s-valuation monomial.

The reduced form is maintained incrementally: every stored row is a pivot
unit vector plus a tail supported on non-pivot coordinates only.  Reduction
against such a basis is a single linear pass (eliminating a pivot can only
spill onto pivot-free coordinates), which keeps closure loops fast even
when the span fills most of the window.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Set, Tuple

from .rationals import QQ, ZERO

Vec = Dict[int, object]


def vec_add(u: Vec, v: Vec, scale=None) -> Vec:
    out = dict(u)
    for i, c in v.items():
        c2 = c if scale is None else c * scale
        n = out.get(i, ZERO) + c2
        if n == 0:
            out.pop(i, None)
        else:
            out[i] = n
    return out


def vec_scale(u: Vec, c) -> Vec:
    if c == 0:
        return {}
    return {i: v * c for i, v in u.items()}


def vec_trunc(u: Vec, mdeg: List[int], max_m: int) -> Vec:
    return {i: c for i, c in u.items() if mdeg[i] <= max_m}


class Echelon:
    """Reduced staircase: rows[p][p] == 1 and row tails avoid all pivots."""

    def __init__(self):
        self.rows: Dict[int, Vec] = {}
        self._uses: Dict[int, Set[int]] = {}  # free coord -> pivots using it

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def pivots(self) -> List[int]:
        return sorted(self.rows)

    def reduce(self, vec: Vec) -> Vec:
        """Remainder of vec modulo the span, supported on pivot-free coords."""
        out: Vec = {}
        rows = self.rows
        for i, c in vec.items():
            row = rows.get(i)
            if row is None:
                n = out.get(i, ZERO) + c
                if n == 0:
                    out.pop(i, None)
                else:
                    out[i] = n
            else:
                for t, rc in row.items():
                    if t == i:
                        continue
                    n = out.get(t, ZERO) - c * rc
                    if n == 0:
                        out.pop(t, None)
                    else:
                        out[t] = n
        return out

    def contains(self, vec: Vec) -> bool:
        return not self.reduce(vec)

    def _register(self, p: int, row: Vec):
        for t in row:
            if t != p:
                self._uses.setdefault(t, set()).add(p)

    def insert(self, vec: Vec) -> Optional[int]:
        """Add a vector; returns its new pivot, or None if dependent."""
        r = self.reduce(vec)
        if not r:
            return None
        return self.store_reduced(r)

    def store_reduced(self, r: Vec) -> int:
        """Store an already fully reduced nonzero vector as a new row."""
        p = min(r)
        lead = r[p]
        row = {i: c / lead for i, c in r.items()}
        # clear the new pivot from every tail that holds it
        for q in self._uses.pop(p, ()):  # type: ignore[arg-type]
            urow = self.rows[q]
            c = urow.pop(p)
            for t, rc in row.items():
                if t == p:
                    continue
                old = urow.get(t)
                n = (ZERO if old is None else old) - c * rc
                if n == 0:
                    if old is not None:
                        urow.pop(t)
                        self._uses[t].discard(q)
                else:
                    if old is None:
                        self._uses.setdefault(t, set()).add(q)
                    urow[t] = n
        self.rows[p] = row
        self._register(p, row)
        return p

    def copy(self) -> "Echelon":
        e = Echelon()
        e.rows = {p: dict(r) for p, r in self.rows.items()}
        e._uses = {t: set(s) for t, s in self._uses.items()}
        return e

    def rank_below(self, mdeg: List[int], max_m: int) -> int:
        """Dimension of the span truncated to degrees <= max_m.

        Truncation strips tails but never a surviving pivot, so truncated
        rows with surviving pivots remain independent.
        """
        return sum(1 for p in self.rows if mdeg[p] <= max_m)

    def canonical_rows(self) -> List[Vec]:
        """Rows are already fully reduced; return them in pivot order."""
        return [dict(self.rows[p]) for p in sorted(self.rows)]


class TagEchelon:
    """Reduced echelon tracking rows as combinations of inserted vectors.

    Used for kernels (combinations reducing to zero) and for reading off
    coordinates of a vector over a chosen transversal.  Vectors inserted
    with an empty tag contribute to the span but stay invisible in the
    reported combinations.
    """

    def __init__(self):
        self.rows: Dict[int, Tuple[Vec, Vec]] = {}
        self._uses: Dict[int, Set[int]] = {}

    def reduce(self, vec: Vec) -> Tuple[Vec, Vec]:
        """Return (remainder, tags) with remainder = vec - sum tags[i] * inserted_i."""
        out: Vec = {}
        tags: Vec = {}
        rows = self.rows
        for i, c in vec.items():
            hit = rows.get(i)
            if hit is None:
                n = out.get(i, ZERO) + c
                if n == 0:
                    out.pop(i, None)
                else:
                    out[i] = n
                continue
            row, rtags = hit
            for t, rc in row.items():
                if t == i:
                    continue
                n = out.get(t, ZERO) - c * rc
                if n == 0:
                    out.pop(t, None)
                else:
                    out[t] = n
            for t, tc in rtags.items():
                n = tags.get(t, ZERO) + c * tc
                if n == 0:
                    tags.pop(t, None)
                else:
                    tags[t] = n
        return out, tags

    def insert(self, vec: Vec, tag: Vec) -> Optional[int]:
        """Insert with a tag; returns pivot, or None when vec was dependent."""
        r, rtags = self.reduce(vec)
        if not r:
            return None
        newtag = dict(tag)
        for t, tc in rtags.items():
            n = newtag.get(t, ZERO) - tc
            if n == 0:
                newtag.pop(t, None)
            else:
                newtag[t] = n
        p = min(r)
        lead = r[p]
        row = {i: c / lead for i, c in r.items()}
        newtag = {t: c / lead for t, c in newtag.items()}
        for q in self._uses.pop(p, ()):  # type: ignore[arg-type]
            urow, utag = self.rows[q]
            c = urow.pop(p)
            for t, rc in row.items():
                if t == p:
                    continue
                old = urow.get(t)
                n = (ZERO if old is None else old) - c * rc
                if n == 0:
                    if old is not None:
                        urow.pop(t)
                        self._uses[t].discard(q)
                else:
                    if old is None:
                        self._uses.setdefault(t, set()).add(q)
                    urow[t] = n
            for t, tc in newtag.items():
                n = utag.get(t, ZERO) - c * tc
                if n == 0:
                    utag.pop(t, None)
                else:
                    utag[t] = n
        self.rows[p] = (row, newtag)
        for t in row:
            if t != p:
                self._uses.setdefault(t, set()).add(p)
        return p


def span_of(vectors: Iterable[Vec]) -> Echelon:
    e = Echelon()
    for v in vectors:
        e.insert(v)
    return e


def kernel_of(vectors: List[Vec]) -> List[Vec]:
    """Basis of {c : sum_i c_i vectors[i] = 0} as sparse coefficient dicts."""
    te = TagEchelon()
    kernel = []
    for idx, v in enumerate(vectors):
        rem, tags = te.reduce(v)
        if not rem:
            combo = {idx: QQ(1)}
            for t, tc in tags.items():
                combo[t] = -tc
            kernel.append(combo)
        else:
            te.insert(v, {idx: QQ(1)})
    return kernel


def intersect(span_a_rows: List[Vec], ech_b: Echelon) -> List[Vec]:
    """Vectors spanning span(span_a_rows) ∩ span(ech_b)."""
    reduced = [ech_b.reduce(r) for r in span_a_rows]
    combos = kernel_of(reduced)
    out = []
    for combo in combos:
        v: Vec = {}
        for i, c in combo.items():
            v = vec_add(v, span_a_rows[i], c)
        if v:
            out.append(v)
    return out
