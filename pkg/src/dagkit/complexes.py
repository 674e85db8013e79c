"""Chain complexes of finitely generated modules over Q[x]/J.

Each degree is a subquotient (S + R + J F) / (R + J F) of a free module
F = R^rank: ``gens`` generate S (None means all of F) and ``rels`` is R.
Differentials are given on the ambient free modules as lists of columns,
one vector per basis element of F.
"""

from .groebner import (
    GB,
    FPModule,
    apply_columns,
    is_zero_quotient,
    subquotient_homology,
    subquotient_kernel,
)
from .poly import ONE, p_add, v_scale_poly


class Piece:
    __slots__ = ("rank", "gens", "rels")

    def __init__(self, rank, gens=None, rels=()):
        self.rank = rank
        self.gens = None if gens is None else [dict(g) for g in gens if g]
        self.rels = [dict(r) for r in rels if r]

    def generators(self, n):
        if self.gens is not None:
            return self.gens
        return [{(i, (0,) * n): ONE} for i in range(self.rank)]

    def __repr__(self):
        return "Piece(rank=%d, gens=%s, rels=%d)" % (
            self.rank, "all" if self.gens is None else len(self.gens), len(self.rels))


def apply_matrix(cols, v):
    """Image of vector v under the map whose columns are ``cols``."""
    r = {}
    by_pos = {}
    for (p, m), c in v.items():
        by_pos.setdefault(p, {})[m] = c
    for p, poly in by_pos.items():
        r = p_add(r, v_scale_poly(cols[p], poly))
    return r


class ModuleComplex:
    """Bounded chain complex of subquotient modules (homological grading)."""

    def __init__(self, ring, pieces, diffs, ideal=()):
        self.ring = ring
        self.pieces = dict(pieces)
        self.diffs = dict(diffs)  # degree i -> columns of F_i -> F_{i-1}
        self.ideal = [g for g in ideal if g]

    def piece(self, i):
        return self.pieces.get(i, Piece(0))

    def d(self, i):
        return self.diffs.get(i, [{}] * self.piece(i).rank)

    def degrees(self):
        return sorted(i for i, p in self.pieces.items() if p.rank)

    def _parts(self, i):
        n = self.ring.n
        P = self.piece(i)
        S = P.generators(n)
        cols = self.d(i)
        dS = [apply_matrix(cols, s) if cols else {} for s in S]
        Pm = self.piece(i - 1)
        Pp = self.piece(i + 1)
        colsp = self.d(i + 1)
        B_in = [apply_matrix(colsp, s) for s in Pp.generators(n)] if Pp.rank else []
        return P, S, dS, Pm, B_in

    def homology(self, i):
        P, S, dS, Pm, B_in = self._parts(i)
        if P.rank == 0:
            return FPModule(self.ring, 0, [], ambient=[], ambient_rank=0)
        return subquotient_homology(self.ring, S, P.rels, dS, Pm.rank, Pm.rels, B_in, self.ideal, P.rank)

    def boundaries(self, i):
        """Generators of R_i + J F_i + d(S_{i+1}) inside F_i."""
        P, S, dS, Pm, B_in = self._parts(i)
        J = [{(k, m): c for m, c in g.items()} for k in range(P.rank) for g in self.ideal]
        return [b for b in B_in if b] + P.rels + J

    def cycles(self, i):
        P, S, dS, Pm, B_in = self._parts(i)
        if P.rank == 0:
            return []
        return subquotient_kernel(self.ring, S, dS, Pm.rank, Pm.rels, self.ideal)

    def homology_is_zero(self, i):
        P = self.piece(i)
        if P.rank == 0:
            return True
        return is_zero_quotient(self.ring, self.cycles(i), self.boundaries(i), P.rank)

    def check_d_squared(self):
        """Return the first degree where d o d is nonzero modulo relations, or None."""
        n = self.ring.n
        for i in self.degrees():
            if i - 2 not in self.pieces:
                continue
            P2 = self.piece(i - 2)
            if P2.rank == 0:
                continue
            rels = P2.rels + [{(k, m): c for m, c in g.items()} for k in range(P2.rank) for g in self.ideal]
            gb = GB(self.ring, P2.rank, rels) if rels else None
            for s in self.piece(i).generators(n):
                v = apply_matrix(self.d(i - 1), apply_matrix(self.d(i), s))
                if v and (gb is None or not gb.contains(v)):
                    return i
        return None


class ComplexMap:
    """Chain map given by columns on ambient free modules, degree by degree."""

    def __init__(self, source, target, maps):
        self.source = source
        self.target = target
        self.maps = dict(maps)

    def f(self, i):
        return self.maps.get(i, [{}] * self.source.piece(i).rank)


def cone(fmap):
    """Mapping cone: Cone_i = A_{i-1} + B_i, d(a, b) = (-d a, f a + d b)."""
    A, B = fmap.source, fmap.target
    ring = A.ring
    degs = set(A.pieces) | set(B.pieces)
    degs = degs | {i + 1 for i in A.pieces}
    pieces = {}
    diffs = {}
    n = ring.n
    for i in sorted(degs):
        Pa = A.piece(i - 1)
        Pb = B.piece(i)
        ra = Pa.rank
        gens = None
        if Pa.gens is not None or Pb.gens is not None:
            gens = list(Pa.generators(n)) + [{(p + ra, m): c for (p, m), c in g.items()} for g in Pb.generators(n)]
        rels = list(Pa.rels) + [{(p + ra, m): c for (p, m), c in r.items()} for r in Pb.rels]
        pieces[i] = Piece(ra + Pb.rank, gens, rels)
    for i in sorted(degs):
        Pa = A.piece(i - 1)
        Pb = B.piece(i)
        ra_low = A.piece(i - 2).rank
        cols = []
        dA = A.d(i - 1)
        fA = fmap.f(i - 1)
        for j in range(Pa.rank):
            top = {k: -c for k, c in dA[j].items()} if dA else {}
            bot = {(p + ra_low, m): c for (p, m), c in fA[j].items()} if fA else {}
            col = dict(top)
            col.update(bot)
            cols.append(col)
        dB = B.d(i)
        for j in range(Pb.rank):
            cols.append({(p + ra_low, m): c for (p, m), c in dB[j].items()} if dB else {})
        diffs[i] = cols
    ideal = A.ideal if A.ideal else []
    return ModuleComplex(ring, pieces, diffs, ideal)


def complex_map_is_quasi_iso(fmap, degrees):
    C = cone(fmap)
    for i in degrees:
        if not C.homology_is_zero(i):
            return False, i
    return True, None
