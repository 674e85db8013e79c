"""Groebner bases for ideals and submodules of free modules over Q[x].

Vectors are dicts keyed by (position, exponent).  The default module order
is position-over-term with position 0 largest, which makes the classical
elimination trick available: a Groebner basis of the columns (M e_j, e_j)
in R^(r+m) contains a Groebner basis of the syzygy module of M among the
elements whose first r components vanish.
"""

import heapq
from itertools import combinations

from gmpy2 import mpq

from .poly import (
    ONE,
    PolyRing,
    MonomialOrder,
    m_div,
    m_divides,
    m_lcm,
    p_add,
    p_is_const,
    p_mul,
    p_scale,
    p_sub,
    p_subs,
    poly_str,
    v_from_polys,
    v_scale_poly,
    v_to_polys,
)


def term_key_fn(order, module_order="pot"):
    mk = order.key
    if module_order == "pot":
        return lambda t: (-t[0],) + mk(t[1])
    if module_order == "top":
        return lambda t: mk(t[1]) + (-t[0],)
    raise ValueError(module_order)


class GB:
    """A reduced Groebner basis of a submodule of R^rank.

    ``gens`` is a list of vectors.  Ideals use rank 1 (see ``ideal_gb``).
    """

    def __init__(self, ring, rank, gens, module_order="pot"):
        self.ring = ring
        self.rank = rank
        self.module_order = module_order
        self.tkey = term_key_fn(ring.order, module_order)
        self.elems = []
        gens = [dict(g) for g in gens if g]
        self._build(gens)

    # -- internals

    def _lead(self, v):
        return max(v, key=self.tkey)

    def _nf(self, f, basis, full=True):
        """Reduce f by basis = list of (lead term, lead coeff, vector)."""
        if not f:
            return {}
        f = dict(f)
        tkey = self.tkey
        heap = [tuple(-x for x in tkey(t)) + (i,) for i, t in enumerate(f)]
        terms = list(f)
        index = {t: i for i, t in enumerate(terms)}
        heapq.heapify(heap)
        rem = {}
        by_pos = self._by_pos(basis)
        while heap:
            item = heapq.heappop(heap)
            t = terms[item[-1]]
            c = f.get(t)
            if c is None:
                continue
            pos, m = t
            red = None
            for lt, lc, g in by_pos.get(pos, ()):
                if m_divides(lt[1], m):
                    red = (lt, lc, g)
                    break
            if red is None:
                rem[t] = c
                del f[t]
                if not full:
                    rem.update(f)
                    return rem
                continue
            lt, lc, g = red
            q = c / lc
            shift = m_div(m, lt[1])
            for (p2, m2), c2 in g.items():
                k = (p2, tuple(a + b for a, b in zip(m2, shift)))
                v = f.get(k)
                if v is None:
                    f[k] = -q * c2
                    idx = index.get(k)
                    if idx is None:
                        idx = len(terms)
                        terms.append(k)
                        index[k] = idx
                    heapq.heappush(heap, tuple(-x for x in tkey(k)) + (idx,))
                else:
                    v = v - q * c2
                    if v:
                        f[k] = v
                    else:
                        del f[k]
            f.pop(t, None)
        return rem

    @staticmethod
    def _by_pos(basis):
        out = {}
        for item in basis:
            out.setdefault(item[0][0], []).append(item)
        return out

    def _spoly(self, a, b):
        lta, lca, fa = a
        ltb, lcb, fb = b
        L = m_lcm(lta[1], ltb[1])
        sa = m_div(L, lta[1])
        sb = m_div(L, ltb[1])
        r = {}
        for (p, m), c in fa.items():
            r[(p, tuple(x + y for x, y in zip(m, sa)))] = c / lca
        for (p, m), c in fb.items():
            k = (p, tuple(x + y for x, y in zip(m, sb)))
            v = r.get(k, 0) - c / lcb
            if v:
                r[k] = v
            else:
                r.pop(k, None)
        return r

    def _build(self, gens):
        basis = []
        pairs = []  # (lcm key, lcm term, i, j)
        product_crit = self.rank == 1

        def add(h):
            lt = self._lead(h)
            lc = h[lt]
            h = {k: v / lc for k, v in h.items()}
            k = len(basis)
            pos, m = lt
            new = []
            for i, (lti, _, _) in enumerate(basis):
                if lti is None or lti[0] != pos:
                    continue
                L = m_lcm(lti[1], m)
                new.append((L, i))
            # Gebauer-Moeller: drop old pairs whose lcm is divisible by m strictly
            keep = []
            for item in pairs:
                _, (ppos, L), i, j = item
                if ppos == pos and m_divides(m, L):
                    Li = m_lcm(basis[i][0][1], m)
                    Lj = m_lcm(basis[j][0][1], m)
                    if Li != L and Lj != L:
                        continue
                keep.append(item)
            pairs[:] = keep
            # criterion M / F on new pairs
            new.sort(key=lambda x: self.ring.order.key(x[0]))
            chosen = []
            seen_lcms = set()
            for L, i in new:
                if L in seen_lcms:
                    continue
                if any(m_divides(L2, L) and L2 != L for L2, _ in new):
                    continue
                seen_lcms.add(L)
                chosen.append((L, i))
            for L, i in chosen:
                if product_crit and all(a == 0 or b == 0 for a, b in zip(basis[i][0][1], m)):
                    continue
                t = (pos, L)
                pairs.append((self.tkey(t), t, i, k))
            basis.append((lt, ONE, h))

        for g in gens:
            r = self._nf(g, [b for b in basis if b[0] is not None])
            if r:
                add(r)
        while pairs:
            pairs.sort(key=lambda x: x[0], reverse=True)
            _, _, i, j = pairs.pop()
            s = self._spoly(basis[i], basis[j])
            r = self._nf(s, basis)
            if r:
                add(r)
        # minimalize and interreduce
        items = [b for b in basis]
        minimal = []
        for idx, (lt, lc, g) in enumerate(items):
            dominated = False
            for jdx, (lt2, _, _) in enumerate(items):
                if jdx == idx or lt2[0] != lt[0]:
                    continue
                if m_divides(lt2[1], lt[1]) and (lt2 != lt or jdx < idx):
                    dominated = True
                    break
            if not dominated:
                minimal.append((lt, lc, g))
        reduced = []
        for idx, (lt, lc, g) in enumerate(minimal):
            others = minimal[:idx] + minimal[idx + 1:]
            tail = dict(g)
            del tail[lt]
            r = self._nf(tail, others)
            r[lt] = ONE
            reduced.append((lt, ONE, r))
        reduced.sort(key=lambda b: self.tkey(b[0]))
        self.basis = reduced
        self.elems = [b[2] for b in reduced]

    # -- public API

    def reduce(self, v):
        return self._nf(v, self.basis)

    def contains(self, v):
        return not self.reduce(v)

    def lead_terms(self):
        return [b[0] for b in self.basis]

    def is_unit(self):
        """True if the submodule is the whole free module."""
        for pos in range(self.rank):
            zero = (0,) * self.ring.n
            if not any(lt == (pos, zero) for lt in self.lead_terms()):
                return False
        return True

    def standard_monomials(self, pos, max_degree):
        leads = [lt[1] for lt in self.lead_terms() if lt[0] == pos]
        out = []
        for m in monomials_up_to(self.ring.n, max_degree):
            if not any(m_divides(l, m) for l in leads):
                out.append(m)
        return out

    def is_finite_dimensional(self):
        n = self.ring.n
        for pos in range(self.rank):
            leads = [lt[1] for lt in self.lead_terms() if lt[0] == pos]
            for i in range(n):
                if not any(l[i] > 0 and sum(l) == l[i] for l in leads):
                    if (0,) * n not in leads:
                        return False
        return True

    def q_dimension(self):
        """Dimension over Q of R^rank / M, or None when infinite."""
        if not self.is_finite_dimensional():
            return None
        total = 0
        for pos in range(self.rank):
            leads = [lt[1] for lt in self.lead_terms() if lt[0] == pos]
            if (0,) * self.ring.n in leads:
                continue
            bound = [0] * self.ring.n
            for l in leads:
                for i in range(self.ring.n):
                    if sum(l) == l[i] and l[i] > 0:
                        bound[i] = l[i] if bound[i] == 0 else min(bound[i], l[i])
            total += _count_box(leads, bound)
        return total

    def standard_basis(self):
        """All standard terms (pos, monomial) when finite dimensional."""
        if not self.is_finite_dimensional():
            raise ValueError("quotient is not finite dimensional")
        out = []
        for pos in range(self.rank):
            leads = [lt[1] for lt in self.lead_terms() if lt[0] == pos]
            if (0,) * self.ring.n in leads:
                continue
            bound = [0] * self.ring.n
            for l in leads:
                for i in range(self.ring.n):
                    if sum(l) == l[i] and l[i] > 0:
                        bound[i] = l[i] if bound[i] == 0 else min(bound[i], l[i])
            for m in _box(bound):
                if not any(m_divides(l, m) for l in leads):
                    out.append((pos, m))
        out.sort(key=self.tkey)
        return out


def _box(bound):
    out = [()]
    for b in bound:
        out = [m + (e,) for m in out for e in range(b)]
    return out


def _count_box(leads, bound):
    return sum(1 for m in _box(bound) if not any(m_divides(l, m) for l in leads))


def monomials_up_to(n, d):
    out = []
    for k in range(d + 1):
        out.extend(monomials_of_degree(n, k))
    return out


def monomials_of_degree(n, d):
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    out = []
    for e in range(d, -1, -1):
        for rest in monomials_of_degree(n - 1, d - e):
            out.append((e,) + rest)
    return out


# ---------------------------------------------------------------- ideals

def poly_vec(p):
    return {(0, m): c for m, c in p.items()}


def vec_poly(v):
    return {m: c for (_, m), c in v.items()}


def ideal_gb(ring, polys):
    return GB(ring, 1, [poly_vec(p) for p in polys])


def buchberger(ring, polys):
    """Reduced Groebner basis (list of monic polynomials) of an ideal."""
    return [vec_poly(g) for g in ideal_gb(ring, polys).elems]


def normal_form(ring, p, basis_polys):
    """Normal form of p modulo the ideal generated by basis_polys."""
    return vec_poly(ideal_gb(ring, basis_polys).reduce(poly_vec(p)))


class Ideal:
    """An ideal of a PolyRing with a cached reduced Groebner basis."""

    def __init__(self, ring, gens):
        self.ring = ring
        self.gens = [dict(g) for g in gens if g]
        self._gb = None

    @property
    def gb(self):
        if self._gb is None:
            self._gb = ideal_gb(self.ring, self.gens)
        return self._gb

    def basis(self):
        return [vec_poly(g) for g in self.gb.elems]

    def reduce(self, p):
        if not self.gens:
            return dict(p)
        return vec_poly(self.gb.reduce(poly_vec(p)))

    def contains(self, p):
        return not self.reduce(p)

    def is_unit(self):
        return bool(self.gens) and self.gb.is_unit()

    def equals(self, other):
        return all(other.contains(g) for g in self.gens) and all(self.contains(g) for g in other.gens)

    def q_dimension(self):
        if not self.gens:
            return 0 if self.ring.n == 0 else None
        return self.gb.q_dimension()

    def __repr__(self):
        return "Ideal(%s)" % ", ".join(poly_str(g, self.ring.names) for g in self.basis())


# ---------------------------------------------------------------- modules

class AugmentedGB:
    """Groebner basis of (g_j, e_j) in R^(r+m) for generators g_1..g_m of R^r.

    Gives membership with cofactors (lift) and the syzygy module at once.
    """

    def __init__(self, ring, rank, gens):
        self.ring = ring
        self.rank = rank
        self.m = len(gens)
        aug = []
        for j, g in enumerate(gens):
            v = dict(g)
            v[(rank + j, (0,) * ring.n)] = ONE
            aug.append(v)
        self.gb = GB(ring, rank + self.m, aug)

    def syzygies(self):
        out = []
        r = self.rank
        for g in self.gb.elems:
            lt = max(g, key=self.gb.tkey)
            if lt[0] >= r:
                out.append({(p - r, m): c for (p, m), c in g.items()})
        return out

    def lift(self, v):
        """Cofactors a with v = sum a_j g_j, or None if v is not in the span."""
        red = self.gb.reduce(v)
        if any(p < self.rank for (p, _) in red):
            return None
        return {(p - self.rank, m): -c for (p, m), c in red.items()}

    def reduce(self, v):
        red = self.gb.reduce(v)
        return {k: c for k, c in red.items() if k[0] < self.rank}


def syzygies(ring, columns, rank):
    """Generators of the kernel of R^m -> R^rank given by the column vectors.

    Zero columns contribute unit syzygies.
    """
    if not columns:
        return []
    return AugmentedGB(ring, rank, columns).syzygies()


def module_is_zero(ring, rank, relations):
    """Is R^rank / (relations) the zero module?"""
    if rank == 0:
        return True
    gb = GB(ring, rank, relations)
    return gb.is_unit()


def matrix_columns(ring, rows):
    """Column vectors of a matrix given as a list of rows of polynomials."""
    if not rows:
        return []
    ncols = len(rows[0])
    cols = []
    for j in range(ncols):
        cols.append(v_from_polys([rows[i][j] for i in range(len(rows))]))
    return cols


def apply_columns(cols, coeffs):
    """sum_j coeffs[j] * cols[j] where coeffs is a vector indexed by j."""
    r = {}
    polys = {}
    for (j, m), c in coeffs.items():
        polys.setdefault(j, {})[m] = c
    for j, p in polys.items():
        r = p_add(r, v_scale_poly(cols[j], p))
    return r


class FPModule:
    """A finitely presented module R^rank / (relations).

    ``ambient`` optionally records, for each generator, a vector in some
    free module the presented module was cut out of.
    """

    def __init__(self, ring, rank, relations, ambient=None, ambient_rank=None):
        self.ring = ring
        self.rank = rank
        self.relations = [dict(r) for r in relations if r]
        self.ambient = ambient
        self.ambient_rank = ambient_rank
        self._gb = None

    @property
    def gb(self):
        if self._gb is None:
            self._gb = GB(self.ring, self.rank, self.relations)
        return self._gb

    def is_zero(self):
        if self.rank == 0:
            return True
        return self.gb.is_unit()

    def q_dimension(self):
        if self.rank == 0:
            return 0
        if not self.relations:
            return self.rank if self.ring.n == 0 else None
        return self.gb.q_dimension()

    def contains_relation(self, v):
        return self.gb.contains(v) if self.relations else not v

    def pruned(self):
        """Equivalent presentation after removing generators killed by unit entries."""
        rank = self.rank
        rels = [dict(r) for r in self.relations]
        amb = list(self.ambient) if self.ambient is not None else None
        alive = list(range(rank))
        changed = True
        while changed:
            changed = False
            for ri, rel in enumerate(rels):
                pivot = None
                for (p, m), c in rel.items():
                    if not any(m):
                        if all(k[0] != p or k[1] == m for k in rel):
                            pivot = (p, c)
                            break
                if pivot is None:
                    continue
                p, c = pivot
                # e_p = -(1/c) * (rel - c e_p); substitute in other relations
                tail = {k: -v / c for k, v in rel.items() if k[0] != p}
                new_rels = []
                for rj, other in enumerate(rels):
                    if rj == ri:
                        continue
                    coeff = {m: v for (q, m), v in other.items() if q == p}
                    rest = {k: v for k, v in other.items() if k[0] != p}
                    if coeff:
                        rest = p_add(rest, v_scale_poly(tail, coeff))
                    if rest:
                        new_rels.append(rest)
                rels = new_rels
                alive.remove(p)
                changed = True
                break
        remap = {old: new for new, old in enumerate(alive)}
        rels2 = [{(remap[p], m): c for (p, m), c in r.items()} for r in rels]
        out = FPModule(self.ring, len(alive), rels2,
                       ambient=[amb[i] for i in alive] if amb is not None else None,
                       ambient_rank=self.ambient_rank)
        if out.relations:
            gb = out.gb
            out = FPModule(self.ring, out.rank, gb.elems, ambient=out.ambient, ambient_rank=out.ambient_rank)
        return out

    def free_rank(self):
        """Rank if the pruned presentation has no relations, else None."""
        pr = self.pruned()
        if not pr.relations:
            return pr.rank
        return None

    def relation_strings(self):
        names = self.ring.names
        out = []
        for r in self.relations:
            polys = v_to_polys(r, self.rank)
            out.append([poly_str(p, names, self.ring.order) for p in polys])
        return out

    def __repr__(self):
        return "FPModule(rank=%d, relations=%s)" % (self.rank, self.relation_strings())


def homology_module(ring, d_in, d_out, rank, ideal=()):
    """Presentation of ker(d_out) / im(d_in) on the free module R^rank.

    d_in: list of column vectors in R^rank (image of the incoming map).
    d_out: (columns, target_rank) of the outgoing map R^rank -> R^target.
    ideal: polynomials J; the computation happens over R/J.
    """
    out_cols, out_rank = d_out
    units = [{(i, (0,) * ring.n): ONE} for i in range(rank)]
    return subquotient_homology(ring, units, [], out_cols, out_rank, [], list(d_in), ideal, rank)


def subquotient_kernel(ring, S, dS, tgt_rank, R_tgt, ideal):
    """Generators of {s in span(S) : d s in R_tgt + J F_tgt}."""
    ideal = [g for g in ideal if g]
    J_tgt = [{(i, m): c for m, c in g.items()} for i in range(tgt_rank) for g in ideal]
    rel_tgt = [r for r in R_tgt if r] + J_tgt
    if tgt_rank == 0 or all(not v for v in dS):
        return [dict(s) for s in S if s]
    cols = list(dS) + rel_tgt
    syz = syzygies(ring, cols, tgt_rank)
    a = len(S)
    K = []
    for z in syz:
        coeff = {(p, m): c for (p, m), c in z.items() if p < a}
        if coeff:
            k = apply_columns(S, coeff)
            if k:
                K.append(k)
    return K


def present_quotient(ring, K, B, rank):
    """Presentation of (span K + span B) / span B, generators K."""
    K = [k for k in K if k]
    B = [b for b in B if b]
    if not K:
        return FPModule(ring, 0, [], ambient=[], ambient_rank=rank)
    t = len(K)
    syz = syzygies(ring, K + B, rank)
    rels = []
    for z in syz:
        c = {(p, m): v for (p, m), v in z.items() if p < t}
        if c:
            rels.append(c)
    M = FPModule(ring, t, rels, ambient=K, ambient_rank=rank)
    return M.pruned()


def subquotient_homology(ring, S, R, dS, tgt_rank, R_tgt, B_in, ideal, rank):
    """Homology at a subquotient piece.

    S: generators (vectors in R^rank) of the piece, R: its relations.
    dS: images d(s) in R^tgt_rank for s in S.  R_tgt: relations of the
    target piece.  B_in: image of the incoming differential.  Everything
    is computed modulo ideal * free module.
    """
    ideal = [g for g in ideal if g]
    K = subquotient_kernel(ring, S, dS, tgt_rank, R_tgt, ideal)
    J_src = [{(i, m): c for m, c in g.items()} for i in range(rank) for g in ideal]
    B = [b for b in B_in if b] + [r for r in R if r] + J_src
    return present_quotient(ring, K, B, rank)


def is_zero_quotient(ring, K, B, rank):
    """Is span(K) contained in span(B) inside R^rank?"""
    K = [k for k in K if k]
    if not K:
        return True
    if not B:
        return False
    gb = GB(ring, rank, B)
    return all(gb.contains(k) for k in K)


def map_is_iso(ring, images, source_relations, source_rank, K, B, rank):
    """Decide whether R^t/rel -> span(K)/span(B), e_j -> images[j], is an isomorphism.

    Returns (surjective, injective).
    """
    B = [b for b in B if b]
    span = [v for v in images if v] + B
    if K:
        if not span:
            surj = all(not k for k in K)
        else:
            gb = GB(ring, rank, span)
            surj = all(gb.contains(k) for k in K)
    else:
        surj = True
    if source_rank == 0:
        return surj, True
    cols = list(images) + B
    if all(not v for v in cols):
        syz = [{(j, (0,) * ring.n): ONE} for j in range(source_rank)]
    else:
        syz = syzygies(ring, cols, rank)
    pre = []
    for z in syz:
        c = {(p, m): v for (p, m), v in z.items() if p < source_rank}
        if c:
            pre.append(c)
    if not pre:
        return surj, True
    rels = [r for r in source_relations if r]
    if not rels:
        return surj, False
    gb = GB(ring, source_rank, rels)
    inj = all(gb.contains(c) for c in pre)
    return surj, inj


# ---------------------------------------------------------------- ring maps

def eliminate(ring, polys, first_block):
    """Groebner basis w.r.t. an order eliminating the first ``first_block`` variables."""
    order = MonomialOrder("block", [first_block, ring.n - first_block]) if 0 < first_block < ring.n else ring.order
    r2 = PolyRing(ring.names, order)
    return r2, buchberger(r2, polys)


def ring_map_is_iso(src_names, src_ideal, tgt_names, tgt_ideal, images):
    """Decide whether phi: Q[a]/I -> Q[b]/J, a_i -> images[i] (polys in b), is an isomorphism.

    Returns a dict with keys 'well_defined', 'surjective', 'injective',
    'inverse' (list of polys in a giving preimages of the b variables, or None).
    """
    na, nb = len(src_names), len(tgt_names)
    names = tuple("@b%d" % i for i in range(nb)) + tuple("@a%d" % i for i in range(na))
    big = PolyRing(names, MonomialOrder("block", [nb, na]) if nb and na else None)
    n = nb + na

    def from_b(p):
        return {m + (0,) * na: c for m, c in p.items()}

    def from_a(p):
        return {(0,) * nb + m: c for m, c in p.items()}

    tgt_ring = PolyRing(tgt_names)
    src_ring = PolyRing(src_names)
    J = Ideal(tgt_ring, tgt_ideal)
    I = Ideal(src_ring, src_ideal)
    result = {"well_defined": True, "surjective": False, "injective": False, "inverse": None}
    for g in src_ideal:
        if not J.contains(p_subs(g, images, nb)):
            result["well_defined"] = False
            return result
    gens = [from_b(g) for g in tgt_ideal]
    for i in range(na):
        e = [0] * n
        e[nb + i] = 1
        gens.append(p_sub({tuple(e): ONE}, from_b(images[i])))
    G = ideal_gb(big, gens)
    inverse = []
    surj = True
    for j in range(nb):
        e = [0] * n
        e[j] = 1
        r = vec_poly(G.reduce({(0, tuple(e)): ONE}))
        if any(any(m[:nb]) for m in r):
            surj = False
            break
        inverse.append({m[nb:]: c for m, c in r.items()})
    result["surjective"] = surj
    if surj:
        result["inverse"] = inverse
    inj = True
    for g in G.elems:
        p = vec_poly(g)
        if all(not any(m[:nb]) for m in p):
            q = {m[nb:]: c for m, c in p.items()}
            if not I.contains(q):
                inj = False
                break
    result["injective"] = inj
    return result


def unit_inverse(names, ideal, g):
    """An inverse of g in Q[names]/ideal, or None if g is not a unit."""
    n = len(names)
    big = PolyRing(("@z",) + tuple(names), MonomialOrder("block", [1, n]) if n else None)
    gens = [{(0,) + m: c for m, c in p.items()} for p in ideal]
    gz = {(1,) + m: c for m, c in g.items()}
    gens.append(p_sub(gz, {(0,) * (n + 1): ONE}))
    G = ideal_gb(big, gens)
    r = vec_poly(G.reduce({(0, (1,) + (0,) * n): ONE}))
    if any(m[0] for m in r):
        return None
    if G.is_unit():
        return None
    return {m[1:]: c for m, c in r.items()}
