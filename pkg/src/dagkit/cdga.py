"""Semifree commutative dg-algebras in nonnegative homological degrees.

A ``SemifreeCdga`` is A_0[positive generators] where A_0 is a polynomial
ring in the degree-0 generators, optionally modulo a base ideal J (so the
algebra is semifree over the discrete ring A_0/J).  Each A_i is a free
A_0-module on the monomials of degree i in the positive generators, which
turns every homological question into a Groebner computation over A_0.
"""

from gmpy2 import mpq

from .complexes import ComplexMap, ModuleComplex, Piece, apply_matrix, cone
from .errors import DegreeError, NotSquareZeroError, UndecidableError
from .gca import Derivation, FreeGCA, Generator, GradedElement, monomial_basis
from .groebner import (
    GB,
    FPModule,
    Ideal,
    MonomialOrder,
    buchberger,
    ideal_gb,
    map_is_iso,
    poly_vec,
    present_quotient,
    subquotient_kernel,
    vec_poly,
)
from .poly import ONE, PolyRing, p_add, p_subs, p_sub, poly_str, v_scale_poly, v_to_polys


class Validation:
    """Outcome of a structural check: ok flag plus the first offending item."""

    def __init__(self, ok, item=None, message="", value=None):
        self.ok = ok
        self.item = item
        self.message = message
        self.value = value

    def __bool__(self):
        return self.ok

    def to_dict(self):
        d = {"ok": self.ok}
        if not self.ok:
            d["item"] = self.item
            d["message"] = self.message
            if self.value is not None:
                d["value"] = str(self.value)
        return d

    def __repr__(self):
        if self.ok:
            return "Validation(ok)"
        return "Validation(failed at %r: %s)" % (self.item, self.message)


def _degree0_names(gens):
    return [g.name for g in gens if g.degree == 0]


class SemifreeCdga:
    """A_0[x_1, x_2, ...] with a degree -1 derivation, over A_0 / J."""

    def __init__(self, gens, diff=None, base_ideal=(), name=None):
        gens = [g if isinstance(g, Generator) else Generator(*g) for g in gens]
        self.name = name
        self.alg = FreeGCA(gens)
        self.gens = self.alg.gens
        diff = diff or {}
        for k in diff:
            if k not in self.alg.index:
                raise DegreeError("differential given for unknown generator %r" % k)
        self.delta = Derivation(self.alg, diff, shift=-1)
        self.zero_idx = tuple(i for i, g in enumerate(gens) if g.degree == 0)
        self.pos_idx = tuple(i for i, g in enumerate(gens) if g.degree > 0)
        self.ring = PolyRing([gens[i].name for i in self.zero_idx])
        self.base_ideal = []
        for p in base_ideal:
            if isinstance(p, str):
                p = self.ring.parse(p)
            elif isinstance(p, GradedElement):
                p = self.elem_to_poly(p)
            if p:
                self.base_ideal.append(p)
        self._basis = {}
        self._dcols = {}

    # ------------------------------------------------------------ basics
    def __repr__(self):
        return "SemifreeCdga(%s)" % (self.name or ", ".join("%s:%d" % (g.name, g.degree) for g in self.gens))

    def gen(self, name):
        return self.alg.gen(name)

    def parse(self, text):
        return self.alg.parse(text)

    def d(self, x):
        if isinstance(x, str):
            x = self.parse(x)
        return self.delta(x)

    @property
    def positive_generators(self):
        return [self.gens[i] for i in self.pos_idx]

    def has_even_positive(self):
        return any(self.gens[i].degree % 2 == 0 for i in self.pos_idx)

    def top_degree(self):
        """Largest degree with A_i != 0, or None if unbounded."""
        if self.has_even_positive():
            return None
        return sum(self.gens[i].degree for i in self.pos_idx)

    def default_max_degree(self):
        return max([g.degree for g in self.gens] + [0]) + 2

    def basis(self, i):
        b = self._basis.get(i)
        if b is None:
            if i < 0:
                b = []
            else:
                b = monomial_basis(self.alg, i)
            self._basis[i] = (b, {m: k for k, m in enumerate(b)})
            b = self._basis[i]
        return b[0]

    def basis_index(self, i):
        self.basis(i)
        return self._basis[i][1]

    def rank(self, i):
        return len(self.basis(i))

    # ------------------------------------------------- element <-> vector
    def split(self, m):
        poly = tuple(m[i] for i in self.zero_idx)
        mono = tuple(0 if i in self.zero_idx_set else e for i, e in enumerate(m))
        return poly, mono

    @property
    def zero_idx_set(self):
        s = getattr(self, "_zset", None)
        if s is None:
            s = self._zset = frozenset(self.zero_idx)
        return s

    def to_vector(self, x, i):
        """Coordinates of a degree-i element over A_0."""
        idx = self.basis_index(i)
        v = {}
        for m, c in x.terms.items():
            poly, mono = self.split(m)
            if mono not in idx:
                raise DegreeError("term %s is not in degree %d" % (self.alg.fmt_mono(m), i))
            v[(idx[mono], poly)] = c
        return v

    def from_vector(self, v, i):
        b = self.basis(i)
        terms = {}
        for (p, e), c in v.items():
            m = list(b[p])
            for k, j in enumerate(self.zero_idx):
                m[j] += e[k]
            terms[tuple(m)] = terms.get(tuple(m), 0) + c
        return GradedElement(self.alg, terms)

    def poly_to_elem(self, p):
        terms = {}
        for e, c in p.items():
            m = [0] * self.alg.n
            for k, j in enumerate(self.zero_idx):
                m[j] = e[k]
            terms[tuple(m)] = c
        return GradedElement(self.alg, terms)

    def elem_to_poly(self, x):
        out = {}
        for m, c in x.terms.items():
            poly, mono = self.split(m)
            if any(mono):
                raise DegreeError("element %s is not of degree 0" % x)
            out[poly] = c
        return out

    def is_zero_mod_base(self, x):
        """Is x zero in A (i.e. all coefficients in the base ideal)?"""
        if not x.terms:
            return True
        if not self.base_ideal:
            return False
        I = self.base_ideal_obj()
        per = {}
        for m, c in x.terms.items():
            poly, mono = self.split(m)
            per.setdefault(mono, {})[poly] = c
        return all(I.contains(p) for p in per.values())

    def base_ideal_obj(self):
        I = getattr(self, "_base_ideal_obj", None)
        if I is None:
            I = self._base_ideal_obj = Ideal(self.ring, self.base_ideal)
        return I

    def reduce(self, x):
        """Normal form of x modulo the base ideal (coefficientwise)."""
        if not self.base_ideal:
            return x
        I = self.base_ideal_obj()
        per = {}
        for m, c in x.terms.items():
            poly, mono = self.split(m)
            per.setdefault(mono, {})[poly] = c
        terms = {}
        for mono, p in per.items():
            for e, c in I.reduce(p).items():
                m = list(mono)
                for k, j in enumerate(self.zero_idx):
                    m[j] = e[k]
                terms[tuple(m)] = c
        return GradedElement(self.alg, terms)

    # ---------------------------------------------------------- checks
    def validate(self):
        for g in self.gens:
            if g.weight:
                return Validation(False, g.name, "generators of a cdga carry no form weight")
        for i, g in enumerate(self.gens):
            dg = self.delta.on_generator(i)
            if g.degree == 0:
                if dg:
                    return Validation(False, g.name, "degree-0 generator has nonzero differential", dg)
                continue
            if dg and (not dg.is_homogeneous() or dg.degree != g.degree - 1):
                return Validation(False, g.name, "differential of %s must have degree %d" % (g.name, g.degree - 1), dg)
        for i, g in enumerate(self.gens):
            dg = self.delta.on_generator(i)
            if not dg:
                continue
            dd = self.delta(dg)
            if not self.is_zero_mod_base(dd):
                return Validation(False, g.name, "d^2(%s) is nonzero" % g.name, self.reduce(dd))
        return Validation(True)

    def check_degrees(self):
        v = self.validate()
        if not v.ok and "degree" in v.message:
            raise DegreeError("%s: %s" % (v.item, v.message))
        return v

    # ---------------------------------------------------- module complex
    def d_columns(self, i):
        cols = self._dcols.get(i)
        if cols is None:
            cols = []
            if i > 0:
                for m in self.basis(i):
                    dm = self.delta.on_monomial(m)
                    cols.append(self.to_vector(dm, i - 1) if dm else {})
            else:
                cols = [{} for _ in self.basis(i)]
            self._dcols[i] = cols
        return cols

    def module_complex(self, max_degree):
        pieces = {}
        diffs = {}
        for i in range(0, max_degree + 2):
            pieces[i] = Piece(self.rank(i))
            diffs[i] = self.d_columns(i)
        return ModuleComplex(self.ring, pieces, diffs, self.base_ideal)

    def h0_ideal(self):
        """Generators of the ideal with H_0 = A_0 / ideal (reduced Groebner basis)."""
        gens = list(self.base_ideal)
        for m in self.basis(1):
            dm = self.delta.on_monomial(m)
            if dm:
                gens.append(self.elem_to_poly(dm))
        return buchberger(self.ring, gens) if gens else []

    def homology(self, i, max_degree=None):
        if i < 0:
            return FPModule(self.ring, 0, [])
        C = self.module_complex(i)
        return C.homology(i)

    def homology_is_zero(self, i):
        return self.module_complex(i).homology_is_zero(i)

    def homology_degree_bound(self, max_degree=None):
        top = self.top_degree()
        if max_degree is not None:
            return max_degree if top is None else min(max_degree, top)
        return top if top is not None else self.default_max_degree()

    def homology_report(self, max_degree=None):
        D = self.homology_degree_bound(max_degree)
        out = {"name": self.name, "max_degree": D, "degrees": {}}
        for i in range(0, D + 1):
            H = self.homology(i)
            entry = {
                "ambient_rank": self.rank(i),
                "generators": [str(self.from_vector(v, i)) for v in (H.ambient or [])],
                "relations": H.relation_strings(),
                "is_zero": H.is_zero(),
            }
            fr = H.free_rank()
            entry["free_rank"] = fr
            qd = H.q_dimension() if H.rank else 0
            entry["q_dimension"] = qd
            if i == 0:
                entry["ring_vars"] = list(self.ring.names)
                entry["ideal_gens"] = [poly_str(g, self.ring.names) for g in self.h0_ideal()]
            out["degrees"][str(i)] = entry
        return out

    def h0(self):
        """H_0 as a discrete algebra."""
        return DiscreteAlgebra(self.ring.names, self.h0_ideal(), name=(self.name or "A") + "_h0")

    def is_discrete(self):
        return not self.pos_idx


class DiscreteAlgebra(SemifreeCdga):
    """Q[vars] / ideal, concentrated in degree 0."""

    def __init__(self, names, ideal=(), name=None):
        super().__init__([(v, 0) for v in names], {}, ideal, name=name)

    def __repr__(self):
        return "DiscreteAlgebra(%s / %s)" % (list(self.ring.names), [self.ring.fmt(g) for g in self.base_ideal])


def polynomial_ring(names, name=None):
    return DiscreteAlgebra(names, (), name=name)


# -------------------------------------------------------------- morphisms

class CdgaMorphism:
    """A morphism of cdgas determined by generator images (missing means 0)."""

    def __init__(self, source, target, images, name=None):
        self.source = source
        self.target = target
        self.name = name
        self.images = {}
        for g in source.gens:
            v = images.get(g.name, 0)
            if isinstance(v, str):
                v = target.parse(v)
            elif not isinstance(v, GradedElement):
                v = target.alg.const(v)
            self.images[g.name] = v
        self._cache = {}

    def on_monomial(self, m):
        r = self._cache.get(m)
        if r is None:
            r = self.target.alg.one()
            for i, e in enumerate(m):
                for _ in range(e):
                    r = r * self.images[self.source.alg.names[i]]
            self._cache[m] = r
        return r

    def __call__(self, x):
        if isinstance(x, str):
            x = self.source.parse(x)
        r = self.target.alg.zero()
        for m, c in x.terms.items():
            r = r + self.on_monomial(m).scale(c)
        return r

    def ring_images(self):
        """Images of the degree-0 source generators as polynomials of the target ring."""
        out = []
        for i in self.source.zero_idx:
            v = self.images[self.source.alg.names[i]]
            out.append(self.target.elem_to_poly(v))
        return out

    def map_poly(self, p):
        return p_subs(p, self.ring_images(), self.target.ring.n)

    def validate(self):
        S, T = self.source, self.target
        for g in S.gens:
            v = self.images[g.name]
            if v and (not v.is_homogeneous() or v.degree != g.degree):
                return Validation(False, g.name, "image of %s must have degree %d" % (g.name, g.degree), v)
        for p in S.base_ideal:
            q = self.map_poly(p)
            if q and not T.base_ideal_obj().contains(q):
                return Validation(False, poly_str(p, S.ring.names), "base ideal is not mapped into the target ideal")
        for i, g in enumerate(S.gens):
            lhs = self(S.delta.on_generator(i))
            rhs = T.delta(self.images[g.name])
            if not T.is_zero_mod_base(lhs - rhs):
                return Validation(False, g.name, "map does not commute with the differential at %s" % g.name, lhs - rhs)
        return Validation(True)

    def columns(self, i):
        """f on the A_0-basis of source degree i, as target vectors over B_0."""
        out = []
        for m in self.source.basis(i):
            y = self.on_monomial(m)
            out.append(self.target.to_vector(y, i) if y else {})
        return out

    def compose(self, other):
        """self o other."""
        imgs = {g.name: self(other.images[g.name]) for g in other.source.gens}
        return CdgaMorphism(other.source, self.target, imgs)

    def apply_vector(self, v, i):
        """Image of an A_0-vector of source degree i (coefficients mapped by the ring map)."""
        cols = self.columns(i)
        imgs = self.ring_images()
        n = self.target.ring.n
        out = {}
        for (p, e), c in v.items():
            coeff = p_subs({e: c}, imgs, n)
            out = p_add(out, v_scale_poly(cols[p], coeff))
        return out


def identity_morphism(A):
    return CdgaMorphism(A, A, {g.name: A.gen(g.name) for g in A.gens})


def ring_pullback(source_names, source_ideal, target_names, target_ideal, images):
    """Express Q[b]/J as a quotient of Q[a] along a -> images.

    Returns (lifts, kernel) where lifts[j] is a polynomial in a mapping to b_j
    and kernel generates ker(Q[a] -> Q[b]/J); raises UndecidableError if the
    map is not surjective.
    """
    na, nb = len(source_names), len(target_names)
    if tuple(source_names) == tuple(target_names):
        ident = True
        for i, img in enumerate(images):
            e = [0] * nb
            e[i] = 1
            if img != {tuple(e): ONE}:
                ident = False
                break
        if ident:
            return [dict(p) for p in (PolyRing(target_names).gens())], list(target_ideal)
    names = tuple("@b%d" % i for i in range(nb)) + tuple("@a%d" % i for i in range(na))
    big = PolyRing(names, MonomialOrder("block", [nb, na]) if nb and na else None)
    n = nb + na
    gens = [{m + (0,) * na: c for m, c in g.items()} for g in target_ideal]
    for i in range(na):
        e = [0] * n
        e[nb + i] = 1
        gens.append(p_sub({tuple(e): ONE}, {m + (0,) * na: c for m, c in images[i].items()}))
    G = ideal_gb(big, gens)
    lifts = []
    for j in range(nb):
        e = [0] * n
        e[j] = 1
        r = vec_poly(G.reduce({(0, tuple(e)): ONE}))
        if any(any(m[:nb]) for m in r):
            raise UndecidableError("degree-0 ring map is not surjective; quasi-isomorphism test unavailable")
        lifts.append({m[nb:]: c for m, c in r.items()})
    kernel = []
    for g in G.elems:
        p = vec_poly(g)
        if all(not any(m[:nb]) for m in p):
            kernel.append({m[nb:]: c for m, c in p.items()})
    return lifts, kernel


def _translate(v, lifts, n):
    out = {}
    for (p, e), c in v.items():
        q = p_subs({e: c}, lifts, n)
        for m, cc in q.items():
            k = (p, m)
            val = out.get(k, 0) + cc
            if val:
                out[k] = val
            else:
                out.pop(k, None)
    return out


class QuasiIsoReport:
    def __init__(self, ok, degree=None, checked_up_to=None, complete=True, mode=""):
        self.ok = ok
        self.degree = degree
        self.checked_up_to = checked_up_to
        self.complete = complete
        self.mode = mode

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"quasi_iso": self.ok, "failing_degree": self.degree,
                "checked_up_to": self.checked_up_to, "complete": self.complete, "mode": self.mode}

    def __repr__(self):
        return "QuasiIsoReport(%s)" % self.to_dict()


def morphism_cone_data(f, max_degree):
    """Source complex, target complex pulled back to the source ring, and the chain map."""
    S, T = f.source, f.target
    lifts, kernel = ring_pullback(S.ring.names, S.base_ideal, T.ring.names, T.base_ideal, f.ring_images())
    n = S.ring.n
    A = S.module_complex(max_degree)
    pieces = {}
    diffs = {}
    for i in range(0, max_degree + 2):
        r = T.rank(i)
        rels = [{(k, m): c for m, c in g.items()} for k in range(r) for g in kernel]
        pieces[i] = Piece(r, None, rels)
        diffs[i] = [_translate(col, lifts, n) for col in T.d_columns(i)]
    B = ModuleComplex(S.ring, pieces, diffs, S.base_ideal)
    maps = {}
    for i in range(0, max_degree + 2):
        maps[i] = [_translate(col, lifts, n) for col in f.columns(i)]
    return A, B, ComplexMap(A, B, maps)


def is_quasi_iso(f, max_degree=None):
    """Decide whether f induces isomorphisms on homology (via an acyclic cone).

    The degree-0 ring map must be surjective so that the target can be
    viewed over the source ring; otherwise UndecidableError is raised.
    """
    S, T = f.source, f.target
    ts, tt = S.top_degree(), T.top_degree()
    if ts is not None and tt is not None and max_degree is None:
        D = max(ts, tt) + 1
        complete = True
    else:
        D = max_degree if max_degree is not None else max(S.default_max_degree(), T.default_max_degree())
        complete = ts is not None and tt is not None and D >= max(ts, tt) + 1
    same = tuple(S.ring.names) == tuple(T.ring.names)
    A, B, fm = morphism_cone_data(f, D)
    C = cone(fm)
    for i in range(0, D + 1):
        if not C.homology_is_zero(i):
            return QuasiIsoReport(False, i, D, complete, "same-ring" if same else "pullback")
    return QuasiIsoReport(True, None, D, complete, "same-ring" if same else "pullback")


class StrongReport:
    def __init__(self, ok, degree=None, reason="", checked_up_to=None):
        self.ok = ok
        self.degree = degree
        self.reason = reason
        self.checked_up_to = checked_up_to

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"strong": self.ok, "failing_degree": self.degree, "reason": self.reason,
                "checked_up_to": self.checked_up_to}

    def __repr__(self):
        return "StrongReport(%s)" % self.to_dict()


def is_strong(f, max_degree=None):
    """Is H_i(target) = H_i(source) (x)_{H_0 source} H_0 target for all i?

    The natural map is built as a map of finitely presented modules over
    the target degree-0 ring and tested for bijectivity.
    """
    S, T = f.source, f.target
    ts, tt = S.top_degree(), T.top_degree()
    if max_degree is None:
        D = max(ts, tt) if ts is not None and tt is not None else max(S.default_max_degree(), T.default_max_degree())
    else:
        D = max_degree
    ring = T.ring
    h0_T = T.h0_ideal()
    imgs = f.ring_images()
    for i in range(1, D + 1):
        HA = S.homology(i)
        CT = T.module_complex(i)
        KT = CT.cycles(i)
        BT = CT.boundaries(i)
        r = T.rank(i)
        t = HA.rank
        rels = []
        for rel in HA.relations:
            rels.append(_translate(rel, imgs, ring.n))
        for j in range(t):
            for g in h0_T:
                rels.append({(j, m): c for m, c in g.items()})
        images = [f.apply_vector(k, i) for k in (HA.ambient or [])]
        surj, inj = map_is_iso(ring, images, rels, t, KT, BT, r)
        if not surj:
            return StrongReport(False, i, "natural map is not surjective in degree %d" % i, D)
        if not inj:
            return StrongReport(False, i, "natural map is not injective in degree %d" % i, D)
    return StrongReport(True, None, "", D)


def hom_to_discrete(A, B, images):
    """Check that generator images define a cdga map A -> B with B discrete."""
    if not B.is_discrete():
        raise ValueError("target must be discrete")
    f = CdgaMorphism(A, B, images)
    for g in A.gens:
        v = f.images[g.name]
        if g.degree > 0 and v:
            return Validation(False, g.name, "positive-degree generator %s must map to 0" % g.name, v)
        if g.degree == 0 and v and (not v.is_homogeneous() or v.degree != 0):
            return Validation(False, g.name, "image degree mismatch at %s" % g.name, v)
    for p in A.base_ideal:
        if not B.base_ideal_obj().contains(f.map_poly(p)):
            return Validation(False, poly_str(p, A.ring.names), "base ideal not killed")
    for m in A.basis(1):
        dm = A.delta.on_monomial(m)
        if dm:
            q = f.map_poly(A.elem_to_poly(dm))
            if q and not B.base_ideal_obj().contains(q):
                return Validation(False, A.alg.fmt_mono(m), "image of d(%s) is nonzero in the target" % A.alg.fmt_mono(m), B.ring.fmt(q))
    return Validation(True)


# ---------------------------------------------------- truncations & towers

def _unit_cols(r, n):
    return [{(k, (0,) * n): ONE} for k in range(r)]


class TruncatedCdga:
    """A cdga given degreewise as subquotients of the free pieces of a
    semifree cdga, with an explicit product rule."""

    def __init__(self, base, complex_, product, description):
        self.base = base
        self.complex = complex_
        self._product = product
        self.description = description

    def homology(self, i):
        return self.complex.homology(i)

    def homology_is_zero(self, i):
        return self.complex.homology_is_zero(i)

    def product(self, x, y):
        """x, y are (degree, vector); returns (degree, vector)."""
        return self._product(x, y)

    def degrees(self):
        return self.complex.degrees()


def _mul_vectors(A, x, y):
    (i, u), (j, v) = x, y
    a = A.from_vector(u, i)
    b = A.from_vector(v, j)
    return A.to_vector(a * b, i + j) if (a * b) else {}


def _kernel_gens(A, n):
    """Generators of Z_n A = ker(d: A_n -> A_{n-1}) modulo the base ideal."""
    nv = A.ring.n
    S = _unit_cols(A.rank(n), nv)
    if n == 0:
        return S
    dS = A.d_columns(n)
    return subquotient_kernel(A.ring, S, dS, A.rank(n - 1), [], A.base_ideal)


def coskeleton(A, n):
    """cosk_n A: A_i for i <= n, Z_n A in degree n+1 (included into A_n), 0 above."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    nv = A.ring.n
    pieces = {}
    diffs = {}
    for i in range(0, n + 1):
        pieces[i] = Piece(A.rank(i))
        diffs[i] = A.d_columns(i)
    Z = _kernel_gens(A, n)
    pieces[n + 1] = Piece(A.rank(n), Z)
    diffs[n + 1] = _unit_cols(A.rank(n), nv)
    C = ModuleComplex(A.ring, pieces, diffs, A.base_ideal)

    def product(x, y):
        (i, u), (j, v) = x, y
        if i + j <= n:
            return (i + j, _mul_vectors(A, (i, u), (j, v)))
        if i + j == n + 1:
            if i == n + 1 or j == n + 1:
                # degree 0 times an element of Z_n A
                return (n + 1, _mul_vectors(A, (min(i, n), u), (min(j, n), v)))
            w = _mul_vectors(A, x, y)
            dw = apply_matrix(A.d_columns(n + 1), w) if w else {}
            return (n + 1, dw)
        return (i + j, {})

    return TruncatedCdga(A, C, product, "cosk_%d" % n)


def coskeleton_unit(A, n):
    """The canonical map A -> cosk_n A: identity up to degree n, d in degree n+1."""
    C = coskeleton(A, n).complex
    Ac = A.module_complex(n + 1)
    nv = A.ring.n
    maps = {}
    for i in range(0, n + 1):
        maps[i] = _unit_cols(A.rank(i), nv)
    maps[n + 1] = A.d_columns(n + 1)
    maps[n + 2] = [{} for _ in range(A.rank(n + 2))]
    return ComplexMap(Ac, C, maps)


def _image_gens(A, n):
    return [c for c in A.d_columns(n + 1) if c]


def postnikov(A, n):
    """P_n A: A_i for i <= n, b_n A = d(A_{n+1}) in degree n+1, 0 above."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    nv = A.ring.n
    pieces = {}
    diffs = {}
    for i in range(0, n + 1):
        pieces[i] = Piece(A.rank(i))
        diffs[i] = A.d_columns(i)
    pieces[n + 1] = Piece(A.rank(n), _image_gens(A, n))
    diffs[n + 1] = _unit_cols(A.rank(n), nv)
    C = ModuleComplex(A.ring, pieces, diffs, A.base_ideal)

    def product(x, y):
        (i, u), (j, v) = x, y
        if i + j <= n:
            return (i + j, _mul_vectors(A, x, y))
        if i + j == n + 1:
            if i == n + 1 or j == n + 1:
                return (n + 1, _mul_vectors(A, (min(i, n), u), (min(j, n), v)))
            w = _mul_vectors(A, x, y)
            return (n + 1, apply_matrix(A.d_columns(n + 1), w) if w else {})
        return (i + j, {})

    return TruncatedCdga(A, C, product, "P_%d" % n)


def postnikov_middle(A, n):
    """C: A_i for i < n, A_n / b_n A in degree n, 0 above."""
    pieces = {}
    diffs = {}
    for i in range(0, n):
        pieces[i] = Piece(A.rank(i))
        diffs[i] = A.d_columns(i)
    pieces[n] = Piece(A.rank(n), None, _image_gens(A, n))
    diffs[n] = A.d_columns(n)
    C = ModuleComplex(A.ring, pieces, diffs, A.base_ideal)

    def product(x, y):
        (i, u), (j, v) = x, y
        if i + j <= n:
            return (i + j, _mul_vectors(A, x, y))
        return (i + j, {})

    return TruncatedCdga(A, C, product, "C_%d" % n)


def postnikov_tower_map(A, n):
    """P_n A -> P_{n-1} A: identity below n, d_n in degree n, 0 in degree n+1."""
    nv = A.ring.n
    src = postnikov(A, n).complex
    tgt = postnikov(A, n - 1).complex
    maps = {i: _unit_cols(A.rank(i), nv) for i in range(0, n)}
    maps[n] = A.d_columns(n)
    maps[n + 1] = [{} for _ in range(A.rank(n))]
    return ComplexMap(src, tgt, maps)


class PostnikovFactorization:
    """P_n A -> C -> P_{n-1} A with certificates."""

    def __init__(self, A, n):
        if n < 1:
            raise ValueError("the factorization needs n >= 1")
        self.A = A
        self.n = n
        nv = A.ring.n
        self.P = postnikov(A, n)
        self.C = postnikov_middle(A, n)
        self.Pm = postnikov(A, n - 1)
        first = {i: _unit_cols(A.rank(i), nv) for i in range(0, n + 1)}
        first[n + 1] = [{} for _ in range(A.rank(n))]
        self.first = ComplexMap(self.P.complex, self.C.complex, first)
        second = {i: _unit_cols(A.rank(i), nv) for i in range(0, n)}
        second[n] = A.d_columns(n)
        self.second = ComplexMap(self.C.complex, self.Pm.complex, second)

    def kernel_of_second(self):
        """Generators (vectors in A_n) of ker(C_n -> b_{n-1} A)."""
        A, n = self.A, self.n
        S = _unit_cols(A.rank(n), A.ring.n)
        return subquotient_kernel(A.ring, S, A.d_columns(n), A.rank(n - 1), [], A.base_ideal)

    def certify(self):
        A, n = self.A, self.n
        out = {}
        # surjectivity of the first map in positive degrees
        surj = True
        for i in range(1, n + 1):
            Pc = self.C.complex.piece(i)
            imgs = [apply_matrix(self.first.f(i), s) for s in self.P.complex.piece(i).generators(A.ring.n)]
            span = [v for v in imgs if v] + Pc.rels + [{(k, m): c for m, c in g.items()} for k in range(Pc.rank) for g in A.base_ideal]
            if Pc.rank and not span:
                surj = False
                break
            if Pc.rank:
                gb = GB(A.ring, Pc.rank, span)
                if not all(gb.contains(s) for s in Pc.generators(A.ring.n)):
                    surj = False
                    break
        out["first_surjective"] = surj
        Cn = cone(self.first)
        qi = all(Cn.homology_is_zero(i) for i in range(0, n + 3))
        out["first_quasi_iso"] = qi
        K = self.kernel_of_second()
        sq = True
        for a in K:
            for b in K:
                deg, w = self.C.product((n, a), (n, b))
                if deg <= n and w:
                    rels = self.C.complex.piece(deg).rels + [{(k, m): c for m, c in g.items()} for k in range(A.rank(deg)) for g in A.base_ideal]
                    if not rels or not GB(A.ring, A.rank(deg), rels).contains(w):
                        sq = False
        out["kernel_square_zero"] = sq
        # kernel is H_n A placed in degree n
        H = A.homology(n)
        B = _image_gens(A, n) + [{(k, m): c for m, c in g.items()} for k in range(A.rank(n)) for g in A.base_ideal]
        s_, i_ = map_is_iso(A.ring, H.ambient or [], H.relations, H.rank, K, B, A.rank(n))
        out["kernel_is_homology"] = s_ and i_
        out["ok"] = all(out.values())
        return out


# ------------------------------------------------------------ path object

class PathObject:
    """Good truncation of A[t, dt] with t of degree 0 and dt of degree -1.

    The differential preserves the weight w counting t and dt, so the
    object splits into finite pieces: in weight w, degree k is spanned by
    A_k t^w and A_{k+1} t^(w-1) dt.  Degree 0 is cut down to the cycles.
    """

    def __init__(self, A):
        self.A = A

    def _layout(self, w, k):
        A = self.A
        ra = A.rank(k) if k >= 0 else 0
        rb = A.rank(k + 1) if w >= 1 else 0
        return ra, rb

    def weight_piece(self, w, max_degree):
        A = self.A
        nv = A.ring.n
        pieces = {}
        diffs = {}
        for k in range(-1, max_degree + 2):
            ra, rb = self._layout(w, k)
            if k < 0:
                ra = 0
            pieces[k] = Piece(ra + rb)
        for k in range(0, max_degree + 2):
            ra, rb = self._layout(w, k)
            la, lb = self._layout(w, k - 1)
            if k - 1 < 0:
                la = 0
            cols = []
            for j, m in enumerate(A.basis(k)):
                dm = A.d_columns(k)[j] if k > 0 else {}
                col = dict(dm)  # t^w d(m)
                if w >= 1:
                    sign = -1 if k % 2 else 1
                    col[(la + j, (0,) * nv)] = col.get((la + j, (0,) * nv), 0) + sign * w
                cols.append({kk: v for kk, v in col.items() if v})
            for j, m in enumerate(A.basis(k + 1)[:rb]):
                dm = A.d_columns(k + 1)[j]
                cols.append({(la + p, e): c for (p, e), c in dm.items()})
            diffs[k] = cols
        # good truncation: degree 0 becomes the cycles, degree -1 disappears
        C = ModuleComplex(A.ring, pieces, diffs, A.base_ideal)
        Z0 = C.cycles(0)
        pieces[0] = Piece(pieces[0].rank, Z0)
        pieces[-1] = Piece(0)
        diffs[0] = [{} for _ in range(pieces[0].rank)]
        return ModuleComplex(A.ring, pieces, diffs, A.base_ideal)

    def degree0_generators(self, w):
        """Cycle generators of degree 0, weight w, as PathElements."""
        C = self.weight_piece(w, 0)
        return [self.vector_to_element(v, w, 0) for v in C.piece(0).generators(self.A.ring.n)]

    def vector_to_element(self, v, w, k):
        A = self.A
        ra = A.rank(k)
        a_part = {kk: c for kk, c in v.items() if kk[0] < ra}
        b_part = {(p - ra, e): c for (p, e), c in v.items() if p >= ra}
        out = {}
        if a_part:
            out[(w, 0)] = A.from_vector(a_part, k)
        if b_part:
            out[(w - 1, 1)] = A.from_vector(b_part, k + 1)
        return PathElement(self, out)

    def homology(self, i, max_weight):
        return {w: self.weight_piece(w, i).homology(i) for w in range(0, max_weight + 1)}

    def const(self, a):
        return PathElement(self, {(0, 0): a})

    def d(self, x):
        A = self.A
        out = {}
        for (w, e), a in x.parts.items():
            if e == 0:
                da = A.d(a)
                if da:
                    out[(w, 0)] = out.get((w, 0), A.alg.zero()) + da
                if w >= 1:
                    # sum over homogeneous pieces of a for the sign
                    for m, c in a.terms.items():
                        deg = A.alg.mono_degree(m)
                        term = A.alg.monomial(m, c * w * (-1 if deg % 2 else 1))
                        out[(w - 1, 1)] = out.get((w - 1, 1), A.alg.zero()) + term
            else:
                da = A.d(a)
                if da:
                    out[(w, 1)] = out.get((w, 1), A.alg.zero()) + da
        return PathElement(self, {k: v for k, v in out.items() if v})

    def ev(self, x):
        """(a(0), a(1)); dt-terms map to zero."""
        A = self.A
        z = A.alg.zero()
        e0, e1 = z, z
        for (w, e), a in x.parts.items():
            if e:
                continue
            e1 = e1 + a
            if w == 0:
                e0 = e0 + a
        return e0, e1


class PathElement:
    """sum a_w t^w + sum b_w t^w dt with coefficients in A."""

    def __init__(self, P, parts):
        self.P = P
        self.parts = {k: v for k, v in parts.items() if v}

    def __eq__(self, other):
        return self.parts == other.parts

    def __add__(self, other):
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out[k] + v if k in out else v
        return PathElement(self.P, out)

    def __mul__(self, other):
        A = self.P.A
        out = {}
        for (w1, e1), a in self.parts.items():
            for (w2, e2), b in other.parts.items():
                if e1 and e2:
                    continue
                prod = a * b
                if e1:
                    # (a dt) b = (-1)^{|b|} a b dt, with dt odd
                    prod = A.alg.zero()
                    for m, c in b.terms.items():
                        s = -1 if A.alg.mono_parity(m) else 1
                        prod = prod + a * A.alg.monomial(m, c * s)
                k = (w1 + w2, e1 + e2)
                out[k] = out.get(k, A.alg.zero()) + prod
        return PathElement(self.P, out)

    def __repr__(self):
        parts = []
        for (w, e), a in sorted(self.parts.items()):
            parts.append("(%s)*t^%d%s" % (a, w, "*dt" if e else ""))
        return " + ".join(parts) or "0"


def path_object(A):
    return PathObject(A)


# ------------------------------------------------------ square-zero cone

class SquareZeroCone:
    """For a surjection A -> B of discrete algebras with square-zero kernel I:
    B~ = (A <- I) with u: B~ -> B + I[1], and the pullback check."""

    def __init__(self, A, B):
        if tuple(A.ring.names) != tuple(B.ring.names):
            raise ValueError("A and B must be quotients of the same polynomial ring")
        if not A.is_discrete() or not B.is_discrete():
            raise ValueError("square-zero cone expects discrete algebras")
        self.A, self.B = A, B
        ring = A.ring
        JA = A.base_ideal_obj()
        for g in A.base_ideal:
            if not B.base_ideal_obj().contains(g):
                raise ValueError("A -> B is not well defined: %s not in the ideal of B" % ring.fmt(g))
        self.I = [g for g in B.base_ideal if not JA.contains(g)]
        for a in B.base_ideal:
            for b in B.base_ideal:
                from .poly import p_mul
                if not JA.contains(p_mul(a, b)):
                    raise NotSquareZeroError("kernel does not square to zero: %s * %s" % (ring.fmt(a), ring.fmt(b)))
        nv = ring.n
        one = {(0, (0,) * nv): ONE}
        Igens = [poly_vec(g) for g in B.base_ideal]
        self.Btilde = ModuleComplex(ring, {0: Piece(1), 1: Piece(1, Igens)}, {0: [{}], 1: [one]}, A.base_ideal)
        JB_rels = [poly_vec(g) for g in B.base_ideal]
        self.target = ModuleComplex(ring, {0: Piece(1, None, JB_rels), 1: Piece(1, Igens)}, {0: [{}], 1: [{}]}, A.base_ideal)
        self.u = ComplexMap(self.Btilde, self.target, {0: [one], 1: [one]})

    def map_is_realized_quasi_iso(self):
        """A -> B~ (inclusion in degree 0) is a quasi-isomorphism."""
        ring = self.A.ring
        one = {(0, (0,) * ring.n): ONE}
        Ac = ModuleComplex(ring, {0: Piece(1)}, {0: [{}]}, self.A.base_ideal)
        # B~ computes B = A / I in degree 0, so compare with B instead
        Bc = ModuleComplex(ring, {0: Piece(1, None, [poly_vec(g) for g in self.B.base_ideal])}, {0: [{}]}, self.A.base_ideal)
        f = ComplexMap(self.Btilde, Bc, {0: [one], 1: [{}]})
        C = cone(f)
        return all(C.homology_is_zero(i) for i in range(0, 3))

    def pullback(self):
        """Degree 0 and degree 1 of B~ x_{u, B + I[1], 0} B."""
        ring = self.A.ring
        nv = ring.n
        z = (0,) * nv
        # degree 0: pairs (a, b) in A + B with [a] = b
        S = [{(0, z): ONE}, {(1, z): ONE}]
        dS = [{(0, z): ONE}, {(0, z): mpq(-1)}]
        rel_tgt = [poly_vec(g) for g in self.B.base_ideal]
        rels_B = [{(1, m): c for m, c in g.items()} for g in self.B.base_ideal]
        K0 = subquotient_kernel(ring, S, dS, 1, rel_tgt, self.A.base_ideal)
        # degree 1: kernel of u_1 on I
        Igens = [poly_vec(g) for g in self.B.base_ideal]
        K1 = subquotient_kernel(ring, Igens, Igens, 1, [], self.A.base_ideal)
        return K0, rels_B, K1

    def verify(self):
        ring = self.A.ring
        nv = ring.n
        z = (0,) * nv
        K0, rels_B, K1 = self.pullback()
        JA0 = [{(0, m): c for m, c in g.items()} for g in self.A.base_ideal]
        JA1 = [{(1, m): c for m, c in g.items()} for g in self.A.base_ideal]
        P0 = present_quotient(ring, K0, JA0 + JA1 + rels_B, 2)
        # projection to A is an isomorphism
        imgs = [{(0, e): c for (p, e), c in v.items() if p == 0} for v in (P0.ambient or [])]
        imgs = [{(0, e): c for (_, e), c in v.items()} for v in imgs]
        s_, i_ = map_is_iso(ring, imgs, P0.relations, P0.rank, [{(0, z): ONE}], [poly_vec(g) for g in self.A.base_ideal], 1)
        deg1_zero = all(self.A.base_ideal_obj().contains(vec_poly(k)) for k in K1)
        return {"degree0_is_A": s_ and i_, "degree1_zero": deg1_zero, "ok": s_ and i_ and deg1_zero}

    def elementwise_check(self):
        """On a Q-basis of a finite-dimensional A: (a, [a]) lies in the pullback."""
        JA = self.A.base_ideal_obj()
        JB = self.B.base_ideal_obj()
        if not self.A.base_ideal:
            raise ValueError("A must be finite dimensional")
        gb = JA.gb
        basis = gb.standard_basis()
        ring = self.A.ring
        ok = True
        for _, m in basis:
            a = {m: ONE}
            b = JB.reduce(a)
            if JB.reduce(p_sub(a, b)):
                ok = False
        return ok, len(basis)


def square_zero_cone(A, B):
    return SquareZeroCone(A, B)
