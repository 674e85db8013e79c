"""Derived constructions on semifree models.

Derived tensor products, loop spaces and critical loci are built as
explicit semifree cdgas; cotangent complexes are Kaehler differentials of
a semifree model, base-changed to the discrete algebra it resolves.
"""

from gmpy2 import mpq

from .cdga import CdgaMorphism, DiscreteAlgebra, SemifreeCdga
from .complexes import ModuleComplex, Piece
from .errors import UndecidableError
from .gca import Derivation, FreeGCA, Generator, GradedElement
from .groebner import FPModule, homology_module, subquotient_kernel
from .linalg import nullspace, qmatrix, rank as q_rank, solve_in_span
from .poly import ONE, PolyRing, as_q, p_diff, p_eval, p_subs


def _fresh(name, taken):
    while name in taken:
        name = name + "'"
    return name


def _elem_in(alg, x, rename=None):
    """Transport an element to another FreeGCA by generator names."""
    src = x.alg
    idx = []
    for nm in src.names:
        t = rename.get(nm, nm) if rename else nm
        if t not in alg.index:
            raise ValueError("generator %s has no counterpart" % nm)
        idx.append(alg.index[t])
    terms = {}
    for m, c in x.terms.items():
        e = [0] * alg.n
        for i, k in enumerate(m):
            if k:
                e[idx[i]] += k
        # reorder sign for odd generators
        sign = _reorder_sign(src, m, idx, alg)
        terms[tuple(e)] = terms.get(tuple(e), 0) + sign * c
    return GradedElement(alg, terms)


def _reorder_sign(src, m, idx, alg):
    odd_pos = [idx[i] for i in src.odd if m[i]]
    inv = 0
    for a in range(len(odd_pos)):
        for b in range(a + 1, len(odd_pos)):
            if odd_pos[a] > odd_pos[b]:
                inv += 1
    return -1 if inv & 1 else 1


def graded_tensor(A, B, name=None):
    """A (x) B over the common degree-0 variables (identified by name).

    Shared names must be degree-0 generators of both with zero differential.
    The Koszul sign rule is built into the free algebra.
    """
    gens = list(A.gens)
    names = {g.name for g in gens}
    for g in B.gens:
        if g.name in names:
            ga = A.gens[A.alg.index[g.name]]
            if g.degree != 0 or ga.degree != 0:
                raise ValueError("generator %s occurs in both factors" % g.name)
            continue
        gens.append(g)
        names.add(g.name)
    tmp = FreeGCA(gens)
    diff = {}
    for X in (A, B):
        for i, g in enumerate(X.gens):
            dg = X.delta.on_generator(i)
            if dg:
                diff[g.name] = _elem_in(tmp, dg)
    ring_names = [g.name for g in gens if g.degree == 0]
    R = PolyRing(ring_names)
    ideal = []
    for X in (A, B):
        for p in X.base_ideal:
            ideal.append(_poly_in(R, X.ring, p))
    return SemifreeCdga(gens, diff, ideal, name=name)


def _poly_in(R, src_ring, p, rename=None):
    idx = [R.index[rename.get(n, n) if rename else n] for n in src_ring.names]
    out = {}
    for m, c in p.items():
        e = [0] * R.n
        for i, k in enumerate(m):
            e[idx[i]] += k
        out[tuple(e)] = out.get(tuple(e), 0) + c
    return {k: v for k, v in out.items() if v}


def koszul_model(ring_names, seq, base_ideal=(), names=None, name=None):
    """R[e_1..e_k] with d e_i = f_i, over R = Q[ring_names]/base_ideal."""
    R = PolyRing(ring_names)
    seq = [R.parse(f) if isinstance(f, str) else f for f in seq]
    if names is None:
        names = []
        taken = set(ring_names)
        for i in range(len(seq)):
            nm = _fresh("e%d" % (i + 1) if len(seq) > 1 else "e", taken)
            taken.add(nm)
            names.append(nm)
    gens = [(v, 0) for v in ring_names] + [(nm, 1) for nm in names]
    A = SemifreeCdga(gens, {}, base_ideal, name=name)
    diff = {nm: A.poly_to_elem(f) for nm, f in zip(names, seq)}
    return SemifreeCdga(gens, diff, base_ideal, name=name)


def is_regular_koszul(K, max_degree=None):
    """Regularity of the sequence: H_i of the Koszul complex vanishes for i > 0."""
    top = K.top_degree()
    D = top if top is not None else (max_degree or K.default_max_degree())
    for i in range(1, D + 1):
        if not K.homology_is_zero(i):
            return False
    return True


def koszul_quotient_map(K):
    """The augmentation K -> R/(f) killing the odd generators."""
    T = DiscreteAlgebra(K.ring.names, K.h0_ideal())
    images = {g.name: (g.name if g.degree == 0 else "0") for g in K.gens}
    return CdgaMorphism(K, T, images)


def cofibrant_model(A, odd_names=None):
    """A semifree model with no base ideal: A itself or a verified Koszul model."""
    if not A.base_ideal:
        return A
    if not A.is_discrete():
        raise UndecidableError("no semifree model for a cdga with both a base ideal and positive generators")
    names = None
    if odd_names:
        r = len(A.base_ideal)
        taken = set(A.ring.names)
        names = []
        for i in range(r):
            nm = _fresh(odd_names if r == 1 else "%s%d" % (odd_names, i + 1), taken)
            taken.add(nm)
            names.append(nm)
    K = koszul_model(A.ring.names, A.base_ideal, names=names)
    if not is_regular_koszul(K):
        raise UndecidableError("the presentation is not by a regular sequence")
    return K


def localization_model(A, f, y="y", t="t", name=None):
    """A[y, t] with d t = f y - 1, a semifree model of A[1/f]."""
    taken = set(A.alg.names)
    y = _fresh(y, taken)
    taken.add(y)
    t = _fresh(t, taken)
    gens = list(A.gens) + [Generator(y, 0), Generator(t, 1)]
    tmp = FreeGCA(gens)
    if isinstance(f, str):
        f = A.parse(f)
    elif isinstance(f, dict):
        f = A.poly_to_elem(f)
    fe = _elem_in(tmp, f)
    diff = {g.name: _elem_in(tmp, A.delta.on_generator(i)) for i, g in enumerate(A.gens) if A.delta.on_generator(i)}
    diff[t] = fe * tmp.gen(y) - 1
    ring_names = [g.name for g in gens if g.degree == 0]
    R = PolyRing(ring_names)
    ideal = [_poly_in(R, A.ring, p) for p in A.base_ideal]
    return SemifreeCdga(gens, diff, ideal, name=name)


def derived_tensor(A, B, R=None, name=None, simplify=True):
    """A (x)^L_R B, replacing A by a semifree model over R.

    A and B are presented over polynomial rings containing the variables of
    R (identified by name).  A discrete A = R/(f) is replaced by its Koszul
    model, which must be regular; a semifree A is used as it is.
    """
    if R is not None and R.base_ideal:
        raise UndecidableError("derived tensor over a non-polynomial base is not implemented")
    if R is not None:
        missing = [v for v in R.ring.names if v not in A.ring.names or v not in B.ring.names]
        if missing:
            raise ValueError("base variables %s missing from a factor" % ", ".join(missing))
    if A.base_ideal:
        if R is not None and any(v not in R.ring.names for v in A.ring.names):
            raise UndecidableError("left factor must be a quotient of the base ring")
        model = cofibrant_model(A, odd_names="s")
    else:
        model = A
    T = graded_tensor(model, B, name=name)
    return simplify_linear(T) if simplify else T


def _loop_names(A):
    taken = set(A.alg.names)
    gens = A.gens
    if len(gens) == 1:
        names = [_fresh("s", taken)]
    else:
        names = []
        for i in range(len(gens)):
            nm = _fresh("s%d" % (i + 1), taken | set(names))
            names.append(nm)
    return names


def derived_loop_space(A, name=None):
    """L A = A (x)^L_{A (x) A} A for a semifree A over Q.

    Model: A[s v] with deg(s v) = deg(v) + 1 and d(s v) = -s(d v), where s
    is the odd derivation of degree +1 with v -> s v.
    """
    A = cofibrant_model(A)
    snames = _loop_names(A)
    gens = list(A.gens) + [Generator(sn, g.degree + 1) for sn, g in zip(snames, A.gens)]
    tmp = FreeGCA(gens)
    s = Derivation(tmp, {g.name: tmp.gen(sn) for g, sn in zip(A.gens, snames)}, shift=1)
    diff = {}
    for i, g in enumerate(A.gens):
        dg = A.delta.on_generator(i)
        if dg:
            e = _elem_in(tmp, dg)
            diff[g.name] = e
            diff[snames[i]] = -s(e)
    return SemifreeCdga(gens, diff, (), name=name)


def derived_critical_locus(ring_names, f, name=None):
    """R[eta_x] with d eta_x = df/dx, the derived critical locus of f."""
    R = PolyRing(ring_names)
    if isinstance(f, str):
        f = R.parse(f)
    taken = set(ring_names)
    etas = []
    for v in ring_names:
        nm = _fresh("eta_" + v, taken)
        taken.add(nm)
        etas.append(nm)
    gens = [(v, 0) for v in ring_names] + [(e, 1) for e in etas]
    A = SemifreeCdga(gens, {}, ())
    diff = {e: A.poly_to_elem(p_diff(f, i)) for i, e in enumerate(etas)}
    C = SemifreeCdga(gens, diff, (), name=name)
    C.symplectic_pairs = list(zip(ring_names, etas))
    return C


def euler_data(A, max_degree=None):
    """Euler characteristic of homology over Q and virtual dimension."""
    top = A.top_degree()
    D = A.homology_degree_bound(max_degree)
    dims = []
    for i in range(0, D + 1):
        H = A.homology(i)
        dims.append(H.q_dimension() if H.rank else 0)
    chi = None
    if all(d is not None for d in dims):
        chi = sum((-1) ** i * d for i, d in enumerate(dims))
    S = simplify_linear(A)
    vdim = sum((-1) ** g.degree for g in S.gens) - len(S.base_ideal)
    return {"dims": dims, "euler_characteristic": chi, "vdim": vdim,
            "complete": top is not None and D >= top}


def _linear_pivot(p, n):
    """A variable index i with p = c x_i + (terms free of x_i), or None."""
    for i in range(n):
        lin = [m for m in p if m[i]]
        if len(lin) == 1 and lin[0][i] == 1 and sum(lin[0]) == 1:
            return i, lin[0]
    return None


def simplify_linear(A):
    """Eliminate degree-0 variables fixed by a base-ideal relation linear in them.

    A relation c v + q with q free of v is solved for v and substituted into
    the other relations and into the differential.
    """
    while True:
        ring = A.ring
        hit = None
        for k, p in enumerate(A.base_ideal):
            piv = _linear_pivot(p, ring.n)
            if piv is not None:
                hit = (k, piv)
                break
        if hit is None:
            return A
        k, (i, mono) = hit
        p = A.base_ideal[k]
        c = p[mono]
        rest = {m: -v / c for m, v in p.items() if m != mono}
        var = ring.names[i]
        keep = [g for g in A.gens if g.name != var]
        tmp = FreeGCA(keep)
        imgs = {}
        for j, nm in enumerate(ring.names):
            if nm != var:
                imgs[nm] = tmp.gen(nm)
        ri = {}
        for m, v in rest.items():
            ri[m] = v
        sub_elem = tmp.zero()
        for m, v in ri.items():
            term = tmp.const(v)
            for j, e in enumerate(m):
                for _ in range(e):
                    term = term * tmp.gen(ring.names[j])
            sub_elem = sub_elem + term
        imgs[var] = sub_elem
        for g in keep:
            if g.degree > 0:
                imgs[g.name] = tmp.gen(g.name)

        def push(x):
            out = tmp.zero()
            for m, v in x.terms.items():
                term = tmp.const(v)
                for j, e in enumerate(m):
                    for _ in range(e):
                        term = term * imgs[A.alg.names[j]]
                out = out + term
            return out

        diff = {}
        for j, g in enumerate(A.gens):
            if g.name == var:
                continue
            dg = A.delta.on_generator(j)
            if dg:
                diff[g.name] = push(dg)
        ideal = []
        for kk, q in enumerate(A.base_ideal):
            if kk == k:
                continue
            e = push(A.poly_to_elem(q))
            if e:
                ideal.append(e)
        B = SemifreeCdga(keep, diff, (), name=A.name)
        A = SemifreeCdga(keep, diff, [B.elem_to_poly(e) for e in ideal], name=A.name)


# ----------------------------------------------- Kaehler and cotangent

class DgModule:
    """A semifree dg-module over a semifree cdga A.

    ``basis`` is a list of (name, degree); ``diff`` maps a basis name to a
    list of (coefficient, basis name) with coefficients in A, and the
    differential is d(a e) = d(a) e + (-1)^|a| a d(e).
    """

    def __init__(self, A, basis, diff):
        self.A = A
        self.basis = [(n, int(d)) for n, d in basis]
        self.index = {n: i for i, (n, _) in enumerate(self.basis)}
        self.diff = {}
        for n, terms in diff.items():
            out = []
            for c, b in terms:
                if isinstance(c, str):
                    c = A.parse(c)
                if c:
                    out.append((c, b))
            self.diff[n] = out

    def d_basis(self, name):
        return self.diff.get(name, [])

    def piece_basis(self, k):
        out = []
        for j, (n, d) in enumerate(self.basis):
            if k - d >= 0:
                for m in self.A.basis(k - d):
                    out.append((m, j))
        return out

    def module_complex(self, max_degree):
        A = self.A
        nv = A.ring.n
        pieces = {}
        diffs = {}
        idx = {}
        for k in range(0, max_degree + 2):
            b = self.piece_basis(k)
            pieces[k] = Piece(len(b))
            idx[k] = {x: i for i, x in enumerate(b)}
        for k in range(1, max_degree + 2):
            cols = []
            for (m, j) in self.piece_basis(k):
                col = {}
                a = A.alg.monomial(m)
                da = A.d(a)
                if da:
                    for mm, c in da.terms.items():
                        poly, mono = A.split(mm)
                        key = (idx[k - 1][(mono, j)], poly)
                        col[key] = col.get(key, 0) + c
                sign = -1 if A.alg.mono_parity(m) else 1
                for coeff, bname in self.d_basis(self.basis[j][0]):
                    prod = a * coeff
                    jj = self.index[bname]
                    for mm, c in prod.terms.items():
                        poly, mono = A.split(mm)
                        key = (idx[k - 1][(mono, jj)], poly)
                        col[key] = col.get(key, 0) + sign * c
                cols.append({kk: v for kk, v in col.items() if v})
            diffs[k] = cols
        diffs[0] = [{} for _ in range(pieces[0].rank)]
        return ModuleComplex(A.ring, pieces, diffs, A.base_ideal)


def _d_of_monomial(A, m):
    """Kaehler differential of a monomial as {generator index: coefficient element}."""
    alg = A.alg
    out = {}
    n = alg.n
    for i in range(n):
        e = m[i]
        if not e:
            continue
        suffix = tuple(m[j] if j > i else 0 for j in range(n))
        sign = -1 if (alg.is_odd[i] and alg.mono_parity(suffix)) else 1
        rest = list(m)
        rest[i] -= 1
        out[i] = alg.monomial(tuple(rest), sign * e)
    return out


def kaehler_d(A, x):
    """d x = sum_g a_g dg with left coefficients a_g."""
    out = {}
    for m, c in x.terms.items():
        for i, a in _d_of_monomial(A, m).items():
            out[i] = out.get(i, A.alg.zero()) + a.scale(c)
    return {i: a for i, a in out.items() if a}


def kahler_differentials(A, base_vars=()):
    """Omega^1_{A/R} as a DgModule, with R the polynomial ring on base_vars."""
    base = set(base_vars)
    basis = [("d" + g.name, g.degree) for g in A.gens if g.name not in base]
    diff = {}
    for i, g in enumerate(A.gens):
        if g.name in base:
            continue
        dg = A.delta.on_generator(i)
        terms = []
        if dg:
            for j, a in sorted(kaehler_d(A, dg).items()):
                h = A.gens[j]
                if h.name in base:
                    continue
                terms.append((a, "d" + h.name))
        diff["d" + g.name] = terms
    return DgModule(A, basis, diff)


class CotangentPresentation:
    """L_{T/R} as a complex of free T-modules with provenance."""

    def __init__(self, model, base_vars, T, provenance):
        self.model = model
        self.base_vars = list(base_vars)
        self.T = T
        self.provenance = provenance
        self.kahler = kahler_differentials(model, base_vars)

    def basis(self):
        return list(self.kahler.basis)

    def to_T(self, a):
        """Image in T of a degree-0 coefficient of the model (positive terms die)."""
        M = self.model
        out = {}
        for m, c in a.terms.items():
            poly, mono = M.split(m)
            if any(mono):
                continue
            out[poly] = out.get(poly, 0) + c
        p = {k: v for k, v in out.items() if v}
        return _poly_in(self.T.ring, M.ring, p)

    def complex(self):
        """Free T-module complex: degree k has basis the dg with deg g = k."""
        T = self.T
        by_deg = {}
        for j, (n, d) in enumerate(self.kahler.basis):
            by_deg.setdefault(d, []).append(n)
        top = max(by_deg) if by_deg else 0
        pieces = {}
        diffs = {}
        pos = {}
        for k in range(0, top + 2):
            names = by_deg.get(k, [])
            pieces[k] = Piece(len(names))
            pos[k] = {n: i for i, n in enumerate(names)}
        for k in range(0, top + 2):
            cols = []
            for n in by_deg.get(k, []):
                col = {}
                for a, b in self.kahler.d_basis(n):
                    p = self.to_T(a)
                    if k - 1 in pos and b in pos[k - 1]:
                        for m, c in p.items():
                            key = (pos[k - 1][b], m)
                            col[key] = col.get(key, 0) + c
                cols.append({kk: v for kk, v in col.items() if v})
            diffs[k] = cols
        self._by_deg = by_deg
        return ModuleComplex(T.ring, pieces, diffs, T.base_ideal)

    def degrees(self):
        return sorted({d for _, d in self.kahler.basis})

    def homology(self, i):
        return self.complex().homology(i)

    def is_acyclic(self):
        C = self.complex()
        return all(C.homology_is_zero(i) for i in range(0, max(self.degrees() + [0]) + 1))

    def matrices_at(self, point):
        """Differentials evaluated at a Q-point of T: {k: (rows, cols, matrix)}."""
        C = self.complex()
        out = {}
        for k in sorted(C.pieces):
            cols = C.d(k)
            r = C.piece(k - 1).rank
            M = [[mpq(0)] * len(cols) for _ in range(r)]
            for j, col in enumerate(cols):
                for (p, m), c in col.items():
                    M[p][j] += c * _mono_eval(m, point)
            out[k] = M
        return out, C

    def to_dict(self):
        return {"provenance": self.provenance,
                "base": self.base_vars,
                "basis": [[n, d] for n, d in self.kahler.basis],
                "differential": {n: [[str(a), b] for a, b in self.kahler.d_basis(n)] for n, _ in self.kahler.basis}}


def _mono_eval(m, point):
    v = mpq(1)
    for x, e in zip(point, m):
        if e:
            v *= x ** e
    return v


def cotangent_complex(kind, base_vars=(), *, ring_vars=None, relations=None, element=None, model=None, target=None):
    """Cotangent complex of T over R = Q[base_vars] by a structured route.

    kind: 'smooth' (T = R[ring_vars]), 'regular' (T = R[ring_vars]/(relations),
    verified regular), 'localization' (T = R[1/element]), or 'semifree'
    (a user model, T = H_0 of it unless ``target`` is given).
    """
    base_vars = list(base_vars)
    if kind == "smooth":
        names = list(base_vars) + [v for v in (ring_vars or []) if v not in base_vars]
        M = DiscreteAlgebra(names)
        return CotangentPresentation(M, base_vars, M, "smooth")
    if kind == "regular":
        names = list(base_vars) + [v for v in (ring_vars or []) if v not in base_vars]
        K = koszul_model(names, relations)
        if not is_regular_koszul(K):
            raise ValueError("the declared sequence is not regular")
        T = DiscreteAlgebra(names, K.h0_ideal())
        return CotangentPresentation(K, base_vars, T, "regular-sequence")
    if kind == "localization":
        R = DiscreteAlgebra(base_vars)
        M = localization_model(R, element)
        T = DiscreteAlgebra(M.ring.names, M.h0_ideal())
        return CotangentPresentation(M, base_vars, T, "localization")
    if kind == "semifree":
        if model is None:
            raise ValueError("a semifree model is required")
        T = target or DiscreteAlgebra(model.ring.names, model.h0_ideal())
        return CotangentPresentation(model, base_vars, T, "user-semifree")
    raise ValueError("unknown cotangent route %r" % kind)


def _transpose(cols, n_rows):
    """Columns of the transposed matrix: one per row index of ``cols``."""
    out = [{} for _ in range(n_rows)]
    for j, c in enumerate(cols):
        for (p, m), v in c.items():
            out[p][(j, m)] = v
    return out


def andre_quillen(L, M="point", point=None):
    """D^i(T/R, M) = H^i Hom_T(L, M) for each degree of L.

    M = "point": the residue field at ``point`` (dict var -> rational,
    default the origin); dimensions are returned.  M = "T": the cohomology
    modules, as presentations over T.  M = "zero": every group is zero.
    """
    T = L.T
    C = L.complex()
    degs = sorted(C.pieces)
    if M == "zero":
        return {i: 0 for i in degs}
    if M == "point":
        point = point or {}
        pt = [as_q(point.get(v, 0)) for v in T.ring.names]
        for g in T.base_ideal:
            if p_eval(g, pt) != 0:
                raise ValueError("the point does not lie on T")
        mats, C = L.matrices_at(pt)
        ranks = {k: (q_rank(qmatrix(Mk)) if Mk and Mk[0] else 0) for k, Mk in mats.items()}
        return {i: C.piece(i).rank - ranks.get(i, 0) - ranks.get(i + 1, 0) for i in degs}
    if M != "T":
        raise ValueError("unsupported coefficient module %r" % (M,))
    ring = T.ring
    out = {}
    for i in degs:
        n_i = C.piece(i).rank
        if n_i == 0:
            out[i] = FPModule(ring, 0, [], ambient=[], ambient_rank=0)
            continue
        # Hom(L_{i-1}) -> Hom(L_i) -> Hom(L_{i+1}) are transposes of d_i, d_{i+1}
        d_in = _transpose(C.d(i), C.piece(i - 1).rank)
        d_out = _transpose(C.d(i + 1), n_i)
        out[i] = homology_module(ring, d_in, (d_out, C.piece(i + 1).rank), n_i, T.base_ideal)
    return out


# ------------------------------------------------- affine line mapping space

def _bary(k, r):
    """Barycentric t_k on Delta^r in the coordinates x_0..x_{r-1} (t_r = 1 - sum)."""
    if k < r:
        e = [0] * r
        e[k] = 1
        return {tuple(e): ONE}
    out = {(0,) * r: ONE}
    for i in range(r):
        e = [0] * r
        e[i] = 1
        out[tuple(e)] = mpq(-1)
    return out


def face_pullback(r, i):
    """Coordinates of Delta^r pulled back along the face d^i: Delta^{r-1} -> Delta^r."""
    out = []
    for j in range(r):
        if j < i:
            out.append(_bary(j, r - 1))
        elif j == i:
            out.append({})
        else:
            out.append(_bary(j - 1, r - 1))
    return out


def degeneracy_pullback(r, i):
    """Coordinates of Delta^r pulled back along s^i: Delta^{r+1} -> Delta^r."""
    out = []
    for j in range(r):
        if j < i:
            out.append(_bary(j, r + 1))
        elif j == i:
            a, b = _bary(i, r + 1), _bary(i + 1, r + 1)
            acc = dict(a)
            for m, c in b.items():
                acc[m] = acc.get(m, 0) + c
            out.append({m: c for m, c in acc.items() if c})
        else:
            out.append(_bary(j + 1, r + 1))
    return out


class MappingSpaceLevel:
    """Level r of Map(Q[x], B): Z_0(Omega(Delta^r) (x) B), x-degree at most D.

    Omega(Delta^r) is free on x_0..x_{r-1} and their differentials after
    eliminating the last barycentric coordinate.  Elements live in a free
    algebra on B's generators plus these coordinates; the total differential
    is d + delta_B.
    """

    def __init__(self, B, r, D):
        if B.base_ideal:
            raise UndecidableError("mapping space levels need a semifree B")
        if r < 0 or D < 0:
            raise ValueError("level and degree bound must be nonnegative")
        self.B, self.r, self.D = B, r, D
        self.xs = ["@x%d" % i for i in range(r)]
        self.dxs = ["@dx%d" % i for i in range(r)]
        gens = list(B.gens) + [Generator(x, 0) for x in self.xs] + [Generator(dx, 0, 1) for dx in self.dxs]
        self.alg = FreeGCA(gens)
        self.nb = B.alg.n
        self.d_dr = Derivation(self.alg, {x: self.alg.gen(dx) for x, dx in zip(self.xs, self.dxs)},
                               shift=0, weight_shift=1)
        imgs = {}
        for i, g in enumerate(B.gens):
            dg = B.delta.on_generator(i)
            if dg:
                imgs[g.name] = _elem_in(self.alg, dg)
        self.delta = Derivation(self.alg, imgs, shift=-1)

    def total(self, x):
        return self.d_dr(x) + self.delta(x)

    def basis(self, total_degree):
        """Free B_0-basis x^a dx_S b with deg b - |S| = total_degree."""
        from itertools import combinations

        from .groebner import monomials_up_to

        r = self.r
        out = []
        xmonos = list(monomials_up_to(r, self.D))
        for p in range(0, r + 1):
            q = total_degree + p
            if q < 0:
                continue
            for S in combinations(range(r), p):
                for a in xmonos:
                    for bm in self.B.basis(q):
                        out.append(tuple(bm) + tuple(a) + tuple(1 if i in S else 0 for i in range(r)))
        return out

    def _split(self, m):
        zi = self.B.zero_idx
        poly = tuple(m[i] for i in zi)
        rest = list(m)
        for i in zi:
            rest[i] = 0
        return poly, tuple(rest)

    def differential_columns(self):
        src, tgt = self.basis(0), self.basis(-1)
        tidx = {m: i for i, m in enumerate(tgt)}
        cols = []
        for m in src:
            col = {}
            for mm, c in self.total(self.alg.monomial(m)).terms.items():
                poly, rest = self._split(mm)
                key = (tidx[rest], poly)
                col[key] = col.get(key, 0) + c
            cols.append({k: v for k, v in col.items() if v})
        return src, tgt, cols

    def presentation(self):
        """Generators of Z_0 as vectors over B_0 in the degree-0 basis."""
        src, tgt, cols = self.differential_columns()
        ring = self.B.ring
        S = [{(i, (0,) * ring.n): ONE} for i in range(len(src))]
        return src, subquotient_kernel(ring, S, cols, len(tgt), [], ())

    def kernel(self):
        """Q-basis of Z_0 when B_0 = Q: (degree-0 basis, list of vectors)."""
        if self.B.ring.n:
            raise UndecidableError("a Q-basis of the level needs B_0 = Q")
        src, tgt, cols = self.differential_columns()
        M = [[mpq(0)] * len(src) for _ in range(len(tgt))]
        for j, col in enumerate(cols):
            for (p, _), c in col.items():
                M[p][j] += c
        return src, nullspace(qmatrix(M, len(src)) if tgt else None, len(src))

    def element(self, vec, basis):
        x = self.alg.zero()
        for c, m in zip(vec, basis):
            if c:
                x = x + self.alg.monomial(m, c)
        return x

    def pull(self, other, coords, x):
        """Pull an element of this level back to level ``other`` along a simplex map.

        coords[j] is the image polynomial of x_j in other's coordinates.
        """
        alg = other.alg
        sub_x = []
        for p in coords:
            e = alg.zero()
            for m, c in p.items():
                mono = [0] * alg.n
                for k, ex in enumerate(m):
                    mono[other.nb + k] = ex
                e = e + alg.monomial(tuple(mono), c)
            sub_x.append(e)
        sub_dx = [other.d_dr(e) for e in sub_x]
        acc = alg.zero()
        nb, r = self.nb, self.r
        for m, c in x.terms.items():
            term = alg.monomial(tuple(m[:nb]) + (0,) * (alg.n - nb), c)
            for k in range(r):
                for _ in range(m[nb + k]):
                    term = term * sub_x[k]
            dpart = alg.one()
            for k in range(r):
                if m[nb + r + k]:
                    dpart = dpart * sub_dx[k]
            acc = acc + term * dpart
        return acc


def mapping_space_level(B, r, D=2):
    return MappingSpaceLevel(B, r, D)


def affine_line_mapping_space(B, max_level, D=2):
    """The simplicial Q-vector space r -> Z_0(Omega(Delta^r) (x) B) for B_0 = Q.

    Faces and degeneracies are induced by the simplex maps; linear
    substitutions preserve the bound on x-degree.
    """
    from .simplicial import SimplicialVectorSpace

    levels = []
    for r in range(max_level + 1):
        L = MappingSpaceLevel(B, r, D)
        basis, vecs = L.kernel()
        levels.append((L, basis, vecs))

    def induced(src, tgt, coords):
        Ls, bs, vs = src
        Lt, bt, vt = tgt
        tidx = {m: i for i, m in enumerate(bt)}
        cols = []
        for v in vs:
            y = Ls.pull(Lt, coords, Ls.element(v, bs))
            w = [mpq(0)] * len(bt)
            for m, c in y.terms.items():
                w[tidx[m]] += c
            cols.append(w)
        return solve_in_span(vt, cols, len(bt))

    faces, degens = {}, {}
    for r in range(1, max_level + 1):
        for i in range(r + 1):
            faces[(r, i)] = induced(levels[r], levels[r - 1], face_pullback(r, i))
    for r in range(max_level):
        for i in range(r + 1):
            degens[(r, i)] = induced(levels[r], levels[r + 1], degeneracy_pullback(r, i))
    return SimplicialVectorSpace([len(v) for _, _, v in levels], faces, degens)
