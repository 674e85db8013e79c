"""De Rham double complexes, Hodge filtration and shifted symplectic checks.

Forms live in a free graded-commutative algebra with generators g and dg;
dg has chain degree deg g and form degree 1, so it is odd exactly when g is
even.  The de Rham d and the internal differential delta_F are odd
derivations with delta_F(dg) = -d(delta g), so they anticommute.  The double
complex uses delta_V = (-1)^p delta_F, which commutes with d, and the
product total complex uses delta_V + (-1)^(p+i) d on V^p_{p+i}.

Everything is computed over Q one weight at a time, for a positive weight
grading on generators making delta homogeneous (d preserves weight).
"""

from itertools import product as iproduct

from gmpy2 import mpq

from .errors import DegreeError, PrecisionError, UndecidableError
from .gca import Derivation, FreeGCA, Generator, GradedElement
from .groebner import GB, subquotient_kernel, unit_inverse
from .linalg import nullspace, qmatrix, rank as q_rank
from .poly import ONE, poly_str


class FormAlgebra:
    """Forms on a semifree cdga A: generators of A followed by their differentials."""

    def __init__(self, A):
        self.A = A
        gens = list(A.gens) + [Generator("d" + g.name, g.degree, 1) for g in A.gens]
        self.alg = FreeGCA(gens)
        self.ng = len(A.gens)
        alg = self.alg
        self.d = Derivation(alg, {g.name: alg.gen("d" + g.name) for g in A.gens}, shift=0, weight_shift=1)
        imgs = {}
        for i, g in enumerate(A.gens):
            dg = A.delta.on_generator(i)
            if dg:
                e = self.embed(dg)
                imgs[g.name] = e
                imgs["d" + g.name] = -self.d(e)
        self.delta_F = Derivation(alg, imgs, shift=-1)

    def embed(self, x):
        """An element of A as a 0-form."""
        terms = {tuple(m) + (0,) * self.ng: c for m, c in x.terms.items()}
        return GradedElement(self.alg, terms)

    def parse(self, text):
        return self.alg.parse(text)

    def form_degree(self, m):
        return sum(m[self.ng:])

    def chain_degree(self, m):
        return self.alg.mono_degree(m)

    def delta_V(self, x):
        """(-1)^p delta_F on forms of form degree p (x need not be pure in p)."""
        out = self.alg.zero()
        for p, part in self.split_forms(x).items():
            y = self.delta_F(part)
            out = out + (y if p % 2 == 0 else -y)
        return out

    def split_forms(self, x):
        parts = {}
        for m, c in x.terms.items():
            parts.setdefault(self.form_degree(m), {})[m] = c
        return {p: GradedElement(self.alg, t) for p, t in parts.items()}

    def split_coefficient(self, m):
        """(A-part monomial, pure form part) of a form monomial."""
        return tuple(m[:self.ng]) + (0,) * self.ng, (0,) * self.ng + tuple(m[self.ng:])


def form_algebra(A):
    return FormAlgebra(A)


class OmegaP:
    """Omega^p_A: the free A-module on monomials in the dg of form degree p.

    ``basis(cap)`` lists the basis monomials of chain degree at most cap.
    """

    def __init__(self, A, p, cap):
        self.A, self.p, self.cap = A, p, cap
        self.F = FormAlgebra(A)
        self._basis = _pure_forms(self.F, p, cap)

    def basis(self):
        return list(self._basis)

    def rank(self):
        return len(self._basis)

    def names(self):
        return [self.F.alg.fmt_mono(m) for m in self._basis]

    def dg_module(self):
        """The DgModule structure with delta_V on basis monomials."""
        from .derived_ops import DgModule

        F, A = self.F, self.A
        names = self.names()
        index = {m: nm for m, nm in zip(self._basis, names)}
        basis = [(nm, F.chain_degree(m)) for m, nm in zip(self._basis, names)]
        diff = {}
        for m, nm in zip(self._basis, names):
            img = F.delta_V(F.alg.monomial(m))
            by = {}
            for mm, c in img.terms.items():
                a, e = F.split_coefficient(mm)
                coeff = A.alg.monomial(tuple(a[:F.ng]), c)
                by[index[e]] = by.get(index[e], A.alg.zero()) + coeff
            diff[nm] = [(v, k) for k, v in by.items() if v]
        return DgModule(A, basis, diff)


def _pure_forms(F, p, cap):
    """Monomials in the dg alone with form degree p and chain degree <= cap."""
    alg = F.alg
    ng = F.ng
    out = []

    def rec(k, e, left, deg):
        if k == ng:
            if left == 0:
                out.append((0,) * ng + tuple(e))
            return
        g = alg.gens[ng + k]
        top = 1 if g.parity else left
        for a in range(0, min(top, left) + 1):
            nd = deg + a * g.degree
            if nd > cap:
                break
            e.append(a)
            rec(k + 1, e, left - a, nd)
            e.pop()

    rec(0, [], p, 0)
    return sorted(out, key=alg.sort_key)


def omega_p(A, p, cap=None):
    if cap is None:
        cap = A.default_max_degree() + p
    return OmegaP(A, p, cap)


# ------------------------------------------------------------ weights

def grading_weights(A, max_weight=6):
    """Positive integer weights making delta homogeneous, smallest in lexicographic search."""
    gens = A.gens
    n = len(gens)
    rows = []
    for i in range(n):
        dg = A.delta.on_generator(i)
        for m in (dg.terms if dg else {}):
            row = [mpq(0)] * n
            for j, e in enumerate(m):
                row[j] += e
            row[i] -= 1
            rows.append(row)
    if not rows:
        return {g.name: 1 for g in gens}
    basis = nullspace(qmatrix(rows, n), n)
    for total in range(n, n * max_weight + 1):
        for w in _compositions(total, n, max_weight):
            if all(sum(r[j] * w[j] for j in range(n)) == 0 for r in rows):
                return {g.name: w[k] for k, g in enumerate(gens)}
    raise UndecidableError("no positive weight grading makes the differential homogeneous")


def _compositions(total, n, cap):
    if n == 0:
        if total == 0:
            yield ()
        return
    for a in range(1, min(cap, total - (n - 1)) + 1):
        for rest in _compositions(total - a, n - 1, cap):
            yield (a,) + rest


# ------------------------------------------------------ double complex

class DoubleComplex:
    """Weight-graded double complex of Q-vector spaces.

    ``pieces[(w, p, q)]`` lists basis monomials; ``hd`` and ``vd`` give the
    matrices of d: V^p_q -> V^{p+1}_q and delta_V: V^p_q -> V^p_{q-1}.
    """

    def __init__(self, F, weights, p_max, q_max, w_max, pieces=None, p_min=0):
        self.F = F
        self.weights = weights
        self.p_max, self.q_max, self.w_max = p_max, q_max, w_max
        self.p_min = p_min
        self.pieces = pieces if pieces is not None else self._enumerate()
        self.index = {k: {m: i for i, m in enumerate(v)} for k, v in self.pieces.items()}

    def _enumerate(self):
        F, alg = self.F, self.F.alg
        wg = [self.weights[g.name] for g in F.A.gens] * 2
        pieces = {}
        n = alg.n

        def rec(k, e, wt, deg, form):
            if k == n:
                key = (wt, form, deg)
                pieces.setdefault(key, []).append(tuple(e))
                return
            g = alg.gens[k]
            top = 1 if g.parity else self.w_max
            for a in range(0, top + 1):
                nw = wt + a * wg[k]
                nd = deg + a * g.degree
                nf = form + (a if k >= F.ng else 0)
                if nw > self.w_max or nd > self.q_max or nf > self.p_max:
                    break
                e.append(a)
                rec(k + 1, e, nw, nd, nf)
                e.pop()

        rec(0, [], 0, 0, 0)
        for k in pieces:
            pieces[k].sort(key=alg.sort_key)
        return pieces

    def piece(self, w, p, q):
        if p < self.p_min:
            return []
        return self.pieces.get((w, p, q), [])

    def _matrix(self, src, tgt, op):
        tidx = {m: i for i, m in enumerate(tgt)}
        M = [[mpq(0)] * len(src) for _ in range(len(tgt))]
        for j, m in enumerate(src):
            for mm, c in op(self.F.alg.monomial(m)).terms.items():
                if mm in tidx:
                    M[tidx[mm]][j] += c
                elif c:
                    raise PrecisionError("image leaves the computed window")
        return M

    def hd(self, w, p, q):
        return self._matrix(self.piece(w, p, q), self.piece(w, p + 1, q), self.F.d)

    def vd(self, w, p, q):
        return self._matrix(self.piece(w, p, q), self.piece(w, p, q - 1), self.F.delta_V)

    def check_squares(self):
        """d^2 = 0, delta^2 = 0 and d delta = delta d on every piece."""
        F = self.F
        for (w, p, q), ms in self.pieces.items():
            if p < self.p_min:
                continue
            for m in ms:
                x = F.alg.monomial(m)
                if F.d(F.d(x)) or F.delta_V(F.delta_V(x)):
                    return False
                if F.d(F.delta_V(x)) != F.delta_V(F.d(x)):
                    return False
        return True

    def column_counts(self):
        out = {}
        for (w, p, q), ms in self.pieces.items():
            if p >= self.p_min and ms:
                out[p] = out.get(p, 0) + len(ms)
        return dict(sorted(out.items()))


def de_rham_double_complex(A, p_max, q_max, w_max=4, weights=None):
    if A.base_ideal:
        raise UndecidableError("the de Rham complex needs a semifree model without base ideal")
    weights = weights or grading_weights(A)
    return DoubleComplex(FormAlgebra(A), weights, p_max, q_max, w_max)


def hodge_filtration(V, p):
    """F^p: columns below p are zeroed."""
    return DoubleComplex(V.F, V.weights, V.p_max, V.q_max, V.w_max, V.pieces, p_min=max(p, V.p_min))


def _tot_pieces(V, w, i, N):
    """Basis of Tot_i (weight w): pairs (p, monomial) with q = p + i, p <= N."""
    out = []
    for p in range(V.p_min, N + 1):
        q = p + i
        if q < 0:
            continue
        for m in V.piece(w, p, q):
            out.append((p, m))
    return out


def _tot_matrix(V, w, i, N):
    """D = delta_V + (-1)^(p+i) d: Tot_i -> Tot_{i-1}."""
    F = V.F
    src = _tot_pieces(V, w, i, N)
    tgt = _tot_pieces(V, w, i - 1, N)
    tidx = {m: k for k, (_, m) in enumerate(tgt)}
    M = [[mpq(0)] * len(src) for _ in range(len(tgt))]
    for j, (p, m) in enumerate(src):
        x = F.alg.monomial(m)
        img = F.delta_V(x)
        dx = F.d(x) if p + 1 <= N else None
        if dx:
            img = img + (dx if (p + i) % 2 == 0 else -dx)
        for mm, c in img.terms.items():
            if F.form_degree(mm) < V.p_min:
                continue
            if mm not in tidx:
                raise PrecisionError("total differential leaves the window; raise q_max or w_max")
            M[tidx[mm]][j] += c
    return M, len(src), len(tgt)


def _rank(M, rows, cols):
    if rows == 0 or cols == 0:
        return 0
    return q_rank(qmatrix(M, cols))


def tot_cohomology(V, N, window, w_max=None):
    """Ranks of H^j(Tot^Pi V truncated to p <= N), j = -i, summed over weights."""
    lo, hi = window
    w_max = V.w_max if w_max is None else w_max
    ranks = {}
    for j in range(lo, hi + 1):
        i = -j
        total = 0
        for w in range(0, w_max + 1):
            M_in, c_in, r_in = _tot_matrix(V, w, i + 1, N)
            M_out, c_out, r_out = _tot_matrix(V, w, i, N)
            total += c_out - _rank(M_out, r_out, c_out) - _rank(M_in, r_in, c_in)
        ranks[j] = total
    return ranks


class TotReport:
    def __init__(self, precision, columns, ranks, stabilized, weights, w_max):
        self.precision = precision
        self.columns = columns
        self.cohomology_ranks = ranks
        self.stabilized = stabilized
        self.weights = weights
        self.w_max = w_max

    def ranks_list(self):
        return [self.cohomology_ranks[j] for j in sorted(self.cohomology_ranks)]

    def to_dict(self):
        return {"precision": self.precision, "columns": self.columns,
                "cohomology_ranks": {str(j): r for j, r in sorted(self.cohomology_ranks.items())},
                "stabilized": self.stabilized, "max_weight": self.w_max,
                "weights": dict(sorted(self.weights.items()))}


def tot_pi(V, N, window=(0, 2)):
    """Product total complex with columns p <= N; compares with N - 1 for stability."""
    if N < 1:
        raise PrecisionError("precision must be at least 1")
    need = N + 1
    if V.p_max < need:
        V = DoubleComplex(V.F, V.weights, need, V.q_max, V.w_max, p_min=V.p_min)
    now = tot_cohomology(V, N, window)
    before = tot_cohomology(V, N - 1, window)
    cols = list(range(V.p_min, N + 1))
    return TotReport(N, cols, now, now == before, V.weights, V.w_max)


def derived_de_rham(A, N=3, window=(0, 2), w_max=4, q_max=None, p=0):
    """Tot^Pi F^p of the de Rham complex of a semifree model, with a stability report."""
    if q_max is None:
        q_max = w_max * max([g.degree for g in A.gens] + [1]) + 1
    V = de_rham_double_complex(A, N + 1, q_max, w_max)
    if p:
        V = hodge_filtration(V, p)
    return tot_pi(V, N, window)


# ------------------------------------------------------- symplectic

class PresymplecticDatum:
    """Shift n and forms omega_i (i >= 2) in the form algebra of A."""

    def __init__(self, A, n, forms, F=None):
        self.A = A
        self.n = n
        self.F = F or FormAlgebra(A)
        self.forms = {}
        for i, w in forms.items():
            if isinstance(w, str):
                w = self.F.parse(w)
            self.forms[int(i)] = w

    def chain_degree(self, i):
        """omega_i sits in chain degree i - n - 2."""
        return i - self.n - 2


def canonical_form(A):
    """sum_i dx_i dEta_i for a derived critical locus (pairs recorded at construction)."""
    pairs = getattr(A, "symplectic_pairs", None)
    if pairs is None:
        raise ValueError("no canonical pairing recorded on this cdga")
    F = FormAlgebra(A)
    w = F.alg.zero()
    for x, e in pairs:
        w = w + F.alg.gen("d" + x) * F.alg.gen("d" + e)
    return PresymplecticDatum(A, -1, {2: w}, F)


def presymplectic_check(datum):
    """Degrees and closure: delta_V w_2 = 0 and delta_V w_{i+1} + (-1)^{q_i} d w_i = 0."""
    F = datum.F
    forms = datum.forms
    for i, w in forms.items():
        if not w:
            continue
        for m in w.terms:
            if F.form_degree(m) != i or F.chain_degree(m) != datum.chain_degree(i):
                raise DegreeError("omega_%d has a term of form degree %d and chain degree %d; expected %d and %d"
                                  % (i, F.form_degree(m), F.chain_degree(m), i, datum.chain_degree(i)))
    if not forms:
        return {"ok": True}
    top = max(forms)
    zero = F.alg.zero()
    w2 = forms.get(2, zero)
    if F.delta_V(w2):
        return {"ok": False, "index": 2, "reason": "delta omega_2 != 0"}
    for i in range(2, top + 1):
        wi = forms.get(i, zero)
        wn = forms.get(i + 1, zero)
        q = datum.chain_degree(i)
        lhs = F.delta_V(wn)
        dw = F.d(wi)
        lhs = lhs + (dw if q % 2 == 0 else -dw)
        if lhs:
            return {"ok": False, "index": i, "reason": "closure fails between omega_%d and omega_%d" % (i, i + 1)}
    return {"ok": True}


def contraction_matrix(datum):
    """C[g][h]: coefficient of dh in the contraction of omega_2 with the vector field d/dg."""
    F, A = datum.F, datum.A
    alg = F.alg
    w2 = datum.forms.get(2, alg.zero())
    ng = F.ng
    rows = []
    for g in A.gens:
        iota = Derivation(alg, {"d" + g.name: alg.one()}, shift=-g.degree, weight_shift=-1)
        c = iota(w2) if w2 else alg.zero()
        row = []
        for h in A.gens:
            coeff = A.alg.zero()
            for m, v in c.terms.items():
                a, e = F.split_coefficient(m)
                if e[ng + A.alg.index[h.name]] == 1 and sum(e) == 1:
                    coeff = coeff + A.alg.monomial(tuple(a[:ng]), v)
            row.append(coeff)
        rows.append(row)
    return rows


def _det(M):
    """Determinant of a square matrix of polynomials by cofactor expansion."""
    from .poly import p_add, p_mul, p_scale

    n = len(M)
    if n == 0:
        return {(): ONE}
    if n == 1:
        return M[0][0]
    out = {}
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = p_mul(M[0][j], _det(minor))
        out = p_add(out, term if j % 2 == 0 else p_scale(term, -1))
    return out


def nondegeneracy_certificate(datum):
    """Three-valued check on the contraction matrix over H_0.

    certified-nondegenerate: the determinant is a unit in H_0 (inverse witness);
    degenerate: a kernel vector over H_0 that is nonzero in H_0^r;
    inconclusive otherwise.
    """
    A = datum.A
    C = contraction_matrix(datum)
    ring = A.ring
    ideal = A.h0_ideal()
    n = len(A.gens)
    # image in H_0: only degree-0 coefficients survive
    M = [[A.elem_to_poly(_degree0_part(A, C[i][j])) for j in range(n)] for i in range(n)]
    I = GB(ring, 1, [{(0, m): c for m, c in g.items()} for g in ideal]) if ideal else None

    def red(p):
        if not p or I is None:
            return p
        v = I.reduce({(0, m): c for m, c in p.items()})
        return {m: c for (_, m), c in v.items()}

    M = [[red(x) for x in row] for row in M]
    det = red(_det(M))
    if det:
        inv = unit_inverse(ring.names, ideal, det)
        if inv is not None:
            return {"verdict": "certified-nondegenerate", "determinant": poly_str(det, ring.names),
                    "witness": poly_str(inv, ring.names)}
    # kernel over H_0
    cols = []
    for j in range(n):
        col = {}
        for i in range(n):
            for m, c in M[i][j].items():
                col[(i, m)] = c
        cols.append(col)
    S = [{(j, (0,) * ring.n): ONE} for j in range(n)]
    K = subquotient_kernel(ring, S, cols, n, [], ideal)
    J = [{(k, m): c for m, c in g.items()} for k in range(n) for g in ideal]
    GJ = GB(ring, n, J) if J else None
    for v in K:
        if v and (GJ is None or not GJ.contains(v)):
            return {"verdict": "degenerate", "kernel_vector": _vec_str(v, ring)}
    return {"verdict": "inconclusive", "determinant": poly_str(det, ring.names) if det else "0"}


def _degree0_part(A, x):
    terms = {m: c for m, c in x.terms.items() if A.alg.mono_degree(m) == 0}
    return GradedElement(A.alg, terms)


def _vec_str(v, ring):
    by = {}
    for (p, m), c in v.items():
        by.setdefault(p, {})[m] = c
    return {str(p): poly_str(q, ring.names) for p, q in sorted(by.items())}


def shifted_cotangent(n_vars, names=None):
    """T*A^n[-1]: Q[x_i, eta_i] with zero differential and its canonical pairing."""
    from .derived_ops import derived_critical_locus

    names = names or (["x"] if n_vars == 1 else ["x%d" % (i + 1) for i in range(n_vars)])
    return derived_critical_locus(names, "0")
