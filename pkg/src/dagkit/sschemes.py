"""Simplicial affine schemes, presented as cosimplicial algebras.

A level is a finite list of factor algebras (a disjoint union of affine
pieces).  The coface ``(m, i)`` is stored per factor ``b`` of level ``m``
as ``(a, phi)`` where ``a`` indexes a factor of level ``m - 1`` and
``phi`` is the algebra map dual to the face map of schemes.
Codegeneracies ``(m, j)`` go from level ``m + 1`` to level ``m`` in the
same format.
"""

import re
from itertools import combinations, permutations, product

from gmpy2 import mpq

from .cdga import CdgaMorphism, DiscreteAlgebra, SemifreeCdga, Validation, identity_morphism, is_strong
from .complexes import ComplexMap, ModuleComplex, Piece, complex_map_is_quasi_iso
from .errors import PrecisionError, UndecidableError
from .gca import Generator
from .groebner import AugmentedGB, Ideal, monomials_up_to, poly_vec, ring_map_is_iso, unit_inverse
from .linalg import nullspace, qmatrix, rank
from .poly import ONE, PolyRing, m_divides, p_add, p_diff, p_mul, p_scale, p_sub, p_subs, poly_str
from .simplicial import surjections

CERT_KINDS = ("iso", "jacobian", "section", "product", "localization", "strong")

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_@']*")


def _subst_names(text, mapping):
    return _NAME_RE.sub(lambda m: mapping.get(m.group(), m.group()), text)


def _factor(gens, diff, ideal, name=None):
    gens = [g if isinstance(g, Generator) else Generator(*g) for g in gens]
    if all(g.degree == 0 for g in gens) and not diff:
        return DiscreteAlgebra([g.name for g in gens], ideal, name=name)
    return SemifreeCdga(gens, diff, ideal, name=name)


def _diff_strings(A):
    out = {}
    for i, g in enumerate(A.gens):
        dg = A.delta.on_generator(i)
        if dg:
            out[g.name] = str(dg)
    return out


def _ideal_strings(A):
    return [A.ring.fmt(p) for p in A.base_ideal]


def _is_empty(A):
    """Is the degree-0 homology of A the zero ring?"""
    I = Ideal(A.ring, A.h0_ideal())
    return I.is_unit()


def _same_map(f, g):
    S = f.target
    for nm in f.images:
        if not S.is_zero_mod_base(f.images[nm] - g.images[nm]):
            return False
    return True


def _is_identity(f):
    return f.source is f.target and _same_map(f, identity_morphism(f.source))


def factor_to_dict(A):
    return {
        "gens": [[g.name, g.degree] for g in A.gens],
        "diff": _diff_strings(A),
        "ideal": _ideal_strings(A),
    }


def _det(M):
    """Determinant of a square matrix of polynomials (Laplace expansion)."""
    n = len(M)
    if n == 0:
        return {(): ONE}
    if n == 1:
        return dict(M[0][0])
    out = {}
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = p_mul(M[0][j], _det(minor))
        out = p_add(out, term if j % 2 == 0 else p_scale(term, mpq(-1)))
    return out


def _const_poly(c, n):
    c = mpq(c)
    return {(0,) * n: c} if c else {}


# ------------------------------------------------------------ core type

class SimplicialAffineScheme:
    """Levels 0..N of factor algebras with cofaces and codegeneracies."""

    def __init__(self, levels, cofaces, codegeneracies, coskeletal=None, name=None, weights=None):
        self.levels = [list(lv) for lv in levels]
        self.cofaces = dict(cofaces)
        self.codegeneracies = dict(codegeneracies)
        self.coskeletal = coskeletal
        self.name = name
        self.weights = dict(weights or {})
        self.labels = None

    @property
    def top(self):
        return len(self.levels) - 1

    def sizes(self):
        return [len(lv) for lv in self.levels]

    def is_discrete(self):
        return all(f.is_discrete() for lv in self.levels for f in lv)

    def face(self, m, i, b):
        return self.cofaces[(m, i)][b]

    def degeneracy(self, m, j, b):
        return self.codegeneracies[(m, j)][b]

    def _step(self, m, op, b):
        kind, i = op
        if kind == "d":
            a, phi = self.cofaces[(m, i)][b]
            return m - 1, a, phi
        a, phi = self.codegeneracies[(m, i)][b]
        return m + 1, a, phi

    def trace(self, m, b, ops):
        """Follow scheme maps (in order of application) starting at factor b.

        Returns (level, factor, composite algebra map into levels[m][b]).
        """
        psi = None
        for op in ops:
            m, b, phi = self._step(m, op, b)
            psi = phi if psi is None else psi.compose(phi)
        return m, b, psi

    def identities(self):
        """Pairs of operator paths that the simplicial identities equate."""
        N = self.top
        out = []
        for m in range(N + 1):
            for j in range(m + 1):
                for i in range(j):
                    if m >= 2:
                        out.append((m, [("d", j), ("d", i)], [("d", i), ("d", j - 1)]))
            if m + 1 > N:
                continue
            for j in range(m + 1):
                for i in range(m + 2):
                    if i < j:
                        out.append((m, [("s", j), ("d", i)], [("d", i), ("s", j - 1)]))
                    elif i in (j, j + 1):
                        out.append((m, [("s", j), ("d", i)], []))
                    else:
                        out.append((m, [("s", j), ("d", i)], [("d", i - 1), ("s", j)]))
                if m + 2 <= N:
                    for i in range(j + 1):
                        out.append((m, [("s", j), ("s", i)], [("s", i), ("s", j + 1)]))
        return out

    def validate(self, check_maps=True):
        if check_maps:
            for key in sorted(self.cofaces):
                for b, (a, phi) in enumerate(self.cofaces[key]):
                    v = phi.validate()
                    if not v.ok:
                        return Validation(False, ("coface",) + key + (b,), v.message)
            for key in sorted(self.codegeneracies):
                for b, (a, phi) in enumerate(self.codegeneracies[key]):
                    v = phi.validate()
                    if not v.ok:
                        return Validation(False, ("codegeneracy",) + key + (b,), v.message)
        for m, lhs, rhs in self.identities():
            for b in range(len(self.levels[m])):
                l1, f1, p1 = self.trace(m, b, lhs)
                l2, f2, p2 = self.trace(m, b, rhs)
                if (l1, f1) != (l2, f2):
                    return Validation(False, (m, b, tuple(lhs), tuple(rhs)), "paths end at different factors")
                p1 = p1 or identity_morphism(self.levels[m][b])
                p2 = p2 or identity_morphism(self.levels[m][b])
                if not _same_map(p1, p2):
                    return Validation(False, (m, b, tuple(lhs), tuple(rhs)), "cosimplicial identity fails")
        return Validation(True)

    def to_dict(self):
        def maps(d):
            return {"%d,%d" % k: [[a, {g: str(v) for g, v in sorted(phi.images.items())}] for a, phi in lst]
                    for k, lst in sorted(d.items())}

        return {
            "name": self.name,
            "levels": [[factor_to_dict(f) for f in lv] for lv in self.levels],
            "labels": self.labels,
            "cofaces": maps(self.cofaces),
            "codegeneracies": maps(self.codegeneracies),
            "coskeletal": self.coskeletal,
            "weights": dict(sorted(self.weights.items())),
        }


def pi0(X):
    """Levelwise H_0, as a simplicial scheme of discrete algebras."""
    if X.is_discrete():
        return X
    conv = {}

    def disc(A):
        D = conv.get(id(A))
        if D is None:
            D = conv[id(A)] = DiscreteAlgebra(A.ring.names, A.h0_ideal(), name=(A.name or "A") + "_h0")
        return D

    def mp(phi):
        S, T = disc(phi.source), disc(phi.target)
        imgs = {}
        for nm, p in zip(phi.source.ring.names, phi.ring_images()):
            imgs[nm] = T.poly_to_elem(p)
        return CdgaMorphism(S, T, imgs)

    levels = [[disc(f) for f in lv] for lv in X.levels]
    cof = {k: [(a, mp(phi)) for a, phi in lst] for k, lst in X.cofaces.items()}
    cod = {k: [(a, mp(phi)) for a, phi in lst] for k, lst in X.codegeneracies.items()}
    Y = SimplicialAffineScheme(levels, cof, cod, X.coskeletal, (X.name or "X") + "_pi0", X.weights)
    Y.labels = X.labels
    return Y


# ------------------------------------------------------------ constructions

def constant_scheme(A, N=2, name=None):
    """The constant simplicial scheme on A."""
    ident = identity_morphism(A)
    levels = [[A] for _ in range(N + 1)]
    cof = {(m, i): [(0, ident)] for m in range(1, N + 1) for i in range(m + 1)}
    cod = {(m, j): [(0, ident)] for m in range(N) for j in range(m + 1)}
    return SimplicialAffineScheme(levels, cof, cod, coskeletal=0, name=name or "const")


def _subset_nerve(r, ring_of, map_of, N, name, weights=None):
    tuples = [list(product(range(r), repeat=m + 1)) for m in range(N + 1)]
    index = [{t: k for k, t in enumerate(ts)} for ts in tuples]
    levels = [[ring_of(frozenset(t)) for t in ts] for ts in tuples]
    cof = {}
    for m in range(1, N + 1):
        for i in range(m + 1):
            lst = []
            for t in tuples[m]:
                s = t[:i] + t[i + 1:]
                lst.append((index[m - 1][s], map_of(frozenset(s), frozenset(t))))
            cof[(m, i)] = lst
    cod = {}
    for m in range(N):
        for j in range(m + 1):
            lst = []
            for t in tuples[m]:
                s = t[:j + 1] + t[j:]
                lst.append((index[m + 1][s], map_of(frozenset(t), frozenset(t))))
            cod[(m, j)] = lst
    X = SimplicialAffineScheme(levels, cof, cod, coskeletal=0, name=name, weights=weights)
    X.labels = [["".join(str(i) for i in t) for t in ts] for ts in tuples]
    X.tuples = tuples
    X.subset_ring = ring_of
    X.subset_map = map_of
    return X


class CoverCertificate:
    """Evidence that a map (or family of maps) is a smooth or etale cover."""

    KINDS = ("localization-cover", "group-projection", "polynomial-extension")

    def __init__(self, kind, elements=(), witness=None, group=None, generators=()):
        if kind not in self.KINDS:
            raise ValueError("unknown certificate kind %r" % kind)
        self.kind = kind
        self.elements = list(elements)
        self.witness = witness
        self.group = group
        self.generators = list(generators)

    def verify(self, A=None):
        """Check the witness identity (localization covers) by normal form."""
        if self.kind != "localization-cover":
            return Validation(True)
        R = A.ring
        fs = [R.parse(f) if isinstance(f, str) else f for f in self.elements]
        ideal = A.h0_ideal()
        if self.witness is None:
            aug = AugmentedGB(R, 1, [poly_vec(f) for f in fs] + [poly_vec(g) for g in ideal])
            lift = aug.lift(poly_vec(R.one()))
            if lift is None:
                return Validation(False, "witness", "the cover elements do not generate the unit ideal")
            coeffs = [{} for _ in fs]
            for (p, mono), c in lift.items():
                if p < len(fs):
                    coeffs[p][mono] = c
            self.witness = coeffs
        ws = [R.parse(w) if isinstance(w, str) else w for w in self.witness]
        total = {}
        for a, f in zip(ws, fs):
            total = p_add(total, p_mul(a, f))
        diff = p_sub(total, R.one())
        if diff and not Ideal(R, ideal).contains(diff):
            return Validation(False, "witness", "sum a_i f_i - 1 is not zero", R.fmt(diff))
        return Validation(True)

    def to_dict(self, ring=None):
        d = {"kind": self.kind}
        if self.kind == "localization-cover":
            fmt = (lambda p: p if isinstance(p, str) else ring.fmt(p)) if ring else str
            d["elements"] = [fmt(f) for f in self.elements]
            d["witness"] = None if self.witness is None else [fmt(w) for w in self.witness]
        if self.group:
            d["group"] = self.group
        if self.generators:
            d["generators"] = list(self.generators)
        return d


def cech_nerve(A, cover, N=2, witness=None, y_names=None, name=None, weights=None):
    """Cech nerve of the Zariski cover {A[1/f_i]} of Spec A.

    Factors of level n are indexed by (i_0..i_n); each is A with one
    degree-0 generator y_i and relation f_i y_i - 1 per distinct index.
    """
    R = A.ring
    fs = [R.parse(f) if isinstance(f, str) else f for f in cover]
    cert = CoverCertificate("localization-cover", fs, witness)
    v = cert.verify(A)
    if not v.ok:
        raise ValueError("cover witness fails: %s" % v.message)
    r = len(fs)
    taken = set(g.name for g in A.gens)
    if y_names is None:
        y_names = []
        for i in range(r):
            nm = "y" if r == 1 else "y%d" % (i + 1)
            while nm in taken:
                nm = nm + "'"
            taken.add(nm)
            y_names.append(nm)
    diff = _diff_strings(A)
    base = _ideal_strings(A)
    gens0 = [Generator(g.name, g.degree) for g in A.gens]
    rings = {}
    maps = {}

    def ring_of(S):
        B = rings.get(S)
        if B is None:
            gens = gens0 + [Generator(y_names[i], 0) for i in sorted(S)]
            ideal = base + ["(%s)*%s - 1" % (R.fmt(fs[i]), y_names[i]) for i in sorted(S)]
            B = rings[S] = _factor(gens, diff, ideal, name="U" + "".join(str(i) for i in sorted(S)))
        return B

    def map_of(Sp, S):
        key = (Sp, S)
        f = maps.get(key)
        if f is None:
            src, tgt = ring_of(Sp), ring_of(S)
            f = maps[key] = CdgaMorphism(src, tgt, {g.name: tgt.gen(g.name) for g in src.gens})
        return f

    wts = dict(weights or {})
    if weights:
        for i, f in enumerate(fs):
            ws = {sum(e * weights.get(nm, 0) for e, nm in zip(mono, R.names)) for mono in f}
            if len(ws) == 1:
                wts[y_names[i]] = -ws.pop()
    X = _subset_nerve(r, ring_of, map_of, N, name or "cech", wts)
    X.certificate = cert
    X.base = A
    return X


class GluingDatum:
    """Two affine charts glued along an overlap ring.

    ``map0`` and ``map1`` are the restriction maps chart_i -> overlap.
    """

    def __init__(self, chart0, chart1, overlap, map0, map1, weights=None, name=None):
        self.charts = [chart0, chart1]
        self.overlap = overlap
        self.maps = [map0, map1]
        self.weights = dict(weights or {})
        self.name = name

    def validate(self):
        for i, f in enumerate(self.maps):
            v = f.validate()
            if not v.ok:
                return Validation(False, "map%d" % i, v.message)
            c = certify_component(f)
            if not c["etale"]:
                return Validation(False, "map%d" % i, "restriction is not certified as an open immersion")
        return Validation(True)

    def nerve(self, N=2):
        ch, ov = self.charts, self.overlap
        idents = {}

        def ring_of(S):
            return ov if len(S) == 2 else ch[min(S)]

        def map_of(Sp, S):
            if Sp == S:
                A = ring_of(S)
                f = idents.get(id(A))
                if f is None:
                    f = idents[id(A)] = identity_morphism(A)
                return f
            return self.maps[min(Sp)]

        X = _subset_nerve(2, ring_of, map_of, N, self.name or "gluing", self.weights)
        X.gluing = self
        return X


def projective_line():
    """P^1 from the charts Q[x], Q[z] and the Laurent overlap Q[x, z]/(xz - 1)."""
    U0 = DiscreteAlgebra(["x"], name="U0")
    U1 = DiscreteAlgebra(["z"], name="U1")
    U01 = DiscreteAlgebra(["x", "z"], ["x*z - 1"], name="U01")
    m0 = CdgaMorphism(U0, U01, {"x": "x"})
    m1 = CdgaMorphism(U1, U01, {"z": "z"})
    return GluingDatum(U0, U1, U01, m0, m1, weights={"x": 1, "z": -1}, name="P1")


# ------------------------------------------------------------ groups

class AlgebraicGroup:
    """A whitelisted affine group: coordinates, relations, product, unit."""

    def __init__(self, name, coords, relations, mul, unit):
        self.name = name
        self.coords = list(coords)
        self.relations = list(relations)
        self._mul = mul
        self.unit = dict(unit)

    def mul(self, L, R):
        """Product coordinates given name maps for the left and right copies."""
        return self._mul(L, R)

    def relations_in(self, names):
        return [_subst_names(r, names) for r in self.relations]

    def __repr__(self):
        return "AlgebraicGroup(%s)" % self.name


def gm(n=1):
    """The torus G_m^n with coordinates g, h (g h = 1)."""
    if n == 1:
        pairs = [("g", "h")]
    else:
        pairs = [("g%d" % i, "h%d" % i) for i in range(1, n + 1)]
    coords = [c for p in pairs for c in p]
    rels = ["%s*%s - 1" % p for p in pairs]

    def mul(L, R):
        return {c: "%s*%s" % (L[c], R[c]) for c in coords}

    return AlgebraicGroup("Gm" if n == 1 else "Gm^%d" % n, coords, rels, mul, {c: "1" for c in coords})


def ga(n=1):
    """The additive group G_a^n."""
    coords = ["a"] if n == 1 else ["a%d" % i for i in range(1, n + 1)]

    def mul(L, R):
        return {c: "%s + %s" % (L[c], R[c]) for c in coords}

    return AlgebraicGroup("Ga" if n == 1 else "Ga^%d" % n, coords, [], mul, {c: "0" for c in coords})


def _det_string(entries):
    n = len(entries)
    terms = []
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        body = "*".join(entries[i][perm[i]] for i in range(n))
        terms.append(("- " if inv % 2 else "+ ") + body)
    return " ".join(terms)


def gl(n):
    """GL_n with entries g<i><j> and an inverse-determinant coordinate u."""
    ent = [["g%d%d" % (i + 1, j + 1) for j in range(n)] for i in range(n)]
    coords = [c for row in ent for c in row] + ["u"]
    rel = "(%s)*u - 1" % _det_string(ent)

    def mul(L, R):
        out = {}
        for i in range(n):
            for j in range(n):
                out[ent[i][j]] = " + ".join("%s*%s" % (L[ent[i][k]], R[ent[k][j]]) for k in range(n))
        out["u"] = "%s*%s" % (L["u"], R["u"])
        return out

    unit = {ent[i][j]: "1" if i == j else "0" for i in range(n) for j in range(n)}
    unit["u"] = "1"
    return AlgebraicGroup("GL%d" % n, coords, [rel], mul, unit)


def group(label):
    """Parse a group name: Gm, Ga, Gm^n, Ga^n, GL<n>."""
    m = re.fullmatch(r"(Gm|Ga|GL)(?:\^?(\d+))?", label)
    if not m:
        raise ValueError("unsupported group %r (use Gm, Ga, Gm^n, Ga^n or GLn)" % label)
    n = int(m.group(2) or 1)
    return {"Gm": gm, "Ga": ga, "GL": gl}[m.group(1)](n)


def classifying_nerve(G, U=None, coaction=None, N=2, name=None):
    """B[U/G]: level m is U x G^m; the face d_0 acts, inner faces multiply, d_m projects.

    ``coaction`` maps generators of U to expressions in U's generators and
    G's coordinates (a right action).  Copy k of G at level m has
    coordinates named ``c@k``.
    """
    if isinstance(G, str):
        G = group(G)
    U = U if U is not None else DiscreteAlgebra([], name="pt")
    coaction = dict(coaction or {})
    for g in U.gens:
        coaction.setdefault(g.name, g.name)
    diff = _diff_strings(U)
    base = _ideal_strings(U)

    def copy(k):
        return {c: "%s@%d" % (c, k) for c in G.coords}

    levels = []
    for m in range(N + 1):
        gens = [Generator(g.name, g.degree) for g in U.gens]
        ideal = list(base)
        for k in range(1, m + 1):
            gens += [Generator(v, 0) for v in copy(k).values()]
            ideal += G.relations_in(copy(k))
        levels.append([_factor(gens, diff, ideal, name="%sx%s^%d" % (U.name or "U", G.name, m))])
    cof = {}
    for m in range(1, N + 1):
        src, tgt = levels[m - 1][0], levels[m][0]
        for i in range(m + 1):
            imgs = {}
            for g in U.gens:
                imgs[g.name] = _subst_names(coaction[g.name], copy(1)) if i == 0 else g.name
            for k in range(1, m):
                if i == 0:
                    new = {copy(k)[c]: copy(k + 1)[c] for c in G.coords}
                elif i == m or k < i:
                    new = {copy(k)[c]: copy(k)[c] for c in G.coords}
                elif k == i:
                    prod_ = G.mul(copy(i), copy(i + 1))
                    new = {copy(k)[c]: prod_[c] for c in G.coords}
                else:
                    new = {copy(k)[c]: copy(k + 1)[c] for c in G.coords}
                imgs.update(new)
            cof[(m, i)] = [(0, CdgaMorphism(src, tgt, imgs))]
    cod = {}
    for m in range(N):
        src, tgt = levels[m + 1][0], levels[m][0]
        for j in range(m + 1):
            imgs = {g.name: g.name for g in U.gens}
            for k in range(1, m + 2):
                for c in G.coords:
                    if k <= j:
                        imgs[copy(k)[c]] = copy(k)[c]
                    elif k == j + 1:
                        imgs[copy(k)[c]] = G.unit[c]
                    else:
                        imgs[copy(k)[c]] = copy(k - 1)[c]
            cod[(m, j)] = [(0, CdgaMorphism(src, tgt, imgs))]
    X = SimplicialAffineScheme(levels, cof, cod, coskeletal=None, name=name or "B[%s/%s]" % (U.name or "U", G.name))
    X.group = G
    return X


def K_An(A, n, N=None, name=None):
    """K(A, n) for A in {Ga, Gm}: level m is A^binom(m, n), coordinates indexed by surjections [m] -> [n]."""
    if A not in ("Ga", "Gm"):
        raise ValueError("K(A, n) is available for A = Ga or Gm")
    N = n + 1 if N is None else N

    def tag(eta):
        return "".join(str(e) for e in eta)

    def coords(eta):
        t = tag(eta)
        return ["u" + t] if A == "Ga" else ["g" + t, "h" + t]

    surj = [surjections(m, n) if m >= n else [] for m in range(N + 1)]
    levels = []
    for m in range(N + 1):
        gens = [Generator(c, 0) for eta in surj[m] for c in coords(eta)]
        ideal = [] if A == "Ga" else ["g%s*h%s - 1" % (tag(e), tag(e)) for e in surj[m]]
        levels.append([DiscreteAlgebra([g.name for g in gens], ideal, name="K%d_%d" % (n, m))])

    def combine(terms, which):
        if A == "Ga":
            return " + ".join("u" + tag(e) for e in terms) if terms else "0"
        return "*".join(which + tag(e) for e in terms) if terms else "1"

    cof = {}
    for m in range(1, N + 1):
        src, tgt = levels[m - 1][0], levels[m][0]
        for i in range(m + 1):
            imgs = {}
            for e1 in surj[m - 1]:
                pre = [e for e in surj[m] if e[:i] + e[i + 1:] == e1]
                if A == "Ga":
                    imgs["u" + tag(e1)] = combine(pre, "u")
                else:
                    imgs["g" + tag(e1)] = combine(pre, "g")
                    imgs["h" + tag(e1)] = combine(pre, "h")
            cof[(m, i)] = [(0, CdgaMorphism(src, tgt, imgs))]
    cod = {}
    for m in range(N):
        src, tgt = levels[m + 1][0], levels[m][0]
        for j in range(m + 1):
            imgs = {}
            for e2 in surj[m + 1]:
                hit = e2[j] == e2[j + 1]
                e = e2[:j + 1] + e2[j + 2:]
                for c, c0 in zip(coords(e2), coords(e) if hit else [None] * len(coords(e2))):
                    imgs[c] = c0 if hit else ("0" if A == "Ga" else "1")
            cod[(m, j)] = [(0, CdgaMorphism(src, tgt, imgs))]
    return SimplicialAffineScheme(levels, cof, cod, coskeletal=n + 1, name=name or "K(%s,%d)" % (A, n))


# ------------------------------------------------------------ matching objects

def _linear_var(p, idx, n):
    """If p = c*x_v + q with q free of x_v and c constant, return (v, c) for the largest such v."""
    best = None
    for v in idx:
        lin = None
        ok = True
        for m, c in p.items():
            if m[v]:
                if m[v] == 1 and sum(m) == 1 and lin is None:
                    lin = c
                else:
                    ok = False
                    break
        if ok and lin is not None:
            if best is None or v > best[0]:
                best = (v, lin)
    return best


def _eliminate(n, rels, protected=()):
    """Substitute away variables appearing linearly; returns (kept indices, relations, substitutions)."""
    rels = [dict(r) for r in rels if r]
    subs = {}
    gone = set()
    free = [v for v in range(n) if v not in set(protected)]
    changed = True
    while changed:
        changed = False
        for k, r in enumerate(rels):
            if not r:
                continue
            cand = _linear_var(r, [v for v in free if v not in gone], n)
            if cand is None:
                continue
            v, c = cand
            e = [0] * n
            e[v] = 1
            expr = p_scale(p_sub({tuple(e): c}, r), 1 / mpq(c))
            images = []
            for j in range(n):
                ej = [0] * n
                ej[j] = 1
                images.append(expr if j == v else {tuple(ej): ONE})
            rels = [p_subs(q, images, n) if q else q for q in rels]
            subs = {w: p_subs(q, images, n) for w, q in subs.items()}
            subs[v] = expr
            gone.add(v)
            changed = True
            break
    out = []
    seen = set()
    for r in rels:
        if r:
            key = tuple(sorted(r.items()))
            if key not in seen:
                seen.add(key)
                out.append(r)
    kept = [v for v in range(n) if v not in gone]
    return kept, out, subs


def _project(p, kept):
    return {tuple(m[v] for v in kept): c for m, c in p.items()}


class MatchingObject:
    """M_{Lambda^{m,k}} X (or M_{boundary Delta^m} X when k is None) as a disjoint union of algebras."""

    def __init__(self, X, m, k=None):
        if m < 1 or m > X.top:
            raise ValueError("matching objects need 1 <= m <= stored top level")
        if not X.is_discrete():
            X = pi0(X)
        self.X = X
        self.m = m
        self.k = k
        self.I = [i for i in range(m + 1) if i != k]
        self.families = self._families()
        self._fam_index = {f: t for t, f in enumerate(self.families)}
        self.rings = []
        self.subs = []
        self.copy_names = []
        for fam in self.families:
            A, subs, names = self._ring(fam)
            self.rings.append(A)
            self.subs.append(subs)
            self.copy_names.append(names)
        self.assign = []
        for b in range(len(X.levels[m])):
            fam = tuple(X.cofaces[(m, i)][b][0] for i in self.I)
            self.assign.append(self._fam_index[fam])

    def _families(self):
        X, m, I = self.X, self.m, self.I
        n_prev = len(X.levels[m - 1])
        out = []

        def src(i, a):
            return X.cofaces[(m - 1, i)][a][0]

        def rec(pos, chosen):
            if pos == len(I):
                out.append(tuple(chosen))
                return
            j = I[pos]
            for a in range(n_prev):
                ok = True
                if m >= 2:
                    for p in range(pos):
                        i = I[p]
                        if src(i, a) != src(j - 1, chosen[p]):
                            ok = False
                            break
                if ok:
                    chosen.append(a)
                    rec(pos + 1, chosen)
                    chosen.pop()

        rec(0, [])
        return out

    def _ring(self, fam):
        X, m, I = self.X, self.m, self.I
        names = []
        offsets = {}
        for i, a in zip(I, fam):
            offsets[i] = len(names)
            names += ["%s@%d" % (v, i) for v in X.levels[m - 1][a].ring.names]
        big = PolyRing(names)
        n = big.n

        def embed(p, i):
            off = offsets[i]
            out = {}
            for mono, c in p.items():
                e = [0] * n
                e[off:off + len(mono)] = mono
                out[tuple(e)] = c
            return out

        rels = []
        for i, a in zip(I, fam):
            rels += [embed(p, i) for p in X.levels[m - 1][a].base_ideal]
        if m >= 2:
            for p in range(len(I)):
                for q in range(p + 1, len(I)):
                    i, j = I[p], I[q]
                    a_i, a_j = fam[p], fam[q]
                    phi_j = X.cofaces[(m - 1, i)][a_j][1]
                    phi_i = X.cofaces[(m - 1, j - 1)][a_i][1]
                    for l, r in zip(phi_j.ring_images(), phi_i.ring_images()):
                        d = p_sub(embed(l, j), embed(r, i))
                        if d:
                            rels.append(d)
        kept, rels, subs = _eliminate(n, rels)
        knames = [names[v] for v in kept]
        A = DiscreteAlgebra(knames, [_project(r, kept) for r in rels], name="M%d,%s" % (m, "b" if self.k is None else self.k))
        sub_polys = {names[v]: _project(q, kept) for v, q in subs.items()}
        return A, sub_polys, names

    def matching_map(self, b):
        """(family index, algebra map M_family -> X_m[b])."""
        X, m = self.X, self.m
        t = self.assign[b]
        A = self.rings[t]
        S = X.levels[m][b]
        imgs = {}
        for nm in A.ring.names:
            v, i = nm.rsplit("@", 1)
            i = int(i)
            phi = X.cofaces[(m, i)][b][1]
            pos = phi.source.ring.index[v]
            imgs[nm] = S.poly_to_elem(phi.ring_images()[pos])
        return t, CdgaMorphism(A, S, imgs)

    def copy_map(self, t, i):
        """Algebra map X_{m-1}[a_i] -> M_family sending v to its copy v@i."""
        X, fam = self.X, self.families[t]
        a = fam[self.I.index(i)]
        src = X.levels[self.m - 1][a]
        A = self.rings[t]
        imgs = {}
        for v in src.ring.names:
            nm = "%s@%d" % (v, i)
            if nm in A.ring.index:
                imgs[v] = A.gen(nm)
            else:
                imgs[v] = A.poly_to_elem(self.subs[t].get(nm, {}))
        return CdgaMorphism(src, A, imgs)

    def to_dict(self):
        return {
            "m": self.m,
            "k": self.k,
            "families": [list(f) for f in self.families],
            "rings": [factor_to_dict(A) for A in self.rings],
            "assign": list(self.assign),
        }


def matching_object(X, m, k=None):
    return MatchingObject(X, m, k)


# ------------------------------------------------------------ certificates

def _unit_minor(J, cols_n, c, S, limit=64):
    rows = list(range(len(J)))
    tried = 0
    for cols in combinations(range(cols_n), c):
        tried += 1
        if tried > limit:
            break
        M = [[J[r][q] for q in cols] for r in rows]
        det = _det(M)
        if det and unit_inverse(S.ring.names, S.base_ideal, det) is not None:
            return cols
    return None


def certify_component(phi, section=None, allowed=CERT_KINDS):
    """Certificate-driven smooth/etale/surjective analysis of a map of discrete algebras M -> S.

    Values are True when certified, False when refuted, None when no
    certificate settles the question.
    """
    allowed = set(allowed)
    M, S = phi.source, phi.target
    out = {"iso": False, "smooth": None, "etale": None, "surjective": None,
           "relative_dimension": None, "localizing": None, "certificates": []}
    imgs = phi.ring_images()
    if "iso" in allowed:
        r = ring_map_is_iso(M.ring.names, M.base_ideal, S.ring.names, S.base_ideal, imgs)
        if not r["well_defined"]:
            raise ValueError("ring map is not well defined")
        if r["surjective"] and r["injective"]:
            out.update(iso=True, smooth=True, etale=True, surjective=True, relative_dimension=0)
            out["certificates"].append("iso")
            return out
    nM, nS = M.ring.n, S.ring.n
    n = nM + nS

    def from_M(p):
        return {mono + (0,) * nS: c for mono, c in p.items()}

    def from_S(p):
        return {(0,) * nM + mono: c for mono, c in p.items()}

    big = PolyRing(["@m%d" % i for i in range(nM)] + ["@y%d" % j for j in range(nS)])
    base = [from_M(p) for p in M.base_ideal]
    rels = []
    for i, img in enumerate(imgs):
        e = [0] * n
        e[i] = 1
        rels.append(p_sub({tuple(e): ONE}, from_S(img)))
    rels += [from_S(p) for p in S.base_ideal]
    kept, rels, _ = _eliminate(n, rels, protected=range(nM))
    # drop relations implied by the base and the others
    k = len(rels) - 1
    while k >= 0:
        others = base + rels[:k] + rels[k + 1:]
        if others and Ideal(big, others).contains(rels[k]):
            del rels[k]
        k -= 1
    Y = [v for v in kept if v >= nM]
    c = len(rels)
    e = len(Y) - c
    sub_imgs = list(imgs) + [{tuple(1 if t == j else 0 for t in range(nS)): ONE} for j in range(nS)]
    if e >= 0 and "jacobian" in allowed:
        J = [[p_subs(p_diff(r, v), sub_imgs, nS) for v in Y] for r in rels]
        cols = _unit_minor(J, len(Y), c, S) if c else ()
        if cols is not None:
            out["smooth"] = True
            out["relative_dimension"] = e
            out["etale"] = e == 0
            out["certificates"].append("jacobian")
    # product with a fibre free of base variables
    only_fibre = all(not any(mono[:nM]) for r in rels for mono in r)
    if only_fibre and "product" in allowed:
        yring = PolyRing(["@y%d" % j for j in range(len(Y))])
        fib = [{tuple(mono[v] for v in Y): cc for mono, cc in r.items()} for r in rels]
        if not fib or not Ideal(yring, fib).is_unit():
            out["surjective"] = True
            out["certificates"].append("product")
    # localization M -> M[y]/(F y - 1)
    if c == 1 and len(Y) == 1 and "localization" in allowed:
        y = Y[0]
        r = rels[0]
        F, G, ok = {}, {}, True
        for mono, cc in r.items():
            if mono[y] == 1 and not any(mono[v] for v in range(nM, n) if v != y):
                F[mono[:nM]] = cc
            elif mono[y] == 0 and not any(mono):
                G[mono[:nM]] = cc
            else:
                ok = False
        if ok and F and G:
            g0 = next(iter(G.values()))
            out["localizing"] = p_scale(F, -1 / mpq(g0))
            out["certificates"].append("localization")
            if out["surjective"] is None:
                out["surjective"] = unit_inverse(M.ring.names, M.base_ideal, out["localizing"]) is not None
    if section is not None and "section" in allowed and out["surjective"] is not True:
        v = section.validate()
        comp = section.compose(phi)
        if v.ok and _same_map(comp, identity_morphism(M)):
            out["surjective"] = True
            out["certificates"].append("section")
    return out


def _family_surjective(M, comps):
    """Joint surjectivity of components hitting one matching family."""
    if not comps:
        return False
    if any(c["surjective"] for c in comps):
        return True
    if all(c["localizing"] is not None for c in comps):
        gens = list(M.base_ideal) + [c["localizing"] for c in comps]
        return Ideal(M.ring, gens).is_unit()
    return None


def smooth_etale_surjection_check(f, cert=None, allowed=CERT_KINDS):
    """Verdict for a map, or a family of maps with a common source, of discrete algebras."""
    maps = f if isinstance(f, (list, tuple)) else [f]
    M = maps[0].source
    comps = [certify_component(g, allowed=allowed) for g in maps]
    out = {
        "smooth": True if all(c["smooth"] for c in comps) else None,
        "etale": True if all(c["etale"] for c in comps) else None,
        "surjective": _family_surjective(M, comps),
        "components": [{k: v for k, v in c.items() if k != "localizing"} for c in comps],
    }
    if any(c["etale"] is False for c in comps):
        out["etale"] = False
    if cert is not None:
        if cert.kind == "localization-cover":
            v = cert.verify(M)
            ok = v.ok and all("localization" in c["certificates"] or c["iso"] for c in comps)
            if not ok:
                out["verdict"] = "inconclusive"
                return out
        elif cert.kind in ("group-projection", "polynomial-extension"):
            if not all(c["smooth"] and c["surjective"] for c in comps):
                out["verdict"] = "inconclusive"
                return out
    if out["smooth"] and out["surjective"]:
        out["verdict"] = "etale-surjection" if out["etale"] else "smooth-surjection"
    elif out["surjective"] is False:
        out["verdict"] = "not-surjective"
    else:
        out["verdict"] = "inconclusive"
    return out


# ------------------------------------------------------------ hypergroupoid checks

def _horn_check(X, m, k, n, kind, allowed):
    MO = MatchingObject(X, m, k)
    hits = {t: [] for t in range(len(MO.families))}
    maps = {}
    for b in range(len(X.levels[m])):
        if _is_empty(X.levels[m][b]):
            continue
        t, phi = MO.matching_map(b)
        hits[t].append(b)
        maps[b] = phi
    verdict = "yes"
    reason = ""
    for t, A in enumerate(MO.rings):
        empty = Ideal(A.ring, A.base_ideal).is_unit()
        bs = hits[t]
        if m > n:
            if empty and not bs:
                continue
            if len(bs) != 1:
                return "no", "matching family %d is hit by %d components" % (t, len(bs))
            phi = maps[bs[0]]
            r = ring_map_is_iso(A.ring.names, A.base_ideal, phi.target.ring.names, phi.target.base_ideal, phi.ring_images())
            if not (r["surjective"] and r["injective"]):
                return "no", "matching map at factor %d is not an isomorphism" % bs[0]
            continue
        if empty:
            continue
        comps = []
        for b in bs:
            section = None
            if m == 1:
                i = MO.I[0]
                a = MO.families[t][0]
                b2, s = X.codegeneracies[(0, 0)][a]
                if b2 == b:
                    section = MO.copy_map(t, i).compose(s)
            c = certify_component(maps[b], section=section, allowed=allowed)
            comps.append(c)
            prop = "etale" if kind == "dm" else "smooth"
            if kind == "dm" and c["etale"] is False:
                return "no", "component %d is smooth of relative dimension %d" % (b, c["relative_dimension"])
            if not c[prop]:
                verdict = "inconclusive"
                reason = reason or "no %s certificate for component %d" % (prop, b)
        s = _family_surjective(A, comps)
        if s is False:
            return "no", "matching family %d is not covered" % t
        if s is None:
            verdict = "inconclusive"
            reason = reason or "no surjectivity certificate for family %d" % t
    return verdict, reason


def artin_dm_hypergroupoid_check(X, n, kind="artin", certs=None, max_level=None):
    """Is X an Artin (kind='artin') or DM (kind='dm') n-hypergroupoid at stored levels?"""
    if kind not in ("artin", "dm"):
        raise ValueError("kind must be 'artin' or 'dm'")
    allowed = set(CERT_KINDS if certs is None else certs)
    Y = X if X.is_discrete() else pi0(X)
    N = Y.top if max_level is None else min(Y.top, max_level)
    first = None
    for m in range(1, N + 1):
        for k in range(m + 1):
            v, reason = _horn_check(Y, m, k, n, kind, allowed)
            if v == "no":
                return {"verdict": "no", "m": m, "k": k, "reason": reason, "checked_up_to": N, "kind": kind, "n": n}
            if v == "inconclusive" and first is None:
                first = {"m": m, "k": k, "reason": reason}
    out = {"verdict": "yes" if first is None else "inconclusive", "checked_up_to": N, "kind": kind, "n": n}
    if first:
        out.update(first)
    return out


def homotopy_derived_hypergroupoid_check(X, n, kind="artin", certs=None, max_level=None):
    """pi^0 X must be an Artin/DM n-hypergroupoid and every face map strong."""
    allowed = set(CERT_KINDS if certs is None else certs)
    r = artin_dm_hypergroupoid_check(pi0(X), n, kind, allowed, max_level)
    out = dict(r)
    out["pi0_verdict"] = r["verdict"]
    if r["verdict"] != "yes":
        return out
    if X.is_discrete():
        out["strong_faces"] = "discrete"
        return out
    if "strong" not in allowed:
        out["verdict"] = "inconclusive"
        out["reason"] = "no strongness certificate allowed"
        return out
    N = X.top if max_level is None else min(X.top, max_level)
    count = 0
    for (m, i) in sorted(X.cofaces):
        if m > N:
            continue
        for b, (a, phi) in enumerate(X.cofaces[(m, i)]):
            rep = is_strong(phi)
            count += 1
            if not rep.ok:
                out.update(verdict="no", reason="face map %d of level %d (factor %d) is not strong: %s" % (i, m, b, rep.reason),
                           m=m, k=None)
                return out
    out["strong_faces"] = count
    return out


# ------------------------------------------------------------ modules

class CartesianModuleData:
    """Free modules (or complexes of free modules) on each factor, with structure maps.

    ``ranks[(m, b)]`` maps chain degree -> rank.  ``cofaces[(m, i, b)]``
    maps degree -> matrix (list of rows over levels[m][b]) from the
    base change of the source factor's module; ``codegeneracies`` likewise
    for (m, j, b).  ``differentials[(m, b)]`` maps degree j -> matrix
    from degree j to j - 1.  ``gen_weights[(m, b)]`` gives internal
    weights of the basis in degree 0.
    """

    def __init__(self, X, ranks, cofaces, codegeneracies=None, differentials=None, gen_weights=None,
                 structure=False, name=None):
        self.X = X
        self.ranks = dict(ranks)
        self.cofaces = {k: {d: self._mat(X.levels[k[0]][k[2]], M) for d, M in v.items()} for k, v in cofaces.items()}
        self.codegeneracies = {k: {d: self._mat(X.levels[k[0]][k[2]], M) for d, M in v.items()}
                               for k, v in (codegeneracies or {}).items()}
        self.differentials = {k: {d: self._mat(X.levels[k[0]][k[1]], M) for d, M in v.items()}
                              for k, v in (differentials or {}).items()}
        self.gen_weights = dict(gen_weights or {})
        self.structure = structure
        self.name = name

    @staticmethod
    def _mat(A, M):
        return [[A.ring.parse(e) if isinstance(e, str) else ({(0,) * A.ring.n: mpq(e)} if not isinstance(e, dict) and e else (e or {}))
                 for e in row] for row in M]

    def rank(self, m, b, deg=0):
        return self.ranks.get((m, b), {}).get(deg, 0)

    def degrees(self):
        out = set()
        for v in self.ranks.values():
            out |= {d for d, r in v.items() if r}
        return sorted(out)

    def validate(self):
        """Cosimplicial identities for the degree-0 structure matrices."""
        X = self.X
        for m, lhs, rhs in X.identities():
            for b in range(len(X.levels[m])):
                r1 = self._trace(m, b, lhs)
                r2 = self._trace(m, b, rhs)
                S = X.levels[m][b]
                M1, M2 = r1[2], r2[2]
                for row1, row2 in zip(M1, M2):
                    for e1, e2 in zip(row1, row2):
                        d = p_sub(e1, e2)
                        if d and not S.base_ideal_obj().contains(d):
                            return Validation(False, (m, b, tuple(lhs), tuple(rhs)), "module identity fails")
        return Validation(True)

    def _local(self, m, op, b):
        kind, i = op
        if kind == "d":
            return self.cofaces[(m, i, b)].get(0)
        return self.codegeneracies[(m, i, b)].get(0)

    def _trace(self, m, b, ops):
        X = self.X
        S = X.levels[m][b]
        r = self.rank(m, b)
        Mat = [[S.ring.one() if i == j else {} for j in range(r)] for i in range(r)]
        psi = None
        for op in ops:
            A = self._local(m, op, b)
            m2, a, phi = X._step(m, op, b)
            imgs = psi.ring_images() if psi is not None else None
            if imgs is not None:
                A = [[p_subs(e, imgs, S.ring.n) if e else {} for e in row] for row in A]
            Mat = _matmul(Mat, A)
            psi = phi if psi is None else psi.compose(phi)
            m, b = m2, a
        return m, b, Mat


def _matmul(A, B):
    if not A:
        return []
    n, k = len(A), len(B)
    p = len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            s = {}
            for t in range(k):
                if A[i][t] and B[t][j]:
                    s = p_add(s, p_mul(A[i][t], B[t][j]))
            row.append(s)
        out.append(row)
    return out


def structure_sheaf(X):
    """O_X: rank one in degree 0 with identity structure maps."""
    ranks = {(m, b): {0: 1} for m in range(X.top + 1) for b in range(len(X.levels[m]))}
    cof = {(m, i, b): {0: [[1]]} for (m, i), lst in X.cofaces.items() for b in range(len(lst))}
    cod = {(m, j, b): {0: [[1]]} for (m, j), lst in X.codegeneracies.items() for b in range(len(lst))}
    gw = {k: [0] for k in ranks}
    return CartesianModuleData(X, ranks, cof, cod, gen_weights=gw, structure=True, name="O")


def zero_module(X):
    ranks = {(m, b): {0: 0} for m in range(X.top + 1) for b in range(len(X.levels[m]))}
    cof = {(m, i, b): {0: []} for (m, i), lst in X.cofaces.items() for b in range(len(lst))}
    cod = {(m, j, b): {0: []} for (m, j), lst in X.codegeneracies.items() for b in range(len(lst))}
    return CartesianModuleData(X, ranks, cof, cod, gen_weights={k: [] for k in ranks}, name="0")


def _pair_factor(X, a, b):
    return X.tuples[1].index((a, b))


def _push(X, elem, src_level, src_factor, m, b, path):
    """Transport a polynomial from a lower-level factor to levels[m][b] along the face path."""
    _, f, psi = X.trace(m, b, path)
    if f != src_factor:
        raise ValueError("face path does not reach the expected factor")
    S = X.levels[m][b]
    if psi is None:
        return elem
    return p_subs(elem, psi.ring_images(), S.ring.n)


def _loops_to_pair(t):
    """Face path from tuple t (level m) down to its level-1 tuple (t0, t1)."""
    return [("d", len(t) - 1 - j) for j in range(len(t) - 2)]


def vector_bundle(X, omega, name=None):
    """The module on a Cech-type nerve glued by a GL_r cocycle omega[(a, b)].

    The module at (i_0..i_n) is free with basis e^{i_0}; the coface d^0
    sends e^{i_1} to e^{i_0} omega_{i_0 i_1}; the other structure maps are
    identities.
    """
    first = next(iter(omega.values()))
    r = len(first) if isinstance(first, list) else 1
    rank_r = r
    mats = {}
    for (a, b), w in omega.items():
        S = X.levels[1][_pair_factor(X, a, b)]
        if not isinstance(w, list):
            w = [[w]]
        mats[(a, b)] = [[S.ring.parse(e) if isinstance(e, str) else e for e in row] for row in w]
    ranks = {(m, b): {0: rank_r} for m in range(X.top + 1) for b in range(len(X.levels[m]))}
    ident = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    cof = {}
    for (m, i), lst in X.cofaces.items():
        for b in range(len(lst)):
            t = X.tuples[m][b]
            if i != 0:
                cof[(m, i, b)] = {0: ident}
                continue
            w = mats[(t[0], t[1])]
            src = _pair_factor(X, t[0], t[1])
            cof[(m, i, b)] = {0: [[_push(X, e, 1, src, m, b, _loops_to_pair(t)) for e in row] for row in w]}
    cod = {(m, j, b): {0: ident} for (m, j), lst in X.codegeneracies.items() for b in range(len(lst))}
    gw = {}
    if X.weights and r == 1:
        base = {}
        for (a, b), w in mats.items():
            wt = _poly_weight(X.levels[1][_pair_factor(X, a, b)], w[0][0], X.weights)
            if a == 0 and wt is not None:
                base[b] = wt
        for m in range(X.top + 1):
            for b, t in enumerate(X.tuples[m]):
                gw[(m, b)] = [base.get(t[0], 0)]
    return CartesianModuleData(X, ranks, cof, cod, gen_weights=gw, name=name or "E")


def line_bundle(X, omega, name=None):
    return vector_bundle(X, {k: [[v]] for k, v in omega.items()}, name=name)


def _poly_weight(S, p, weights):
    ws = {sum(e * weights.get(nm, 0) for e, nm in zip(m, S.ring.names)) for m in p}
    return ws.pop() if len(ws) == 1 else None


def p1_twist(d):
    """Transition data for O(d) on the two-chart nerve of P^1."""
    if d >= 0:
        w01, w10 = "x^%d" % d, "z^%d" % d
    else:
        w01, w10 = "z^%d" % (-d), "x^%d" % (-d)
    return {(0, 0): "1", (1, 1): "1", (0, 1): w01, (1, 0): w10}


def _as_matrix(w):
    return w if isinstance(w, list) else [[w]]


def cocycle_check(X, omega):
    """Check units on level 1 and d^2(w) d^0(w) = d^1(w) on level 2."""
    mats = {}
    for (a, b), w in omega.items():
        S = X.levels[1][_pair_factor(X, a, b)]
        mats[(a, b)] = [[S.ring.parse(e) if isinstance(e, str) else e for e in row] for row in _as_matrix(w)]
    for (a, b), M in mats.items():
        S = X.levels[1][_pair_factor(X, a, b)]
        det = _det(M)
        if not det or unit_inverse(S.ring.names, S.base_ideal, det) is None:
            return {"ok": False, "site": [a, b], "reason": "omega is not invertible on (%d,%d)" % (a, b)}
    for b, t in enumerate(X.tuples[2]):
        S = X.levels[2][b]

        def face(i):
            s = t[:i] + t[i + 1:]
            a = _pair_factor(X, *s)
            _, f, phi = X.trace(2, b, [("d", i)])
            imgs = phi.ring_images()
            return [[p_subs(e, imgs, S.ring.n) if e else {} for e in row] for row in mats[s]]

        lhs = _matmul(face(2), face(0))
        rhs = face(1)
        for r1, r2 in zip(lhs, rhs):
            for e1, e2 in zip(r1, r2):
                d = p_sub(e1, e2)
                if d and not S.base_ideal_obj().contains(d):
                    return {"ok": False, "site": list(t), "reason": "cocycle identity fails on %s" % "".join(map(str, t))}
    return {"ok": True}


def gauge_check(X, g, omega0, omega1):
    """Check d^1(g) omega0 = omega1 d^0(g) on every level-1 factor, with g invertible."""
    gm_ = {}
    for a, w in g.items():
        S = X.levels[0][a]
        M = [[S.ring.parse(e) if isinstance(e, str) else e for e in row] for row in _as_matrix(w)]
        det = _det(M)
        if not det or unit_inverse(S.ring.names, S.base_ideal, det) is None:
            return {"ok": False, "site": [a], "reason": "gauge is not invertible on chart %d" % a}
        gm_[a] = M
    for b, (a0, a1) in enumerate(X.tuples[1]):
        S = X.levels[1][b]

        def parse(w):
            return [[S.ring.parse(e) if isinstance(e, str) else e for e in row] for row in _as_matrix(w)]

        def face(i, chart):
            _, f, phi = X.trace(1, b, [("d", i)])
            imgs = phi.ring_images()
            return [[p_subs(e, imgs, S.ring.n) if e else {} for e in row] for row in gm_[chart]]

        lhs = _matmul(face(1, a0), parse(omega0[(a0, a1)]))
        rhs = _matmul(parse(omega1[(a0, a1)]), face(0, a1))
        for r1, r2 in zip(lhs, rhs):
            for e1, e2 in zip(r1, r2):
                d = p_sub(e1, e2)
                if d and not S.base_ideal_obj().contains(d):
                    return {"ok": False, "site": [a0, a1], "reason": "gauge identity fails on %d%d" % (a0, a1)}
    return {"ok": True}


def _cols(M, n):
    """Matrix rows of polys -> column vectors."""
    if not M:
        return []
    cols = []
    for j in range(len(M[0])):
        v = {}
        for i in range(len(M)):
            for mono, c in (M[i][j] or {}).items():
                v[(i, mono)] = c
        cols.append(v)
    return cols


def _base_changed_complex(F, m, a, phi, degrees):
    """Source factor's complex pushed to the target ring of phi."""
    S = phi.target
    imgs = phi.ring_images()
    pieces = {d: Piece(F.rank(m, a, d)) for d in degrees}
    diffs = {}
    for d in degrees:
        M = F.differentials.get((m, a), {}).get(d)
        if M:
            M = [[p_subs(e, imgs, S.ring.n) if e else {} for e in row] for row in M]
            diffs[d] = _cols(M, S.ring.n)
    return ModuleComplex(S.ring, pieces, diffs, S.h0_ideal() if S.is_discrete() else S.base_ideal)


def _own_complex(F, m, b, degrees):
    S = F.X.levels[m][b]
    pieces = {d: Piece(F.rank(m, b, d)) for d in degrees}
    diffs = {d: _cols(F.differentials[(m, b)][d], S.ring.n)
             for d in degrees if F.differentials.get((m, b), {}).get(d)}
    return ModuleComplex(S.ring, pieces, diffs, S.base_ideal)


def cartesian_module_check(F, mode="sheaf"):
    """Are the structure maps isomorphisms after base change (sheaf) or on homology (homotopy)?"""
    X = F.X
    if mode not in ("sheaf", "homotopy"):
        raise ValueError("mode must be 'sheaf' or 'homotopy'")
    if mode == "homotopy" and F.structure:
        for (m, i) in sorted(X.cofaces):
            for b, (a, phi) in enumerate(X.cofaces[(m, i)]):
                rep = is_strong(phi)
                if not rep.ok:
                    return {"ok": False, "site": {"m": m, "i": i, "factor": b, "degree": rep.degree}, "reason": rep.reason}
        return {"ok": True, "mode": mode}
    degrees = F.degrees() or [0]
    for (m, i) in sorted(X.cofaces):
        for b, (a, phi) in enumerate(X.cofaces[(m, i)]):
            S = X.levels[m][b]
            mats = F.cofaces[(m, i, b)]
            if mode == "sheaf":
                for d in degrees:
                    M = mats.get(d, [])
                    ra, rb = F.rank(m - 1, a, d), F.rank(m, b, d)
                    if ra != rb:
                        return {"ok": False, "site": {"m": m, "i": i, "factor": b, "degree": d}, "reason": "ranks differ"}
                    if rb == 0:
                        continue
                    det = _det(M)
                    if not det or unit_inverse(S.ring.names, S.base_ideal, det) is None:
                        return {"ok": False, "site": {"m": m, "i": i, "factor": b, "degree": d},
                                "reason": "base-change map is not invertible"}
            else:
                src = _base_changed_complex(F, m - 1, a, phi, degrees)
                tgt = _own_complex(F, m, b, degrees)
                fm = ComplexMap(src, tgt, {d: _cols(mats.get(d, []), S.ring.n) for d in degrees})
                ok, deg = complex_map_is_quasi_iso(fm, degrees)
                if not ok:
                    return {"ok": False, "site": {"m": m, "i": i, "factor": b, "degree": deg},
                            "reason": "map on homology is not an isomorphism"}
    return {"ok": True, "mode": mode}


# ------------------------------------------------------------ global sections

class CechComplexReport:
    def __init__(self, pieces, window, weight_range, degree_bound, name=None):
        self.pieces = pieces
        self.window = tuple(window)
        self.weight_range = tuple(weight_range)
        self.degree_bound = degree_bound
        self.name = name
        lo, hi = self.window
        self.totals = {j: sum(p["ranks"][j] for p in pieces.values()) for j in range(lo, hi + 1)}

    def rank(self, j):
        return self.totals[j]

    def to_dict(self):
        return {
            "name": self.name,
            "window": list(self.window),
            "weight_range": list(self.weight_range),
            "degree_bound": self.degree_bound,
            "ranks": {str(j): r for j, r in sorted(self.totals.items())},
            "pieces": {str(k): {"levels": v["levels"], "normalized": v["normalized"],
                                "ranks": {str(j): r for j, r in sorted(v["ranks"].items())}}
                       for k, v in sorted(self.pieces.items())},
        }


class _Graded:
    """Weight pieces of the factor modules, truncated by polynomial degree."""

    def __init__(self, F, D):
        self.F = F
        self.X = F.X
        self.D = D
        self._std = {}
        self._bases = {}

    def standard(self, S, w):
        key = (id(S), w)
        out = self._std.get(key)
        if out is None:
            wts = [self.X.weights.get(nm, 0) for nm in S.ring.names]
            leads = [S.ring.lead(p) for p in S.base_ideal_obj().basis()] if S.base_ideal else []
            out = []
            for mono in monomials_up_to(S.ring.n, self.D):
                if sum(e * x for e, x in zip(mono, wts)) != w:
                    continue
                if any(m_divides(l, mono) for l in leads):
                    continue
                out.append(tuple(mono))
            out.sort()
            self._std[key] = out
        return out

    def basis(self, m, k):
        key = (m, k)
        out = self._bases.get(key)
        if out is None:
            out = []
            for b, S in enumerate(self.X.levels[m]):
                r = self.F.rank(m, b)
                gw = self.F.gen_weights.get((m, b)) or [0] * r
                for l in range(r):
                    for mono in self.standard(S, k - gw[l]):
                        out.append((b, l, mono))
            self._bases[key] = (out, {x: i for i, x in enumerate(out)})
            out = self._bases[key]
        return out

    def matrix(self, m_src, m_tgt, maps, k):
        """Matrix of the structure maps ``maps`` (list per target factor or dict) on weight k."""
        src, _ = self.basis(m_src, k)
        tgt, tidx = self.basis(m_tgt, k)
        by_factor = {}
        for i, (a, l, mono) in enumerate(src):
            by_factor.setdefault(a, []).append((i, l, mono))
        rows = [[mpq(0)] * len(src) for _ in tgt]
        for b, (a, phi, A) in enumerate(maps):
            S = self.X.levels[m_tgt][b]
            imgs = phi.ring_images()
            I = S.base_ideal_obj() if S.base_ideal else None
            for i, l, mono in by_factor.get(a, []):
                base = p_subs({mono: ONE}, imgs, S.ring.n)
                for l2 in range(len(A)):
                    coef = A[l2][l]
                    if not coef:
                        continue
                    p = p_mul(coef, base)
                    if I is not None:
                        p = I.reduce(p)
                    for mono2, c in p.items():
                        j = tidx.get((b, l2, mono2))
                        if j is None:
                            gw = self.F.gen_weights.get((m_tgt, b)) or [0] * len(A)
                            wts = [self.X.weights.get(nm, 0) for nm in S.ring.names]
                            if sum(e * x for e, x in zip(mono2, wts)) + gw[l2] != k:
                                raise ValueError("structure map is not homogeneous for the weights")
                            raise PrecisionError("degree bound %d too small" % self.D)
                        rows[j][i] += c
        return rows


def _stack(mats, ncols):
    rows = []
    for M in mats:
        rows += M
    return qmatrix(rows, ncols) if rows else None


def derived_global_sections(X, F=None, window=(0, 1), weight_range=(-4, 4), degree_bound=None, name=None):
    """Cohomology of the normalized alternating-sum Cech complex, one weight piece at a time."""
    F = F if F is not None else structure_sheaf(X)
    lo, hi = window
    if hi + 1 > X.top:
        raise PrecisionError("need stored levels up to %d for the window %r" % (hi + 1, tuple(window)))
    if not X.weights:
        raise UndecidableError("global sections are computed per weight piece; this nerve carries no weights")
    D = degree_bound if degree_bound is not None else max(abs(weight_range[0]), abs(weight_range[1])) + 4
    for _ in range(4):
        try:
            return _global_sections(X, F, lo, hi, weight_range, D, name)
        except PrecisionError:
            if degree_bound is not None:
                raise
            D *= 2
    raise PrecisionError("degree bound %d too small" % D)


def _global_sections(X, F, lo, hi, weight_range, D, name):
    G = _Graded(F, D)
    levels = range(max(lo - 1, 0), hi + 2)
    pieces = {}

    def cof_maps(m, i):
        return [(a, phi, F.cofaces[(m, i, b)].get(0, [])) for b, (a, phi) in enumerate(X.cofaces[(m, i)])]

    def cod_maps(m, j):
        return [(a, phi, F.codegeneracies[(m, j, b)].get(0, [])) for b, (a, phi) in enumerate(X.codegeneracies[(m, j)])]

    for k in range(weight_range[0], weight_range[1] + 1):
        dims = {m: len(G.basis(m, k)[0]) for m in levels}
        diff = {}
        for m in levels:
            if m == 0:
                continue
            total = [[mpq(0)] * dims[m - 1] for _ in range(dims[m])]
            for i in range(m + 1):
                M = G.matrix(m - 1, m, cof_maps(m, i), k)
                sgn = 1 if i % 2 == 0 else -1
                for r in range(dims[m]):
                    for c in range(dims[m - 1]):
                        if M[r][c]:
                            total[r][c] += sgn * M[r][c]
            diff[m] = total
        normal = {}
        for m in levels:
            if m == 0:
                normal[m] = [[mpq(1) if i == j else mpq(0) for i in range(dims[0])] for j in range(dims[0])]
                continue
            mats = [G.matrix(m, m - 1, cod_maps(m - 1, j), k) for j in range(m)]
            normal[m] = nullspace(_stack(mats, dims[m]), dims[m])
        ranks = {}
        for j in range(lo, hi + 1):
            nj = len(normal[j])
            r_out = _restricted_rank(diff.get(j + 1), normal[j], dims.get(j + 1, 0), dims[j])
            r_in = _restricted_rank(diff.get(j), normal.get(j - 1, []), dims[j], dims.get(j - 1, 0)) if j >= 1 else 0
            ranks[j] = nj - r_out - r_in
        pieces[k] = {"levels": [dims[m] for m in levels], "normalized": [len(normal[m]) for m in levels], "ranks": ranks}
    return CechComplexReport(pieces, (lo, hi), weight_range, D, name=name or X.name)


def _restricted_rank(Dm, basis, nrows, ncols):
    if Dm is None or not basis or not nrows:
        return 0
    A = qmatrix(Dm, ncols)
    B = qmatrix([list(col) for col in zip(*basis)], len(basis))
    return rank(A * B)


def unnormalized_ranks(X, F=None, window=(0, 1), weight_range=(-4, 4), degree_bound=None):
    """Cohomology of the full alternating-sum complex (cross-check of the normalized one)."""
    F = F if F is not None else structure_sheaf(X)
    if degree_bound is None:
        degree_bound = 2 * max(abs(weight_range[0]), abs(weight_range[1])) + 4
    G = _Graded(F, degree_bound)
    lo, hi = window
    out = {j: 0 for j in range(lo, hi + 1)}
    for k in range(weight_range[0], weight_range[1] + 1):
        dims = {m: len(G.basis(m, k)[0]) for m in range(max(lo - 1, 0), hi + 2)}

        def dmat(m):
            total = [[mpq(0)] * dims[m - 1] for _ in range(dims[m])]
            for i in range(m + 1):
                maps = [(a, phi, F.cofaces[(m, i, b)].get(0, [])) for b, (a, phi) in enumerate(X.cofaces[(m, i)])]
                M = G.matrix(m - 1, m, maps, k)
                for r in range(dims[m]):
                    for c in range(dims[m - 1]):
                        total[r][c] += (1 if i % 2 == 0 else -1) * M[r][c]
            return total

        for j in range(lo, hi + 1):
            r_out = rank(qmatrix(dmat(j + 1), dims[j])) if dims[j] and dims[j + 1] else 0
            r_in = rank(qmatrix(dmat(j), dims[j - 1])) if j >= 1 and dims[j] and dims[j - 1] else 0
            out[j] += dims[j] - r_out - r_in
    return out
