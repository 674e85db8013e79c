"""Finite simplicial sets and simplicial Q-vector spaces.

A FiniteSimplicialSet stores levels 0..N as labelled finite sets with face
and degeneracy maps as index arrays.  Simplicial vector spaces store the
structure maps as matrices over Q; Dold-Kan and Eilenberg-Zilber are
computed with exact linear algebra.
"""

import random
from itertools import combinations, permutations, product

from gmpy2 import mpq
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .cdga import Validation


# ------------------------------------------------------------------ sets

class FiniteSimplicialSet:
    """Levels X_0..X_N with faces[(m, i)]: X_m -> X_{m-1} and degens[(m, i)]: X_m -> X_{m+1}.

    ``labels[m]`` names the elements of X_m; maps are lists of indices.
    ``coskeletal`` records that higher levels are determined by the stored
    ones (used by the nerve and coskeleton constructions).
    """

    def __init__(self, labels, faces, degens, coskeletal=None, name=None, check=True):
        self.labels = [list(l) for l in labels]
        self.N = len(self.labels) - 1
        self.faces = {k: list(v) for k, v in faces.items()}
        self.degens = {k: list(v) for k, v in degens.items()}
        self.coskeletal = coskeletal
        self.name = name
        self._index = [{lab: i for i, lab in enumerate(l)} for l in self.labels]
        if check:
            v = validate(self)
            if not v.ok:
                raise ValueError("simplicial identities fail: %s %s" % (v.item, v.message))

    def __repr__(self):
        return "FiniteSimplicialSet(%s)" % (self.name or ", ".join(str(len(l)) for l in self.labels))

    def size(self, m):
        return len(self.labels[m])

    def sizes(self):
        return [len(l) for l in self.labels]

    def index(self, m, label):
        return self._index[m][label]

    def d(self, m, i, x):
        return self.faces[(m, i)][x]

    def s(self, m, i, x):
        return self.degens[(m, i)][x]

    def boundary(self, m, x):
        return tuple(self.faces[(m, i)][x] for i in range(m + 1))

    def degenerate(self, m):
        """Indices of degenerate elements of X_m."""
        out = set()
        if m == 0:
            return out
        for i in range(m):
            out.update(self.degens[(m - 1, i)])
        return out

    def nondegenerate(self, m):
        deg = self.degenerate(m)
        return [x for x in range(self.size(m)) if x not in deg]

    def to_dict(self):
        return {"levels": [[str(l) for l in lv] for lv in self.labels],
                "faces": {"%d,%d" % k: v for k, v in sorted(self.faces.items())},
                "degeneracies": {"%d,%d" % k: v for k, v in sorted(self.degens.items())}}


def validate(X):
    """Check the simplicial identities on all stored levels."""
    N = X.N
    for m in range(2, N + 1):
        for j in range(m + 1):
            for i in range(j):
                for x in range(X.size(m)):
                    if X.d(m - 1, i, X.d(m, j, x)) != X.d(m - 1, j - 1, X.d(m, i, x)):
                        return Validation(False, (m, "d%dd%d" % (i, j)), "face identity fails", x)
    for m in range(0, N - 1):
        for j in range(m + 1):
            for i in range(j + 1):
                for x in range(X.size(m)):
                    if X.s(m + 1, i, X.s(m, j, x)) != X.s(m + 1, j + 1, X.s(m, i, x)):
                        return Validation(False, (m, "s%ds%d" % (i, j)), "degeneracy identity fails", x)
    for m in range(0, N):
        for j in range(m + 1):
            for i in range(m + 2):
                for x in range(X.size(m)):
                    y = X.d(m + 1, i, X.s(m, j, x))
                    if i in (j, j + 1):
                        want = x
                    elif i < j:
                        want = X.s(m - 1, j - 1, X.d(m, i, x))
                    else:
                        want = X.s(m - 1, j, X.d(m, i - 1, x))
                    if y != want:
                        return Validation(False, (m + 1, "d%ds%d" % (i, j)), "mixed identity fails", x)
    return Validation(True)


def _from_sequences(levels, name=None, coskeletal=None):
    """Simplicial subset of a nerve-of-poset style object: simplices are vertex tuples."""
    labels = [list(l) for l in levels]
    idx = [{s: i for i, s in enumerate(l)} for l in labels]
    faces, degens = {}, {}
    N = len(labels) - 1
    for m in range(1, N + 1):
        for i in range(m + 1):
            faces[(m, i)] = [idx[m - 1][s[:i] + s[i + 1:]] for s in labels[m]]
    for m in range(0, N):
        for i in range(m + 1):
            degens[(m, i)] = [idx[m + 1][s[:i + 1] + s[i:]] for s in labels[m]]
    return FiniteSimplicialSet(labels, faces, degens, coskeletal=coskeletal, name=name)


def _monotone(m, n):
    """Non-decreasing maps [m] -> [n] as tuples."""
    out = []

    def rec(prefix, lo):
        if len(prefix) == m + 1:
            out.append(tuple(prefix))
            return
        for v in range(lo, n + 1):
            rec(prefix + [v], v)

    rec([], 0)
    return out


def standard_simplex(n, max_level=None):
    """Delta^n: level m consists of the non-decreasing maps [m] -> [n]."""
    N = max_level if max_level is not None else n + 1
    return _from_sequences([_monotone(m, n) for m in range(N + 1)], name="Delta^%d" % n, coskeletal=0)


def boundary_simplex(n, max_level=None):
    """The boundary of Delta^n: non-surjective maps."""
    N = max_level if max_level is not None else n + 1
    full = set(range(n + 1))
    levels = [[s for s in _monotone(m, n) if set(s) != full] for m in range(N + 1)]
    return _from_sequences(levels, name="dDelta^%d" % n)


def horn(n, k, max_level=None):
    """The horn Lambda^{n,k}: maps whose image together with k is not everything."""
    if not 0 <= k <= n:
        raise ValueError("horn index out of range")
    N = max_level if max_level is not None else n + 1
    full = set(range(n + 1))
    levels = [[s for s in _monotone(m, n) if set(s) | {k} != full] for m in range(N + 1)]
    return _from_sequences(levels, name="Lambda^%d,%d" % (n, k))


def point(max_level=3):
    return standard_simplex(0, max_level)


def constant(elements, max_level=3):
    labels = [list(elements) for _ in range(max_level + 1)]
    ident = list(range(len(elements)))
    faces = {(m, i): ident for m in range(1, max_level + 1) for i in range(m + 1)}
    degens = {(m, i): ident for m in range(max_level) for i in range(m + 1)}
    return FiniteSimplicialSet(labels, faces, degens, coskeletal=0, name="const")


# ------------------------------------------------------------ matching

def matching_space(X, m, k=None, faces_of=None):
    """Compatible families (x_i)_{i in I} in X_{m-1} with d_i x_j = d_{j-1} x_i (i < j).

    I = [0, m] for the boundary (k None) and [0, m] minus k for a horn.
    Returns (families, matching map as a list of families, one per element
    of X_m when X_m is stored, else None).
    """
    if m == 0:
        if k is not None:
            raise ValueError("no horns in dimension 0")
        fams = [()]
        return fams, ([()] * X.size(0) if X.N >= 0 else None)
    I = [i for i in range(m + 1) if i != k]
    face = faces_of or (lambda lvl, i, x: X.d(lvl, i, x))
    size = X.size(m - 1)
    fams = []
    cur = []

    def ok(pos, x):
        j = I[pos]
        for q in range(pos):
            i = I[q]
            if m - 1 == 0:
                continue
            if face(m - 1, i, x) != face(m - 1, j - 1, cur[q]):
                return False
        return True

    def rec(pos):
        if pos == len(I):
            fams.append(tuple(cur))
            return
        for x in range(size):
            if ok(pos, x):
                cur.append(x)
                rec(pos + 1)
                cur.pop()

    rec(0)
    mm = None
    if m <= X.N:
        mm = [tuple(X.d(m, i, x) for i in I) for x in range(X.size(m))]
    return fams, mm


def horn_filler_search(X, m, k):
    """All horns Lambda^{m,k} -> X fillable?  Returns dict with a witness on failure."""
    if m > X.N:
        raise ValueError("level %d is not stored" % m)
    fams, mm = matching_space(X, m, k)
    image = set(mm)
    for f in fams:
        if f not in image:
            return {"fillable": False, "m": m, "k": k, "horn": [X.labels[m - 1][x] for x in f]}
    return {"fillable": True, "m": m, "k": k}


def hypergroupoid_check(X, n, max_level=None):
    """Partial matching maps surjective for all m, k and bijective for m > n.

    Returns {"ok": True} or the first failing (m, k) with the reason.
    """
    top = X.N if max_level is None else min(max_level, X.N)
    for m in range(1, top + 1):
        for k in range(m + 1):
            fams, mm = matching_space(X, m, k)
            image = set(mm)
            if len(image) != len(fams) or any(f not in image for f in fams):
                return {"ok": False, "m": m, "k": k, "reason": "not surjective"}
            if m > n and len(mm) != len(image):
                return {"ok": False, "m": m, "k": k, "reason": "not injective"}
    return {"ok": True, "checked_up_to": top}


class SimplicialMap:
    """Levelwise index maps f[m]: X_m -> Y_m."""

    def __init__(self, X, Y, maps):
        self.X, self.Y = X, Y
        self.maps = [list(f) for f in maps]

    def validate(self):
        X, Y = self.X, self.Y
        for m in range(1, len(self.maps)):
            for i in range(m + 1):
                for x in range(X.size(m)):
                    if self.maps[m - 1][X.d(m, i, x)] != Y.d(m, i, self.maps[m][x]):
                        return Validation(False, (m, "d%d" % i), "does not commute with faces", x)
        for m in range(0, len(self.maps) - 1):
            for i in range(m + 1):
                for x in range(X.size(m)):
                    if self.maps[m + 1][X.s(m, i, x)] != Y.s(m, i, self.maps[m][x]):
                        return Validation(False, (m, "s%d" % i), "does not commute with degeneracies", x)
        return Validation(True)


def trivial_hypergroupoid_check(f, n, max_level=None):
    """X_m -> M_{dDelta^m}X x_{M Y} Y_m surjective for all m and bijective for m >= n."""
    X, Y = f.X, f.Y
    top = min(X.N, Y.N, len(f.maps) - 1)
    if max_level is not None:
        top = min(top, max_level)
    for m in range(0, top + 1):
        fx, _ = matching_space(X, m)
        targets = set()
        for fam in fx:
            img = tuple(f.maps[m - 1][x] for x in fam) if m else ()
            for y in range(Y.size(m)):
                if Y.boundary(m, y) == img if m else True:
                    targets.add((fam, y))
        hits = [(X.boundary(m, x) if m else (), f.maps[m][x]) for x in range(X.size(m))]
        hs = set(hits)
        if hs != targets:
            return {"ok": False, "m": m, "reason": "not surjective"}
        if m >= n and len(hits) != len(hs):
            return {"ok": False, "m": m, "reason": "not injective"}
    return {"ok": True, "checked_up_to": top}


# ------------------------------------------------------------ groupoids

class FiniteGroupoid:
    """Objects, morphisms (name -> (source, target)) and a composition table.

    ``compose[(g, f)]`` is g o f for f: a -> b, g: b -> c.
    """

    def __init__(self, objects, morphisms, compose, identities):
        self.objects = list(objects)
        self.morphisms = dict(morphisms)
        self.compose = dict(compose)
        self.identities = dict(identities)
        v = self.validate()
        if not v.ok:
            raise ValueError("not a groupoid: %s" % v.message)

    def hom(self, a, b):
        return sorted(g for g, (s, t) in self.morphisms.items() if s == a and t == b)

    def validate(self):
        mor = self.morphisms
        for a in self.objects:
            e = self.identities.get(a)
            if e is None or mor[e] != (a, a):
                return Validation(False, a, "missing identity")
        for f, (a, b) in mor.items():
            for g, (b2, c) in mor.items():
                if b2 != b:
                    continue
                h = self.compose.get((g, f))
                if h is None or mor[h] != (a, c):
                    return Validation(False, (g, f), "composition undefined")
            if self.compose[(f, self.identities[a])] != f or self.compose[(self.identities[b], f)] != f:
                return Validation(False, f, "identity law fails")
            if not any(self.compose.get((g, f)) == self.identities[a] and self.compose.get((f, g)) == self.identities[b]
                       for g in self.hom(b, a)):
                return Validation(False, f, "not invertible")
        for f, (a, b) in mor.items():
            for g in [g for g, (s, _) in mor.items() if s == b]:
                for h in [h for h, (s, _) in mor.items() if s == mor[g][1]]:
                    if self.compose[(h, self.compose[(g, f)])] != self.compose[(self.compose[(h, g)], f)]:
                        return Validation(False, (h, g, f), "not associative")
        return Validation(True)

    def is_discrete(self):
        return all(g == self.identities[a] for g, (a, b) in self.morphisms.items())

    def is_contractible(self):
        return len(self.objects) >= 1 and all(len(self.hom(a, b)) == 1 for a in self.objects for b in self.objects)


def group_groupoid(elements, mul, identity):
    """One-object groupoid of a finite group; mul(g, h) is the product g h."""
    morphisms = {g: ("*", "*") for g in elements}
    compose = {(g, h): mul(g, h) for g in elements for h in elements}
    return FiniteGroupoid(["*"], morphisms, compose, {"*": identity})


def cyclic_group_groupoid(n):
    return group_groupoid(list(range(n)), lambda a, b: (a + b) % n, 0)


def random_groupoid(rng, max_objects=3, max_group=3):
    """Disjoint union of connected groupoids: objects x group Z/k with chosen torsor data."""
    objects, morphisms, compose, ids = [], {}, {}, {}
    ncomp = rng.randint(1, max_objects)
    for c in range(ncomp):
        size = rng.randint(1, max_objects)
        k = rng.randint(1, max_group)
        objs = ["o%d_%d" % (c, i) for i in range(size)]
        objects += objs
        # morphism a -> b labelled by g in Z/k; composition adds labels
        for a in range(size):
            for b in range(size):
                for g in range(k):
                    morphisms[(c, a, b, g)] = (objs[a], objs[b])
        for a in range(size):
            ids[objs[a]] = (c, a, a, 0)
            for b in range(size):
                for cc in range(size):
                    for g in range(k):
                        for h in range(k):
                            compose[((c, b, cc, h), (c, a, b, g))] = (c, a, cc, (g + h) % k)
    return FiniteGroupoid(objects, morphisms, compose, ids)


def nerve(G, max_level=3):
    """Nerve: level m is chains a_0 -> ... -> a_m; inner faces compose, outer ones drop ends."""
    levels = [[(a,) for a in G.objects]]
    by_src = {}
    for g, (s, t) in sorted(G.morphisms.items(), key=lambda kv: repr(kv[0])):
        by_src.setdefault(s, []).append(g)
    ends = {}
    for m in range(1, max_level + 1):
        lvl = []
        for ch in levels[-1]:
            last = ch[0] if m == 1 else G.morphisms[ch[-1]][1]
            for g in by_src.get(last, []):
                lvl.append(((g,) if m == 1 else ch + (g,)))
        levels.append(lvl)
    idx = [{c: i for i, c in enumerate(l)} for l in levels]

    def face(m, i, ch):
        if m == 1:
            s, t = G.morphisms[ch[0]]
            return (t,) if i == 0 else (s,)
        if i == 0:
            return ch[1:]
        if i == m:
            return ch[:-1]
        return ch[:i - 1] + (G.compose[(ch[i], ch[i - 1])],) + ch[i + 1:]

    def degen(m, i, ch):
        if m == 0:
            return (G.identities[ch[0]],)
        if i == 0:
            obj = G.morphisms[ch[0]][0]
        else:
            obj = G.morphisms[ch[i - 1]][1]
        return ch[:i] + (G.identities[obj],) + ch[i:]

    faces = {(m, i): [idx[m - 1][face(m, i, c)] for c in levels[m]]
             for m in range(1, max_level + 1) for i in range(m + 1)}
    degens = {(m, i): [idx[m + 1][degen(m, i, c)] for c in levels[m]]
              for m in range(max_level) for i in range(m + 1)}
    return FiniteSimplicialSet(levels, faces, degens, coskeletal=2, name="nerve")


# ------------------------------------------------------- (co)skeleta

def coskeleton(X, n, max_level=None):
    """cosk_n X: levels <= n from X, then iterated boundary matching spaces."""
    N = max_level if max_level is not None else n + 2
    labels = [list(range(X.size(m))) for m in range(min(n, X.N) + 1)]
    faces = {k: v for k, v in X.faces.items() if k[0] <= n}
    degens = {k: v for k, v in X.degens.items() if k[0] < n}
    fams_by = [None] * (N + 1)

    class _View:
        pass

    for m in range(n + 1, N + 1):
        view = _View()
        view.N = m - 1
        view.size = lambda lvl, labels=labels: len(labels[lvl])
        view.d = lambda lvl, i, x, faces=faces: faces[(lvl, i)][x]
        fams, _ = matching_space(view, m)
        fams_by[m] = fams
        labels.append(fams)
        index = {f: j for j, f in enumerate(fams)}
        for i in range(m + 1):
            faces[(m, i)] = [f[i] for f in fams]
        # degeneracies from level m-1 into level m via the mixed identities
        for j in range(m):
            col = []
            for y in range(len(labels[m - 1])):
                z = []
                for k in range(m + 1):
                    if k < j:
                        z.append(degens[(m - 2, j - 1)][faces[(m - 1, k)][y]])
                    elif k in (j, j + 1):
                        z.append(y)
                    else:
                        z.append(degens[(m - 2, j)][faces[(m - 1, k - 1)][y]])
                col.append(index[tuple(z)])
            degens[(m - 1, j)] = col
    return FiniteSimplicialSet(labels, faces, degens, coskeletal=n, name="cosk_%d" % n)


def skeleton(X, n):
    """sk_n X inside X: simplices that are iterated degeneracies of simplices of dimension <= n."""
    keep = [list(range(X.size(m))) for m in range(min(n, X.N) + 1)]
    for m in range(n + 1, X.N + 1):
        s = set()
        for j in range(m):
            for y in keep[m - 1]:
                s.add(X.s(m - 1, j, y))
        keep.append(sorted(s))
    new = [{x: i for i, x in enumerate(k)} for k in keep]
    labels = [[X.labels[m][x] for x in keep[m]] for m in range(X.N + 1)]
    faces = {(m, i): [new[m - 1][X.d(m, i, x)] for x in keep[m]] for (m, i) in X.faces}
    degens = {(m, i): [new[m + 1][X.s(m, i, x)] for x in keep[m]] for (m, i) in X.degens}
    return FiniteSimplicialSet(labels, faces, degens, name="sk_%d" % n)


def simplicial_maps(Y, X, max_level=None):
    """All simplicial maps Y -> X on levels up to max_level (brute-force backtracking)."""
    top = min(Y.N, X.N) if max_level is None else max_level
    found = []

    def level(m, f):
        if m > top:
            found.append([list(l) for l in f])
            return
        choices = []
        for y in range(Y.size(m)):
            opts = []
            for x in range(X.size(m)):
                if m and any(X.d(m, i, x) != f[m - 1][Y.d(m, i, y)] for i in range(m + 1)):
                    continue
                opts.append(x)
            choices.append(opts)
        for combo in product(*choices):
            good = True
            if m:
                for j in range(m):
                    for y0 in range(Y.size(m - 1)):
                        if combo[Y.s(m - 1, j, y0)] != X.s(m - 1, j, f[m - 1][y0]):
                            good = False
                            break
                    if not good:
                        break
            if good:
                level(m + 1, f + [list(combo)])

    level(0, [])
    return found


# ------------------------------------------------------ vector spaces

def _dm(rows, nrows, ncols):
    return DomainMatrix([[QQ(mpq(x)) for x in r] for r in rows], (nrows, ncols), QQ)


def meq(A, B):
    """Entrywise equality, independent of the dense/sparse storage format."""
    return A.shape == B.shape and A.to_list() == B.to_list()


def zeros(r, c):
    return DomainMatrix.zeros((r, c), QQ)


def eye(n):
    return DomainMatrix.eye(n, QQ)


def to_dm(M, r=None, c=None):
    if isinstance(M, DomainMatrix):
        return M
    r = len(M) if r is None else r
    c = (len(M[0]) if M else 0) if c is None else c
    return _dm(M, r, c)


def mat_rank(M):
    if 0 in M.shape:
        return 0
    return M.rank()


def kernel_basis(M):
    """Columns spanning the right kernel of M, as a DomainMatrix (ncols x k)."""
    r, c = M.shape
    if c == 0:
        return zeros(0, 0)
    if r == 0:
        return eye(c)
    N = M.nullspace()
    if N.shape[0] == 0:
        return zeros(c, 0)
    return N.transpose()


def column_space_coords(B, V):
    """Solve B X = V for X (B with independent columns); raises if impossible."""
    k = B.shape[1]
    if V.shape[1] == 0:
        return zeros(k, 0)
    if k == 0:
        if any(x for r in V.to_list() for x in r):
            raise ValueError("not in span")
        return zeros(0, V.shape[1])
    aug = B.hstack(V)
    R, piv = aug.rref()
    if any(p >= k for p in piv):
        raise ValueError("not in span")
    rows = R.to_list()
    out = [[QQ(0)] * V.shape[1] for _ in range(k)]
    for r, p in enumerate(piv):
        for j in range(V.shape[1]):
            out[p][j] = rows[r][k + j]
    return DomainMatrix(out, (k, V.shape[1]), QQ)


class ChainComplexQ:
    """Finite chain complex of Q-vector spaces: dims[k] and d[k]: C_k -> C_{k-1}."""

    def __init__(self, dims, d=None):
        self.dims = list(dims)
        self.d = {}
        d = d or {}
        for k in range(1, len(self.dims)):
            M = d.get(k)
            self.d[k] = to_dm(M, self.dims[k - 1], self.dims[k]) if M is not None else zeros(self.dims[k - 1], self.dims[k])
        for k in range(2, len(self.dims)):
            if any(x for r in (self.d[k - 1] * self.d[k]).to_list() for x in r):
                raise ValueError("d^2 != 0 at degree %d" % k)

    def top(self):
        return len(self.dims) - 1

    def dim(self, k):
        return self.dims[k] if 0 <= k < len(self.dims) else 0

    def diff(self, k):
        if 1 <= k < len(self.dims):
            return self.d[k]
        return zeros(self.dim(k - 1), self.dim(k))

    def homology_ranks(self):
        return [self.dims[k] - mat_rank(self.diff(k)) - mat_rank(self.diff(k + 1)) for k in range(len(self.dims))]

    def equals(self, other):
        if self.dims != other.dims:
            return False
        return all(meq(self.d[k], other.d[k]) for k in self.d)


def shifted_line(n):
    """Q[n]: Q in degree n."""
    dims = [0] * n + [1]
    return ChainComplexQ(dims)


def random_chain_complex(rng, max_degree=2, max_dim=2):
    dims = [rng.randint(0, max_dim) for _ in range(max_degree + 1)]
    d = {}
    for k in range(1, len(dims)):
        # random map killing the image of the next one: choose d_k = P_k with d_{k-1} d_k = 0
        prev = d.get(k - 1)
        if prev is None:
            ker = eye(dims[k - 1])
        else:
            ker = kernel_basis(to_dm(prev, dims[k - 2], dims[k - 1]))
        kk = ker.shape[1]
        R = _dm([[rng.randint(-2, 2) for _ in range(dims[k])] for _ in range(kk)], kk, dims[k])
        M = ker * R if kk else zeros(dims[k - 1], dims[k])
        d[k] = M.to_list()
    return ChainComplexQ(dims, {k: to_dm(v, dims[k - 1], dims[k]) for k, v in d.items()})


class SimplicialVectorSpace:
    """dims[m] with faces[(m, i)] (dims[m-1] x dims[m]) and degens[(m, i)] (dims[m+1] x dims[m])."""

    def __init__(self, dims, faces, degens, check=True):
        self.dims = list(dims)
        self.N = len(self.dims) - 1
        self.faces = {k: to_dm(v, self.dims[k[0] - 1], self.dims[k[0]]) for k, v in faces.items()}
        self.degens = {k: to_dm(v, self.dims[k[0] + 1], self.dims[k[0]]) for k, v in degens.items()}
        if check:
            v = self.validate()
            if not v.ok:
                raise ValueError("simplicial identities fail: %s" % (v.item,))

    def d(self, m, i):
        return self.faces[(m, i)]

    def s(self, m, i):
        return self.degens[(m, i)]

    def validate(self):
        N = self.N
        for m in range(2, N + 1):
            for j in range(m + 1):
                for i in range(j):
                    if not meq(self.d(m - 1, i) * self.d(m, j), self.d(m - 1, j - 1) * self.d(m, i)):
                        return Validation(False, (m, "d%dd%d" % (i, j)), "face identity fails")
        for m in range(0, N - 1):
            for j in range(m + 1):
                for i in range(j + 1):
                    if not meq(self.s(m + 1, i) * self.s(m, j), self.s(m + 1, j + 1) * self.s(m, i)):
                        return Validation(False, (m, "s%ds%d" % (i, j)), "degeneracy identity fails")
        for m in range(0, N):
            for j in range(m + 1):
                for i in range(m + 2):
                    lhs = self.d(m + 1, i) * self.s(m, j)
                    if i in (j, j + 1):
                        rhs = eye(self.dims[m])
                    elif i < j:
                        rhs = self.s(m - 1, j - 1) * self.d(m, i)
                    else:
                        rhs = self.s(m - 1, j) * self.d(m, i - 1)
                    if not meq(lhs, rhs):
                        return Validation(False, (m + 1, "d%ds%d" % (i, j)), "mixed identity fails")
        for m in range(0, N):
            for j in range(m + 1):
                if mat_rank(self.s(m, j)) != self.dims[m]:
                    return Validation(False, (m, "s%d" % j), "degeneracy not injective")
        return Validation(True)

    def moore_complex(self):
        """(A, sum (-1)^i d_i)."""
        d = {}
        for m in range(1, self.N + 1):
            M = zeros(self.dims[m - 1], self.dims[m])
            for i in range(m + 1):
                M = M + self.d(m, i) if i % 2 == 0 else M - self.d(m, i)
            d[m] = M
        return ChainComplexQ(self.dims, d)

    def degenerate_span(self, m):
        if m == 0:
            return zeros(self.dims[0], 0)
        blocks = [self.s(m - 1, j) for j in range(m)]
        M = blocks[0]
        for b in blocks[1:]:
            M = M.hstack(b)
        return M


class NormalizedComplex(ChainComplexQ):
    """N A with the chosen bases: basis[m] is a dims[m] x n_m matrix."""

    def __init__(self, dims, d, basis):
        super().__init__(dims, d)
        self.basis = basis


def normalize(A):
    """N_m A = intersection of ker d_i for i > 0, with differential d_0."""
    bases = []
    dims = []
    for m in range(A.N + 1):
        if m == 0:
            B = eye(A.dims[0])
        else:
            M = A.d(m, 1)
            for i in range(2, m + 1):
                M = M.vstack(A.d(m, i))
            B = kernel_basis(M) if A.dims[m] else zeros(0, 0)
        bases.append(B)
        dims.append(B.shape[1])
    d = {}
    for m in range(1, A.N + 1):
        img = A.d(m, 0) * bases[m] if dims[m] else zeros(A.dims[m - 1], 0)
        d[m] = column_space_coords(bases[m - 1], img) if dims[m] else zeros(dims[m - 1], 0)
    return NormalizedComplex(dims, d, bases)


def moore_homology(A):
    """Ranks of the Moore complex homology (the top stored degree is truncated)."""
    return A.moore_complex().homology_ranks()


def surjections(m, k):
    """Order-preserving surjections [m] -> [k] as tuples."""
    return [s for s in _monotone(m, k) if s[0] == 0 and s[-1] == k and len(set(s)) == k + 1]


def _epi_mono(phi):
    """Factor a monotone map phi (tuple) as mono o epi: returns (epi tuple, image tuple)."""
    im = sorted(set(phi))
    pos = {v: i for i, v in enumerate(im)}
    return tuple(pos[v] for v in phi), tuple(im)


class Denormalization(SimplicialVectorSpace):
    """N^{-1} C: level m is the sum over surjections [m] -> [k] of C_k."""

    def __init__(self, C, max_level):
        self.C = C
        self.summands = []
        offs = []
        dims = []
        for m in range(max_level + 1):
            items, off, tot = [], {}, 0
            for k in range(0, min(m, C.top()) + 1):
                for eta in surjections(m, k):
                    off[eta] = tot
                    items.append(eta)
                    tot += C.dim(k)
            self.summands.append(items)
            offs.append(off)
            dims.append(tot)
        self.offsets = offs
        faces = {}
        degens = {}
        for m in range(1, max_level + 1):
            for i in range(m + 1):
                delta = tuple(j if j < i else j + 1 for j in range(m))  # d^i: [m-1] -> [m]
                M = [[QQ(0)] * dims[m] for _ in range(dims[m - 1])]
                for eta in self.summands[m]:
                    k = eta[-1]
                    phi = tuple(eta[j] for j in delta)
                    epi, im = _epi_mono(phi)
                    if len(im) == k + 1:
                        self._place(M, offs[m - 1][epi], offs[m][eta], eye(C.dim(k)))
                    elif len(im) == k and im == tuple(range(1, k + 1)):
                        self._place(M, offs[m - 1][epi], offs[m][eta], C.diff(k))
                faces[(m, i)] = DomainMatrix(M, (dims[m - 1], dims[m]), QQ)
        for m in range(0, max_level):
            for i in range(m + 1):
                sig = tuple(j if j <= i else j - 1 for j in range(m + 2))  # s^i: [m+1] -> [m]
                M = [[QQ(0)] * dims[m] for _ in range(dims[m + 1])]
                for eta in self.summands[m]:
                    k = eta[-1]
                    new = tuple(eta[j] for j in sig)
                    self._place(M, offs[m + 1][new], offs[m][eta], eye(C.dim(k)))
                degens[(m, i)] = DomainMatrix(M, (dims[m + 1], dims[m]), QQ)
        super().__init__(dims, faces, degens)

    @staticmethod
    def _place(M, r0, c0, B):
        for r, row in enumerate(B.to_list()):
            for c, v in enumerate(row):
                if v:
                    M[r0 + r][c0 + c] = v

    def identity_summand(self, m):
        """Columns of the inclusion of C_m as the summand of id: [m] -> [m]."""
        k = m
        if m > self.C.top():
            return zeros(self.dims[m], 0)
        eta = tuple(range(m + 1))
        off = self.offsets[m][eta]
        M = [[QQ(0)] * self.C.dim(k) for _ in range(self.dims[m])]
        for j in range(self.C.dim(k)):
            M[off + j][j] = QQ(1)
        return DomainMatrix(M, (self.dims[m], self.C.dim(k)), QQ)


def denormalize(C, max_level):
    return Denormalization(C, max_level)


def eilenberg_maclane(n, max_level):
    """K(Q, n) as the denormalization of Q[n]."""
    return Denormalization(shifted_line(n), max_level)


def roundtrip_normalize_denormalize(C, max_level=None):
    """Check N(N^{-1} C) = C: same bases (the identity summands) and same differential."""
    top = C.top() if max_level is None else max_level
    K = Denormalization(C, top)
    NK = normalize(K)
    for m in range(top + 1):
        Im = K.identity_summand(m)
        if NK.dims[m] != C.dim(m):
            return False
        if NK.dims[m] == 0:
            continue
        try:
            P = column_space_coords(NK.basis[m], Im)
        except ValueError:
            return False
        if mat_rank(P) != C.dim(m):
            return False
    for m in range(1, top + 1):
        if C.dim(m) == 0 or C.dim(m - 1) == 0:
            continue
        img = K.d(m, 0) * K.identity_summand(m)
        coords = column_space_coords(K.identity_summand(m - 1), img)
        if not meq(coords, C.diff(m)):
            return False
    return True


def free_vector_space(X):
    """Q.X: the free simplicial vector space on a finite simplicial set."""
    def perm(f, r, c):
        M = [[QQ(0)] * c for _ in range(r)]
        for j, i in enumerate(f):
            M[i][j] = QQ(1)
        return DomainMatrix(M, (r, c), QQ)

    dims = X.sizes()
    faces = {k: perm(v, dims[k[0] - 1], dims[k[0]]) for k, v in X.faces.items()}
    degens = {k: perm(v, dims[k[0] + 1], dims[k[0]]) for k, v in X.degens.items()}
    return SimplicialVectorSpace(dims, faces, degens)


# ------------------------------------------------------- bisimplicial

class BisimplicialQVect:
    """Levels (p, q) with horizontal maps (changing p) and vertical maps (changing q)."""

    def __init__(self, dims, hfaces, vfaces, hdegens, vdegens, max_level):
        self.dims = dims
        self.M = max_level
        self.hf, self.vf, self.hs, self.vs = hfaces, vfaces, hdegens, vdegens

    def dim(self, p, q):
        return self.dims[(p, q)]

    def diagonal(self):
        M = self.M
        faces = {(m, i): self.hf[(m, m - 1, i)] * self.vf[(m, m, i)] for m in range(1, M + 1) for i in range(m + 1)}
        degens = {(m, i): self.hs[(m, m + 1, i)] * self.vs[(m, m, i)] for m in range(M) for i in range(m + 1)}
        return SimplicialVectorSpace([self.dims[(m, m)] for m in range(M + 1)], faces, degens)


def _kron(A, B):
    a, b = A.to_list(), B.to_list()
    ra, ca = A.shape
    rb, cb = B.shape
    out = [[QQ(0)] * (ca * cb) for _ in range(ra * rb)]
    for i in range(ra):
        for j in range(ca):
            x = a[i][j]
            if not x:
                continue
            for k in range(rb):
                for l in range(cb):
                    y = b[k][l]
                    if y:
                        out[i * rb + k][j * cb + l] = x * y
    return DomainMatrix(out, (ra * rb, ca * cb), QQ)


def external_product(A, B, max_level):
    """(A x B)_{p,q} = A_p (x) B_q with A acting horizontally."""
    dims, hf, vf, hs, vs = {}, {}, {}, {}, {}
    for p in range(max_level + 1):
        for q in range(max_level + 1):
            dims[(p, q)] = A.dims[p] * B.dims[q]
    for p in range(max_level + 1):
        for q in range(max_level + 1):
            if p:
                for i in range(p + 1):
                    hf[(p, q, i)] = _kron(A.d(p, i), eye(B.dims[q]))
            if q:
                for i in range(q + 1):
                    vf[(p, q, i)] = _kron(eye(A.dims[p]), B.d(q, i))
            if p < max_level:
                for i in range(p + 1):
                    hs[(p, q, i)] = _kron(A.s(p, i), eye(B.dims[q]))
            if q < max_level:
                for i in range(q + 1):
                    vs[(p, q, i)] = _kron(eye(A.dims[p]), B.s(q, i))
    return BisimplicialQVect(dims, hf, vf, hs, vs, max_level)


def _bi_normal_basis(B, p, q):
    """Basis of N^h_p N^v_q B_{p,q}: common kernel of d^h_i (i>0) and d^v_j (j>0)."""
    blocks = [B.hf[(p, q, i)] for i in range(1, p + 1)] + [B.vf[(p, q, j)] for j in range(1, q + 1)]
    n = B.dim(p, q)
    if not blocks:
        return eye(n)
    M = blocks[0]
    for b in blocks[1:]:
        M = M.vstack(b)
    return kernel_basis(M) if n else zeros(0, 0)


def shuffles(p, q):
    """(p, q)-shuffles as (mu, nu, sign): mu, nu partition {0..p+q-1}."""
    out = []
    for mu in combinations(range(p + q), p):
        nu = tuple(x for x in range(p + q) if x not in mu)
        perm = list(mu) + list(nu)
        inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
        out.append((mu, nu, -1 if inv & 1 else 1))
    return out


class TotalNormalized:
    """Tot of the bi-normalized double complex up to total degree top."""

    def __init__(self, B, top):
        self.B, self.top = B, top
        self.basis = {}
        self.blocks = {}
        for n in range(top + 1):
            offs, tot = {}, 0
            for p in range(n + 1):
                q = n - p
                Bpq = _bi_normal_basis(B, p, q)
                self.basis[(p, q)] = Bpq
                offs[(p, q)] = tot
                tot += Bpq.shape[1]
            self.blocks[n] = (offs, tot)

    def dim(self, n):
        return self.blocks[n][1] if 0 <= n <= self.top else 0

    def differential(self, n):
        """d = d^h_0 + (-1)^p d^v_0 on Tot_n -> Tot_{n-1}."""
        offs_t, tot_t = self.blocks[n - 1]
        offs_s, tot_s = self.blocks[n]
        M = [[QQ(0)] * tot_s for _ in range(tot_t)]
        B = self.B
        for p in range(n + 1):
            q = n - p
            src = self.basis[(p, q)]
            if src.shape[1] == 0:
                continue
            if p >= 1:
                img = B.hf[(p, q, 0)] * src
                c = column_space_coords(self.basis[(p - 1, q)], img)
                Denormalization._place(M, offs_t[(p - 1, q)], offs_s[(p, q)], c)
            if q >= 1:
                img = B.vf[(p, q, 0)] * src
                c = column_space_coords(self.basis[(p, q - 1)], img)
                if p % 2:
                    c = -c
                Denormalization._place(M, offs_t[(p, q - 1)], offs_s[(p, q)], c)
        return DomainMatrix(M, (tot_t, tot_s), QQ)

    def complex(self):
        return ChainComplexQ([self.dim(n) for n in range(self.top + 1)],
                             {n: self.differential(n) for n in range(1, self.top + 1)})


def ez_shuffle(B, top):
    """Matrices of nabla: Tot_n -> diag(B)_n for n <= top, on the chosen Tot bases."""
    T = TotalNormalized(B, top)
    out = {}
    for n in range(top + 1):
        offs, tot = T.blocks[n]
        cols = zeros(B.dim(n, n), tot)
        mats = []
        for p in range(n + 1):
            q = n - p
            src = T.basis[(p, q)]
            if src.shape[1] == 0:
                continue
            acc = zeros(B.dim(n, n), B.dim(p, q))
            for mu, nu, sign in shuffles(p, q):
                # vertical degeneracies indexed by mu raise q by p; horizontal ones by nu raise p by q
                M = eye(B.dim(p, q))
                pp, qq = p, q
                for j in mu:
                    M = B.vs[(pp, qq, j)] * M
                    qq += 1
                for j in nu:
                    M = B.hs[(pp, qq, j)] * M
                    pp += 1
                acc = acc + M if sign > 0 else acc - M
            mats.append((offs[(p, q)], acc * src))
        full = [[QQ(0)] * tot for _ in range(B.dim(n, n))]
        for off, blk in mats:
            Denormalization._place(full, 0, off, blk)
        out[n] = DomainMatrix(full, (B.dim(n, n), tot), QQ)
    return T, out


def alexander_whitney(B, T):
    """Matrices of AW: diag(B)_n -> Tot_n, component (i, j) = (d^h_{i+1})^j (d^v_0)^i.

    The image is expressed in the bi-normalized basis after projecting away
    degenerate parts: we solve in the span of the normalized basis plus the
    degenerate subspace and keep the normalized coordinates.
    """
    out = {}
    for n in range(T.top + 1):
        offs, tot = T.blocks[n]
        rows = [[QQ(0)] * B.dim(n, n) for _ in range(tot)]
        for i in range(n + 1):
            j = n - i
            M = eye(B.dim(n, n))
            qq = n
            for _ in range(i):
                M = B.vf[(n, qq, 0)] * M
                qq -= 1
            pp = n
            for _ in range(j):
                M = B.hf[(pp, qq, i + 1)] * M
                pp -= 1
            # now M: B_{n,n} -> B_{i,j}; project to normalized coordinates
            P = _normal_projection(B, i, j, T.basis[(i, j)])
            blk = P * M
            Denormalization._place(rows, offs[(i, j)], 0, blk)
        out[n] = DomainMatrix(rows, (tot, B.dim(n, n)), QQ)
    return out


def _normal_projection(B, p, q, basis):
    """Projection B_{p,q} -> N^h N^v B_{p,q} along the degenerate subspace."""
    n = B.dim(p, q)
    degs = [B.hs[(p - 1, q, i)] for i in range(p)] + [B.vs[(p, q - 1, j)] for j in range(q)]
    k = basis.shape[1]
    if not degs:
        D = zeros(n, 0)
    else:
        D = degs[0]
        for x in degs[1:]:
            D = D.hstack(x)
    full = basis.hstack(D) if D.shape[1] else basis
    # coordinates of each standard vector in basis + degenerate span
    R, piv = full.hstack(eye(n)).rref()
    rows = R.to_list()
    m = full.shape[1]
    out = [[QQ(0)] * n for _ in range(k)]
    for r, pcol in enumerate(piv):
        if pcol < k:
            for c in range(n):
                out[pcol][c] = rows[r][m + c]
    return DomainMatrix(out, (k, n), QQ)


def aw_after_ez_is_identity(B, top):
    T, ez = ez_shuffle(B, top)
    aw = alexander_whitney(B, T)
    for n in range(top + 1):
        if T.dim(n) == 0:
            continue
        if not meq(aw[n] * ez[n], eye(T.dim(n))):
            return False
    return True


def ez_is_chain_map(B, top):
    T, ez = ez_shuffle(B, top)
    for n in range(1, top + 1):
        # nabla lands in N diag; compare d_0 nabla with nabla d on ambient vectors
        left = B.diagonal().d(n, 0) * ez[n]
        right = ez[n - 1] * T.differential(n)
        if not meq(left, right):
            return False
    return True


def ez_is_quasi_iso(B, top):
    """Cone of nabla into N diag B is acyclic in degrees < top."""
    T, ez = ez_shuffle(B, top)
    D = B.diagonal()
    ND = normalize(D)
    # nabla in normalized coordinates
    f = {n: column_space_coords(ND.basis[n], ez[n]) for n in range(top + 1)}
    tot = T.complex()
    dims = []
    diffs = {}
    for n in range(top + 1):
        dims.append(tot.dim(n - 1) + ND.dims[n])
    for n in range(1, top + 1):
        a_prev = tot.dim(n - 1)
        a_pp = tot.dim(n - 2)
        rows = a_pp + ND.dims[n - 1]
        cols = a_prev + ND.dims[n]
        M = [[QQ(0)] * cols for _ in range(rows)]
        if n - 1 >= 1 and a_prev:
            Denormalization._place(M, 0, 0, -tot.diff(n - 1))
        if a_prev:
            Denormalization._place(M, a_pp, 0, f[n - 1])
        if ND.dims[n]:
            Denormalization._place(M, a_pp, a_prev, ND.diff(n))
        diffs[n] = DomainMatrix(M, (rows, cols), QQ)
    cone = ChainComplexQ(dims, diffs)
    h = cone.homology_ranks()
    return all(x == 0 for x in h[:top])


def random_product_bisimplicial(rng, max_level=3, max_total=12):
    """External product of two denormalized random complexes with small total dimension."""
    while True:
        C1 = random_chain_complex(rng, max_degree=1, max_dim=2)
        C2 = random_chain_complex(rng, max_degree=1, max_dim=2)
        t = sum(C1.dims) * sum(C2.dims)
        if 0 < t <= max_total:
            break
    A = Denormalization(C1, max_level)
    Bv = Denormalization(C2, max_level)
    return external_product(A, Bv, max_level), (C1, C2)
