"""Free graded-commutative algebras over Q.

Generators carry a chain degree and a form weight; the Koszul sign uses the
parity of their sum.  A monomial is an exponent tuple in declaration order,
with exponents of odd generators equal to 0 or 1.
"""

from gmpy2 import mpq

from .expr import DslError, evaluate, parse_expression
from .poly import ONE, ZERO, as_q, fmt_q


class Generator:
    __slots__ = ("name", "degree", "weight")

    def __init__(self, name, degree, weight=0):
        self.name = name
        self.degree = int(degree)
        self.weight = int(weight)

    @property
    def parity(self):
        return (self.degree + self.weight) % 2

    def __eq__(self, other):
        return isinstance(other, Generator) and (self.name, self.degree, self.weight) == (other.name, other.degree, other.weight)

    def __hash__(self):
        return hash((self.name, self.degree, self.weight))

    def __repr__(self):
        if self.weight:
            return "Generator(%r, %d, weight=%d)" % (self.name, self.degree, self.weight)
        return "Generator(%r, %d)" % (self.name, self.degree)


def mono_sign(m1, m2, odd):
    """Koszul sign of m1*m2 (as +1/-1), or 0 if an odd generator repeats."""
    s = 0
    count = 0  # odd factors of m1 with index greater than the current one
    n1 = [i for i in odd if m1[i]]
    for i in odd:
        if m2[i]:
            if m1[i]:
                return 0
            s += sum(1 for j in n1 if j > i)
    return -1 if s & 1 else 1


class FreeGCA:
    """The free graded-commutative algebra on a list of generators."""

    def __init__(self, gens):
        gens = [g if isinstance(g, Generator) else Generator(*g) for g in gens]
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        for g in gens:
            if g.degree < 0 or g.weight < 0:
                raise ValueError("generator %s has negative degree" % g.name)
        self.gens = tuple(gens)
        self.n = len(gens)
        self.index = {g.name: i for i, g in enumerate(gens)}
        self.odd = tuple(i for i, g in enumerate(gens) if g.parity)
        self.is_odd = tuple(bool(g.parity) for g in gens)
        self.degrees = tuple(g.degree for g in gens)
        self.weights = tuple(g.weight for g in gens)
        self.names = tuple(names)

    def __eq__(self, other):
        return isinstance(other, FreeGCA) and self.gens == other.gens

    def __hash__(self):
        return hash(self.gens)

    def __repr__(self):
        return "FreeGCA(%r)" % (list(self.gens),)

    # -- elements
    def zero(self):
        return GradedElement(self, {})

    def one(self):
        return GradedElement(self, {(0,) * self.n: ONE})

    def const(self, c):
        c = as_q(c)
        return GradedElement(self, {(0,) * self.n: c} if c else {})

    def gen(self, name):
        e = [0] * self.n
        e[self.index[name]] = 1
        return GradedElement(self, {tuple(e): ONE})

    def monomial(self, m, c=ONE):
        return GradedElement(self, {tuple(m): mpq(c)})

    def parse(self, text, macros=None):
        return evaluate(parse_expression(text), _GcaAdapter(self), macros)

    # -- gradings
    def mono_degree(self, m):
        return sum(e * d for e, d in zip(m, self.degrees))

    def mono_weight(self, m):
        return sum(e * w for e, w in zip(m, self.weights))

    def mono_parity(self, m):
        return sum(m[i] for i in self.odd) & 1

    def mul_mono(self, m1, m2):
        """(sign, m1*m2) with sign 0 when the product vanishes."""
        s = mono_sign(m1, m2, self.odd)
        if not s:
            return 0, None
        return s, tuple(a + b for a, b in zip(m1, m2))

    def mul(self, a, b):
        r = {}
        odd = self.odd
        for m1, c1 in a.terms.items():
            n1 = [i for i in odd if m1[i]]
            for m2, c2 in b.terms.items():
                s = 0
                dead = False
                for i in odd:
                    if m2[i]:
                        if m1[i]:
                            dead = True
                            break
                        for j in n1:
                            if j > i:
                                s += 1
                if dead:
                    continue
                m = tuple(x + y for x, y in zip(m1, m2))
                c = c1 * c2
                if s & 1:
                    c = -c
                v = r.get(m, ZERO) + c
                if v:
                    r[m] = v
                else:
                    r.pop(m, None)
        return GradedElement(self, r)

    def monomials(self, degree, weight=None, allowed=None, max_weight=None):
        """All monomials of the given chain degree (and weight, if given).

        Only generators whose indices are in ``allowed`` are used; by
        default the generators of positive chain degree or positive weight.
        Generators of degree 0 and weight 0 would make the set infinite.
        """
        if allowed is None:
            allowed = [i for i, g in enumerate(self.gens) if g.degree > 0 or g.weight > 0]
        allowed = list(allowed)
        for i in allowed:
            if self.degrees[i] == 0 and self.weights[i] == 0:
                raise ValueError("generator %s has degree 0 and weight 0" % self.names[i])
        out = []
        wcap = weight if weight is not None else max_weight

        def rec(k, e, deg, wt):
            if deg > degree or (wcap is not None and wt > wcap):
                return
            if k == len(allowed):
                if deg == degree and (weight is None or wt == weight):
                    out.append(tuple(e))
                return
            i = allowed[k]
            d, w = self.degrees[i], self.weights[i]
            top = 1 if self.is_odd[i] else None
            p = 0
            while True:
                if top is not None and p > top:
                    break
                nd = deg + p * d
                nw = wt + p * w
                if nd > degree or (wcap is not None and nw > wcap):
                    break
                if d == 0 and w == 0 and p > 0:
                    break
                if d == 0 and wcap is None and p > 0:
                    raise ValueError("unbounded monomial enumeration; pass a weight bound")
                e[i] = p
                rec(k + 1, e, nd, nw)
                e[i] = 0
                p += 1

        rec(0, [0] * self.n, 0, 0)
        out.sort(key=lambda m: self.sort_key(m), reverse=True)
        return out

    def sort_key(self, m):
        return (sum(m),) + tuple(-x for x in reversed(m))

    def fmt_mono(self, m):
        parts = []
        for name, e in zip(self.names, m):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append("%s^%d" % (name, e))
        return "*".join(parts)


def monomial_basis(alg, degree):
    """Monomials of chain degree ``degree`` in the positive-degree generators."""
    allowed = [i for i, g in enumerate(alg.gens) if g.degree > 0]
    return alg.monomials(degree, allowed=allowed)


class _GcaAdapter:
    def __init__(self, alg):
        self.alg = alg

    def const(self, c):
        return self.alg.const(c)

    def name(self, name, span):
        if name not in self.alg.index:
            raise DslError("unbound reference %r" % name, span, kind="semantic")
        return self.alg.gen(name)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def pow(self, a, k):
        return a ** k

    def as_constant(self, a):
        if all(not any(m) for m in a.terms):
            return a.terms.get((0,) * self.alg.n, ZERO)
        return None

    def scale(self, a, c):
        return a.scale(c)


class GradedElement:
    """An element of a FreeGCA: dict monomial -> coefficient."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms):
        self.alg = alg
        self.terms = {m: c for m, c in terms.items() if c}

    def _coerce(self, other):
        if isinstance(other, GradedElement):
            return other
        return self.alg.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        r = dict(self.terms)
        for m, c in other.terms.items():
            v = r.get(m, ZERO) + c
            if v:
                r[m] = v
            else:
                r.pop(m, None)
        return GradedElement(self.alg, r)

    __radd__ = __add__

    def __neg__(self):
        return GradedElement(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, GradedElement):
            return self.alg.mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k):
        r = self.alg.one()
        for _ in range(k):
            r = r * self
        return r

    def scale(self, c):
        c = as_q(c) if not isinstance(c, type(ONE)) else c
        if not c:
            return GradedElement(self.alg, {})
        return GradedElement(self.alg, {m: v * c for m, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, GradedElement):
            other = self.alg.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def degrees(self):
        return {self.alg.mono_degree(m) for m in self.terms}

    def weights(self):
        return {self.alg.mono_weight(m) for m in self.terms}

    def is_homogeneous(self):
        return len(self.degrees()) <= 1 and len(self.weights()) <= 1 and len({self.alg.mono_parity(m) for m in self.terms}) <= 1

    @property
    def degree(self):
        d = self.degrees()
        if len(d) != 1:
            raise ValueError("element is not homogeneous (or zero)")
        return next(iter(d))

    @property
    def weight(self):
        w = self.weights()
        if len(w) != 1:
            raise ValueError("element is not homogeneous (or zero)")
        return next(iter(w))

    @property
    def parity(self):
        p = {self.alg.mono_parity(m) for m in self.terms}
        if len(p) != 1:
            raise ValueError("element is not homogeneous (or zero)")
        return next(iter(p))

    def __repr__(self):
        return "GradedElement(%s)" % str(self)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for m in sorted(self.terms, key=self.alg.sort_key, reverse=True):
            c = self.terms[m]
            ms = self.alg.fmt_mono(m)
            neg = c < 0
            a = -c if neg else c
            if ms:
                body = ms if a == 1 else "%s*%s" % (fmt_q(a), ms)
            else:
                body = fmt_q(a)
            if not out:
                out.append("-" + body if neg else body)
            else:
                out.append(("- " if neg else "+ ") + body)
        return " ".join(out)


class Derivation:
    """A graded derivation determined by its values on generators.

    ``shift`` is the change in chain degree and ``weight_shift`` the change
    in form weight; the derivation is odd when their sum is odd.
    Generators missing from ``images`` map to zero.
    """

    def __init__(self, alg, images, shift=-1, weight_shift=0):
        self.alg = alg
        self.shift = shift
        self.weight_shift = weight_shift
        self.parity = (shift + weight_shift) % 2
        self.images = {}
        for name, v in images.items():
            if isinstance(v, str):
                v = alg.parse(v)
            self.images[name] = v
        self._cache = {}

    def on_generator(self, i):
        return self.images.get(self.alg.names[i], self.alg.zero())

    def on_monomial(self, m):
        r = self._cache.get(m)
        if r is not None:
            return r
        alg = self.alg
        out = alg.zero()
        n = alg.n
        for i in range(n):
            e = m[i]
            if not e:
                continue
            Dg = self.on_generator(i)
            if not Dg:
                continue
            prefix = tuple(m[j] if j < i else 0 for j in range(n))
            suffix = tuple(m[j] if j > i else 0 for j in range(n))
            sign = -1 if (self.parity and alg.mono_parity(prefix)) else 1
            mid_e = [0] * n
            mid_e[i] = e - 1
            piece = alg.monomial(prefix) * alg.monomial(tuple(mid_e), e) * Dg * alg.monomial(suffix)
            if sign < 0:
                piece = -piece
            out = out + piece
        self._cache[m] = out
        return out

    def __call__(self, x):
        return apply_derivation(self, x)


def apply_derivation(D, x):
    out = {}
    for m, c in x.terms.items():
        for m2, c2 in D.on_monomial(m).terms.items():
            v = out.get(m2, ZERO) + c * c2
            if v:
                out[m2] = v
            else:
                out.pop(m2, None)
    return GradedElement(D.alg, out)


def mul(a, b):
    return a.alg.mul(a, b)
