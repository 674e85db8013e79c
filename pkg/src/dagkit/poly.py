"""Sparse multivariate polynomials over Q.

A polynomial is a plain dict mapping exponent tuples to nonzero ``mpq``
coefficients.  Module elements (vectors) are dicts keyed by
``(position, exponent)``.  ``PolyRing`` carries variable names and the
monomial order; the arithmetic helpers are free functions so the Groebner
engine can use them without object overhead.
"""

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)


def as_q(c):
    """Coerce ints, strings like '3/4' and mpq to mpq."""
    if isinstance(c, str):
        if "/" in c:
            p, q = c.split("/")
            return mpq(int(p), int(q))
        return mpq(int(c))
    return mpq(c)


def fmt_q(c):
    c = mpq(c)
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


# ---------------------------------------------------------------- polys

def p_add(a, b):
    r = dict(a)
    for m, c in b.items():
        v = r.get(m)
        if v is None:
            r[m] = c
        else:
            v = v + c
            if v:
                r[m] = v
            else:
                del r[m]
    return r


def p_sub(a, b):
    r = dict(a)
    for m, c in b.items():
        v = r.get(m)
        if v is None:
            r[m] = -c
        else:
            v = v - c
            if v:
                r[m] = v
            else:
                del r[m]
    return r


def p_scale(a, c):
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def m_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def m_divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def m_div(b, a):
    return tuple(y - x for x, y in zip(a, b))


def m_lcm(a, b):
    return tuple(x if x > y else y for x, y in zip(a, b))


def p_mul(a, b):
    r = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            v = r.get(m, ZERO) + c1 * c2
            if v:
                r[m] = v
            else:
                r.pop(m, None)
    return r


def p_mul_term(a, mono, c):
    if not c:
        return {}
    return {tuple(x + y for x, y in zip(m, mono)): v * c for m, v in a.items()}


def p_pow(a, k, n):
    r = {(0,) * n: ONE}
    base = a
    while k:
        if k & 1:
            r = p_mul(r, base)
        k >>= 1
        if k:
            base = p_mul(base, base)
    return r


def p_const(c, n):
    c = as_q(c)
    return {(0,) * n: c} if c else {}


def p_var(i, n):
    e = [0] * n
    e[i] = 1
    return {tuple(e): ONE}


def p_subs(a, images, n_target):
    """Ring map sending variable i to polynomial ``images[i]``."""
    r = {}
    cache = {}
    for m, c in a.items():
        term = {(0,) * n_target: c}
        for i, e in enumerate(m):
            if e:
                key = (i, e)
                pw = cache.get(key)
                if pw is None:
                    pw = p_pow(images[i], e, n_target)
                    cache[key] = pw
                term = p_mul(term, pw)
        r = p_add(r, term)
    return r


def p_is_const(a):
    return all(not any(m) for m in a)


def p_embed(a, index_map, n_target):
    """Rename variables: source variable i goes to target index index_map[i]."""
    r = {}
    for m, c in a.items():
        e = [0] * n_target
        for i, k in enumerate(m):
            if k:
                e[index_map[i]] += k
        r[tuple(e)] = c
    return r


def p_diff(a, i):
    r = {}
    for m, c in a.items():
        if m[i]:
            e = list(m)
            e[i] -= 1
            r[tuple(e)] = c * m[i]
    return r


def p_eval(a, point):
    s = ZERO
    for m, c in a.items():
        t = c
        for x, e in zip(point, m):
            if e:
                t *= x ** e
        s += t
    return s


def p_total_degree(a):
    return max((sum(m) for m in a), default=-1)


# ---------------------------------------------------------------- vectors

def v_add(a, b):
    return p_add(a, b)


def v_sub(a, b):
    return p_sub(a, b)


def v_scale_poly(v, p):
    r = {}
    for (pos, m1), c1 in v.items():
        for m2, c2 in p.items():
            k = (pos, tuple(x + y for x, y in zip(m1, m2)))
            val = r.get(k, ZERO) + c1 * c2
            if val:
                r[k] = val
            else:
                r.pop(k, None)
    return r


def v_from_polys(polys):
    r = {}
    for i, p in enumerate(polys):
        for m, c in p.items():
            r[(i, m)] = c
    return r


def v_to_polys(v, rank):
    out = [dict() for _ in range(rank)]
    for (pos, m), c in v.items():
        out[pos][m] = c
    return out


def v_shift(v, k):
    return {(pos + k, m): c for (pos, m), c in v.items()}


# ---------------------------------------------------------------- orders

def grevlex_key(e):
    return (sum(e),) + tuple(-x for x in reversed(e))


def lex_key(e):
    return e


class MonomialOrder:
    """Term order on exponent tuples.

    kind is 'grevlex', 'lex' or 'block'; for 'block' the ``blocks`` list
    gives the sizes of consecutive variable blocks, each compared by grevlex,
    earlier blocks dominating (an elimination order for the first block).
    """

    def __init__(self, kind="grevlex", blocks=None):
        self.kind = kind
        self.blocks = tuple(blocks) if blocks else None
        if kind == "grevlex":
            self.key = grevlex_key
        elif kind == "lex":
            self.key = lex_key
        elif kind == "block":
            bounds = []
            s = 0
            for b in self.blocks:
                bounds.append((s, s + b))
                s += b

            def key(e, bounds=tuple(bounds)):
                out = ()
                for a, b in bounds:
                    out += grevlex_key(e[a:b])
                return out

            self.key = key
        else:
            raise ValueError("unknown monomial order %r" % kind)

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and (self.kind, self.blocks) == (other.kind, other.blocks)

    def __hash__(self):
        return hash((self.kind, self.blocks))

    def __repr__(self):
        if self.blocks:
            return "MonomialOrder(%r, %r)" % (self.kind, list(self.blocks))
        return "MonomialOrder(%r)" % self.kind


GREVLEX = MonomialOrder("grevlex")


# ---------------------------------------------------------------- ring

class PolyRing:
    """Q[x_1..x_n] with named variables and a monomial order."""

    def __init__(self, names, order=None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names in %r" % (self.names,))
        self.n = len(self.names)
        self.order = order or GREVLEX
        self.index = {v: i for i, v in enumerate(self.names)}

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.names == other.names and self.order == other.order

    def __hash__(self):
        return hash((self.names, self.order))

    def __repr__(self):
        return "PolyRing(%r)" % (list(self.names),)

    def with_order(self, order):
        return PolyRing(self.names, order)

    def zero(self):
        return {}

    def one(self):
        return {(0,) * self.n: ONE}

    def const(self, c):
        return p_const(c, self.n)

    def var(self, name):
        return p_var(self.index[name], self.n)

    def gens(self):
        return [p_var(i, self.n) for i in range(self.n)]

    def parse(self, text):
        from .expr import parse_poly

        return parse_poly(text, self)

    def fmt(self, p):
        return poly_str(p, self.names, self.order)

    def lead(self, p):
        return max(p, key=self.order.key)


def mono_str(m, names):
    parts = []
    for name, e in zip(names, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append("%s^%d" % (name, e))
    return "*".join(parts)


def poly_str(p, names, order=None):
    if not p:
        return "0"
    key = (order or GREVLEX).key
    out = []
    for m in sorted(p, key=key, reverse=True):
        c = p[m]
        ms = mono_str(m, names)
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
