"""Tokenizer and expression parser shared by the DSL and internal helpers.

Expressions are sums of products of powers of identifiers, rational
literals ``p/q`` and macro calls ``f(x, y)``.  Every node remembers the
source span it came from so that errors can point at it.
"""

import re

from gmpy2 import mpq

from .poly import p_add, p_const, p_mul, p_pow, p_scale, p_sub, p_var, p_is_const


class Span:
    __slots__ = ("line", "col", "end_line", "end_col")

    def __init__(self, line, col, end_line=None, end_col=None):
        self.line = line
        self.col = col
        self.end_line = line if end_line is None else end_line
        self.end_col = col if end_col is None else end_col

    def to(self, other):
        return Span(self.line, self.col, other.end_line, other.end_col)

    def __repr__(self):
        return "%d:%d-%d:%d" % (self.line, self.col, self.end_line, self.end_col)


class DslError(Exception):
    """Parse or semantic error with a source span."""

    def __init__(self, message, span=None, kind="parse"):
        self.message = message
        self.span = span
        self.kind = kind
        if span is not None:
            super().__init__("%d:%d: %s" % (span.line, span.col, message))
        else:
            super().__init__(message)


TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*|//[^\n]*)
  | (?P<arrow>->)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_@']*)
  | (?P<str>"[^"\n]*")
  | (?P<op>[-+*/^(){}\[\];:,=<>|.])
    """,
    re.VERBOSE,
)


class Token:
    __slots__ = ("kind", "text", "span")

    def __init__(self, kind, text, span):
        self.kind = kind
        self.text = text
        self.span = span

    def __repr__(self):
        return "Token(%s, %r)" % (self.kind, self.text)


def tokenize(text):
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if not m:
            raise DslError("unexpected character %r" % text[pos], Span(line, col))
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(s)
        else:
            toks.append(Token(kind, s, Span(line, col, line, col + len(s) - 1)))
            col += len(s)
        pos = m.end()
    toks.append(Token("eof", "", Span(line, col)))
    return toks


class Node:
    __slots__ = ("op", "args", "span")

    def __init__(self, op, args, span):
        self.op = op
        self.args = args
        self.span = span

    def __repr__(self):
        return "Node(%s, %r)" % (self.op, self.args)


class TokenStream:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text):
        t = self.peek()
        return t.kind in ("op", "arrow") and t.text == text

    def at_name(self, text=None):
        t = self.peek()
        return t.kind == "name" and (text is None or t.text == text)

    def expect(self, text):
        t = self.peek()
        if t.text != text or t.kind not in ("op", "arrow", "name"):
            raise DslError("expected %r, found %r" % (text, t.text or "end of input"), t.span)
        return self.next()

    def expect_name(self):
        t = self.peek()
        if t.kind != "name":
            raise DslError("expected identifier, found %r" % (t.text or "end of input"), t.span)
        return self.next()

    def expect_int(self):
        neg = False
        if self.at("-"):
            self.next()
            neg = True
        t = self.peek()
        if t.kind != "num":
            raise DslError("expected integer, found %r" % (t.text or "end of input"), t.span)
        self.next()
        return -int(t.text) if neg else int(t.text)


def parse_expr(ts):
    """expr := term (('+'|'-') term)*"""
    left = parse_term(ts)
    while ts.at("+") or ts.at("-"):
        op = ts.next().text
        right = parse_term(ts)
        left = Node("add" if op == "+" else "sub", (left, right), left.span.to(right.span))
    return left


def parse_term(ts):
    left = parse_unary(ts)
    while ts.at("*") or ts.at("/"):
        op = ts.next().text
        right = parse_unary(ts)
        left = Node("mul" if op == "*" else "div", (left, right), left.span.to(right.span))
    return left


def parse_unary(ts):
    if ts.at("-"):
        t = ts.next()
        a = parse_unary(ts)
        return Node("neg", (a,), t.span.to(a.span))
    if ts.at("+"):
        ts.next()
        return parse_unary(ts)
    return parse_power(ts)


def parse_power(ts):
    base = parse_atom(ts)
    if ts.at("^"):
        ts.next()
        t = ts.peek()
        if t.kind != "num":
            raise DslError("exponent must be a nonnegative integer", t.span)
        ts.next()
        return Node("pow", (base, int(t.text)), base.span.to(t.span))
    return base


def parse_atom(ts):
    t = ts.peek()
    if t.kind == "num":
        ts.next()
        return Node("num", mpq(int(t.text)), t.span)
    if t.kind == "name":
        ts.next()
        if ts.at("("):
            ts.next()
            args = []
            if not ts.at(")"):
                args.append(parse_expr(ts))
                while ts.at(","):
                    ts.next()
                    args.append(parse_expr(ts))
            end = ts.expect(")")
            return Node("call", (t.text, tuple(args)), t.span.to(end.span))
        return Node("name", t.text, t.span)
    if ts.at("("):
        ts.next()
        e = parse_expr(ts)
        ts.expect(")")
        return e
    raise DslError("expected expression, found %r" % (t.text or "end of input"), t.span)


def parse_expression(text):
    ts = TokenStream(tokenize(text))
    e = parse_expr(ts)
    if ts.peek().kind != "eof":
        raise DslError("unexpected %r after expression" % ts.peek().text, ts.peek().span)
    return e


class PolyAlgebra:
    """Evaluation adapter for plain polynomials of a PolyRing."""

    def __init__(self, ring):
        self.ring = ring

    def const(self, c):
        return p_const(c, self.ring.n)

    def name(self, name, span):
        if name not in self.ring.index:
            raise DslError("unbound reference %r" % name, span, kind="semantic")
        return p_var(self.ring.index[name], self.ring.n)

    def add(self, a, b):
        return p_add(a, b)

    def sub(self, a, b):
        return p_sub(a, b)

    def mul(self, a, b):
        return p_mul(a, b)

    def neg(self, a):
        return p_scale(a, mpq(-1))

    def pow(self, a, k):
        return p_pow(a, k, self.ring.n)

    def as_constant(self, a):
        if not p_is_const(a):
            return None
        return next(iter(a.values()), mpq(0))

    def scale(self, a, c):
        return p_scale(a, c)


def evaluate(node, alg, macros=None):
    """Evaluate an expression tree with an algebra adapter.

    ``macros`` maps a name to (params, body_node); calls substitute the
    evaluated arguments for the parameters.
    """
    macros = macros or {}

    def ev(n, local):
        op = n.op
        if op == "num":
            return alg.const(n.args)
        if op == "name":
            if n.args in local:
                return local[n.args]
            if n.args in macros and not macros[n.args][0]:
                return ev(macros[n.args][1], {})
            return alg.name(n.args, n.span)
        if op == "add":
            return alg.add(ev(n.args[0], local), ev(n.args[1], local))
        if op == "sub":
            return alg.sub(ev(n.args[0], local), ev(n.args[1], local))
        if op == "mul":
            return alg.mul(ev(n.args[0], local), ev(n.args[1], local))
        if op == "neg":
            return alg.neg(ev(n.args[0], local))
        if op == "pow":
            return alg.pow(ev(n.args[0], local), n.args[1])
        if op == "div":
            num = ev(n.args[0], local)
            den = alg.as_constant(ev(n.args[1], local))
            if den is None:
                raise DslError("division only by nonzero rational constants", n.args[1].span, kind="semantic")
            if not den:
                raise DslError("division by zero", n.args[1].span, kind="semantic")
            return alg.scale(num, 1 / mpq(den))
        if op == "call":
            name, args = n.args
            if name not in macros:
                raise DslError("unbound reference %r" % name, n.span, kind="semantic")
            params, body = macros[name]
            if len(params) != len(args):
                raise DslError("%s expects %d arguments" % (name, len(params)), n.span, kind="semantic")
            vals = {p: ev(a, local) for p, a in zip(params, args)}
            return ev(body, vals)
        raise DslError("bad expression node %r" % op, n.span)

    return ev(node, {})


def parse_poly(text, ring):
    return evaluate(parse_expression(text), PolyAlgebra(ring))


def node_str(n):
    """Canonical text for an expression tree (used by serializers)."""
    op = n.op
    if op == "num":
        c = n.args
        return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)
    if op == "name":
        return n.args
    if op == "add":
        return "%s + %s" % (node_str(n.args[0]), node_str(n.args[1]))
    if op == "sub":
        r = n.args[1]
        rs = node_str(r)
        if r.op in ("add", "sub"):
            rs = "(%s)" % rs
        return "%s - %s" % (node_str(n.args[0]), rs)
    if op in ("mul", "div"):
        parts = []
        for a in n.args:
            s = node_str(a)
            if a.op in ("add", "sub", "neg") or (op == "div" and a is n.args[1] and a.op in ("mul", "div")):
                s = "(%s)" % s
            parts.append(s)
        return (" * " if op == "mul" else "/").join(parts)
    if op == "neg":
        s = node_str(n.args[0])
        if n.args[0].op in ("add", "sub"):
            s = "(%s)" % s
        return "-" + s
    if op == "pow":
        s = node_str(n.args[0])
        if n.args[0].op not in ("name", "call") and not (n.args[0].op == "num" and n.args[0].args >= 0 and n.args[0].args.denominator == 1):
            s = "(%s)" % s
        return "%s^%d" % (s, n.args[1])
    if op == "call":
        return "%s(%s)" % (n.args[0], ", ".join(node_str(a) for a in n.args[1]))
    raise ValueError(op)
