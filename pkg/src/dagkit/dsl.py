"""The ``.dga`` input language.

A file is a sequence of semicolon-terminated declarations::

    def f(x) = x^2;
    cdga A { gens x:0, Y:1, Z:1; diff Y -> f(x), Z -> x^3; }
    ring R { vars x, y; ideal x*y - 1; }
    morphism p : A -> R { x -> x, Y -> 0, Z -> 0; }
    cover C of R { x, 1 - x; }
    cdga U = crit f;
    action Q of Gm on U { x -> g*x, eta_x -> g*eta_x; }
    simplicial S { level 0 = R; level 1 = R; face 1,0 { x -> x; } face 1,1 { x -> x; } degen 0,0 { x -> x; } }

Names may only refer to earlier declarations.
"""

from .cdga import CdgaMorphism, DiscreteAlgebra, SemifreeCdga
from .derived_ops import derived_critical_locus
from .errors import DegreeError
from .expr import DslError, PolyAlgebra, Span, TokenStream, evaluate, node_str, parse_expr, tokenize
from .gca import Generator, _GcaAdapter
from .sschemes import SimplicialAffineScheme, factor_to_dict, group

KEYWORDS = ("def", "cdga", "ring", "morphism", "cover", "action", "simplicial")


class Decl:
    """One parsed declaration: its kind, name, span, syntax and built value."""

    def __init__(self, kind, name, span, syntax):
        self.kind = kind
        self.name = name
        self.span = span
        self.syntax = syntax
        self.value = None

    def __repr__(self):
        return "Decl(%s %s)" % (self.kind, self.name)


class Workspace:
    def __init__(self):
        self.decls = {}
        self.order = []
        self.macros = {}

    def __len__(self):
        return len(self.order)

    def __contains__(self, name):
        return name in self.decls

    def get(self, name, kinds=None):
        d = self.decls.get(name)
        if d is None:
            raise KeyError("no declaration named %r" % name)
        if kinds and d.kind not in kinds:
            raise KeyError("%r is a %s, expected %s" % (name, d.kind, " or ".join(kinds)))
        return d.value

    def names(self, kind=None):
        return [n for n in self.order if kind is None or self.decls[n].kind == kind]

    def to_dict(self):
        out = {}
        for n in self.order:
            d = self.decls[n]
            entry = {"kind": d.kind, "text": _decl_text(d)}
            v = d.value
            if d.kind in ("cdga", "ring"):
                entry["algebra"] = factor_to_dict(v)
            elif d.kind == "morphism":
                entry["images"] = {g: str(x) for g, x in sorted(v.images.items())}
            elif d.kind == "simplicial":
                entry["scheme"] = v.to_dict()
            out[n] = entry
        return out


# ------------------------------------------------------------ parsing

def parse(text):
    """Parse source text into a Workspace; errors carry line:column spans."""
    ts = TokenStream(tokenize(text))
    ws = Workspace()
    while ts.peek().kind != "eof":
        t = ts.peek()
        if t.kind != "name" or t.text not in KEYWORDS:
            raise DslError("expected a declaration (%s), found %r" % (", ".join(KEYWORDS), t.text), t.span)
        kw = ts.next().text
        decl = _PARSERS[kw](ts, ws, t.span)
        if decl.name in ws.decls or (decl.kind == "def" and decl.name in ws.macros):
            raise DslError("duplicate name %r" % decl.name, decl.span, kind="semantic")
        if decl.kind == "def":
            ws.macros[decl.name] = (decl.syntax["params"], decl.syntax["body"])
        ws.decls[decl.name] = decl
        ws.order.append(decl.name)
    return ws


def parse_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def _end(ts):
    ts.expect(";")


def _p_def(ts, ws, span):
    name = ts.expect_name()
    params = []
    if ts.at("("):
        ts.next()
        if not ts.at(")"):
            params.append(ts.expect_name().text)
            while ts.at(","):
                ts.next()
                params.append(ts.expect_name().text)
        ts.expect(")")
    ts.expect("=")
    body = parse_expr(ts)
    _end(ts)
    return Decl("def", name.text, name.span, {"params": tuple(params), "body": body})


def _gen_list(ts):
    out = []
    while True:
        nm = ts.expect_name()
        ts.expect(":")
        deg = ts.expect_int()
        out.append((nm.text, deg, nm.span))
        if not ts.at(","):
            break
        ts.next()
    return out


def _assign_list(ts):
    """name -> expr (, name -> expr)*"""
    out = []
    if ts.at(";") or ts.at("}"):
        return out
    while True:
        nm = ts.expect_name()
        arrow = ts.expect("->")
        e = parse_expr(ts)
        out.append((nm.text, e, nm.span, arrow.span))
        if not ts.at(","):
            break
        ts.next()
    return out


def _expr_list(ts):
    out = [parse_expr(ts)]
    while ts.at(","):
        ts.next()
        out.append(parse_expr(ts))
    return out


def _p_cdga(ts, ws, span):
    name = ts.expect_name()
    if ts.at("="):
        ts.next()
        kw = ts.expect_name()
        if kw.text != "crit":
            raise DslError("expected 'crit' after '='", kw.span)
        f = ts.expect_name()
        _end(ts)
        d = Decl("cdga", name.text, name.span, {"crit": f.text, "crit_span": f.span})
        d.value = _build_crit(ws, d)
        return d
    ts.expect("{")
    syn = {"gens": [], "diff": [], "ideal": []}
    while not ts.at("}"):
        sec = ts.expect_name()
        if sec.text == "gens":
            syn["gens"] += _gen_list(ts)
        elif sec.text == "diff":
            syn["diff"] += _assign_list(ts)
        elif sec.text == "ideal":
            syn["ideal"] += _expr_list(ts)
        else:
            raise DslError("unknown cdga section %r (gens, diff, ideal)" % sec.text, sec.span)
        _end(ts)
    ts.expect("}")
    d = Decl("cdga", name.text, name.span, syn)
    d.value = _build_cdga(ws, d)
    return d


def _p_ring(ts, ws, span):
    name = ts.expect_name()
    ts.expect("{")
    syn = {"vars": [], "ideal": []}
    while not ts.at("}"):
        sec = ts.expect_name()
        if sec.text == "vars":
            if not ts.at(";"):
                syn["vars"].append((ts.expect_name().text))
                while ts.at(","):
                    ts.next()
                    syn["vars"].append(ts.expect_name().text)
        elif sec.text == "ideal":
            syn["ideal"] += _expr_list(ts)
        else:
            raise DslError("unknown ring section %r (vars, ideal)" % sec.text, sec.span)
        _end(ts)
    ts.expect("}")
    d = Decl("ring", name.text, name.span, syn)
    if len(set(syn["vars"])) != len(syn["vars"]):
        raise DslError("duplicate variable in ring %s" % name.text, name.span, kind="semantic")
    A = DiscreteAlgebra(syn["vars"], name=name.text)
    A.base_ideal = [p for p in (_poly(ws, A, e) for e in syn["ideal"]) if p]
    d.value = A
    return d


def _ref(ws, tok, kinds):
    dd = ws.decls.get(tok.text)
    if dd is None:
        raise DslError("unbound reference %r" % tok.text, tok.span, kind="semantic")
    if dd.kind not in kinds:
        raise DslError("%r is a %s, expected %s" % (tok.text, dd.kind, " or ".join(kinds)), tok.span, kind="semantic")
    return dd.value


def _p_morphism(ts, ws, span):
    name = ts.expect_name()
    ts.expect(":")
    s = ts.expect_name()
    ts.expect("->")
    t = ts.expect_name()
    ts.expect("{")
    imgs = _assign_list(ts)
    if ts.at(";"):
        ts.next()
    ts.expect("}")
    S = _ref(ws, s, ("cdga", "ring"))
    T = _ref(ws, t, ("cdga", "ring"))
    d = Decl("morphism", name.text, name.span, {"source": s.text, "target": t.text, "images": imgs})
    f = CdgaMorphism(S, T, _images(ws, S, T, imgs), name=name.text)
    v = f.validate()
    if not v.ok:
        raise DslError("morphism %s: %s" % (name.text, v.message), name.span, kind="semantic")
    d.value = f
    return d


def _images(ws, S, T, imgs):
    out = {}
    for nm, e, nspan, aspan in imgs:
        if nm not in S.alg.index:
            raise DslError("%r is not a generator of the source" % nm, nspan, kind="semantic")
        if nm in out:
            raise DslError("image of %r given twice" % nm, nspan, kind="semantic")
        v = evaluate(e, _GcaAdapter(T.alg), ws.macros)
        want = S.alg.gens[S.alg.index[nm]].degree
        if v and (not v.is_homogeneous() or v.degree != want):
            raise DslError("image of %s must have degree %d" % (nm, want), aspan, kind="degree")
        out[nm] = v
    return out


def _p_cover(ts, ws, span):
    name = ts.expect_name()
    of = ts.expect_name()
    if of.text != "of":
        raise DslError("expected 'of'", of.span)
    base = ts.expect_name()
    ts.expect("{")
    elems = _expr_list(ts)
    if ts.at(";"):
        ts.next()
    ts.expect("}")
    A = _ref(ws, base, ("ring", "cdga"))
    d = Decl("cover", name.text, name.span, {"base": base.text, "elements": elems})
    d.value = {"base": A, "elements": [_poly(ws, A, e) for e in elems]}
    return d


def _p_action(ts, ws, span):
    name = ts.expect_name()
    of = ts.expect_name()
    if of.text != "of":
        raise DslError("expected 'of'", of.span)
    g = ts.expect_name()
    gname = g.text
    if ts.at("^"):
        ts.next()
        gname += "^%d" % ts.expect_int()
    on = ts.expect_name()
    if on.text != "on":
        raise DslError("expected 'on'", on.span)
    u = ts.expect_name()
    ts.expect("{")
    imgs = _assign_list(ts)
    if ts.at(";"):
        ts.next()
    ts.expect("}")
    U = _ref(ws, u, ("cdga", "ring"))
    try:
        G = group(gname)
    except ValueError as e:
        raise DslError(str(e), g.span, kind="semantic")
    d = Decl("action", name.text, name.span, {"group": gname, "space": u.text, "images": imgs})
    gens = [Generator(x.name, x.degree) for x in U.gens] + [Generator(c, 0) for c in G.coords]
    shadow = SemifreeCdga(gens)
    coaction = {}
    for nm, e, nspan, aspan in imgs:
        if nm not in U.alg.index:
            raise DslError("%r is not a generator of %s" % (nm, u.text), nspan, kind="semantic")
        v = evaluate(e, _GcaAdapter(shadow.alg), ws.macros)
        want = U.alg.gens[U.alg.index[nm]].degree
        if v and (not v.is_homogeneous() or v.degree != want):
            raise DslError("coaction image of %s must have degree %d" % (nm, want), aspan, kind="degree")
        coaction[nm] = str(v)
    d.value = {"group": G, "space": U, "coaction": coaction}
    return d


def _p_simplicial(ts, ws, span):
    name = ts.expect_name()
    ts.expect("{")
    syn = {"levels": [], "face": [], "degen": []}
    while not ts.at("}"):
        kw = ts.expect_name()
        if kw.text == "level":
            m = ts.expect_int()
            ts.expect("=")
            ref = ts.expect_name()
            _end(ts)
            syn["levels"].append((m, ref, kw.span))
        elif kw.text in ("face", "degen"):
            m = ts.expect_int()
            ts.expect(",")
            i = ts.expect_int()
            ts.expect("{")
            imgs = _assign_list(ts)
            if ts.at(";"):
                ts.next()
            ts.expect("}")
            if ts.at(";"):
                ts.next()
            syn[kw.text].append((m, i, imgs, kw.span))
        else:
            raise DslError("unknown simplicial section %r (level, face, degen)" % kw.text, kw.span)
    ts.expect("}")
    d = Decl("simplicial", name.text, name.span, syn)
    d.value = _build_simplicial(ws, d)
    return d


_PARSERS = {
    "def": _p_def,
    "cdga": _p_cdga,
    "ring": _p_ring,
    "morphism": _p_morphism,
    "cover": _p_cover,
    "action": _p_action,
    "simplicial": _p_simplicial,
}


# ------------------------------------------------------------ building

def _poly(ws, A, node):
    v = evaluate(node, _GcaAdapter(A.alg), ws.macros)
    if v and (not v.is_homogeneous() or v.degree != 0):
        raise DslError("ideal generators must have degree 0", node.span, kind="degree")
    return A.elem_to_poly(v) if v else {}


def _build_cdga(ws, d):
    syn = d.syntax
    seen = set()
    gens = []
    for nm, deg, span in syn["gens"]:
        if nm in seen:
            raise DslError("duplicate generator %r" % nm, span, kind="semantic")
        if deg < 0:
            raise DslError("generator degrees must be non-negative", span, kind="degree")
        seen.add(nm)
        gens.append(Generator(nm, deg))
    shadow = SemifreeCdga(gens)
    diff = {}
    for nm, e, nspan, aspan in syn["diff"]:
        if nm not in shadow.alg.index:
            raise DslError("differential given for unknown generator %r" % nm, nspan, kind="semantic")
        if nm in diff:
            raise DslError("differential of %r given twice" % nm, nspan, kind="semantic")
        v = evaluate(e, _GcaAdapter(shadow.alg), ws.macros)
        deg = shadow.alg.gens[shadow.alg.index[nm]].degree
        if deg == 0 and v:
            raise DslError("degree-0 generator %s must have zero differential" % nm, aspan, kind="degree")
        if v and (not v.is_homogeneous() or v.degree != deg - 1):
            raise DslError("d(%s) must have degree %d" % (nm, deg - 1), aspan, kind="degree")
        diff[nm] = v
    ideal = [_poly(ws, shadow, e) for e in syn["ideal"]]
    A = SemifreeCdga(gens, {k: str(v) for k, v in diff.items()}, [p for p in ideal if p], name=d.name)
    v = A.validate()
    if not v.ok:
        raise DslError("%s: %s" % (v.item, v.message), d.span, kind="semantic")
    return A


def _build_crit(ws, d):
    f = d.syntax["crit"]
    if f not in ws.macros:
        raise DslError("unbound reference %r" % f, d.syntax["crit_span"], kind="semantic")
    params, body = ws.macros[f]
    if not params:
        raise DslError("crit needs a function with named variables", d.syntax["crit_span"], kind="semantic")
    from .poly import PolyRing

    R = PolyRing(params)
    p = evaluate(body, PolyAlgebra(R), ws.macros)
    A = derived_critical_locus(list(params), p, name=d.name)
    return A


def _build_simplicial(ws, d):
    syn = d.syntax
    levels = {}
    for m, ref, span in syn["levels"]:
        if m in levels:
            raise DslError("level %d given twice" % m, span, kind="semantic")
        levels[m] = _ref(ws, ref, ("cdga", "ring"))
    N = max(levels) if levels else -1
    if sorted(levels) != list(range(N + 1)):
        raise DslError("levels must be 0..N without gaps", d.span, kind="semantic")
    lv = [[levels[m]] for m in range(N + 1)]
    cof, cod = {}, {}
    for m, i, imgs, span in syn["face"]:
        if not (1 <= m <= N and 0 <= i <= m):
            raise DslError("face %d,%d is out of range" % (m, i), span, kind="semantic")
        S, T = levels[m - 1], levels[m]
        cof[(m, i)] = [(0, CdgaMorphism(S, T, _images(ws, S, T, imgs)))]
    for m, j, imgs, span in syn["degen"]:
        if not (0 <= m < N and 0 <= j <= m):
            raise DslError("degen %d,%d is out of range" % (m, j), span, kind="semantic")
        S, T = levels[m + 1], levels[m]
        cod[(m, j)] = [(0, CdgaMorphism(S, T, _images(ws, S, T, imgs)))]
    for m in range(1, N + 1):
        for i in range(m + 1):
            if (m, i) not in cof:
                raise DslError("missing face %d,%d" % (m, i), d.span, kind="semantic")
    for m in range(N):
        for j in range(m + 1):
            if (m, j) not in cod:
                raise DslError("missing degen %d,%d" % (m, j), d.span, kind="semantic")
    return SimplicialAffineScheme(lv, cof, cod, name=d.name)


# ------------------------------------------------------------ serializing

def _assigns(imgs):
    return ", ".join("%s -> %s" % (nm, node_str(e)) for nm, e, _, _ in imgs)


def _decl_text(d):
    s = d.syntax
    if d.kind == "def":
        params = "(%s)" % ", ".join(s["params"]) if s["params"] else ""
        return "def %s%s = %s;" % (d.name, params, node_str(s["body"]))
    if d.kind == "cdga":
        if "crit" in s:
            return "cdga %s = crit %s;" % (d.name, s["crit"])
        parts = ["gens %s;" % ", ".join("%s:%d" % (n, g) for n, g, _ in s["gens"])]
        if s["diff"]:
            parts.append("diff %s;" % _assigns(s["diff"]))
        if s["ideal"]:
            parts.append("ideal %s;" % ", ".join(node_str(e) for e in s["ideal"]))
        return "cdga %s { %s }" % (d.name, " ".join(parts))
    if d.kind == "ring":
        parts = ["vars %s;" % ", ".join(s["vars"])]
        if s["ideal"]:
            parts.append("ideal %s;" % ", ".join(node_str(e) for e in s["ideal"]))
        return "ring %s { %s }" % (d.name, " ".join(parts))
    if d.kind == "morphism":
        body = _assigns(s["images"])
        return "morphism %s : %s -> %s { %s%s }" % (d.name, s["source"], s["target"], body, ";" if body else "")
    if d.kind == "cover":
        return "cover %s of %s { %s; }" % (d.name, s["base"], ", ".join(node_str(e) for e in s["elements"]))
    if d.kind == "action":
        body = _assigns(s["images"])
        return "action %s of %s on %s { %s%s }" % (d.name, s["group"], s["space"], body, ";" if body else "")
    if d.kind == "simplicial":
        parts = ["level %d = %s;" % (m, ref.text) for m, ref, _ in s["levels"]]
        for kw in ("face", "degen"):
            for m, i, imgs, _ in s[kw]:
                body = _assigns(imgs)
                parts.append("%s %d,%d { %s%s }" % (kw, m, i, body, ";" if body else ""))
        return "simplicial %s { %s }" % (d.name, " ".join(parts))
    raise ValueError(d.kind)


def serialize(ws):
    """Canonical text; parsing it gives an equal Workspace."""
    return "".join(_decl_text(ws.decls[n]) + "\n" for n in ws.order)
