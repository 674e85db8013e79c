from itertools import product

from gmpy2 import mpq
from hypothesis import given, settings, strategies as st
from sympy import Matrix

from dagkit.groebner import (AugmentedGB, GB, Ideal, apply_columns, buchberger, homology_module,
                             matrix_columns, module_is_zero, normal_form, syzygies)
from dagkit.poly import PolyRing, p_mul, p_total_degree, poly_str, v_from_polys

R = PolyRing(["x", "y"])


def P(text, ring=R):
    return ring.parse(text)


def strs(polys, ring=R):
    return sorted(poly_str(p, ring.names) for p in polys)


def test_unit_ideal():
    assert strs(buchberger(R, [P("1")])) == ["1"]


def test_basis_already_groebner():
    assert strs(buchberger(R, [P("x^2"), P("x*y")])) == ["x*y", "x^2"]
    assert strs(buchberger(R, [P("x - y"), P("y^2")])) == ["x - y", "y^2"]


def test_normal_forms():
    assert normal_form(R, P("x^2"), [P("x")]) == {}
    assert normal_form(R, P("x^2 + y"), [P("x")]) == P("y")
    f = P("3*x*y - 1")
    assert normal_form(R, f, []) == f


def test_syzygies_of_row():
    cols = matrix_columns(R, [[P("x"), P("y")]])
    syz = syzygies(R, cols, 1)
    assert syz
    for v in syz:
        assert not apply_columns(cols, v)
    # the Koszul syzygy (y, -x) lies in the span of the output
    G = GB(R, 2, syz)
    assert G.contains(v_from_polys([P("y"), P("-x")]))


def test_syzygies_identity_and_x2_x():
    eye = matrix_columns(R, [[P("1"), P("0")], [P("0"), P("1")]])
    assert syzygies(R, eye, 2) == []
    S = PolyRing(["x"])
    cols = matrix_columns(S, [[P("x^2", S), P("x", S)]])
    syz = syzygies(S, cols, 1)
    G = GB(S, 2, syz)
    assert G.contains(v_from_polys([P("1", S), P("-x", S)]))


def test_module_is_zero():
    S = PolyRing(["x"])
    assert module_is_zero(S, 1, [v_from_polys([P("1", S)])])
    assert not module_is_zero(S, 1, [v_from_polys([P("x", S)])])
    assert module_is_zero(S, 1, [v_from_polys([P("x", S)]), v_from_polys([P("x - 1", S)])])


def test_koszul_homology():
    # C_2 = R -(y, -x)-> C_1 = R^2 -(x y)-> C_0 = R
    d1 = matrix_columns(R, [[P("x"), P("y")]])
    d2 = [v_from_polys([P("y"), P("-x")])]
    H1 = homology_module(R, d2, (d1, 1), 2)
    assert H1.is_zero()
    H0 = homology_module(R, d1, ([{}], 1), 1)
    assert H0.q_dimension() == 1


def test_trivial_homology():
    H = homology_module(R, [], ([{}, {}, {}], 1), 3)
    assert H.free_rank() == 3
    one = [v_from_polys([P("1")])]
    assert homology_module(R, one, ([{}], 1), 1).is_zero()


# ---------------------------------------------------------- properties

def _poly(draw, ring, max_deg=3, max_terms=3):
    n = ring.n
    monos = [e for e in product(range(max_deg + 1), repeat=n) if sum(e) <= max_deg]
    terms = draw(st.lists(st.tuples(st.sampled_from(monos), st.integers(-3, 3)), min_size=1, max_size=max_terms))
    p = {}
    for m, c in terms:
        p[m] = p.get(m, 0) + mpq(c)
    return {m: c for m, c in p.items() if c}


@st.composite
def ideal_data(draw):
    n = draw(st.integers(1, 3))
    ring = PolyRing(["x", "y", "z"][:n])
    gens = [g for g in (_poly(draw, ring) for _ in range(draw(st.integers(1, 3)))) if g]
    member = draw(st.booleans())
    if member and gens:
        f = {}
        for g in gens:
            c = _poly(draw, ring, max_deg=1, max_terms=2)
            for m, v in p_mul(c, g).items():
                f[m] = f.get(m, 0) + v
        f = {m: c for m, c in f.items() if c}
    else:
        f = _poly(draw, ring)
    return ring, gens, f


def _monomials(n, d):
    return [e for e in product(range(d + 1), repeat=n) if sum(e) <= d]


def _truncated_member(ring, gens, f, D):
    """Is f in span_Q { m * g : deg(m g) <= D }?  (Macaulay-style truncation.)"""
    vecs = []
    for g in gens:
        dg = p_total_degree(g)
        for m in _monomials(ring.n, D - dg) if D >= dg else []:
            vecs.append(p_mul({m: mpq(1)}, g))
    support = sorted({m for v in vecs + [f] for m in v})
    if not vecs:
        return not f
    A = Matrix([[v.get(m, 0) for v in vecs] for m in support])
    Af = A.row_join(Matrix([f.get(m, 0) for m in support]))
    return A.rank() == Af.rank()


@settings(max_examples=40, deadline=None)
@given(ideal_data())
def test_membership_matches_truncation_oracle(data):
    ring, gens, f = data
    I = Ideal(ring, gens)
    if I.contains(f):
        cof = AugmentedGB(ring, 1, [{(0, m): c for m, c in g.items()} for g in gens]).lift({(0, m): c for m, c in f.items()})
        assert cof is not None
        D = max([p_total_degree(f)] + [p_total_degree(g) + max((sum(m) for (j2, m) in cof if j2 == j), default=0)
                                       for j, g in enumerate(gens)])
        assert _truncated_member(ring, gens, f, D)
    else:
        assert not _truncated_member(ring, gens, f, p_total_degree(f) + 3)


@settings(max_examples=40, deadline=None)
@given(ideal_data())
def test_normal_form_idempotent(data):
    ring, gens, f = data
    I = Ideal(ring, gens)
    r = I.reduce(f)
    assert I.reduce(r) == r
    assert I.contains(_sub(f, r))


def _sub(a, b):
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, 0) - c
    return {m: c for m, c in out.items() if c}


@settings(max_examples=30, deadline=None)
@given(ideal_data())
def test_syzygies_annihilate(data):
    ring, gens, _ = data
    cols = [{(0, m): c for m, c in g.items()} for g in gens]
    for v in syzygies(ring, cols, 1):
        assert not apply_columns(cols, v)


@settings(max_examples=20, deadline=None)
@given(ideal_data())
def test_exact_two_step_complex(data):
    ring, gens, _ = data
    # R^k -(id)-> R^k -> 0 from a known isomorphism: homology vanishes
    k = len(gens)
    eye = [{(j, (0,) * ring.n): mpq(1)} for j in range(k)]
    H = homology_module(ring, eye, ([{} for _ in range(k)], 1), k)
    assert H.is_zero()
