from hypothesis import given, settings, strategies as st

from dagkit.gca import Derivation, FreeGCA, Generator, apply_derivation, monomial_basis, mul


def vanishing():
    """Q[x] with odd Y, Z (the derived vanishing locus of two functions)."""
    return FreeGCA([Generator("x", 0), Generator("Y", 1), Generator("Z", 1)])


def test_odd_generators_anticommute():
    A = vanishing()
    Y, Z = A.gen("Y"), A.gen("Z")
    assert Z * Y == -(Y * Z)
    assert str(Z * Y) == "-Y*Z"


def test_unit_law():
    A = vanishing()
    a = A.parse("3*x^2*Y - Z")
    assert A.one() * a == a
    assert a * A.one() == a


def test_square_of_odd_sum_vanishes():
    A = vanishing()
    s = A.parse("Y + Z")
    assert not (s * s)
    # brute-force expansion: YY + YZ + ZY + ZZ with Y^2 = Z^2 = 0, ZY = -YZ
    Y, Z = A.gen("Y"), A.gen("Z")
    assert not (Y * Y) and not (Z * Z)
    assert Y * Z + Z * Y == A.zero()


def test_monomial_basis_of_vanishing_locus():
    A = vanishing()
    assert [A.fmt_mono(m) for m in monomial_basis(A, 2)] == ["Y*Z"]
    assert monomial_basis(A, 3) == []
    assert monomial_basis(A, 0) == [(0, 0, 0)]


def test_derivation_on_vanishing_locus():
    A = vanishing()
    D = Derivation(A, {"Y": "x^2", "Z": "x^3"})
    assert apply_derivation(D, A.parse("x*Y + 2*Z")) == A.parse("x^3 + 2*x^3")
    # delta(c YZ) = c (Z f - Y g)
    assert apply_derivation(D, A.parse("5*Y*Z")) == A.parse("5*(Z*x^2 - Y*x^3)")
    assert not apply_derivation(D, A.one())


# ------------------------------------------------ randomized properties

GENS = [Generator("x", 0), Generator("y", 0), Generator("s", 1), Generator("t", 1), Generator("u", 2), Generator("v", 3)]
ALG = FreeGCA(GENS)
DIFF = Derivation(ALG, {"s": "x", "t": "y^2", "u": "x*t - y^2*s", "v": "s*t"}, shift=-1)


@st.composite
def homogeneous(draw, max_degree=4):
    d = draw(st.integers(0, max_degree))
    basis = ALG.monomials(d)
    if not basis:
        return ALG.zero()
    terms = draw(st.lists(st.tuples(st.sampled_from(basis), st.integers(-3, 3)), max_size=3))
    x = ALG.zero()
    for m, c in terms:
        x = x + ALG.monomial(m, c) * ALG.parse(draw(st.sampled_from(["1", "x", "y", "x*y", "2 - x"])))
    return x


@settings(max_examples=60, deadline=None)
@given(homogeneous(), homogeneous())
def test_graded_commutativity(a, b):
    if not a or not b:
        return
    sign = (-1) ** (a.degree * b.degree)
    assert mul(a, b) == mul(b, a).scale(sign)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["s", "t", "v"]), homogeneous())
def test_odd_square_zero(name, a):
    s = ALG.gen(name)
    assert not (s * s)
    if a and a.degree % 2:
        assert not (a * a)


@settings(max_examples=60, deadline=None)
@given(homogeneous(), homogeneous())
def test_leibniz(a, b):
    if not a or not b:
        return
    lhs = DIFF(a * b)
    rhs = DIFF(a) * b + (a * DIFF(b)).scale((-1) ** a.degree)
    assert lhs == rhs


def _series_count(degrees, d):
    """Coefficient of t^d in prod_odd (1 + t^k) * prod_even 1/(1 - t^k)."""
    coeffs = [1] + [0] * d
    for k in degrees:
        if k % 2:
            coeffs = [coeffs[i] + (coeffs[i - k] if i >= k else 0) for i in range(d + 1)]
        else:
            for i in range(k, d + 1):
                coeffs[i] += coeffs[i - k]
    return coeffs[d]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=5), st.integers(0, 8))
def test_monomial_basis_count(degrees, d):
    A = FreeGCA([Generator("g%d" % i, k) for i, k in enumerate(degrees)])
    basis = monomial_basis(A, d)
    assert len(basis) == len(set(basis)) == _series_count(degrees, d)
    assert all(A.mono_degree(m) == d for m in basis)
