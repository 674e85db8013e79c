import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from dagkit import simplicial as S


# ----------------------------------------------------------------- sets

def test_standard_simplex_level_sizes():
    # level m of Delta^n: monotone maps [m] -> [n], counted by C(n+m+1, m+1)
    for n in range(3):
        X = S.standard_simplex(n, 4)
        assert X.sizes() == [comb(n + m + 1, m + 1) for m in range(5)]
        assert S.validate(X).ok


def test_delta1_levels_and_nondegenerate():
    X = S.standard_simplex(1, 4)
    assert X.sizes() == [m + 2 for m in range(5)]
    assert [len(X.nondegenerate(m)) for m in range(5)] == [2, 1, 0, 0, 0]


def test_boundary_and_horn_nondegenerate_simplices():
    dD1 = S.boundary_simplex(1, 3)
    assert [len(dD1.nondegenerate(m)) for m in range(4)] == [2, 0, 0, 0]
    dD2 = S.boundary_simplex(2, 3)
    assert [len(dD2.nondegenerate(m)) for m in range(4)] == [3, 3, 0, 0]
    L = S.horn(2, 1, 3)
    assert [len(L.nondegenerate(m)) for m in range(4)] == [3, 2, 0, 0]
    with pytest.raises(ValueError):
        S.horn(2, 3)


def test_cyclic_nerve_sizes():
    X = S.nerve(S.cyclic_group_groupoid(2), 3)
    assert X.sizes() == [1, 2, 4, 8]
    assert S.validate(X).ok


def test_corrupted_face_is_detected():
    X = S.nerve(S.cyclic_group_groupoid(2), 3)
    faces = dict(X.faces)
    col = list(faces[(2, 0)])
    col[0] = 1 - col[0]
    faces[(2, 0)] = col
    bad = S.FiniteSimplicialSet(X.labels, faces, X.degens, check=False)
    v = S.validate(bad)
    assert not v.ok
    with pytest.raises(ValueError):
        S.FiniteSimplicialSet(X.labels, faces, X.degens)


def test_matching_space_of_delta1():
    X = S.standard_simplex(1, 3)
    fams, mm = S.matching_space(X, 1)
    # boundary families of an edge: any pair of vertices
    assert len(fams) == 4 and len(mm) == 3
    hfams, _ = S.matching_space(X, 2, 1)
    # horn Lambda^{2,1}: composable pairs of edges
    assert len(hfams) == 4


def test_horn_filling_in_delta1():
    X = S.standard_simplex(1, 3)
    assert S.horn_filler_search(X, 2, 1)["fillable"]
    r = S.horn_filler_search(X, 2, 0)
    assert not r["fillable"] and "horn" in r
    assert not S.hypergroupoid_check(X, 1)["ok"]


def test_nerve_of_group_is_1_hypergroupoid_not_0():
    X = S.nerve(S.cyclic_group_groupoid(3), 3)
    assert S.hypergroupoid_check(X, 1)["ok"]
    r = S.hypergroupoid_check(X, 0)
    assert not r["ok"] and r["m"] == 1


def test_coskeleton_reproduces_nerve():
    G = S.cyclic_group_groupoid(2)
    X = S.nerve(G, 4)
    C = S.coskeleton(X, 2, 4)
    assert C.sizes() == X.sizes()
    assert S.validate(C).ok
    # cosk_1 keeps every triangle boundary, which is too many
    assert S.coskeleton(X, 1, 2).sizes() == [1, 2, 8]


def test_coskeleton_of_coskeleton_is_stable():
    X = S.coskeleton(S.standard_simplex(1, 2), 1, 3)
    Y = S.coskeleton(X, 2, 3)
    assert X.sizes() == Y.sizes()


def test_skeleton_of_delta2():
    X = S.standard_simplex(2, 3)
    sk = S.skeleton(X, 1)
    assert [len(sk.nondegenerate(m)) for m in range(4)] == [3, 3, 0, 0]
    assert S.validate(sk).ok


def test_yoneda_maps_from_delta1():
    X = S.nerve(S.cyclic_group_groupoid(3), 2)
    maps = S.simplicial_maps(S.standard_simplex(1, 2), X)
    assert len(maps) == X.size(1)
    assert len(S.simplicial_maps(S.standard_simplex(0, 2), X)) == X.size(0)


def test_simplicial_map_validation():
    X = S.nerve(S.cyclic_group_groupoid(3), 2)
    ident = S.SimplicialMap(X, X, [list(range(X.size(m))) for m in range(3)])
    assert ident.validate().ok
    bad = S.SimplicialMap(X, X, [[0], [0, 2, 1], list(range(X.size(2)))])
    assert not bad.validate().ok


def _codiscrete(n):
    objs = ["a%d" % i for i in range(n)]
    mor = {(i, j): (objs[i], objs[j]) for i in range(n) for j in range(n)}
    comp = {((j, k), (i, j)): (i, k) for i in range(n) for j in range(n) for k in range(n)}
    return S.FiniteGroupoid(objs, mor, comp, {objs[i]: (i, i) for i in range(n)})


def test_trivial_hypergroupoid_examples():
    X = S.nerve(_codiscrete(2), 3)
    P = S.point(3)
    f = S.SimplicialMap(X, P, [[0] * X.size(m) for m in range(4)])
    assert f.validate().ok
    assert S.trivial_hypergroupoid_check(f, 1)["ok"]
    r = S.trivial_hypergroupoid_check(f, 0)
    assert not r["ok"] and r["reason"] == "not injective"
    ident = S.SimplicialMap(X, X, [list(range(X.size(m))) for m in range(4)])
    assert S.trivial_hypergroupoid_check(ident, 0)["ok"]
    # Delta^0 + Delta^0 -> Delta^1 misses the edge
    D1 = S.standard_simplex(1, 2)
    two = S.constant(["u", "v"], 2)
    g = S.SimplicialMap(two, D1, [[D1.index(m, (0,) * (m + 1)), D1.index(m, (1,) * (m + 1))] for m in range(3)])
    assert g.validate().ok
    assert not S.trivial_hypergroupoid_check(g, 0)["ok"]


def test_groupoid_discreteness():
    assert _codiscrete(1).is_discrete()
    assert not _codiscrete(2).is_discrete()
    assert not S.cyclic_group_groupoid(2).is_discrete()


# -------------------------------------------------------- vector spaces

def test_eilenberg_maclane_dims():
    # surjections [m] -> [n] are counted by C(m, n)
    for n in range(3):
        K = S.eilenberg_maclane(n, 5)
        assert K.dims == [comb(m, n) for m in range(6)]
        assert S.normalize(K).dims == [1 if m == n else 0 for m in range(6)]


def test_normalized_constant_is_degree_zero():
    A = S.free_vector_space(S.constant(["p", "q", "r"], 3))
    N = S.normalize(A)
    assert N.dims == [3, 0, 0, 0]


def test_free_simplex_is_contractible():
    A = S.free_vector_space(S.standard_simplex(2, 4))
    N = S.normalize(A)
    assert N.dims == [3, 3, 1, 0, 0]
    assert N.homology_ranks()[:4] == [1, 0, 0, 0]


def test_free_circle_homology():
    A = S.free_vector_space(S.boundary_simplex(2, 4))
    assert S.normalize(A).homology_ranks()[:3] == [1, 1, 0]


def test_roundtrip_shifted_lines():
    for n in range(4):
        assert S.roundtrip_normalize_denormalize(S.shifted_line(n), 5)


def test_ez_on_fixed_product():
    C = S.ChainComplexQ([1, 1], {1: [[1]]})
    D = S.shifted_line(1)
    B = S.external_product(S.denormalize(C, 3), S.denormalize(D, 3), 3)
    assert S.ez_is_chain_map(B, 2)
    assert S.ez_is_quasi_iso(B, 2)
    assert S.aw_after_ez_is_identity(B, 2)


def test_diagonal_is_simplicial():
    B = S.external_product(S.eilenberg_maclane(1, 3), S.eilenberg_maclane(1, 3), 3)
    assert B.diagonal().validate().ok
    # Q[1] x Q[1]: total homology is Q in degree 2
    T = S.TotalNormalized(B, 3)
    assert T.complex().homology_ranks()[:3] == [0, 0, 1]


# ------------------------------------------------------------ properties

seeds = st.integers(min_value=0, max_value=10 ** 6)


def _nerve_size_oracle(G, m):
    # chains of m composable arrows
    objs = G.objects
    if m == 0:
        return len(objs)
    count = {a: 1 for a in objs}
    for _ in range(m):
        nxt = {a: 0 for a in objs}
        for g, (s, t) in G.morphisms.items():
            nxt[t] += count[s]
        count = nxt
    return sum(count.values())


@settings(max_examples=12, deadline=None)
@given(seeds)
def test_random_nerves_are_valid_hypergroupoids(seed):
    G = S.random_groupoid(random.Random(seed))
    X = S.nerve(G, 3)
    assert S.validate(X).ok
    assert X.sizes() == [_nerve_size_oracle(G, m) for m in range(4)]
    assert S.hypergroupoid_check(X, 1)["ok"]
    assert S.hypergroupoid_check(X, 0)["ok"] == G.is_discrete()


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_hypergroupoid_is_coskeletal(seed):
    G = S.random_groupoid(random.Random(seed), max_objects=2, max_group=2)
    X = S.nerve(G, 3)
    assert S.hypergroupoid_check(X, 1)["ok"]
    assert S.coskeleton(X, 2, 3).sizes() == X.sizes()


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_normalized_dimension_splits_off_degeneracies(seed):
    rng = random.Random(seed)
    G = S.random_groupoid(rng, max_objects=2, max_group=2)
    A = S.free_vector_space(S.nerve(G, 3))
    assert A.validate().ok
    N = S.normalize(A)
    for m in range(4):
        assert N.dims[m] == A.dims[m] - S.mat_rank(A.degenerate_span(m))
    # Moore and normalized homology agree below the top level
    assert S.moore_homology(A)[:3] == N.homology_ranks()[:3]


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_dold_kan_roundtrip_random(seed):
    C = S.random_chain_complex(random.Random(seed))
    K = S.denormalize(C, 4)
    assert K.validate().ok
    assert K.dims == [sum(comb(m, k) * C.dim(k) for k in range(m + 1)) for m in range(5)]
    assert S.roundtrip_normalize_denormalize(C, C.top())


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_eilenberg_zilber_random(seed):
    B, (C1, C2) = S.random_product_bisimplicial(random.Random(seed))
    top = C1.top() + C2.top()
    assert S.ez_is_chain_map(B, top)
    assert S.ez_is_quasi_iso(B, top)
    assert S.aw_after_ez_is_identity(B, top)
