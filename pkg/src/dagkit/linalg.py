"""Exact linear algebra over Q on top of sympy's DomainMatrix."""

from gmpy2 import mpq
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix


def qmatrix(rows, ncols=None):
    """DomainMatrix over QQ from a list of rows (entries coercible to mpq)."""
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    data = [[QQ(mpq(x)) for x in r] for r in rows]
    return DomainMatrix(data, (len(data), ncols), QQ)


def rank(M):
    if M is None or 0 in M.shape:
        return 0
    return M.rank()


def nullspace(M, ncols):
    """List of basis vectors (lists of mpq) of the right kernel."""
    if M is None or M.shape[0] == 0:
        return [[mpq(1) if i == j else mpq(0) for i in range(ncols)] for j in range(ncols)]
    if ncols == 0:
        return []
    N = M.nullspace()
    return [[mpq(x) for x in row] for row in N.to_list()] if N.shape[0] else []


def to_rows(M):
    return [[mpq(x) for x in r] for r in M.to_list()]


def solve_in_span(basis, vectors, dim):
    """Coordinates of each vector in the span of ``basis``; raises if outside.

    Returns a matrix with one column per vector (rows indexed by basis).
    """
    k = len(basis)
    out = [[mpq(0)] * len(vectors) for _ in range(k)]
    if not vectors:
        return out
    if k == 0:
        for v in vectors:
            if any(v):
                raise ValueError("vector not in span")
        return out
    A = qmatrix([[basis[j][i] for j in range(k)] for i in range(dim)], k)
    B = qmatrix([[v[i] for v in vectors] for i in range(dim)], len(vectors))
    aug = A.hstack(B)
    R, piv = aug.rref()
    if any(p >= k for p in piv):
        raise ValueError("vector not in span")
    rows = to_rows(R)
    for r, p in enumerate(piv):
        for j in range(len(vectors)):
            out[p][j] = rows[r][k + j]
    return out
