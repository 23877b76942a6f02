import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from findeg.errors import StructuralError, ValidationError
from findeg.linalg_gf import (
    Basis,
    FpScalar,
    SparseVector,
    Subspace,
    kernel,
    kernel_matrix,
    rank,
    rref,
    solve,
    subspace_leq,
)


def vec(basis, values, p):
    return SparseVector.from_dense(basis, values, p)


def span_bruteforce(rows, p, n):
    """All F_p-combinations of ``rows`` as a set of tuples."""
    rows = [np.asarray(r) for r in rows]
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(rows)):
        v = np.zeros(n, dtype=np.int64)
        for c, r in zip(coeffs, rows):
            v = (v + c * r) % p
        out.add(tuple(int(x) for x in v))
    return out


def test_fpscalar_arithmetic():
    a = FpScalar(5, 7)
    assert a + 3 == 1
    assert (a * a).value == 4
    assert a.inverse() * a == 1
    assert -a == 2
    with pytest.raises(ValidationError):
        FpScalar(1, 6)
    with pytest.raises(ValidationError):
        FpScalar(1, 65537)


def test_sparse_vector_drops_zeros():
    b = Basis("xyz")
    v = SparseVector(b, {"x": 2, "y": 0, "z": 4}, 2)
    assert v.entries == {}
    w = SparseVector(b, {"x": 1}, 3)
    assert (w + w + w).is_zero()
    with pytest.raises(StructuralError):
        SparseVector(b, {"q": 1}, 3)


def test_rref_empty_rows_is_zero_subspace():
    S = rref([], basis=range(3), p=2)
    assert S.rank == 0


def test_rref_identity_full_rank():
    b = Basis(range(3))
    S = rref([vec(b, row, 2) for row in np.eye(3, dtype=int)])
    assert S.rank == 3


def test_rref_cycle_rows_rank_two_matches_enumeration():
    rows = [(1, 1, 0), (0, 1, 1), (1, 0, 1)]
    b = Basis(range(3))
    S = rref([vec(b, r, 2) for r in rows])
    # 8 combinations collapse onto 4 distinct vectors: rank 2
    assert len(span_bruteforce(rows, 2, 3)) == 4
    assert S.rank == 2


def test_rref_rejects_mismatched_bases():
    with pytest.raises(StructuralError):
        rref([vec(range(2), (1, 0), 2), vec("ab", (1, 0), 2)])


def test_kernel_zero_matrix_is_full():
    cod = Basis(range(2))
    cols = [SparseVector(cod, {}, 3) for _ in range(4)]
    assert kernel(cols).rank == 4


def test_kernel_identity_is_zero():
    cod = Basis(range(3))
    cols = [SparseVector.unit(cod, i, 5) for i in range(3)]
    assert kernel(cols).rank == 0


def test_kernel_of_one_one_over_f2():
    cod = Basis([0])
    cols = [SparseVector.unit(cod, 0, 2), SparseVector.unit(cod, 0, 2)]
    K = kernel(cols)
    # of the two nonzero candidates (1,0),(0,1),(1,1) only (1,1) is killed
    candidates = [(1, 0), (0, 1), (1, 1)]
    killed = [c for c in candidates if (c[0] + c[1]) % 2 == 0]
    assert killed == [(1, 1)]
    assert K.rank == 1
    assert K.contains(np.array([1, 1]))


def test_subspace_leq_examples():
    b = Basis(range(2))
    Z = Subspace.zero(b, 2)
    A = rref([vec(b, (1, 0), 2)])
    B = rref([vec(b, (0, 1), 2)])
    assert subspace_leq(Z, A)
    assert subspace_leq(A, A)
    res = subspace_leq(A, B)
    assert not res
    assert res.witness == vec(b, (1, 0), 2)
    with pytest.raises(StructuralError):
        subspace_leq(A, Subspace.zero(range(3), 2))


def test_solve_consistent_and_inconsistent():
    A = np.array([[1, 1], [0, 1]])
    x = solve(A, np.array([1, 2]), 3)
    assert np.array_equal((A @ x) % 3, [1, 2])
    assert solve(np.array([[1, 1], [1, 1]]), np.array([0, 1]), 2) is None


matrices = st.integers(min_value=1, max_value=6).flatmap(
    lambda n: st.tuples(
        st.sampled_from([2, 3]),
        st.lists(
            st.lists(st.integers(0, 2), min_size=n, max_size=n), min_size=0, max_size=5
        ),
        st.just(n),
    )
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_nullity(data):
    p, rows, n = data
    M = np.array(rows, dtype=np.int64).reshape(len(rows), n) % p
    K = kernel_matrix(M, p, n)
    assert rank(M, p) + K.shape[0] == n


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_kernel_exhaustive_oracle(data):
    p, rows, n = data
    M = np.array(rows, dtype=np.int64).reshape(len(rows), n) % p
    K = Subspace(range(n), kernel_matrix(M, p, n), p)
    for v in itertools.product(range(p), repeat=n):
        v = np.array(v)
        in_kernel = not np.any((M @ v) % p)
        assert K.contains(v) == in_kernel


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_rref_idempotent_and_span_preserved(data):
    p, rows, n = data
    if not rows:
        return
    M = np.array(rows) % p
    S = Subspace(range(n), M, p)
    assert Subspace(range(n), S.rows, p) == S
    assert span_bruteforce(list(S.rows), p, n) == span_bruteforce(list(M), p, n)


@settings(max_examples=40, deadline=None)
@given(matrices, matrices, matrices)
def test_leq_is_a_partial_order(a, b, c):
    p, n = 3, 4
    spaces = []
    for _, rows, _ in (a, b, c):
        rows = [list(r[:n]) + [0] * (n - len(r[:n])) for r in rows]
        spaces.append(Subspace(range(n), np.array(rows, dtype=np.int64).reshape(-1, n), p))
    A, B, C = spaces
    assert A <= A
    if A <= B and B <= A:
        assert A == B
    if A <= B and B <= C:
        assert A <= C
    assert A <= A.join(B) and B <= A.join(B)
