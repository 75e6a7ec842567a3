import numpy as np
import pytest

from qharm.errors import SizeCapError
from qharm.fqlin import (
    IndexMap,
    QuotientFrame,
    canonicalize,
    det,
    encode_vector,
    decode_vector,
    enumerate_subspaces,
    gaussian_binomial,
    inv_matrix,
    kernel_basis,
    mat_mul,
    rank,
    rref,
    span_of,
)
from qharm.gf import get_field


def brute_force_rank(ctx, a):
    # dimension of the row span, counted by enumerating all row combinations
    rows = a.shape[0]
    q = ctx.q
    seen = set()
    for coeffs in range(q**rows):
        v = np.zeros(a.shape[1], dtype=np.uint8)
        x = coeffs
        for r in range(rows):
            c = x % q
            x //= q
            v = ctx.add_table[v, ctx.mul_table[a[r], c]]
        seen.add(v.tobytes())
    span_size = len(seen)
    d = 0
    while q**d < span_size:
        d += 1
    return d


def test_canonicalize_identity_and_zero():
    ctx = get_field(3)
    ident = np.eye(3, dtype=np.uint8)
    r, rk, ker, img = canonicalize(ctx, ident)
    assert rk == 3 and ker.dim == 0 and img.dim == 3
    z = np.zeros((3, 3), dtype=np.uint8)
    r, rk, ker, img = canonicalize(ctx, z)
    assert rk == 0 and ker.dim == 3 and img.dim == 0


def test_canonicalize_rank_one_over_f2():
    ctx = get_field(2)
    a = np.array([[1, 1], [1, 1]], dtype=np.uint8)
    r, rk, ker, img = canonicalize(ctx, a)
    assert rk == 1
    assert ker == span_of(ctx, [1, 1])


def test_rank_matches_brute_force_random():
    rng = np.random.default_rng(7)
    for q in (2, 3, 4):
        ctx = get_field(q)
        for _ in range(25):
            a = rng.integers(0, q, size=(3, 3)).astype(np.uint8)
            assert rank(ctx, a) == brute_force_rank(ctx, a)


def test_rref_idempotent():
    rng = np.random.default_rng(11)
    for q in (2, 3, 5):
        ctx = get_field(q)
        for _ in range(20):
            a = rng.integers(0, q, size=(3, 4)).astype(np.uint8)
            r1, _ = rref(ctx, a)
            r2, _ = rref(ctx, r1)
            assert np.array_equal(r1, r2)


def test_det_multiplicative_and_inverse():
    rng = np.random.default_rng(3)
    for q in (2, 3, 4):
        ctx = get_field(q)
        for _ in range(20):
            a = rng.integers(0, q, size=(3, 3)).astype(np.uint8)
            b = rng.integers(0, q, size=(3, 3)).astype(np.uint8)
            assert det(ctx, mat_mul(ctx, a, b)) == ctx.mul(det(ctx, a), det(ctx, b))
            if det(ctx, a):
                ainv = inv_matrix(ctx, a)
                assert np.array_equal(mat_mul(ctx, a, ainv), np.eye(3, dtype=np.uint8))


def test_kernel_annihilates():
    rng = np.random.default_rng(5)
    for q in (2, 3):
        ctx = get_field(q)
        for _ in range(15):
            a = rng.integers(0, q, size=(2, 4)).astype(np.uint8)
            kb = kernel_basis(ctx, a)
            assert kb.shape[0] + rank(ctx, a) == 4
            for v in kb:
                assert not np.any(mat_mul(ctx, a, v.reshape(-1, 1)))


def test_subspace_counts():
    assert len(enumerate_subspaces(get_field(2), 3, 1)) == 7
    assert len(enumerate_subspaces(get_field(3), 2, 1)) == 4
    assert len(enumerate_subspaces(get_field(2), 3, 0)) == 1


def test_subspace_counts_match_gaussian_binomial():
    # two independent computations: RREF enumeration vs the product formula
    for q in (2, 3, 5):
        ctx = get_field(q)
        for n in range(1, 5):
            for d in range(n + 1):
                subs = enumerate_subspaces(ctx, n, d)
                assert len(subs) == gaussian_binomial(n, d, q)
                assert len({s.key for s in subs}) == len(subs)


def test_subspace_canonical_equality():
    ctx = get_field(3)
    s1 = span_of(ctx, [[1, 2], [0, 0]])
    s2 = span_of(ctx, [[2, 1]])
    assert s1 == s2 and s1.dim == 1


def test_enumeration_cap():
    with pytest.raises(SizeCapError):
        enumerate_subspaces(get_field(5), 4, 2, cap=10)


def test_quotient_frame_unique_decomposition():
    # every ambient vector splits uniquely into subspace part + lift part
    for q in (2, 3):
        ctx = get_field(q)
        for n in (2, 3):
            for dim in range(n + 1):
                for sub in enumerate_subspaces(ctx, n, dim):
                    frame = QuotientFrame(ctx, sub)
                    assert rank(ctx, frame.full_basis) == n
                    seen = set()
                    for idx in range(q**n):
                        v = decode_vector(idx, n, q)
                        c = frame.coords(v)
                        # reconstruct
                        rec = np.zeros(n, dtype=np.uint8)
                        for coeff, row in zip(c, frame.full_basis):
                            rec = ctx.add_table[rec, ctx.mul_table[row, int(coeff)]]
                        assert np.array_equal(rec, v)
                        seen.add(c.tobytes())
                    assert len(seen) == q**n


def test_index_map_round_trip_and_examples():
    ctx = get_field(2)
    im = IndexMap(ctx, 1, 1)
    assert im.to_index(np.array([[0]])) == 0
    assert im.to_index(np.array([[1]])) == 1
    im22 = IndexMap(ctx, 2, 2)
    assert im22.to_index(np.array([[0, 1], [0, 0]])) == 2
    for i in range(im22.size):
        assert im22.to_index(im22.to_matrix(i)) == i


def test_index_addition_is_field_addition():
    ctx = get_field(4)
    im = IndexMap(ctx, 1, 2)
    a = np.array([[2, 3]], dtype=np.uint8)
    b = np.array([[3, 1]], dtype=np.uint8)
    s = ctx.add_table[a, b]
    assert im.add_indices(im.to_index(a), im.to_index(b)) == im.to_index(s)


def test_rank_table_counts():
    ctx = get_field(2)
    im = IndexMap(ctx, 1, 1)
    assert list(im.rank_table()) == [0, 1]
    im22 = IndexMap(ctx, 2, 2)
    ranks = im22.rank_table()
    hist = np.bincount(ranks, minlength=3)
    assert list(hist) == [1, 9, 6]
    assert int(np.sum(ranks == 0)) == 1


def test_vector_encoding_round_trip():
    for q in (2, 3, 4):
        for n in (1, 2, 3):
            for idx in range(q**n):
                assert encode_vector(decode_vector(idx, n, q), q) == idx
