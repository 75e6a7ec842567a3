"""Dense linear algebra over F_q at desk scale.

Matrices are numpy uint8 arrays with entries in [0, q); all arithmetic
goes through the FieldCtx tables, so q may be a proper prime power.
Gaussian elimination is used throughout: domains are small enough that
asymptotically faster algorithms would be noise.

Canonical conventions, fixed once so that enumerations and audits are
bit-reproducible:

  * subspaces are stored as reduced row-echelon bases with strictly
    increasing pivot columns, one basis vector per row;
  * quotient lifts complete a subspace basis by the least-index vectors
    (vector index = sum of v_i * q^i);
  * matrix <-> integer index maps are row-major base q, entry (i, j) of
    an r x c matrix contributing digit i*c + j.
"""

from __future__ import annotations

from functools import reduce
from itertools import combinations

import numpy as np

from .errors import SizeCapError, ToolkitError
from .gf import FieldCtx

DEFAULT_MAX_DOMAIN = 2**24
DEFAULT_MAX_SUBSPACES = 2**20


# ---------------------------------------------------------------------------
# matrix arithmetic
# ---------------------------------------------------------------------------

def as_mat(entries, rows: int, cols: int) -> np.ndarray:
    a = np.asarray(entries, dtype=np.uint8).reshape(rows, cols)
    return a


def mat_mul(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over F_q."""
    if a.shape[1] != b.shape[0]:
        raise ToolkitError(f"shape mismatch {a.shape} @ {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for k in range(a.shape[1]):
        out = ctx.add_table[out, ctx.mul_table[a[:, k][:, None], b[k, :][None, :]]]
    return out


def mat_vec(ctx: FieldCtx, a: np.ndarray, v: np.ndarray) -> np.ndarray:
    return mat_mul(ctx, a, np.asarray(v, dtype=np.uint8).reshape(-1, 1))[:, 0]


def mat_add(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ctx.add_table[a, b]


def mat_neg(ctx: FieldCtx, a: np.ndarray) -> np.ndarray:
    return ctx.neg_table[a]


def mat_sub(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ctx.add_table[a, ctx.neg_table[b]]


def rref(ctx: FieldCtx, a: np.ndarray, n_pivot_cols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form with unit pivots; returns (R, pivot columns).

    Pivots are searched only in the first n_pivot_cols columns (default
    all); row operations still apply to the full width, so augmented
    columns are carried along.
    """
    r = np.array(a, dtype=np.uint8)
    rows, cols = r.shape
    if n_pivot_cols is None:
        n_pivot_cols = cols
    pivots: list[int] = []
    pr = 0
    for col in range(n_pivot_cols):
        if pr >= rows:
            break
        found = -1
        for row in range(pr, rows):
            if r[row, col]:
                found = row
                break
        if found < 0:
            continue
        if found != pr:
            r[[pr, found]] = r[[found, pr]]
        piv_inv = ctx.inv(int(r[pr, col]))
        r[pr] = ctx.mul_table[r[pr], piv_inv]
        for row in range(rows):
            if row != pr and r[row, col]:
                factor = int(r[row, col])
                r[row] = ctx.add_table[r[row], ctx.mul_table[r[pr], ctx.neg(factor)]]
        pivots.append(col)
        pr += 1
    return r, pivots


def rank(ctx: FieldCtx, a: np.ndarray) -> int:
    return len(rref(ctx, a)[1])


def det(ctx: FieldCtx, a: np.ndarray) -> int:
    """Determinant over F_q by elimination."""
    if a.shape[0] != a.shape[1]:
        raise ToolkitError("determinant of a non-square matrix")
    m = np.array(a, dtype=np.uint8)
    n = m.shape[0]
    d = 1
    for col in range(n):
        found = -1
        for row in range(col, n):
            if m[row, col]:
                found = row
                break
        if found < 0:
            return 0
        if found != col:
            m[[col, found]] = m[[found, col]]
            d = ctx.neg(d)
        piv = int(m[col, col])
        d = ctx.mul(d, piv)
        piv_inv = ctx.inv(piv)
        m[col] = ctx.mul_table[m[col], piv_inv]
        for row in range(col + 1, n):
            if m[row, col]:
                m[row] = ctx.add_table[m[row], ctx.mul_table[m[col], ctx.neg(int(m[row, col]))]]
    return d


def inv_matrix(ctx: FieldCtx, a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    aug = np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1)
    r, pivots = rref(ctx, aug)
    if pivots[: n] != list(range(n)):
        raise ToolkitError("matrix is singular")
    return r[:, n:]


def kernel_basis(ctx: FieldCtx, a: np.ndarray) -> np.ndarray:
    """Canonical (RREF) basis of the right kernel {x : a x = 0}."""
    r, pivots = rref(ctx, a)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    if not free:
        return np.zeros((0, cols), dtype=np.uint8)
    vecs = np.zeros((len(free), cols), dtype=np.uint8)
    for i, fc in enumerate(free):
        vecs[i, fc] = 1
        for pr, pc in enumerate(pivots):
            vecs[i, pc] = ctx.neg(int(r[pr, fc]))
    return rref(ctx, vecs)[0][: len(free)]


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

class Subspace:
    """A subspace of F_q^n held as a canonical RREF basis.

    Equality is a byte compare of the basis, so two equal subspaces have
    identical representations regardless of how they were produced.
    """

    __slots__ = ("ambient", "dim", "basis", "_key")

    def __init__(self, ctx: FieldCtx, ambient: int, rows: np.ndarray):
        rows = np.asarray(rows, dtype=np.uint8).reshape(-1, ambient)
        r, pivots = rref(ctx, rows)
        self.ambient = ambient
        self.dim = len(pivots)
        self.basis = r[: self.dim].copy()
        self.basis.setflags(write=False)
        self._key = (ambient, self.basis.tobytes())

    @property
    def key(self):
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Subspace(n={self.ambient}, dim={self.dim})"

    def contains_vector(self, ctx: FieldCtx, v: np.ndarray) -> bool:
        if not np.any(v):
            return True
        stacked = np.concatenate([self.basis, np.asarray(v, dtype=np.uint8).reshape(1, -1)])
        return rank(ctx, stacked) == self.dim

    def contains(self, ctx: FieldCtx, other: "Subspace") -> bool:
        if other.dim == 0:
            return True
        stacked = np.concatenate([self.basis, other.basis])
        return rank(ctx, stacked) == self.dim

    def vectors(self, ctx: FieldCtx) -> np.ndarray:
        """All q^dim member vectors, one per row."""
        q = ctx.q
        out = np.zeros((q**self.dim, self.ambient), dtype=np.uint8)
        for i in range(q**self.dim):
            coeffs = [(i // q**j) % q for j in range(self.dim)]
            v = np.zeros(self.ambient, dtype=np.uint8)
            for c, row in zip(coeffs, self.basis):
                v = ctx.add_table[v, ctx.mul_table[row, c]]
            out[i] = v
        return out


def zero_space(ctx: FieldCtx, n: int) -> Subspace:
    return Subspace(ctx, n, np.zeros((0, n), dtype=np.uint8))


def full_space(ctx: FieldCtx, n: int) -> Subspace:
    return Subspace(ctx, n, np.eye(n, dtype=np.uint8))


def span_of(ctx: FieldCtx, rows) -> Subspace:
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    return Subspace(ctx, rows.shape[1], rows)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n (exact integer)."""
    if k < 0 or k > n:
        return 0
    num = reduce(lambda a, b: a * b, [q**(n - i) - 1 for i in range(k)], 1)
    den = reduce(lambda a, b: a * b, [q**(k - i) - 1 for i in range(k)], 1)
    assert num % den == 0
    return num // den


def enumerate_subspaces(
    ctx: FieldCtx, n: int, dim: int, cap: int = DEFAULT_MAX_SUBSPACES
) -> list[Subspace]:
    """Every dim-dimensional subspace of F_q^n exactly once, canonical order.

    Generation walks RREF shapes directly (pivot columns, then free
    entries), so no dedup pass is needed; the result is sorted by basis
    bytes for a stable order.
    """
    if dim < 0 or dim > n:
        raise ToolkitError(f"dim={dim} out of range for n={n}")
    count = gaussian_binomial(n, dim, ctx.q)
    if count > cap:
        raise SizeCapError(f"subspace enumeration would produce {count} > cap {cap}")
    if dim == 0:
        return [zero_space(ctx, n)]
    q = ctx.q
    out: list[Subspace] = []
    for pivots in combinations(range(n), dim):
        free_pos = [
            (r, c)
            for r in range(dim)
            for c in range(pivots[r] + 1, n)
            if c not in pivots
        ]
        base = np.zeros((dim, n), dtype=np.uint8)
        for r, pc in enumerate(pivots):
            base[r, pc] = 1
        for fill in range(q ** len(free_pos)):
            m = base.copy()
            x = fill
            for (r, c) in free_pos:
                m[r, c] = x % q
                x //= q
            out.append(Subspace(ctx, n, m))
    out.sort(key=lambda s: s.key)
    assert len(out) == count
    return out


# ---------------------------------------------------------------------------
# quotient frames
# ---------------------------------------------------------------------------

class QuotientFrame:
    """A deterministic identification of V/V' with a complement of V'.

    lift_basis holds the least-index completion of the subspace basis to
    a basis of F_q^n.  coord_matrix maps a vector to its coordinates in
    the combined basis (subspace rows first); quotient_map keeps only
    the lift coordinates.
    """

    def __init__(self, ctx: FieldCtx, subspace: Subspace):
        n = subspace.ambient
        k = subspace.dim
        self.ctx = ctx
        self.subspace = subspace
        rows = [subspace.basis[i] for i in range(k)]
        lifts = []
        idx = 1
        while len(rows) < n:
            v = decode_vector(idx, n, ctx.q)
            stacked = np.array(rows + [v], dtype=np.uint8)
            if rank(ctx, stacked) == len(rows) + 1:
                rows.append(v)
                lifts.append(v)
            idx += 1
        self.lift_basis = np.array(lifts, dtype=np.uint8).reshape(n - k, n)
        self.full_basis = np.array(rows, dtype=np.uint8)
        # coords c of v satisfy v = sum c_i * basis_row_i, i.e. c = (B^T)^{-1} v.
        self.coord_matrix = inv_matrix(ctx, self.full_basis.T.copy())
        self.quotient_map = self.coord_matrix[k:, :].copy()

    def coords(self, v: np.ndarray) -> np.ndarray:
        return mat_vec(self.ctx, self.coord_matrix, v)


# ---------------------------------------------------------------------------
# index maps
# ---------------------------------------------------------------------------

def encode_vector(v: np.ndarray, q: int) -> int:
    return int(sum(int(c) * q**i for i, c in enumerate(np.asarray(v).reshape(-1))))


def decode_vector(idx: int, n: int, q: int) -> np.ndarray:
    return np.array([(idx // q**i) % q for i in range(n)], dtype=np.uint8)


class IndexMap:
    """Bijection between r x c matrices over F_q and integers in [0, q^(r*c)).

    Entry (i, j) contributes digit i*c + j in base q; digit 0 is the
    least significant.  Index addition is field addition per digit.
    """

    def __init__(self, ctx: FieldCtx, rows: int, cols: int, cap: int = DEFAULT_MAX_DOMAIN):
        self.ctx = ctx
        self.q = ctx.q
        self.rows = rows
        self.cols = cols
        self.k = rows * cols
        n_total = ctx.q**self.k
        if n_total > cap:
            raise SizeCapError(f"domain size {n_total} exceeds cap {cap}")
        self.size = n_total
        self.powers = np.array([self.q**i for i in range(self.k)], dtype=np.int64)
        self._digits: np.ndarray | None = None

    def to_index(self, mat: np.ndarray) -> int:
        flat = np.asarray(mat, dtype=np.int64).reshape(-1)
        if flat.shape[0] != self.k:
            raise ToolkitError("matrix shape does not match index map")
        return int(flat @ self.powers)

    def to_matrix(self, idx: int) -> np.ndarray:
        if not (0 <= idx < self.size):
            raise ToolkitError(f"index {idx} out of range [0, {self.size})")
        flat = (idx // self.powers) % self.q
        return flat.astype(np.uint8).reshape(self.rows, self.cols)

    def digits_table(self) -> np.ndarray:
        """(size, k) base-q digit decomposition of every index."""
        if self._digits is None:
            idx = np.arange(self.size, dtype=np.int64)
            self._digits = ((idx[:, None] // self.powers[None, :]) % self.q).astype(np.uint8)
            self._digits.setflags(write=False)
        return self._digits

    def add_indices(self, a, b):
        """Field addition of indices; broadcasts like numpy over a and b."""
        da = self.digits_table()[np.asarray(a, dtype=np.int64)]
        db = self.digits_table()[np.asarray(b, dtype=np.int64)]
        s = self.ctx.add_table[da, db].astype(np.int64)
        return s @ self.powers

    def neg_index(self, a):
        da = self.digits_table()[np.asarray(a, dtype=np.int64)]
        return self.ctx.neg_table[da].astype(np.int64) @ self.powers

    def rank_table(self) -> np.ndarray:
        ranks = np.zeros(self.size, dtype=np.int8)
        for i in range(self.size):
            ranks[i] = rank(self.ctx, self.to_matrix(i))
        return ranks


def canonicalize(ctx: FieldCtx, a: np.ndarray):
    """(rref, rank, kernel, image) of a matrix; kernel/image are Subspaces."""
    r, pivots = rref(ctx, a)
    ker = Subspace(ctx, a.shape[1], kernel_basis(ctx, a))
    img = Subspace(ctx, a.shape[0], a.T.copy())
    return r, len(pivots), ker, img
