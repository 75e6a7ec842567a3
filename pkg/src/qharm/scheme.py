"""Fourier calculus on the bilinear scheme L(V, W).

V = F_q^n and W = F_q^m.  A map A in L(V, W) is stored as an (m, n)
matrix acting on column vectors; the dual index X in L(W, V) is an
(n, m) matrix.  The characters are

    u_X(A) = phi(tr(X A)),

an orthonormal basis of L^2(L(V, W)) under the expectation inner
product <f, g> = E_A[f(A) conj(g(A))].  Spectra are always indexed over
the dual space with its own IndexMap; the two index spaces are never
conflated.

tr(X A) pairs entry X[i, j] with A[j, i], so the transform factorizes
into one q-point kernel per matrix entry followed by a digit
permutation.  That factorized path is the default; a naive
character-matrix path is kept for cross-checks on small domains.
"""

from __future__ import annotations

import numpy as np

from .errors import SizeCapError, ToolkitError
from .fqlin import (
    IndexMap,
    QuotientFrame,
    Subspace,
    mat_mul,
    zero_space,
    full_space,
    enumerate_subspaces,
)
from .gf import FieldCtx, get_field

_NAIVE_CAP = 2048  # full character matrix only below this domain size


class SchemeCtx:
    """Enumerated domain L(V, W) with its dual index and transform kernels."""

    def __init__(self, field: FieldCtx, n: int, m: int, cap: int = 2**24):
        self.field = field
        self.n = n
        self.m = m
        self.domain_index = IndexMap(field, m, n, cap=cap)
        self.dual_index = IndexMap(field, n, m, cap=cap)
        self.size = self.domain_index.size
        k = n * m
        self.k = k

        # A position j*n+i pairs with X position i*m+j.
        pair = np.empty(k, dtype=np.int64)
        for j in range(m):
            for i in range(n):
                pair[j * n + i] = i * m + j
        pair_inv = np.empty(k, dtype=np.int64)
        pair_inv[pair] = np.arange(k)
        self._pair = pair
        self._pair_inv = pair_inv
        # tensor axis t holds digit position k-1-t
        self._perm_fwd = np.array([k - 1 - pair_inv[k - 1 - s] for s in range(k)], dtype=np.int64)
        self._perm_inv = np.array([k - 1 - pair[k - 1 - s] for s in range(k)], dtype=np.int64)

        q = field.q
        prods = field.mul_table  # (q, q) field products
        chars = field.char_table[prods]  # phi(x*a)
        self._kernel_fwd = np.conj(chars) / q
        self._kernel_inv = chars

        self._rank_dual: np.ndarray | None = None
        self._char_matrix: np.ndarray | None = None
        self._cosets: dict = {}
        self._embeddings: dict = {}
        self._subspaces: dict = {}
        self._pairs: dict = {}
        self._masks: dict = {}

    # -- bookkeeping --------------------------------------------------------

    @property
    def q(self) -> int:
        return self.field.q

    def __repr__(self) -> str:
        return f"SchemeCtx(q={self.q}, n={self.n}, m={self.m})"

    def rank_table_dual(self) -> np.ndarray:
        """rank(X) for every dual index, cached."""
        if self._rank_dual is None:
            self._rank_dual = self.dual_index.rank_table()
        return self._rank_dual

    def subspaces(self, side: str, dim: int) -> list[Subspace]:
        """Cached subspace lists; side 'v' is F_q^n, side 'w' is F_q^m."""
        ambient = self.n if side == "v" else self.m
        key = (side, dim)
        if key not in self._subspaces:
            self._subspaces[key] = enumerate_subspaces(self.field, ambient, dim)
        return self._subspaces[key]

    def restriction_pairs(self, order: int) -> list[tuple[Subspace, Subspace]]:
        """All (V', W') with dim V' + codim W' = order, in canonical order."""
        if order not in self._pairs:
            pairs = []
            for dv in range(order + 1):
                cw = order - dv
                if dv > self.n or cw > self.m:
                    continue
                for vp in self.subspaces("v", dv):
                    for wp in self.subspaces("w", self.m - cw):
                        pairs.append((vp, wp))
            self._pairs[order] = pairs
        return self._pairs[order]

    # -- characters and transforms -------------------------------------------

    def char_value(self, X: np.ndarray, A: np.ndarray) -> complex:
        """u_X(A) = phi(tr(X A)); X is (n, m), A is (m, n)."""
        X = np.asarray(X, dtype=np.uint8)
        A = np.asarray(A, dtype=np.uint8)
        if X.shape != (self.n, self.m) or A.shape != (self.m, self.n):
            raise ToolkitError(f"shape mismatch: X{X.shape} A{A.shape} on {self!r}")
        f = self.field
        acc = 0
        for i in range(self.n):
            for j in range(self.m):
                acc = f.add(acc, f.mul(int(X[i, j]), int(A[j, i])))
        return f.char(acc)

    def _axis_apply(self, tensor: np.ndarray, kernel: np.ndarray, nbatch: int) -> np.ndarray:
        for ax in range(nbatch, nbatch + self.k):
            tensor = np.moveaxis(np.moveaxis(tensor, ax, -1) @ kernel.T, -1, ax)
        return tensor

    def _transform(self, values: np.ndarray, kernel: np.ndarray, perm: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.complex128)
        batch = values.shape[:-1]
        nbatch = len(batch)
        q = self.q
        t = values.reshape(batch + (q,) * self.k) if self.k else values.reshape(batch + ())
        if self.k == 0:
            return values.copy()
        t = self._axis_apply(t, kernel, nbatch)
        axes = tuple(range(nbatch)) + tuple(nbatch + perm)
        t = np.transpose(t, axes)
        return t.reshape(batch + (self.size,))

    def fourier_forward(self, values: np.ndarray) -> np.ndarray:
        """Spectrum over the dual index; supports batched (..., N) input."""
        return self._transform(values, self._kernel_fwd, self._perm_fwd)

    def fourier_inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return self._transform(coeffs, self._kernel_inv, self._perm_inv)

    def char_matrix(self) -> np.ndarray:
        """Full (N_dual, N) character matrix, for naive-path cross-checks."""
        if self._char_matrix is None:
            if self.size > _NAIVE_CAP:
                raise SizeCapError(f"naive character matrix refused for N={self.size}")
            dx = self.dual_index.digits_table()
            da = self.domain_index.digits_table()
            f = self.field
            acc = np.zeros((self.size, self.size), dtype=np.uint8)
            for p_a in range(self.k):
                p_x = int(self._pair[p_a])
                term = f.mul_table[dx[:, p_x][:, None], da[:, p_a][None, :]]
                acc = f.add_table[acc, term]
            self._char_matrix = f.char_table[acc]
        return self._char_matrix

    def fourier_forward_naive(self, values: np.ndarray) -> np.ndarray:
        c = self.char_matrix()
        return np.asarray(values, dtype=np.complex128) @ c.conj().T / self.size

    def fourier_inverse_naive(self, coeffs: np.ndarray) -> np.ndarray:
        c = self.char_matrix()
        return np.asarray(coeffs, dtype=np.complex128) @ c

    # -- restrictions ---------------------------------------------------------

    def quotient_frame(self, vp: Subspace) -> QuotientFrame:
        key = ("frame", vp.key)
        if key not in self._embeddings:
            self._embeddings[key] = QuotientFrame(self.field, vp)
        return self._embeddings[key]

    def restriction_embedding(self, vp: Subspace, wp: Subspace):
        """(sub_ctx, embedded domain indices aligned with sub enumeration).

        The embedded copy of L(V/V', W') is the set of maps with V' in
        the kernel and image inside W'; the identification goes through
        the deterministic quotient frame of V'.
        """
        key = (vp.key, wp.key)
        if key not in self._embeddings:
            sub = get_scheme(self.q, self.n - vp.dim, wp.dim)
            frame = self.quotient_frame(vp)
            cw_t = wp.basis.T.copy()  # (m, w')
            emb = np.empty(sub.size, dtype=np.int64)
            for kk in range(sub.size):
                s_bar = sub.domain_index.to_matrix(kk)  # (w', n - dim V')
                if s_bar.size:
                    embedded = mat_mul(self.field, mat_mul(self.field, cw_t, s_bar), frame.quotient_map)
                else:
                    embedded = np.zeros((self.m, self.n), dtype=np.uint8)
                emb[kk] = self.domain_index.to_index(embedded)
            self._embeddings[key] = (sub, emb)
        return self._embeddings[key]

    def restrict_values(self, values: np.ndarray, vp: Subspace, wp: Subspace, t_index: int) -> np.ndarray:
        sub, emb = self.restriction_embedding(vp, wp)
        idx = self.domain_index.add_indices(emb, t_index)
        return np.asarray(values)[..., idx]

    def char_restriction_dual_index(self, vp: Subspace, wp: Subspace, x_index: int) -> int:
        """Dual index of Y = X(W', V/V') in the restricted scheme."""
        sub, _ = self.restriction_embedding(vp, wp)
        frame = self.quotient_frame(vp)
        x = self.dual_index.to_matrix(x_index)
        y = mat_mul(self.field, mat_mul(self.field, frame.quotient_map, x), wp.basis.T.copy())
        return sub.dual_index.to_index(y)

    def site_cosets(self, vp: Subspace, wp: Subspace):
        """(reps, members) for the coset partition of L(V,W) by the embedded
        copy of L(V/V', W'); reps are least-index, ascending; members is
        (n_reps, subgroup_size) of domain indices."""
        key = (vp.key, wp.key)
        if key not in self._cosets:
            _, emb = self.restriction_embedding(vp, wp)
            emb_sorted = np.sort(emb)
            visited = np.zeros(self.size, dtype=bool)
            reps = []
            rows = []
            for idx in range(self.size):
                if visited[idx]:
                    continue
                members = self.domain_index.add_indices(emb_sorted, idx)
                visited[members] = True
                reps.append(idx)
                rows.append(members)
            self._cosets[key] = (np.array(reps, dtype=np.int64), np.array(rows, dtype=np.int64))
        return self._cosets[key]

    # -- constructors ---------------------------------------------------------

    def table(self, values) -> "FnTable":
        v = np.asarray(values, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.size:
            raise ToolkitError(f"expected {self.size} values, got {v.shape[0]}")
        return FnTable(self, v)

    def constant(self, c: complex = 1.0) -> "FnTable":
        return FnTable(self, np.full(self.size, c, dtype=np.complex128))

    def indicator(self, indices) -> "FnTable":
        v = np.zeros(self.size, dtype=np.complex128)
        v[np.asarray(indices, dtype=np.int64)] = 1.0
        return FnTable(self, v)

    def char_fn(self, x_index: int) -> "FnTable":
        """u_X as a function table."""
        coeffs = np.zeros(self.size, dtype=np.complex128)
        coeffs[x_index] = 1.0
        return FnTable(self, self.fourier_inverse(coeffs))


class FnTable:
    """A dense complex function on an enumerated domain (scheme or group).

    Norms and inner products use the uniform-measure expectation:
    <f, g> = E[f conj(g)].
    """

    __slots__ = ("domain", "values")

    def __init__(self, domain, values: np.ndarray):
        self.domain = domain
        self.values = np.asarray(values, dtype=np.complex128)

    def mean(self) -> complex:
        return complex(self.values.mean())

    def norm2sq(self) -> float:
        return float(np.mean(np.abs(self.values) ** 2))

    def inner(self, other: "FnTable") -> complex:
        return complex(np.mean(self.values * np.conj(other.values)))

    def lp_norm(self, p: float) -> float:
        return float(np.mean(np.abs(self.values) ** p) ** (1.0 / p))

    def lp_power(self, p: float) -> float:
        """E|f|^p (the p-th power of the p-norm)."""
        return float(np.mean(np.abs(self.values) ** p))

    def __add__(self, other):
        return FnTable(self.domain, self.values + other.values)

    def __sub__(self, other):
        return FnTable(self.domain, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, FnTable):
            return FnTable(self.domain, self.values * c.values)
        return FnTable(self.domain, self.values * c)

    __rmul__ = __mul__


class SpectrumTable:
    """Fourier coefficients over the dual index of a scheme."""

    __slots__ = ("ctx", "coefficients")

    def __init__(self, ctx: SchemeCtx, coefficients: np.ndarray):
        self.ctx = ctx
        self.coefficients = np.asarray(coefficients, dtype=np.complex128)

    def norm2sq(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

_SCHEME_CACHE: dict[tuple[int, int, int], SchemeCtx] = {}


def get_scheme(q: int, n: int, m: int) -> SchemeCtx:
    key = (q, n, m)
    if key not in _SCHEME_CACHE:
        _SCHEME_CACHE[key] = SchemeCtx(get_field(q), n, m)
    return _SCHEME_CACHE[key]


def _scheme_of(f: FnTable) -> SchemeCtx:
    if not isinstance(f.domain, SchemeCtx):
        raise ToolkitError("operation requires a scheme-domain function")
    return f.domain


def fourier_forward(f: FnTable) -> SpectrumTable:
    ctx = _scheme_of(f)
    return SpectrumTable(ctx, ctx.fourier_forward(f.values))


def fourier_inverse(s: SpectrumTable) -> FnTable:
    return FnTable(s.ctx, s.ctx.fourier_inverse(s.coefficients))


def degree_project(f: FnTable, d: int, mode: str = "pure") -> FnTable:
    """f^{=d} (pure) or f^{<=d} (cumulative): spectral mass at rank(X) = d or <= d."""
    ctx = _scheme_of(f)
    if not 0 <= d <= min(ctx.n, ctx.m):
        raise ToolkitError(f"degree {d} out of range for {ctx!r}")
    ranks = ctx.rank_table_dual()
    mask = (ranks == d) if mode == "pure" else (ranks <= d)
    coeffs = ctx.fourier_forward(f.values) * mask
    return FnTable(ctx, ctx.fourier_inverse(coeffs))


def degree_decompose(f: FnTable) -> list[FnTable]:
    """All pure parts f^{=0..dmax} in one pass."""
    ctx = _scheme_of(f)
    ranks = ctx.rank_table_dual()
    coeffs = ctx.fourier_forward(f.values)
    parts = []
    for d in range(min(ctx.n, ctx.m) + 1):
        parts.append(FnTable(ctx, ctx.fourier_inverse(coeffs * (ranks == d))))
    return parts


def restrict(f: FnTable, vp: Subspace, wp: Subspace, t) -> FnTable:
    """f_{(V',W')->T}(S) = f(S + T) on the identified copy of L(V/V', W')."""
    ctx = _scheme_of(f)
    t_index = t if isinstance(t, (int, np.integer)) else ctx.domain_index.to_index(t)
    sub, _ = ctx.restriction_embedding(vp, wp)
    return FnTable(sub, ctx.restrict_values(f.values, vp, wp, int(t_index)))


def dualize(f: FnTable) -> FnTable:
    """f*(A) = f(A^T): moves f to the scheme with V and W swapped."""
    ctx = _scheme_of(f)
    dual = get_scheme(ctx.q, ctx.m, ctx.n)
    key = ("dual_perm",)
    if key not in ctx._embeddings:
        perm = np.empty(dual.size, dtype=np.int64)
        for idx in range(dual.size):
            b = dual.domain_index.to_matrix(idx)  # (n, m)
            perm[idx] = ctx.domain_index.to_index(b.T.copy())
        ctx._embeddings[key] = perm
    perm = ctx._embeddings[key]
    return FnTable(dual, f.values[perm])


def scheme_convolve(f: FnTable, g: FnTable) -> FnTable:
    """Abelian convolution (f*g)(A) = E_B f(A-B) g(B); transforms multiply."""
    ctx = _scheme_of(f)
    if g.domain is not ctx:
        raise ToolkitError("convolution requires a common domain")
    return FnTable(ctx, ctx.fourier_inverse(ctx.fourier_forward(f.values) * ctx.fourier_forward(g.values)))


def random_table(ctx: SchemeCtx, rng: np.random.Generator, kind: str = "real", density: float = 0.5) -> FnTable:
    if kind == "boolean":
        vals = (rng.random(ctx.size) < density).astype(np.complex128)
    elif kind == "real":
        vals = rng.standard_normal(ctx.size).astype(np.complex128)
    elif kind == "complex":
        vals = rng.standard_normal(ctx.size) + 1j * rng.standard_normal(ctx.size)
    else:
        raise ToolkitError(f"unknown random table kind {kind!r}")
    return FnTable(ctx, vals)


def scheme_zero_space(ctx: SchemeCtx, side: str) -> Subspace:
    return zero_space(ctx.field, ctx.n if side == "v" else ctx.m)


def scheme_full_space(ctx: SchemeCtx, side: str) -> Subspace:
    return full_space(ctx.field, ctx.n if side == "v" else ctx.m)
