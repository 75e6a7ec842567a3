"""Laplacians, derivatives, averaging operators, and influences on L(V, W).

Every operator that has both a spectral and a combinatorial definition
computes both realizations and cross-asserts them within tolerance
before returning; a disagreement raises ConsistencyError.  This makes
the equivalences first-class runtime checks instead of trusted code
paths.

Spectral conventions (X ranges over the dual index L(W, V)):

    laplacian L_{V1,W1}   keeps X with Im(X) >= V1 and X^{-1}(V1) <= W1
    avg_quotient e_{V/V'} keeps X with Im(X) <= V'
    avg_vector  E_v       damps X with v not in Im(X) by q^{-rank(X)}
    avg_dual    E_{W'}    damps X with Ker(X) + W' = W by q^{-rank(X)}

The derivative D_{V1,W1,T} is the (V1, W1) -> T restriction of the
Laplacian, and the influence at a site is its squared 2-norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, ToolkitError
from .fqlin import (
    Subspace,
    decode_vector,
    encode_vector,
    full_space,
    kernel_basis,
    mat_mul,
    rank,
    rref,
    span_of,
    zero_space,
)
from .scheme import FnTable, SchemeCtx, dualize, restrict

CROSS_CHECK = True  # disable only for profiling; tests rely on it


@dataclass(frozen=True)
class RestrictionSite:
    """A restriction site (V1, W1, T); T is a domain index."""

    v1: Subspace
    w1: Subspace
    t_index: int = 0


def site_order(ctx: SchemeCtx, site: RestrictionSite) -> int:
    return site.v1.dim + (ctx.m - site.w1.dim)


def _scheme_of(f: FnTable) -> SchemeCtx:
    if not isinstance(f.domain, SchemeCtx):
        raise ToolkitError("operator requires a scheme-domain function")
    return f.domain


# ---------------------------------------------------------------------------
# spectral masks (cached per context)
# ---------------------------------------------------------------------------

def _image_row_basis(ctx: SchemeCtx, x: np.ndarray) -> np.ndarray:
    r, piv = rref(ctx.field, x.T.copy())
    return r[: len(piv)]


def laplacian_mask(ctx: SchemeCtx, v1: Subspace, w1: Subspace) -> np.ndarray:
    """Boolean mask over dual indices: Im(X) >= V1 and X^{-1}(V1) <= W1."""
    key = ("lap", v1.key, w1.key)
    if key not in ctx._masks:
        field = ctx.field
        frame = ctx.quotient_frame(v1)
        qmap = frame.quotient_map  # (n - dim V1, n)
        mask = np.zeros(ctx.size, dtype=bool)
        ranks = ctx.rank_table_dual()
        for xi in range(ctx.size):
            if ranks[xi] < v1.dim:
                continue
            x = ctx.dual_index.to_matrix(xi)
            img = _image_row_basis(ctx, x)
            if v1.dim:
                stacked = np.concatenate([img, v1.basis])
                if rank(field, stacked) != ranks[xi]:
                    continue
            # preimage of V1 under X is ker(quotient_map @ X)
            if qmap.shape[0]:
                pre = kernel_basis(field, mat_mul(field, qmap, x))
            else:
                pre = np.eye(ctx.m, dtype=np.uint8)
            if pre.shape[0]:
                if w1.dim == 0:
                    continue
                stacked = np.concatenate([w1.basis, pre])
                if rank(field, stacked) != w1.dim:
                    continue
            mask[xi] = True
        ctx._masks[key] = mask
    return ctx._masks[key]


def quotient_mask(ctx: SchemeCtx, vp: Subspace) -> np.ndarray:
    """Boolean mask over dual indices: Im(X) <= V'."""
    key = ("quot", vp.key)
    if key not in ctx._masks:
        field = ctx.field
        mask = np.zeros(ctx.size, dtype=bool)
        for xi in range(ctx.size):
            img = _image_row_basis(ctx, ctx.dual_index.to_matrix(xi))
            if img.shape[0] == 0:
                mask[xi] = True
                continue
            if vp.dim == 0:
                continue
            stacked = np.concatenate([vp.basis, img])
            mask[xi] = rank(field, stacked) == vp.dim
        ctx._masks[key] = mask
    return ctx._masks[key]


def vector_avg_factors(ctx: SchemeCtx, v: np.ndarray) -> np.ndarray:
    """Spectral multipliers of E_v: q^{-rank(X)} if v not in Im(X), else 0."""
    key = ("eav", encode_vector(v, ctx.q))
    if key not in ctx._masks:
        field = ctx.field
        ranks = ctx.rank_table_dual()
        fac = np.zeros(ctx.size, dtype=np.float64)
        for xi in range(ctx.size):
            img = _image_row_basis(ctx, ctx.dual_index.to_matrix(xi))
            if img.shape[0]:
                stacked = np.concatenate([img, np.asarray(v, dtype=np.uint8).reshape(1, -1)])
                in_image = rank(field, stacked) == ranks[xi]
            else:
                in_image = not np.any(v)
            if not in_image:
                fac[xi] = float(ctx.q) ** (-int(ranks[xi]))
        ctx._masks[key] = fac
    return ctx._masks[key]


def dual_avg_factors(ctx: SchemeCtx, wp: Subspace) -> np.ndarray:
    """Spectral multipliers of E_{W'}: q^{-rank(X)} if Ker(X) + W' = W."""
    key = ("edu", wp.key)
    if key not in ctx._masks:
        field = ctx.field
        ranks = ctx.rank_table_dual()
        fac = np.zeros(ctx.size, dtype=np.float64)
        for xi in range(ctx.size):
            ker = kernel_basis(field, ctx.dual_index.to_matrix(xi))
            stacked = np.concatenate([wp.basis, ker]) if ker.shape[0] else wp.basis
            if rank(field, stacked) == ctx.m:
                fac[xi] = float(ctx.q) ** (-int(ranks[xi]))
        ctx._masks[key] = fac
    return ctx._masks[key]


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def laplacian(f: FnTable, v1: Subspace, w1: Subspace) -> FnTable:
    """Spectral projection onto characters admissible for (V1, W1)."""
    ctx = _scheme_of(f)
    mask = laplacian_mask(ctx, v1, w1)
    coeffs = ctx.fourier_forward(f.values) * mask
    return FnTable(ctx, ctx.fourier_inverse(coeffs))


def derivative(f: FnTable, site: RestrictionSite) -> FnTable:
    """D_{V1,W1,T}(f): the (V1,W1) -> T restriction of the Laplacian."""
    ctx = _scheme_of(f)
    lap = laplacian(f, site.v1, site.w1)
    return restrict(lap, site.v1, site.w1, site.t_index)


def influence(f: FnTable, site: RestrictionSite) -> float:
    """Generalized influence: squared 2-norm of the derivative at the site."""
    return derivative(f, site).norm2sq()


def influence_per_rep(f: FnTable, v1: Subspace, w1: Subspace) -> tuple[np.ndarray, np.ndarray]:
    """(coset reps, influence at each rep) for all distinct T at a site."""
    ctx = _scheme_of(f)
    lap = laplacian(f, v1, w1)
    reps, members = ctx.site_cosets(v1, w1)
    vals = np.mean(np.abs(lap.values[members]) ** 2, axis=1)
    return reps, vals


def _avg_quotient_direct(f: FnTable, vp: Subspace) -> np.ndarray:
    ctx = _scheme_of(f)
    wfull = full_space(ctx.field, ctx.m)
    reps, members = ctx.site_cosets(vp, wfull)
    out = np.empty_like(f.values)
    means = np.mean(f.values[members], axis=1)
    for t in range(len(reps)):
        out[members[t]] = means[t]
    return out


def avg_quotient(f: FnTable, vp: Subspace) -> FnTable:
    """e_{V/V'}: average over cosets of the copy of L(V/V', W).

    Computes the direct coset average and the spectral filter and
    asserts they agree.
    """
    ctx = _scheme_of(f)
    coeffs = ctx.fourier_forward(f.values) * quotient_mask(ctx, vp)
    spectral = ctx.fourier_inverse(coeffs)
    if CROSS_CHECK:
        direct = _avg_quotient_direct(f, vp)
        err = float(np.max(np.abs(spectral - direct)))
        if err > 1e-8:
            raise ConsistencyError(f"avg_quotient realizations disagree by {err}")
    return FnTable(ctx, spectral)


class BvDistribution:
    """Uniform distribution over rank <= 1 maps w (x) phi with phi(v) = 1."""

    def __init__(self, ctx: SchemeCtx, v: np.ndarray):
        v = np.asarray(v, dtype=np.uint8).reshape(-1)
        if not np.any(v):
            raise ToolkitError("B_v requires a nonzero vector")
        self.ctx = ctx
        self.v = v
        field = ctx.field
        q, n, m = ctx.q, ctx.n, ctx.m
        phis = []
        for idx in range(q**n):
            phi = decode_vector(idx, n, q)
            acc = 0
            for a, b in zip(phi, v):
                acc = field.add(acc, field.mul(int(a), int(b)))
            if acc == 1:
                phis.append(phi)
        assert len(phis) == q ** (n - 1)
        pairs = []
        indices = []
        for widx in range(q**m):
            w = decode_vector(widx, m, q)
            for phi in phis:
                b = field.mul_table[w[:, None], phi[None, :]]  # (m, n) rank <= 1 map
                pairs.append((w, phi))
                indices.append(ctx.domain_index.to_index(b))
        self.pairs = pairs
        self.indices = np.array(indices, dtype=np.int64)
        self._shift: np.ndarray | None = None

    def average(self, values: np.ndarray) -> np.ndarray:
        ctx = self.ctx
        if self._shift is None:
            self._shift = ctx.domain_index.add_indices(
                np.arange(ctx.size, dtype=np.int64)[:, None], self.indices[None, :]
            )
        return np.mean(np.asarray(values)[self._shift], axis=1)


def _bv_cached(ctx: SchemeCtx, v: np.ndarray) -> BvDistribution:
    key = ("bv", encode_vector(v, ctx.q))
    if key not in ctx._masks:
        ctx._masks[key] = BvDistribution(ctx, v)
    return ctx._masks[key]


def avg_vector(f: FnTable, v: np.ndarray) -> FnTable:
    """E_v: all three realizations (hyperplane average of e_{V/V'}, the
    spectral form, and the rank-one resampling distribution B_v) are
    computed and cross-asserted."""
    ctx = _scheme_of(f)
    v = np.asarray(v, dtype=np.uint8).reshape(-1)
    if not np.any(v):
        raise ToolkitError("E_v requires a nonzero vector")
    spectral = ctx.fourier_inverse(ctx.fourier_forward(f.values) * vector_avg_factors(ctx, v))
    if CROSS_CHECK:
        bv = _bv_cached(ctx, v)
        via_bv = bv.average(f.values)
        err = float(np.max(np.abs(spectral - via_bv)))
        if err > 1e-8:
            raise ConsistencyError(f"E_v spectral vs B_v forms disagree by {err}")
        planes = [
            s
            for s in ctx.subspaces("v", ctx.n - 1)
            if not s.contains_vector(ctx.field, v)
        ]
        assert len(planes) == ctx.q ** (ctx.n - 1)
        acc = np.zeros_like(f.values)
        for vp in planes:
            acc += _avg_quotient_direct(f, vp)
        acc /= len(planes)
        err2 = float(np.max(np.abs(spectral - acc)))
        if err2 > 1e-8:
            raise ConsistencyError(f"E_v spectral vs hyperplane forms disagree by {err2}")
    return FnTable(ctx, spectral)


def annihilator_functional(ctx: SchemeCtx, wp: Subspace) -> np.ndarray:
    """Canonical nonzero functional vanishing on a codimension-1 subspace."""
    if wp.dim != ctx.m - 1:
        raise ToolkitError("expected a codimension-1 subspace of W")
    if wp.dim == 0:
        phi = np.zeros(ctx.m, dtype=np.uint8)
        phi[0] = 1
        return phi
    ker = kernel_basis(ctx.field, wp.basis)
    assert ker.shape[0] == 1
    return ker[0]


def avg_dual(f: FnTable, wp: Subspace) -> FnTable:
    """E_{W'} for codim-1 W': dualize -> E_phi -> dualize, cross-checked
    against the dual spectral filter."""
    ctx = _scheme_of(f)
    phi = annihilator_functional(ctx, wp)
    fd = dualize(f)
    composite = dualize(FnTable(fd.domain, _avg_vector_spectral(fd, phi))).values
    spectral = ctx.fourier_inverse(ctx.fourier_forward(f.values) * dual_avg_factors(ctx, wp))
    if CROSS_CHECK:
        err = float(np.max(np.abs(spectral - composite)))
        if err > 1e-8:
            raise ConsistencyError(f"E_W' realizations disagree by {err}")
    return FnTable(ctx, spectral)


def _avg_vector_spectral(f: FnTable, v: np.ndarray) -> np.ndarray:
    ctx = _scheme_of(f)
    return ctx.fourier_inverse(ctx.fourier_forward(f.values) * vector_avg_factors(ctx, v))


def _avg_for_direction(f: FnTable, u: Subspace, side: str) -> FnTable:
    if side == "v":
        if u.dim != 1:
            raise ToolkitError("side 'v' needs a 1-dimensional subspace of V")
        return avg_vector(f, u.basis[0])
    if side == "w":
        return avg_dual(f, u)
    raise ToolkitError(f"unknown side {side!r}")


def infer_side(ctx: SchemeCtx, u: Subspace) -> str:
    """'v' for a line in V, 'w' for a hyperplane in W; error if ambiguous."""
    v_ok = u.ambient == ctx.n and u.dim == 1
    w_ok = u.ambient == ctx.m and u.dim == ctx.m - 1
    if v_ok and w_ok:
        raise ToolkitError("ambiguous direction subspace; pass side='v' or side='w'")
    if v_ok:
        return "v"
    if w_ok:
        return "w"
    raise ToolkitError("U must be a line in V or a hyperplane in W")


def comb_laplacian(f: FnTable, u: Subspace, side: str | None = None) -> FnTable:
    """Combinatorial Laplacian f - E_U(f)."""
    ctx = _scheme_of(f)
    side = side or infer_side(ctx, u)
    return f - _avg_for_direction(f, u, side)


def t_operator(f: FnTable, i: int, u: Subspace, side: str | None = None) -> FnTable:
    """f - (q^i + q^{i-1}) E_U f + q^{2i-1} E_U^2 f."""
    if i < 1:
        raise ToolkitError("t_operator needs order i >= 1")
    ctx = _scheme_of(f)
    side = side or infer_side(ctx, u)
    q = float(ctx.q)
    e1 = _avg_for_direction(f, u, side)
    e2 = _avg_for_direction(e1, u, side)
    vals = f.values - (q**i + q ** (i - 1)) * e1.values + q ** (2 * i - 1) * e2.values
    return FnTable(ctx, vals)


def spectral_laplacian_line(f: FnTable, u: Subspace, side: str | None = None) -> FnTable:
    """The order-1 spectral Laplacian for a line in V or hyperplane in W."""
    ctx = _scheme_of(f)
    side = side or infer_side(ctx, u)
    if side == "v":
        return laplacian(f, u, full_space(ctx.field, ctx.m))
    return laplacian(f, zero_space(ctx.field, ctx.n), u)


def direction_subspaces(ctx: SchemeCtx) -> list[tuple[Subspace, str]]:
    """All (U, side) directions: lines in V and hyperplanes in W."""
    out = [(u, "v") for u in ctx.subspaces("v", 1)]
    out += [(u, "w") for u in ctx.subspaces("w", ctx.m - 1)]
    return out


def conditional_distribution_check(ctx: SchemeCtx, vp: Subspace, wp: Subspace, v: np.ndarray) -> bool:
    """Exhaustive joint-law check for A + w(x)phi conditioned on (V'', W'').

    A is uniform on the copy of L(V/V', W'), w(x)phi is drawn from B_v
    with v in V'; conditioning on V'' = ker(phi|_{V'}) and W'' = W' +
    span(w), the sum must be uniform on the copy of L(V/V'', W'') when
    W'' = W', and uniform on the maps sending v outside W' otherwise.
    Raises ConsistencyError on any mismatch.
    """
    field = ctx.field
    v = np.asarray(v, dtype=np.uint8).reshape(-1)
    if not vp.contains_vector(field, v):
        raise ToolkitError("the direction vector must lie in V'")
    _, emb = ctx.restriction_embedding(vp, wp)
    bv = _bv_cached(ctx, v)
    buckets: dict = {}
    for a_idx in emb:
        for (w, phi), b_idx in zip(bv.pairs, bv.indices):
            m_idx = int(ctx.domain_index.add_indices(int(a_idx), int(b_idx)))
            ann = []
            for row in vp.vectors(field):
                acc = 0
                for x, y in zip(phi, row):
                    acc = field.add(acc, field.mul(int(x), int(y)))
                if acc == 0:
                    ann.append(row)
            vpp = span_of(field, ann) if ann else zero_space(field, ctx.n)
            wpp_rows = list(wp.basis) + [w]
            wpp = span_of(field, wpp_rows) if any(np.any(r) for r in wpp_rows) else zero_space(field, ctx.m)
            key = (vpp.key, wpp.key)
            entry = buckets.setdefault(key, {"vpp": vpp, "wpp": wpp, "counts": {}})
            entry["counts"][m_idx] = entry["counts"].get(m_idx, 0) + 1
    for entry in buckets.values():
        vpp, wpp, counts = entry["vpp"], entry["wpp"], entry["counts"]
        _, emb_pp = ctx.restriction_embedding(vpp, wpp)
        if wpp == wp:
            expected = set(map(int, emb_pp))
        else:
            expected = set()
            for e in map(int, emb_pp):
                mat = ctx.domain_index.to_matrix(e)
                img_v = mat_mul(field, mat, v.reshape(-1, 1))[:, 0]
                if not wp.contains_vector(field, img_v):
                    expected.add(e)
        if set(counts) != expected:
            raise ConsistencyError("conditional support mismatch in the distribution check")
        if len(set(counts.values())) != 1:
            raise ConsistencyError("conditional law is not uniform")
    return True
