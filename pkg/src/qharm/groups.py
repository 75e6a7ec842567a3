"""SL_n(F_q) and GL_n(F_q) as subsets of the matrix scheme L(V, V).

The group is enumerated explicitly and every element is addressed both
by its scheme index and by its ordinal position.  L^2(G) is filtered by
the span of products of at most d dictator indicators 1[g v = u]; those
spans realize the tensor-rank level spaces, and an eigen-refinement of
convolution by random class functions splits each level into isotypic
components, giving exact irreducible dimensions without any character
theory.

Conventions: levels are built from generators with independent
constraint vectors only (products with dependent constraints collapse
to shorter products or vanish on G, so the span is unchanged), each
constraint scaled so its input vector is monic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import RefinementError, SizeCapError, ToolkitError
from .fqlin import (
    Subspace,
    decode_vector,
    det,
    encode_vector,
    inv_matrix,
)
from .gf import FieldCtx, get_field
from .scheme import FnTable, degree_project, get_scheme

DEFAULT_GROUP_CAP = 10**5
_MUL_TABLE_CAP = 6000
LEVEL_CACHE_VERSION = 1


class GroupTable:
    """Enumerated SL or GL with index maps, inverses, and class labels."""

    def __init__(self, kind: str, n: int, field: FieldCtx, cap: int = DEFAULT_GROUP_CAP):
        if kind not in ("sl", "gl"):
            raise ToolkitError(f"unknown group kind {kind!r}")
        self.kind = kind
        self.n = n
        self.field = field
        self.scheme = get_scheme(field.q, n, n)
        dets = np.empty(self.scheme.size, dtype=np.uint8)
        for i in range(self.scheme.size):
            dets[i] = det(field, self.scheme.domain_index.to_matrix(i))
        keep = dets == 1 if kind == "sl" else dets != 0
        self.elements = np.flatnonzero(keep).astype(np.int64)
        self.size = int(self.elements.shape[0])
        if self.size > cap:
            raise SizeCapError(f"group has {self.size} elements > cap {cap}")
        self.dets = dets[self.elements]
        self.pos = np.full(self.scheme.size, -1, dtype=np.int64)
        self.pos[self.elements] = np.arange(self.size)
        self.mats = np.stack([self.scheme.domain_index.to_matrix(i) for i in self.elements])
        inv_mats = np.stack([inv_matrix(field, m) for m in self.mats])
        self.inv = np.array(
            [self.pos[self.scheme.domain_index.to_index(m)] for m in inv_mats], dtype=np.int64
        )
        self.identity = int(self.pos[self.scheme.domain_index.to_index(np.eye(n, dtype=np.uint8))])
        self._mul: np.ndarray | None = None
        self._xyinv: np.ndarray | None = None
        self._classes: np.ndarray | None = None
        self._vec_action: dict = {}

    @property
    def q(self) -> int:
        return self.field.q

    def __repr__(self) -> str:
        return f"GroupTable({self.kind}_{self.n}(F_{self.q}), size={self.size})"

    # -- multiplication -------------------------------------------------------

    def _mul_row(self, i: int) -> np.ndarray:
        """Ordinals of mats[i] @ mats[j] for all j."""
        f = self.field
        n = self.n
        a = self.mats[i]
        out = np.zeros((self.size, n, n), dtype=np.uint8)
        for r in range(n):
            for k in range(n):
                out[:, r, :] = f.add_table[out[:, r, :], f.mul_table[a[r, k], self.mats[:, k, :]]]
        flat = out.reshape(self.size, n * n).astype(np.int64)
        idx = flat @ self.scheme.domain_index.powers
        return self.pos[idx]

    def mul_table(self) -> np.ndarray:
        if self._mul is None:
            if self.size > _MUL_TABLE_CAP:
                raise SizeCapError(f"multiplication table refused for |G|={self.size}")
            m = np.empty((self.size, self.size), dtype=np.int32)
            for i in range(self.size):
                m[i] = self._mul_row(i)
            self._mul = m
        return self._mul

    def mul(self, i: int, j: int) -> int:
        return int(self.mul_table()[i, j])

    def xyinv_table(self) -> np.ndarray:
        """Table of x y^{-1} ordinals, the kernel of group convolution."""
        if self._xyinv is None:
            self._xyinv = self.mul_table()[:, self.inv]
        return self._xyinv

    # -- actions ---------------------------------------------------------------

    def vector_action(self, transpose: bool = False) -> np.ndarray:
        """(size, q^n) encodings of g v (or g^T v) for every vector index."""
        key = "t" if transpose else "s"
        if key not in self._vec_action:
            f = self.field
            n = self.n
            q = self.q
            mats = np.transpose(self.mats, (0, 2, 1)) if transpose else self.mats
            out = np.empty((self.size, q**n), dtype=np.int64)
            for vi in range(q**n):
                v = decode_vector(vi, n, q)
                res = np.zeros((self.size, n), dtype=np.uint8)
                for k in range(n):
                    res = f.add_table[res, f.mul_table[mats[:, :, k], v[k]]]
                out[:, vi] = res.astype(np.int64) @ (q ** np.arange(n, dtype=np.int64))
            self._vec_action[key] = out
        return self._vec_action[key]

    def dictator_mask(self, v_enc: int, u_enc: int, transpose: bool = False) -> np.ndarray:
        return self.vector_action(transpose)[:, v_enc] == u_enc

    # -- conjugacy classes -------------------------------------------------------

    def conjugacy_classes(self) -> np.ndarray:
        """Class label per ordinal; labels are assigned in orbit-discovery order."""
        if self._classes is None:
            m = self.mul_table()
            labels = np.full(self.size, -1, dtype=np.int64)
            next_label = 0
            allg = np.arange(self.size)
            for x in range(self.size):
                if labels[x] >= 0:
                    continue
                orbit = np.unique(m[m[allg, x], self.inv[allg]])
                labels[orbit] = next_label
                next_label += 1
            self._classes = labels
        return self._classes

    def class_count(self) -> int:
        return int(self.conjugacy_classes().max()) + 1

    # -- function tables ---------------------------------------------------------

    def table(self, values) -> FnTable:
        v = np.asarray(values, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.size:
            raise ToolkitError(f"expected {self.size} values, got {v.shape[0]}")
        return FnTable(self, v)

    def constant(self, c: complex = 1.0) -> FnTable:
        return FnTable(self, np.full(self.size, c, dtype=np.complex128))

    def indicator(self, ordinals) -> FnTable:
        v = np.zeros(self.size, dtype=np.complex128)
        v[np.asarray(ordinals, dtype=np.int64)] = 1.0
        return FnTable(self, v)


_GROUP_CACHE: dict[tuple, GroupTable] = {}


def get_group(kind: str, n: int, q: int, cap: int = DEFAULT_GROUP_CAP) -> GroupTable:
    key = (kind, n, q)
    if key not in _GROUP_CACHE:
        _GROUP_CACHE[key] = GroupTable(kind, n, get_field(q), cap=cap)
    return _GROUP_CACHE[key]


def enumerate_group(kind: str, n: int, ctx: FieldCtx, cap: int = DEFAULT_GROUP_CAP) -> GroupTable:
    return get_group(kind, n, ctx.q, cap=cap)


def _group_of(f: FnTable) -> GroupTable:
    if not isinstance(f.domain, GroupTable):
        raise ToolkitError("operation requires a group-domain function")
    return f.domain


# ---------------------------------------------------------------------------
# transfer maps and convolution
# ---------------------------------------------------------------------------

def transfer(f: FnTable, direction: str, group: GroupTable | None = None) -> FnTable:
    """j extends by zero from G to L(V,V); i restricts back (needs the group)."""
    if direction == "j":
        g = _group_of(f)
        vals = np.zeros(g.scheme.size, dtype=np.complex128)
        vals[g.elements] = f.values
        return FnTable(g.scheme, vals)
    if direction == "i":
        if group is None:
            raise ToolkitError("i-transfer needs an explicit target group")
        return transfer_to_group(f, group)
    raise ToolkitError(f"unknown transfer direction {direction!r}")


def transfer_to_group(f: FnTable, group: GroupTable) -> FnTable:
    if f.domain is not group.scheme:
        raise ToolkitError("scheme/group mismatch in i-transfer")
    return FnTable(group, f.values[group.elements])


def convolve(f: FnTable, g: FnTable) -> FnTable:
    """(f*g)(x) = E_y f(x y^{-1}) g(y)."""
    gt = _group_of(f)
    if g.domain is not gt:
        raise ToolkitError("convolution requires a common group")
    kern = gt.xyinv_table()
    return FnTable(gt, f.values[kern] @ g.values / gt.size)


def convolve_batch(f_values: np.ndarray, basis: np.ndarray, group: GroupTable) -> np.ndarray:
    """f * b for every row b of basis; returns (n_rows, |G|)."""
    kern = group.xyinv_table()
    return (f_values[kern] @ basis.T / group.size).T


# ---------------------------------------------------------------------------
# tensor-rank level filtration
# ---------------------------------------------------------------------------

def _monic_vectors(field: FieldCtx, n: int) -> list[int]:
    """Encodings of one representative per projective class (first nonzero = 1)."""
    out = []
    q = field.q
    for vi in range(1, q**n):
        v = decode_vector(vi, n, q)
        lead = v[np.flatnonzero(v)[0]]
        if lead == 1:
            out.append(vi)
    return out


def _independent_tuples(field: FieldCtx, n: int, vecs: list[int], size: int, need_sorted: bool):
    """Tuples of encoded vectors with linearly independent decodes.

    need_sorted restricts to strictly increasing tuples (sets); otherwise
    ordered tuples are produced.
    """
    q = field.q
    out: list[tuple[int, ...]] = []

    def extend(prefix: tuple[int, ...], rows: list[np.ndarray]):
        if len(prefix) == size:
            out.append(prefix)
            return
        from .fqlin import rank as fq_rank

        for enc in vecs:
            if need_sorted and prefix and enc <= prefix[-1]:
                continue
            if enc in prefix:
                continue
            v = decode_vector(enc, n, q)
            stacked = np.array(rows + [v], dtype=np.uint8)
            if fq_rank(field, stacked) == len(rows) + 1:
                extend(prefix + (enc,), rows + [v])

    extend((), [])
    return out


def _level_generator_masks(group: GroupTable, d: int, include_dual: bool = False) -> np.ndarray:
    """Indicator rows of all canonical <= d-umvirate products.

    Constraint families use independent input vectors only (monic, sorted)
    with independent targets; dependent-target products vanish on G.
    """
    field = group.field
    n = group.n
    q = group.q
    monic = _monic_vectors(field, n)
    nonzero = list(range(1, q**n))
    action = group.vector_action(False)
    rows = [np.ones(group.size, dtype=bool)]
    families = [(False, action)]
    if include_dual:
        families.append((True, group.vector_action(True)))
    for s in range(1, d + 1):
        v_sets = _independent_tuples(field, n, monic, s, need_sorted=True)
        u_tuples = _independent_tuples(field, n, nonzero, s, need_sorted=False)
        for transpose, act in families:
            for vs in v_sets:
                sub_act = act[:, list(vs)]
                for us in u_tuples:
                    mask = np.all(sub_act == np.array(us)[None, :], axis=1)
                    if mask.any():
                        rows.append(mask)
    return np.array(rows, dtype=np.float64)


def _mgs_extend(basis_rows: list[np.ndarray], gen: np.ndarray, size: int, tol: float = 1e-8):
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    r = gen.astype(np.complex128)
    for _ in range(2):
        if basis_rows:
            b = np.array(basis_rows)
            coeffs = b.conj() @ r / size
            r = r - coeffs @ b
    norm = np.sqrt(np.mean(np.abs(r) ** 2).real)
    if norm > tol:
        basis_rows.append(r / norm)
        return True
    return False


@dataclass
class LevelBasisSet:
    """Nested orthonormal bases of L^2(G)_{<=d} from umvirate-indicator spans."""

    group: GroupTable
    mode: str  # "strict" or "twisted"
    include_dual: bool
    dims: list[int]  # dims[d] = dim L^2(G)_{<=d}
    basis: np.ndarray  # (dims[-1], |G|), prefix-nested across levels

    def cum_basis(self, d: int) -> np.ndarray:
        return self.basis[: self.dims[d]]

    def eq_basis(self, d: int) -> np.ndarray:
        lo = self.dims[d - 1] if d > 0 else 0
        return self.basis[lo: self.dims[d]]

    def dmax(self) -> int:
        return len(self.dims) - 1


def multiplicative_characters(group: GroupTable) -> np.ndarray:
    """(q-1, |G|) values of all characters chi(det g) of the determinant."""
    field = group.field
    q = field.q
    if group.kind == "sl" or q == 2:
        return np.ones((1, group.size), dtype=np.complex128)
    dlog = field.log_table[group.dets]
    j = np.arange(q - 1)
    return np.exp(2j * np.pi * j[:, None] * dlog[None, :] / (q - 1))


def build_level_basis(
    group: GroupTable,
    dmax: int,
    mode: str = "strict",
    include_dual: bool = False,
    cache_dir: str | None = None,
) -> LevelBasisSet:
    if dmax > group.n:
        raise ToolkitError(f"dmax={dmax} exceeds n={group.n}")
    cache_path = None
    if cache_dir:
        tag = f"{group.kind}{group.n}q{group.q}d{dmax}{mode}{'dual' if include_dual else ''}v{LEVEL_CACHE_VERSION}"
        cache_path = os.path.join(cache_dir, f"levels_{tag}.npz")
        if os.path.exists(cache_path):
            data = np.load(cache_path)
            return LevelBasisSet(group, mode, include_dual, list(map(int, data["dims"])), data["basis"])

    chars = multiplicative_characters(group) if mode == "twisted" else np.ones((1, group.size))
    basis_rows: list[np.ndarray] = []
    dims = []
    prev_gens = 0
    for d in range(dmax + 1):
        gens = _level_generator_masks(group, d, include_dual)
        for row in gens[prev_gens:]:
            for chi in chars:
                _mgs_extend(basis_rows, row * chi, group.size)
        prev_gens = gens.shape[0]
        dims.append(len(basis_rows))
    basis = np.array(basis_rows) if basis_rows else np.zeros((0, group.size), dtype=np.complex128)
    out = LevelBasisSet(group, mode, include_dual, dims, basis)
    if cache_path:
        os.makedirs(cache_dir, exist_ok=True)
        np.savez(cache_path, dims=np.array(dims), basis=basis)
    return out


_LEVEL_CACHE: dict[tuple, LevelBasisSet] = {}


def get_levels(group: GroupTable, dmax: int | None = None, mode: str = "strict") -> LevelBasisSet:
    dmax = group.n if dmax is None else dmax
    key = (group.kind, group.n, group.q, dmax, mode)
    if key not in _LEVEL_CACHE:
        _LEVEL_CACHE[key] = build_level_basis(group, dmax, mode)
    return _LEVEL_CACHE[key]


def level_project(f: FnTable, d: int, strictness: str = "strict") -> FnTable:
    """Orthogonal projection f_{<=d}; f_{=d} via level_project_eq."""
    group = _group_of(f)
    levels = get_levels(group, mode=strictness if group.kind == "gl" else "strict")
    b = levels.cum_basis(d)
    coeffs = b.conj() @ f.values / group.size
    return FnTable(group, coeffs @ b)


def level_project_eq(f: FnTable, d: int, strictness: str = "strict") -> FnTable:
    group = _group_of(f)
    levels = get_levels(group, mode=strictness if group.kind == "gl" else "strict")
    b = levels.eq_basis(d)
    if b.shape[0] == 0:
        return FnTable(group, np.zeros(group.size, dtype=np.complex128))
    coeffs = b.conj() @ f.values / group.size
    return FnTable(group, coeffs @ b)


def level_decompose(f: FnTable, strictness: str = "strict") -> list[FnTable]:
    group = _group_of(f)
    return [level_project_eq(f, d, strictness) for d in range(group.n + 1)]


# ---------------------------------------------------------------------------
# juntas
# ---------------------------------------------------------------------------

def pointwise_stabilizer(group: GroupTable, u: Subspace) -> np.ndarray:
    """Ordinals of elements fixing the subspace pointwise."""
    act = group.vector_action(False)
    mask = np.ones(group.size, dtype=bool)
    for row in u.basis:
        enc = encode_vector(row, group.q)
        mask &= act[:, enc] == enc
    return np.flatnonzero(mask)


def junta_test(f: FnTable, u: Subspace, tol: float = 1e-9) -> bool:
    """True iff f is invariant under right multiplication by the stabilizer."""
    group = _group_of(f)
    h = pointwise_stabilizer(group, u)
    m = group.mul_table()
    for ho in h:
        if np.max(np.abs(f.values[m[:, ho]] - f.values)) > tol:
            return False
    return True


def junta_project(f: FnTable, u: Subspace) -> FnTable:
    """Average over right cosets of the stabilizer: the nearest junta."""
    group = _group_of(f)
    h = pointwise_stabilizer(group, u)
    m = group.mul_table()
    acc = np.zeros(group.size, dtype=np.complex128)
    for ho in h:
        acc += f.values[m[:, ho]]
    return FnTable(group, acc / len(h))


# ---------------------------------------------------------------------------
# level lower bounds (abelian degree vs tensor-rank level)
# ---------------------------------------------------------------------------

def level_lower_check(f: FnTable, d: int, tol: float = 1e-9) -> dict:
    """Ratios ||j(f)^{<=d}|| / ||f|| and ||T_d f|| / ||f|| for f in level d.

    Asserts both are >= |G| / q^{n^2} (and hence >= 1/(4q)).
    """
    group = _group_of(f)
    fd = level_project_eq(f, d)
    norm = np.sqrt(fd.norm2sq())
    if norm < 1e-9:
        raise ToolkitError("projection to the level is negligible")
    jf = transfer(fd, "j")
    jcum = degree_project(jf, d, "cumulative")
    ratio_j = np.sqrt(jcum.norm2sq()) / norm
    td = transfer_to_group(jcum, group)
    ratio_t = np.sqrt(td.norm2sq()) / norm
    bound = group.size / float(group.q) ** (group.n**2)
    weak = 1.0 / (4 * group.q)
    ok = ratio_j >= bound - tol and ratio_t >= bound - tol
    assert bound >= weak - 1e-12
    return {
        "ratio_j": float(ratio_j),
        "ratio_t": float(ratio_t),
        "bound": float(bound),
        "weak_bound": float(weak),
        "ok": bool(ok),
    }


# ---------------------------------------------------------------------------
# isotypic refinement
# ---------------------------------------------------------------------------

@dataclass
class IsotypicReport:
    group_size: int
    class_count: int
    component_dims: dict  # level d -> sorted list of irreducible dimensions
    m_d: dict  # level d -> minimal irreducible dimension (absent if empty)

    def total_blocks(self) -> int:
        return sum(len(v) for v in self.component_dims.values())

    def sum_of_squares(self) -> int:
        return int(sum(dim * dim for v in self.component_dims.values() for dim in v))


def _cluster_eigvals(vals: np.ndarray, tol: float = 1e-6) -> list[list[int]]:
    clusters: list[tuple[complex, list[int]]] = []
    for i, lam in enumerate(vals):
        placed = False
        for rep, members in clusters:
            if abs(lam - rep) <= tol:
                members.append(i)
                placed = True
                break
        if not placed:
            clusters.append((lam, [i]))
    return [members for _, members in clusters]


def isotypic_blocks(
    group: GroupTable,
    levels: LevelBasisSet | None = None,
    trials: int = 3,
    seed: int = 0,
) -> dict[int, list[np.ndarray]]:
    """Orthonormal bases of the isotypic components inside each level.

    Convolution by a class function acts as a scalar on each isotypic
    bimodule, so clustered eigenspaces of a random class-function
    convolution are unions of components; intersecting the clusterings
    across independent draws removes accidental collisions.
    """
    levels = levels or get_levels(group)
    labels = group.conjugacy_classes()
    n_classes = group.class_count()
    rng = np.random.default_rng(seed)
    kern = group.xyinv_table()

    out: dict[int, list[np.ndarray]] = {}
    for d in range(levels.dmax() + 1):
        eq = levels.eq_basis(d)
        if eq.shape[0] == 0:
            out[d] = []
            continue
        blocks = [eq]
        for _ in range(trials):
            cvals = rng.standard_normal(n_classes)[labels].astype(np.complex128)
            ckern = cvals[kern]
            new_blocks = []
            for qb in blocks:
                if qb.shape[0] == 1:
                    new_blocks.append(qb)
                    continue
                conv = (ckern @ qb.T / group.size).T  # rows: c * q_i
                mat = qb.conj() @ conv.T / group.size  # mat[i,j] = <c*q_j, q_i>
                vals, vecs = np.linalg.eig(mat)
                for members in _cluster_eigvals(vals):
                    coeffs = vecs[:, members].T  # rows span the cluster in block coords
                    u, s, vh = np.linalg.svd(coeffs)
                    ortho = vh[: len(members)]
                    new_blocks.append(ortho @ qb)
            blocks = new_blocks
        out[d] = blocks
    return out


def isotypic_refine(
    group: GroupTable,
    levels: LevelBasisSet | None = None,
    trials: int = 3,
    seed: int = 0,
) -> IsotypicReport:
    """Infer irreducible dimensions per level from the eigen-refinement."""
    blocks = isotypic_blocks(group, levels, trials, seed)
    n_classes = group.class_count()
    component_dims: dict[int, list[int]] = {}
    m_d: dict[int, int] = {}
    for d, blist in blocks.items():
        dims = []
        for qb in blist:
            k = qb.shape[0]
            root = np.sqrt(k)
            if abs(root - round(root)) > 1e-6:
                raise RefinementError(
                    f"block of dimension {k} at level {d} is not a perfect square; raise trials"
                )
            dims.append(int(round(root)))
        component_dims[d] = sorted(dims)
        if dims:
            m_d[d] = min(dims)

    report = IsotypicReport(group.size, n_classes, component_dims, m_d)
    if report.sum_of_squares() != group.size:
        raise RefinementError(
            f"sum of squared dimensions {report.sum_of_squares()} != |G| = {group.size}"
        )
    return report


def glt_growth_report(group: GroupTable, report: IsotypicReport) -> dict:
    """Reported-only growth diagnostics for the minimal dimensions m_d.

    The dimension lower bound q^{c' d n} has an unspecified constant, so
    nothing here is asserted; the row records whether m_d is
    nondecreasing and how m_1 compares with (q^n - 1)/(q - 1) - 1.
    """
    q, n = group.q, group.n
    ds = sorted(report.m_d)
    seq = [report.m_d[d] for d in ds]
    ref = (q**n - 1) // (q - 1) - 1
    return {
        "m_d": dict(zip(ds, seq)),
        "nondecreasing": all(a <= b for a, b in zip(seq, seq[1:])),
        "m_1": report.m_d.get(1),
        "reference_scale": ref,
        "log_q_m_d_over_dn": {
            d: float(np.log(report.m_d[d]) / (np.log(q) * d * n)) for d in ds if d >= 1
        },
    }


_ISOTYPIC_CACHE: dict[tuple, IsotypicReport] = {}


def get_isotypic(group: GroupTable, trials: int = 3, seed: int = 0) -> IsotypicReport:
    key = (group.kind, group.n, group.q, trials, seed)
    if key not in _ISOTYPIC_CACHE:
        _ISOTYPIC_CACHE[key] = isotypic_refine(group, trials=trials, seed=seed)
    return _ISOTYPIC_CACHE[key]


def random_group_table(group: GroupTable, rng: np.random.Generator, kind: str = "real", density: float = 0.5) -> FnTable:
    if kind == "boolean":
        vals = (rng.random(group.size) < density).astype(np.complex128)
    elif kind == "real":
        vals = rng.standard_normal(group.size).astype(np.complex128)
    else:
        vals = rng.standard_normal(group.size) + 1j * rng.standard_normal(group.size)
    return FnTable(group, vals)
