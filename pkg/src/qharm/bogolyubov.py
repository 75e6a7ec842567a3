"""Product-set algebra and the structure pipeline on SL_n(F_q).

Exact computations only: product sets by table lookup, groumvirate
enumeration by the (fixed subspace, invariant complement) parametrization
cross-checked against conjugation orbits, containment searches in
A A^{-1} A A^{-1}, the 0.99-density step through the density-bump
search, and easy-set covers for approximate subgroups.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ToolkitError
from .fqlin import det, enumerate_subspaces, rank
from .globality import (
    BumpResult,
    GoodUmvirate,
    block_subgroup_members,
    density_bump_search,
)
from .groups import GroupTable


@dataclass
class GroupSet:
    """A subset of an enumerated group, held as sorted unique ordinals."""

    group: GroupTable
    ordinals: np.ndarray

    def __post_init__(self):
        self.ordinals = np.unique(np.asarray(self.ordinals, dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.ordinals.size)

    @property
    def mu(self) -> float:
        return self.size / self.group.size

    def mask(self) -> np.ndarray:
        m = np.zeros(self.group.size, dtype=bool)
        m[self.ordinals] = True
        return m

    def contains(self, other: "GroupSet") -> bool:
        return bool(np.all(np.isin(other.ordinals, self.ordinals)))

    def __eq__(self, other) -> bool:
        return self.group is other.group and np.array_equal(self.ordinals, other.ordinals)


def full_set(group: GroupTable) -> GroupSet:
    return GroupSet(group, np.arange(group.size))


def set_algebra(a: GroupSet, b: GroupSet | None, op: str, k: int | None = None) -> GroupSet:
    """Exact product set {xy}, inverse set, or iterated power A^k."""
    group = a.group
    if op == "product":
        if b is None or b.group is not group:
            raise ToolkitError("product requires two sets on the same group")
        m = group.mul_table()
        prod = np.unique(m[np.ix_(a.ordinals, b.ordinals)])
        return GroupSet(group, prod)
    if op == "inverse":
        return GroupSet(group, group.inv[a.ordinals])
    if op == "power":
        if not k or k < 1:
            raise ToolkitError("power needs k >= 1")
        out = a
        for _ in range(k - 1):
            out = set_algebra(out, a, "product")
        return out
    raise ToolkitError(f"unknown set operation {op!r}")


def quadruple_product(a: GroupSet) -> GroupSet:
    """A A^{-1} A A^{-1}."""
    ainv = set_algebra(a, None, "inverse")
    aai = set_algebra(a, ainv, "product")
    return set_algebra(aai, aai, "product")


# ---------------------------------------------------------------------------
# groumvirates
# ---------------------------------------------------------------------------

def groumvirate_enumerate(group: GroupTable, k: int) -> list[GoodUmvirate]:
    """All distinct conjugates g L_k g^{-1}, one per (fixed subspace,
    invariant complement) pair."""
    n = group.n
    field = group.field
    if k == 0:
        return [GoodUmvirate(group, 0, group.identity, group.identity)]
    if n - k <= 1:
        warnings.warn(f"L_{k} is trivial for n={n} (SL_{n-k})", stacklevel=2)
        return [GoodUmvirate(group, k, group.identity, group.identity)]
    out = []
    for fsub in enumerate_subspaces(field, n, k):
        for csub in enumerate_subspaces(field, n, n - k):
            stacked = np.concatenate([fsub.basis, csub.basis])
            if rank(field, stacked) != n:
                continue
            g = np.concatenate([fsub.basis, csub.basis]).T.copy()
            d = det(field, g)
            if d != 1:
                g = g.copy()
                g[:, 0] = field.mul_table[g[:, 0], field.inv(d)]
            g_ord = int(group.pos[group.scheme.domain_index.to_index(g)])
            assert g_ord >= 0
            out.append(GoodUmvirate(group, k, g_ord, int(group.inv[g_ord])))
    return out


def groumvirate_orbit_count(group: GroupTable, k: int) -> tuple[int, int]:
    """(number of distinct conjugates by direct orbit enumeration,
    |G| / |normalizer of L_k|) for cross-checking the parametrization."""
    lk = block_subgroup_members(group, k)
    lk_set = frozenset(lk.tolist())
    m = group.mul_table()
    seen = set()
    normalizer = 0
    for g in range(group.size):
        conj = frozenset(m[m[g, lk], group.inv[g]].tolist())
        seen.add(conj)
        if conj == lk_set:
            normalizer += 1
    return len(seen), group.size // normalizer


# ---------------------------------------------------------------------------
# Bogolyubov search
# ---------------------------------------------------------------------------

@dataclass
class BogolyubovResult:
    contained: GoodUmvirate
    density: float
    exponent: float  # achieved C = log mu(U) / log mu(A)
    product_set: GroupSet


def bogolyubov_search(a: GroupSet) -> BogolyubovResult:
    """Maximum-density good groumvirate contained in A A^{-1} A A^{-1}.

    Scans k upward (densities decrease with k); the singleton {e} at
    k = n is always contained, so the search cannot fail.
    """
    if a.size == 0:
        raise ToolkitError("empty set")
    group = a.group
    s = quadruple_product(a)
    smask = s.mask()
    best = None
    for k in range(group.n + 1):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            candidates = groumvirate_enumerate(group, k)
        for gu in candidates:
            if np.all(smask[gu.members()]):
                best = gu
                break
        if best is not None:
            break
    assert best is not None  # k = n gives {e} <= A A^{-1} A A^{-1}
    mu_u = best.density()
    mu_a = a.mu
    if mu_a >= 1.0:
        exponent = 0.0 if mu_u == 1.0 else float("inf")
    else:
        exponent = float(np.log(mu_u) / np.log(mu_a))
    return BogolyubovResult(best, mu_u, exponent, s)


@dataclass
class DensityBogolyubovResult:
    groumvirate: GoodUmvirate
    density_in_groumvirate: float
    reached_099: bool
    bump: BumpResult
    containment_verified: bool


def density_bogolyubov(a: GroupSet, zeta: float = 0.01) -> DensityBogolyubovResult:
    """Find a good groumvirate in which A A^{-1} is 0.99-dense.

    Runs the density-bump search to locate U_k^{g,h}, forms
    U' = U (U)^{-1} = g L_k g^{-1}, measures the exact density of
    A A^{-1} in U', and when it reaches 0.99 verifies the containment
    U' <= A A^{-1} A A^{-1} both directly and by the two-dense-sets
    mechanism (for each x in U', the 0.99-dense sets AA^{-1} & U' and
    x AA^{-1} & U' must meet)."""
    group = a.group
    bump = density_bump_search(group, a.ordinals, zeta=zeta)
    uprime = GoodUmvirate(group, bump.k, bump.g, int(group.inv[bump.g]))
    ainv = set_algebra(a, None, "inverse")
    aai = set_algebra(a, ainv, "product")
    aai_mask = aai.mask()
    members = uprime.members()
    density = float(np.mean(aai_mask[members]))
    reached = density >= 0.99
    verified = False
    if reached:
        s = set_algebra(aai, aai, "product")
        smask = s.mask()
        verified = bool(np.all(smask[members]))
        m = group.mul_table()
        inside = np.flatnonzero(aai_mask[members])
        t1 = members[inside]
        t1_mask = np.zeros(group.size, dtype=bool)
        t1_mask[t1] = True
        for x in members:
            shifted = m[x, t1]
            if not np.any(t1_mask[shifted]):
                raise ToolkitError("two 0.99-dense subsets of a group failed to meet")
        assert verified
    return DensityBogolyubovResult(uprime, density, reached, bump, verified)


# ---------------------------------------------------------------------------
# approximate subgroups
# ---------------------------------------------------------------------------

@dataclass
class EasySet:
    """A union of disjoint left cosets x U of a good groumvirate."""

    umvirate: GoodUmvirate
    representatives: np.ndarray
    alpha: float  # density of U
    beta: float  # density bound for the union

    def members(self) -> np.ndarray:
        m = self.umvirate.group.mul_table()
        u = self.umvirate.members()
        return np.unique(m[np.ix_(self.representatives, u)])


@dataclass
class CoverResult:
    easy_set: EasySet
    k_ratio: float  # |A^2| / |A|
    coset_count: int
    coset_bound_k4: float  # K^4 mu(A) / mu(U)
    coset_bound_k5: float  # K^5 |A| / |U|
    covers: bool  # A <= J
    inside_a5: bool  # J <= A^5


def easy_set_cover(a: GroupSet) -> CoverResult:
    """Cover a symmetric set by few cosets of a contained groumvirate.

    Requires A = A^{-1}; computes K = |A^2|/|A| exactly, finds a good
    groumvirate U inside A A^{-1} A A^{-1} = A^4, picks the least
    element of A in each left U-coset meeting A, and asserts
    A <= X U <= A^5 exactly."""
    group = a.group
    ainv = set_algebra(a, None, "inverse")
    if not np.array_equal(ainv.ordinals, a.ordinals):
        raise ToolkitError("easy-set cover requires a symmetric set (A = A^{-1})")
    a2 = set_algebra(a, a, "product")
    k_ratio = a2.size / a.size
    found = bogolyubov_search(a)
    u = found.contained
    u_members = u.members()
    m = group.mul_table()
    reps = {}
    for x in a.ordinals:
        label = int(np.min(m[x, u_members]))
        if label not in reps:
            reps[label] = int(x)
    x_arr = np.array(sorted(reps.values()), dtype=np.int64)
    easy = EasySet(u, x_arr, u.density(), len(x_arr) * u.density())
    j_members = easy.members()
    jmask = np.zeros(group.size, dtype=bool)
    jmask[j_members] = True
    covers = bool(np.all(jmask[a.ordinals]))
    a5 = set_algebra(a, set_algebra(a2, a2, "product"), "product")
    a5mask = a5.mask()
    inside = bool(np.all(a5mask[j_members]))
    if not (covers and inside):
        raise ToolkitError("easy-set cover failed the exact containment A <= XU <= A^5")
    mu_u = u.density()
    return CoverResult(
        easy,
        float(k_ratio),
        len(x_arr),
        float(k_ratio**4 * a.mu / mu_u),
        float(k_ratio**5 * a.size / len(u_members)),
        covers,
        inside,
    )


def pigeonhole_check(a: GroupSet) -> dict:
    """mu(A) > 1/2 forces A A^{-1} = G (and so the quadruple product too)."""
    group = a.group
    ainv = set_algebra(a, None, "inverse")
    aai = set_algebra(a, ainv, "product")
    quad = set_algebra(aai, aai, "product")
    out = {
        "mu": a.mu,
        "aainv_is_group": aai.size == group.size,
        "quad_is_group": quad.size == group.size,
    }
    if a.mu > 0.5:
        assert out["aainv_is_group"] and out["quad_is_group"]
    return out
