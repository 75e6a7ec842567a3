"""Globalness audits against brute-force oracles, umvirate normal forms,
good-umvirate partitions, and the density-bump search."""

import numpy as np
import pytest

from qharm.fqlin import span_of
from qharm.gf import get_field
from qharm.globality import (
    GoodUmvirate,
    Umvirate,
    block_subgroup_members,
    density_bump_search,
    global_audit,
    good_umvirate_partition,
    influence_audit,
    lp_global_audit,
    set_global_audit,
    umvirate_normal_form,
)
from qharm.groups import get_group
from qharm.scheme import get_scheme, random_table, restrict

RNG = np.random.default_rng(31337)


# ---------------------------------------------------------------------------
# scheme audits
# ---------------------------------------------------------------------------

def test_global_audit_constant():
    ctx = get_scheme(2, 2, 2)
    rep = global_audit(ctx.constant(1.0), 2)
    for row in rep.rows:
        assert abs(row.value - 1.0) < 1e-12


def test_global_audit_order_zero_row_is_norm():
    ctx = get_scheme(3, 2, 2)
    f = random_table(ctx, RNG, "complex")
    rep = global_audit(f, 2)
    assert abs(rep.value_at(0) - f.norm2sq()) < 1e-12


def test_global_audit_umvirate_indicator():
    # indicator of {A : A v = w} has a 1-restriction of full mass
    ctx = get_scheme(2, 2, 2)
    v = np.array([1, 0], dtype=np.uint8)
    w = np.array([1, 1], dtype=np.uint8)
    idx = []
    for i in range(ctx.size):
        a = ctx.domain_index.to_matrix(i)
        from qharm.fqlin import mat_vec

        if np.array_equal(mat_vec(ctx.field, a, v), w):
            idx.append(i)
    f = ctx.indicator(idx)
    assert abs(f.mean() - 1 / ctx.q**ctx.m) < 1e-12
    rep = global_audit(f, 1)
    assert abs(rep.value_at(1) - 1.0) < 1e-9


def brute_force_global_audit(f, dmax):
    """Independent oracle: enumerate every (V', W', all T) via restrict()."""
    ctx = f.domain
    out = {}
    for d in range(dmax + 1):
        best = -1.0
        for vp, wp in ctx.restriction_pairs(d):
            for t in range(ctx.size):
                r = restrict(f, vp, wp, t)
                best = max(best, r.norm2sq())
        out[d] = best
    return out


def test_global_audit_matches_brute_force():
    ctx = get_scheme(2, 2, 2)
    for _ in range(3):
        f = ctx.table((RNG.random(ctx.size) < 0.5).astype(float))
        rep = global_audit(f, 2)
        oracle = brute_force_global_audit(f, 2)
        for d in range(3):
            assert abs(rep.value_at(d) - oracle[d]) < 1e-12


def test_audit_witness_is_attained():
    ctx = get_scheme(3, 2, 2)
    f = random_table(ctx, RNG, "boolean")
    rep = global_audit(f, 2)
    for row in rep.rows:
        # recompute at the named site and compare
        pair_idx = int(row.witness.split("#")[1].split("(")[0])
        t = int(row.witness.split("T=")[1])
        vp, wp = ctx.restriction_pairs(row.order)[pair_idx]
        assert abs(restrict(f, vp, wp, t).norm2sq() - row.value) < 1e-12


def test_restriction_monotonicity():
    # order-d max is at least the order-(d-1) max divided by the domain size
    ctx = get_scheme(2, 2, 2)
    for _ in range(5):
        f = random_table(ctx, RNG, "boolean")
        rep = global_audit(f, 2)
        for d in range(1, 3):
            assert rep.value_at(d) >= rep.value_at(d - 1) / ctx.size - 1e-12


def test_influence_audit_cases():
    ctx = get_scheme(2, 2, 2)
    c = ctx.constant(2.0)
    rep = influence_audit(c, 2)
    assert abs(rep.value_at(0) - c.norm2sq()) < 1e-12
    for d in (1, 2):
        assert rep.value_at(d) < 1e-12
    f = random_table(ctx, RNG, "complex")
    rep2 = influence_audit(f, 1)
    assert abs(rep2.value_at(0) - f.norm2sq()) < 1e-12


def test_lp_audit_consistency_with_l2():
    ctx = get_scheme(2, 2, 2)
    f = random_table(ctx, RNG, "boolean")
    rep2 = global_audit(f, 2)
    repp = lp_global_audit(f, 2, 2.0)
    for d in range(3):
        assert abs(repp.value_at(d) ** 2 - rep2.value_at(d)) < 1e-9
    # Boolean: ell'-power of the norm is the restriction density
    repb = lp_global_audit(f, 1, 4.0 / 3.0)
    assert repb.value_at(0) == pytest.approx(f.mean().real ** (3.0 / 4.0), abs=1e-12)


# ---------------------------------------------------------------------------
# set audits on groups
# ---------------------------------------------------------------------------

def test_set_audit_full_group():
    g = get_group("sl", 2, 3)
    res = set_global_audit(g, np.arange(g.size))
    for row in res.report.rows:
        assert abs(row.value - 1.0) < 1e-12


def test_set_audit_own_umvirate_ratio():
    g = get_group("sl", 2, 3)
    u = Umvirate(g.field, 2, [(np.array([1, 0], np.uint8), np.array([1, 0], np.uint8))])
    mask = u.members_mask(g)
    res = set_global_audit(g, np.flatnonzero(mask))
    # at its own witness the ratio is |G| / |U & G|
    expected = g.size / mask.sum()
    assert res.report.value_at(1) >= expected - 1e-9


def brute_force_set_ratios(g, ordinals, dmax=2):
    """Counting oracle over all 1- and 2-umvirates, including scaled and
    redundant presentations."""
    q, n = g.q, g.n
    std = g.vector_action(False)
    dual = g.vector_action(True)
    amask = np.zeros(g.size, dtype=bool)
    amask[ordinals] = True
    mu = len(ordinals) / g.size
    singles = []
    for v in range(1, q**n):
        for w in range(1, q**n):
            m = std[:, v] == w
            if m.any():
                singles.append(("r", v, w, m))
            md = dual[:, v] == w
            if md.any():
                singles.append(("f", v, w, md))
    best = {0: 1.0, 1: -1.0, 2: -1.0}
    for _, _, _, m in singles:
        best[1] = max(best[1], (amask & m).sum() / m.sum() / mu)
    from qharm.fqlin import decode_vector, rank as fq_rank

    for i in range(len(singles)):
        for j in range(i + 1, len(singles)):
            t1, v1, w1, m1 = singles[i]
            t2, v2, w2, m2 = singles[j]
            if t1 == t2:
                vecs = np.array([decode_vector(v1, n, q), decode_vector(v2, n, q)])
                if fq_rank(g.field, vecs) < 2:
                    continue
            m = m1 & m2
            if m.any():
                best[2] = max(best[2], (amask & m).sum() / m.sum() / mu)
    return best


def test_set_audit_matches_counting_oracle():
    g = get_group("sl", 2, 3)
    ordinals = np.sort(RNG.choice(g.size, size=12, replace=False))
    res = set_global_audit(g, ordinals, rmax=2)
    oracle = brute_force_set_ratios(g, ordinals)
    for d in (1, 2):
        assert res.report.value_at(d) == pytest.approx(oracle[d], abs=1e-9)


# ---------------------------------------------------------------------------
# umvirate normal forms and partitions
# ---------------------------------------------------------------------------

def _random_umvirate(g, n_rows, n_funcs, rng):
    while True:
        rows = []
        for _ in range(n_rows):
            x = g.mats[rng.integers(0, g.size)]
            rows.append((x[:, 0].copy(), x[:, 1].copy() if False else x[:, 0].copy()))
        # use actual group elements to guarantee nonemptiness:
        witness = g.mats[rng.integers(0, g.size)]
        from qharm.fqlin import mat_vec

        rows = []
        for _ in range(n_rows):
            v = rng.integers(0, g.q, size=g.n).astype(np.uint8)
            if not np.any(v):
                continue
            rows.append((v, mat_vec(g.field, witness, v)))
        funcs = []
        for _ in range(n_funcs):
            phi = rng.integers(0, g.q, size=g.n).astype(np.uint8)
            if not np.any(phi):
                continue
            funcs.append((phi, mat_vec(g.field, witness.T.copy(), phi)))
        u = Umvirate(g.field, g.n, rows, funcs)
        if not u.is_empty_constraints and u.members_mask(g).any():
            return u


def test_normal_form_reproduces_member_set():
    g = get_group("sl", 3, 2)
    from qharm.fqlin import mat_mul

    for trial in range(8):
        u = _random_umvirate(g, (trial % 2) + 1, (trial // 2) % 2 + 1, RNG)
        nf = umvirate_normal_form(g, u)
        mask = u.members_mask(g)
        for x in range(g.size):
            h = mat_mul(g.field, mat_mul(g.field, nf.d_mat, g.mats[x]), nf.c_mat)
            in_nf = np.array_equal(h[: nf.b, :], nf.fixed_rows) and np.array_equal(
                h[:, : nf.a], nf.fixed_cols
            )
            assert in_nf == bool(mask[x])


def test_block_subgroup_is_subgroup():
    g = get_group("sl", 3, 2)
    lk = block_subgroup_members(g, 1)
    assert len(lk) == 6  # SL_2(F_2)
    m = g.mul_table()
    prod = m[np.ix_(lk, lk)]
    assert set(np.unique(prod)) <= set(lk.tolist())
    assert np.all(np.isin(g.inv[lk], lk))
    assert len(block_subgroup_members(g, 0)) == g.size
    assert list(block_subgroup_members(g, 3)) == [g.identity]


def test_good_umvirate_members_match_blockform():
    g = get_group("sl", 3, 2)
    for _ in range(5):
        k = int(RNG.integers(0, 3))
        gu = GoodUmvirate(g, k, int(RNG.integers(0, g.size)), int(RNG.integers(0, g.size)))
        mem = gu.members()
        assert len(mem) == len(block_subgroup_members(g, k))
        for x in mem[:4]:
            assert gu.contains(int(x))


def test_partition_trivial_cases():
    g = get_group("sl", 3, 2)
    u_all = Umvirate(g.field, 3)
    parts = good_umvirate_partition(g, u_all)
    assert len(parts) == 1 and parts[0].k == 0
    assert len(parts[0].members()) == g.size


def test_partition_disjoint_covering_all_1_and_2_umvirates():
    g = get_group("sl", 3, 2)
    tables = None
    from qharm.globality import _audit_tables

    tables = _audit_tables(g)
    checked = 0
    for i, rsys in enumerate(tables.row_systems):
        for j, fsys in enumerate(tables.func_systems):
            order = tables.row_orders[i] + tables.func_orders[j]
            if order < 1 or order > 2:
                continue
            from qharm.fqlin import decode_vector

            u = Umvirate(
                g.field,
                3,
                [(decode_vector(v, 3, 2), decode_vector(w, 3, 2)) for v, w in rsys],
                [(decode_vector(v, 3, 2), decode_vector(w, 3, 2)) for v, w in fsys],
            )
            mask = u.members_mask(g)
            if not mask.any():
                continue
            parts = good_umvirate_partition(g, u)
            union = np.concatenate([p.members() for p in parts]) if parts else np.array([], int)
            assert len(union) == len(np.unique(union)), "pieces overlap"
            assert set(union.tolist()) == set(np.flatnonzero(mask).tolist()), "pieces miss"
            orders = {p.order for p in parts}
            assert len(orders) == 1
            assert orders.pop() <= 2 * u.order
            checked += 1
    # 98 order-1 systems plus the nonempty order-2 systems
    assert checked == 1911


def test_partition_of_good_umvirate_is_singleton():
    g = get_group("sl", 3, 2)
    # U = L_1 presented as a mixed 2-umvirate
    e1 = np.array([1, 0, 0], np.uint8)
    u = Umvirate(g.field, 3, [(e1, e1)], [(e1, e1)])
    parts = good_umvirate_partition(g, u)
    assert len(parts) == 1
    assert parts[0].k == 1
    assert set(parts[0].members().tolist()) == set(np.flatnonzero(u.members_mask(g)).tolist())


# ---------------------------------------------------------------------------
# density bump search
# ---------------------------------------------------------------------------

def test_bump_search_global_set_zero_bumps():
    g = get_group("sl", 3, 2)
    # the full group is r-global for any r >= 1
    res = density_bump_search(g, np.arange(g.size))
    assert res.reason == "global"
    assert res.k == 0 and len(res.trace) == 0
    assert res.restricted_ordinals.size == g.size


def test_bump_search_umvirate_coset_lands_exactly():
    g = get_group("sl", 3, 2)
    for _ in range(3):
        gu = GoodUmvirate(g, 1, int(RNG.integers(0, g.size)), int(RNG.integers(0, g.size)))
        a = gu.members()
        res = density_bump_search(g, a)
        assert res.k >= 1
        dens = res.trace[-1].density_after
        assert abs(dens - 1.0) < 1e-12
        # final restricted set is everything
        assert res.restricted_ordinals.size == res.restricted_group.size
        # the found umvirate contains A
        found = res.umvirate(g)
        assert set(a.tolist()) <= set(found.members().tolist())


def test_bump_search_trace_verified_by_counting():
    g = get_group("sl", 3, 2)
    gu = GoodUmvirate(g, 1, 17, 101)
    noise = RNG.choice(g.size, size=6, replace=False)
    a = np.unique(np.concatenate([gu.members(), noise]))
    res = density_bump_search(g, a)
    mu0 = a.size / g.size
    assert res.trace[0].density_before == pytest.approx(mu0)
    for t in res.trace:
        # the per-step guarantee r^s mu is certified by the recount
        assert t.density_after >= t.guarantee - 1e-12
        assert t.density_after >= t.density_before - 1e-12
    if res.reason == "global":
        final = set_global_audit(res.restricted_group, res.restricted_ordinals)
        assert not final.violations
