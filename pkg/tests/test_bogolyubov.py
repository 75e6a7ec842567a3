"""Product-set algebra, groumvirate enumeration, the Bogolyubov containment
search, the 0.99-density step, and easy-set covers."""

import numpy as np
import pytest

from qharm.bogolyubov import (
    GroupSet,
    bogolyubov_search,
    density_bogolyubov,
    easy_set_cover,
    full_set,
    groumvirate_enumerate,
    groumvirate_orbit_count,
    pigeonhole_check,
    quadruple_product,
    set_algebra,
)
from qharm.errors import ToolkitError
from qharm.globality import GoodUmvirate, block_subgroup_members
from qharm.groups import get_group

RNG = np.random.default_rng(5150)


def test_set_algebra_identities():
    g = get_group("sl", 2, 3)
    a = GroupSet(g, RNG.choice(g.size, size=7, replace=False))
    e = GroupSet(g, [g.identity])
    assert set_algebra(a, e, "product") == a
    # a subgroup is closed under product and inverse
    lk = GroupSet(get_group("sl", 3, 2), block_subgroup_members(get_group("sl", 3, 2), 1))
    assert set_algebra(lk, lk, "product") == lk
    assert set_algebra(lk, None, "inverse") == lk


def test_product_set_matches_double_loop():
    g = get_group("sl", 2, 3)
    a = GroupSet(g, RNG.choice(g.size, size=5, replace=False))
    b = GroupSet(g, RNG.choice(g.size, size=6, replace=False))
    prod = set_algebra(a, b, "product")
    m = g.mul_table()
    brute = set()
    for x in a.ordinals:
        for y in b.ordinals:
            brute.add(int(m[x, y]))
    assert set(prod.ordinals.tolist()) == brute


def test_power_and_quadruple():
    g = get_group("sl", 2, 3)
    a = GroupSet(g, RNG.choice(g.size, size=4, replace=False))
    a2 = set_algebra(a, a, "product")
    assert set_algebra(a, None, "power", k=2) == a2
    quad = quadruple_product(a)
    ainv = set_algebra(a, None, "inverse")
    step = set_algebra(a, ainv, "product")
    assert quad == set_algebra(step, step, "product")


def test_groumvirate_enumeration_counts():
    g = get_group("sl", 3, 2)
    assert len(groumvirate_enumerate(g, 0)) == 1
    conj = groumvirate_enumerate(g, 1)
    # parametrization: 7 fixed lines x 4 invariant complements
    assert len(conj) == 28
    orbit, by_normalizer = groumvirate_orbit_count(g, 1)
    assert orbit == 28 and by_normalizer == 28
    # all conjugates of L_1 have |SL_2(F_2)| = 6 elements and are subgroups
    m = g.mul_table()
    seen = set()
    for gu in conj:
        mem = gu.members()
        assert len(mem) == 6
        assert gu.is_groumvirate()
        prods = m[np.ix_(mem, mem)]
        assert set(np.unique(prods).tolist()) == set(mem.tolist())
        assert np.all(np.isin(g.inv[mem], mem))
        seen.add(frozenset(mem.tolist()))
    assert len(seen) == 28


def test_bogolyubov_search_full_group():
    g = get_group("sl", 3, 2)
    res = bogolyubov_search(full_set(g))
    assert res.contained.k == 0
    assert res.density == 1.0


def test_bogolyubov_search_good_umvirate_coset():
    g = get_group("sl", 3, 2)
    for _ in range(3):
        gu = GoodUmvirate(g, 1, int(RNG.integers(g.size)), int(RNG.integers(g.size)))
        a = GroupSet(g, gu.members())
        res = bogolyubov_search(a)
        # A A^{-1} = g L_1 g^{-1}, so that groumvirate is contained
        assert res.contained.k == 1
        assert abs(res.density - 6 / 168) < 1e-12
        expected = GoodUmvirate(g, 1, gu.g, int(g.inv[gu.g]))
        assert set(res.contained.members().tolist()) == set(expected.members().tolist())


def test_bogolyubov_search_dense_set_pigeonhole():
    g = get_group("sl", 2, 3)
    for _ in range(5):
        size = int(g.size // 2 + 1 + RNG.integers(0, 5))
        a = GroupSet(g, RNG.choice(g.size, size=size, replace=False))
        res = bogolyubov_search(a)
        assert res.product_set.size == g.size
        assert res.contained.k == 0
        out = pigeonhole_check(a)
        assert out["aainv_is_group"] and out["quad_is_group"]


def test_singleton_fallback():
    g = get_group("sl", 2, 3)
    a = GroupSet(g, [5])
    res = bogolyubov_search(a)
    # {e} is always contained; a singleton A gives exactly that
    assert res.contained.density() >= 1 / g.size - 1e-12


def test_density_bogolyubov_groumvirate_itself():
    g = get_group("sl", 3, 2)
    gu = GoodUmvirate(g, 1, 23, int(g.inv[23]))
    a = GroupSet(g, gu.members())
    res = density_bogolyubov(a)
    assert res.density_in_groumvirate == 1.0
    assert res.reached_099 and res.containment_verified
    assert set(res.groumvirate.members().tolist()) == set(a.ordinals.tolist())


def test_density_bogolyubov_very_dense_set():
    g = get_group("sl", 3, 2)
    drop = RNG.choice(g.size, size=0, replace=False)
    a = GroupSet(g, np.setdiff1d(np.arange(g.size), drop))
    res = density_bogolyubov(a)
    assert res.groumvirate.k == 0
    assert res.reached_099 and res.containment_verified


def test_density_bogolyubov_structured_set_recount():
    g = get_group("sl", 3, 2)
    gu = GoodUmvirate(g, 1, 40, int(g.inv[40]))
    noise = RNG.choice(g.size, size=4, replace=False)
    a = GroupSet(g, np.concatenate([gu.members(), noise]))
    res = density_bogolyubov(a)
    # recount the reported density directly
    ainv = set_algebra(a, None, "inverse")
    aai = set_algebra(a, ainv, "product")
    members = res.groumvirate.members()
    dens = np.mean(np.isin(members, aai.ordinals))
    assert res.density_in_groumvirate == pytest.approx(float(dens))


def test_easy_set_cover_subgroup():
    g = get_group("sl", 3, 2)
    lk = GroupSet(g, block_subgroup_members(g, 1))
    res = easy_set_cover(lk)
    assert res.k_ratio == 1.0
    assert res.covers and res.inside_a5
    assert set(res.easy_set.members().tolist()) >= set(lk.ordinals.tolist())


def test_easy_set_cover_full_group():
    g = get_group("sl", 3, 2)
    res = easy_set_cover(full_set(g))
    assert res.k_ratio == 1.0
    assert res.coset_count == 1


def test_easy_set_cover_three_cosets():
    g = get_group("sl", 3, 2)
    gu = GoodUmvirate(g, 1, g.identity, g.identity)
    u = gu.members()
    m = g.mul_table()
    x1, x2 = 7, 90
    a = set(u.tolist()) | set(m[x1, u].tolist()) | set(m[x2, u].tolist())
    a |= {int(g.inv[x]) for x in a}
    aset = GroupSet(g, np.array(sorted(a)))
    # symmetrize fully
    assert set_algebra(aset, None, "inverse") == aset
    res = easy_set_cover(aset)
    assert res.covers and res.inside_a5
    assert res.coset_count <= 9


def test_easy_set_cover_rejects_asymmetric():
    g = get_group("sl", 2, 3)
    # pick a non-symmetric set
    a = GroupSet(g, [1, 2, 3])
    if np.array_equal(set_algebra(a, None, "inverse").ordinals, a.ordinals):
        a = GroupSet(g, [1, 2, 3, 4])
    with pytest.raises(ToolkitError):
        easy_set_cover(a)


def test_symmetric_set_contained_in_triple_product():
    g = get_group("sl", 2, 3)
    for _ in range(5):
        ords = RNG.choice(g.size, size=6, replace=False)
        sym = np.unique(np.concatenate([ords, g.inv[ords]]))
        a = GroupSet(g, sym)
        ainv = set_algebra(a, None, "inverse")
        triple = set_algebra(set_algebra(a, ainv, "product"), a, "product")
        assert triple.contains(a)
