"""Operator norms on levels, the trace identity, mixing decompositions,
product-free witnesses, and spot checks of the inequality batteries."""

import numpy as np
import pytest

from qharm.bogolyubov import GroupSet, full_set
from qharm.groups import (
    convolve,
    get_group,
    get_levels,
    level_project_eq,
    random_group_table,
)
from qharm.spectra import (
    GroupInstanceChecks,
    SchemeInstanceChecks,
    bonami_isotypic_rows,
    conv_operator_matrix,
    conv_operator_norm,
    level_invariance_residual,
    mixing_experiment,
    product_free_witness,
    product_mixing,
    sarnak_xue_check,
    violations,
)
from qharm.scheme import get_scheme

RNG = np.random.default_rng(777)


def test_operator_norm_constant_function():
    g = get_group("sl", 2, 3)
    ones = g.constant(1.0)
    for d in (1, 2):
        assert conv_operator_norm(ones, d, "exact") < 1e-10


def test_operator_norm_point_mass_identity():
    g = get_group("sl", 2, 3)
    point = g.table(np.eye(1, g.size, g.identity)[0] * g.size)
    for d in range(g.n + 1):
        if get_levels(g).eq_basis(d).shape[0]:
            assert abs(conv_operator_norm(point, d, "exact") - 1.0) < 1e-9


def test_exact_and_power_methods_agree():
    g = get_group("sl", 2, 3)
    for _ in range(5):
        f = g.indicator(RNG.choice(g.size, size=10, replace=False))
        for d in (1, 2):
            ex = conv_operator_norm(f, d, "exact")
            pw = conv_operator_norm(f, d, "power")
            assert abs(ex - pw) < 1e-6


def test_trace_identity_and_sx_bound():
    for kind, n, q in [("sl", 2, 2), ("sl", 2, 3), ("sl", 3, 2)]:
        g = get_group(kind, n, q)
        for _ in range(3):
            f = random_group_table(g, RNG, "real")
            for d in range(n + 1):
                row = sarnak_xue_check(f, d)
                assert abs(row.trace_matrix - row.trace_direct) < 1e-8
                assert row.sx_holds


def test_trace_identity_point_mass():
    g = get_group("sl", 2, 3)
    point = g.table(np.eye(1, g.size, g.identity)[0] * g.size)
    total = 0.0
    for d in range(g.n + 1):
        row = sarnak_xue_check(point, d)
        total += row.trace_direct
    assert abs(total - point.norm2sq()) < 1e-8
    assert abs(point.norm2sq() - g.size) < 1e-9


def test_operator_preserves_levels():
    g = get_group("sl", 2, 3)
    f = random_group_table(g, RNG, "real")
    for d in range(1, g.n + 1):
        assert level_invariance_residual(f, d, RNG) < 1e-9


def test_operator_agrees_with_pure_part():
    # T_f and T_{f_{=d}} agree on V_{=d}
    g = get_group("sl", 2, 3)
    f = random_group_table(g, RNG, "real")
    for d in range(1, g.n + 1):
        m_full = conv_operator_matrix(f, d)
        m_pure = conv_operator_matrix(level_project_eq(f, d), d)
        if m_full.size:
            assert np.max(np.abs(m_full - m_pure)) < 1e-9


def test_mixing_full_group_and_absorbing():
    g = get_group("sl", 2, 3)
    full = full_set(g)
    rep = mixing_experiment(full, full)
    assert rep.deviation < 1e-12
    a = GroupSet(g, RNG.choice(g.size, size=9, replace=False))
    rep2 = mixing_experiment(a, full)
    assert rep2.deviation < 1e-12


def test_mixing_decomposition_and_oracle():
    g = get_group("sl", 2, 3)
    for _ in range(5):
        a = GroupSet(g, RNG.choice(g.size, size=int(RNG.integers(4, 20)), replace=False))
        b = GroupSet(g, RNG.choice(g.size, size=int(RNG.integers(4, 20)), replace=False))
        rep = mixing_experiment(a, b)
        assert rep.decomposition_residual < 1e-8
        # double-loop convolution oracle
        f = g.indicator(a.ordinals)
        h = g.indicator(b.ordinals)
        m = g.mul_table()
        brute = np.zeros(g.size)
        for z in a.ordinals:
            for y in b.ordinals:
                brute[m[z, y]] += 1
        brute /= g.size
        conv = convolve(f, h)
        assert np.max(np.abs(conv.values - brute)) < 1e-12
        dev = np.sqrt(np.mean(np.abs(brute - a.mu * b.mu) ** 2))
        assert rep.deviation == pytest.approx(float(dev), abs=1e-12)


def test_product_mixing_cases():
    g = get_group("sl", 2, 3)
    full = full_set(g)
    rep = product_mixing(full, full, full)
    assert rep.triple == pytest.approx(1.0)
    assert rep.triple_deviation < 1e-12
    assert rep.covers
    # C disjoint from AB makes the triple correlation vanish
    a = GroupSet(g, [3])
    b = GroupSet(g, [5])
    from qharm.bogolyubov import set_algebra

    ab = set_algebra(a, b, "product")
    rest = np.setdiff1d(np.arange(g.size), ab.ordinals)
    c = GroupSet(g, rest[:4])
    rep2 = product_mixing(a, b, c)
    assert abs(rep2.triple) < 1e-12
    assert rep2.decomposition_residual < 1e-8


def test_product_free_witness():
    g = get_group("sl", 2, 3)
    assert not product_free_witness(full_set(g)).product_free
    # any non-identity element gives a product-free singleton
    x = 7
    assert x != g.identity
    rep = product_free_witness(GroupSet(g, [x]))
    assert rep.product_free
    assert rep.audit is not None and rep.best_bump_ratio >= 1.0


def test_product_free_structured_coset():
    # a coset of L_1 avoiding its own square is detected both ways
    g = get_group("sl", 3, 2)
    from qharm.globality import GoodUmvirate

    for shift in range(1, g.size):
        gu = GoodUmvirate(g, 1, shift, g.identity)
        a = GroupSet(g, gu.members())
        m = g.mul_table()
        prods = m[np.ix_(a.ordinals, a.ordinals)]
        brute_free = not np.any(np.isin(prods, a.ordinals))
        rep = product_free_witness(a)
        assert rep.product_free == brute_free
        if brute_free:
            break
    else:
        pytest.skip("no product-free coset found")


def test_scheme_checks_trivial_instances():
    ctx = get_scheme(2, 2, 2)
    ones = ctx.constant(1.0)
    checks = SchemeInstanceChecks("const", ones, 2, 2)
    r = checks.check_four_norm(1)
    assert r["holds"]
    point = ctx.indicator([0])
    checks2 = SchemeInstanceChecks("point", point, 2, 2)
    for d in (1, 2):
        for fn in (
            checks2.check_globalness_implies_small_influences,
            checks2.check_four_norm,
        ):
            assert fn(d)["holds"]
        assert checks2.check_level_weight(d, 4)["holds"]


def test_group_checks_small_instance():
    g = get_group("sl", 2, 3)
    a = g.indicator(RNG.choice(g.size, size=8, replace=False))
    checks = GroupInstanceChecks("inst", a, 2)
    for d in (1, 2):
        assert checks.check_strict_level_weight(d, 4)["holds"]
        assert checks.check_tensor_level_weight(d, 4)["holds"]
        r = checks.check_flexible_level_weight(d)
        assert r is None or r["holds"]


def test_bonami_isotypic_small_group():
    g = get_group("sl", 2, 2)
    rows = bonami_isotypic_rows(g, RNG, ells=(4,))
    assert rows and not violations(rows)


def test_empirical_convolution_exponent_reported():
    g = get_group("sl", 2, 3)
    f = g.indicator(np.arange(12))
    row = sarnak_xue_check(f, 1, c_report=0.05)
    assert np.isfinite(row.empirical_c) or row.norm < 1e-14
