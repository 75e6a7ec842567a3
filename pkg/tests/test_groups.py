"""Group enumeration, transfer maps, convolution, level filtration, juntas,
and the isotypic eigen-refinement."""

import numpy as np

from qharm.errors import ToolkitError
from qharm.fqlin import span_of
from qharm.groups import (
    build_level_basis,
    convolve,
    get_group,
    get_isotypic,
    get_levels,
    junta_project,
    junta_test,
    level_decompose,
    level_lower_check,
    level_project,
    level_project_eq,
    pointwise_stabilizer,
    random_group_table,
    transfer,
)

RNG = np.random.default_rng(404)


def test_group_orders():
    assert get_group("sl", 2, 2).size == 6
    assert get_group("sl", 2, 3).size == 24
    assert get_group("gl", 2, 2).size == 6
    assert get_group("gl", 2, 3).size == 48
    assert get_group("sl", 3, 2).size == 168
    assert get_group("sl", 2, 5).size == 120


def test_sl_gl_order_relation():
    for (n, q) in [(2, 2), (2, 3), (2, 4), (2, 5)]:
        sl = get_group("sl", n, q)
        gl = get_group("gl", n, q)
        assert sl.size * (q - 1) == gl.size


def test_inverses_and_identity():
    g = get_group("sl", 2, 3)
    m = g.mul_table()
    for x in range(g.size):
        assert m[x, g.inv[x]] == g.identity
        assert m[g.identity, x] == x


def test_closure_spot_check():
    g = get_group("sl", 3, 2)
    m = g.mul_table()
    sample = RNG.integers(0, g.size, size=200)
    assert np.all(m[sample, sample[::-1]] >= 0)


def test_transfer_round_trip_and_norm():
    g = get_group("sl", 2, 2)
    f = random_group_table(g, RNG, "complex")
    jf = transfer(f, "j")
    assert abs(jf.mean() - f.mean() * g.size / jf.domain.size) < 1e-12
    back = transfer(jf, "i", g)
    assert np.max(np.abs(back.values - f.values)) < 1e-12
    ones = g.constant(1.0)
    assert abs(transfer(ones, "j").mean() - 6 / 16) < 1e-12
    # norm transfer: ||j(f)||^2 = (|G|/q^{n^2}) ||f||^2
    assert abs(transfer(f, "j").norm2sq() - f.norm2sq() * g.size / 16) < 1e-12


def test_convolution_identities_and_oracle():
    g = get_group("sl", 2, 3)
    ones = g.constant(1.0)
    c = convolve(ones, ones)
    assert np.max(np.abs(c.values - 1.0)) < 1e-12
    point = g.table(np.eye(1, g.size, g.identity)[0] * g.size)
    f = random_group_table(g, RNG, "complex")
    assert np.max(np.abs(convolve(point, f).values - f.values)) < 1e-10
    # O(|G|^2) double-loop oracle
    a = RNG.integers(0, g.size, size=10)
    b = RNG.integers(0, g.size, size=12)
    fa = g.indicator(np.unique(a))
    fb = g.indicator(np.unique(b))
    conv = convolve(fa, fb)
    m = g.mul_table()
    brute = np.zeros(g.size)
    for y in range(g.size):
        if fb.values[y].real > 0.5:
            for z in range(g.size):
                if fa.values[z].real > 0.5:
                    brute[m[z, y]] += 1
    brute /= g.size
    assert np.max(np.abs(conv.values - brute)) < 1e-12
    # associativity and mean product
    fc = random_group_table(g, RNG, "complex")
    lhs = convolve(convolve(fa, fb), fc)
    rhs = convolve(fa, convolve(fb, fc))
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10
    assert abs(convolve(fa, fb).mean() - fa.mean() * fb.mean()) < 1e-12


def test_level_dims_nested_and_saturating():
    for (n, q) in [(2, 2), (2, 3)]:
        g = get_group("sl", n, q)
        levels = get_levels(g)
        assert levels.dims[0] == 1
        assert all(levels.dims[d] <= levels.dims[d + 1] for d in range(n))
        assert levels.dims[n] == g.size
        # orthonormality of the basis
        b = levels.basis
        gram = b.conj() @ b.T / g.size
        assert np.max(np.abs(gram - np.eye(b.shape[0]))) < 1e-8


def test_level_dims_match_naive_generator_stream():
    # the reduced generator set spans the same filtration as the full
    # q^{2nd} stream of constraint tuples
    g = get_group("sl", 2, 2)
    levels = get_levels(g)
    q, n = g.q, g.n
    act = g.vector_action(False)
    from qharm.groups import _mgs_extend

    rows: list[np.ndarray] = []
    dims = []
    for d in range(n + 1):
        if d == 0:
            _mgs_extend(rows, np.ones(g.size), g.size)
        else:
            import itertools

            for tup in itertools.product(range(q**n), repeat=2 * d):
                mask = np.ones(g.size, dtype=bool)
                for t in range(d):
                    v, u = tup[2 * t], tup[2 * t + 1]
                    mask &= act[:, v] == u if v else np.full(g.size, u == 0)
                if mask.any():
                    _mgs_extend(rows, mask.astype(float), g.size)
        dims.append(len(rows))
    assert dims == levels.dims


def test_level_projection_examples():
    g = get_group("sl", 2, 3)
    c = g.constant(3.0)
    assert np.max(np.abs(level_project_eq(c, 0).values - c.values)) < 1e-9
    for d in (1, 2):
        assert level_project_eq(c, d).norm2sq() < 1e-16
    # a dictator indicator lies in level <= 1
    mask = g.dictator_mask(1, 1)
    f = g.table(mask.astype(float))
    assert np.max(np.abs(level_project(f, 1).values - f.values)) < 1e-9
    # Parseval across the filtration
    f = random_group_table(g, RNG, "complex")
    parts = level_decompose(f)
    assert abs(sum(p.norm2sq() for p in parts) - f.norm2sq()) < 1e-9
    total = np.sum([p.values for p in parts], axis=0)
    assert np.max(np.abs(total - f.values)) < 1e-9


def test_convolution_preserves_levels():
    g = get_group("sl", 2, 3)
    f = random_group_table(g, RNG, "complex")
    h = random_group_table(g, RNG, "complex")
    fparts = level_decompose(f)
    hparts = level_decompose(h)
    for d, fd in enumerate(fparts):
        conv = convolve(fd, h)
        for dp in range(g.n + 1):
            part = level_project_eq(conv, dp)
            if dp != d:
                assert part.norm2sq() < 1e-16
    full = convolve(f, h)
    diag = np.sum([convolve(fparts[d], hparts[d]).values for d in range(g.n + 1)], axis=0)
    assert np.max(np.abs(full.values - diag)) < 1e-9


def test_junta_stabilizer_equivalence_exhaustive():
    g = get_group("sl", 2, 3)
    u = span_of(g.field, [1, 0])
    h = pointwise_stabilizer(g, u)
    # signature of g|_U: encoded image of the basis vector
    act = g.vector_action(False)
    sig = act[:, 1]
    # H-invariant functions are exactly the signature-measurable ones
    f = random_group_table(g, RNG, "real")
    p = junta_project(f, u)
    assert junta_test(p, u)
    for s in np.unique(sig):
        vals = p.values[sig == s]
        assert np.max(np.abs(vals - vals[0])) < 1e-9
    # any signature-measurable function passes the test
    lookup = RNG.standard_normal(int(sig.max()) + 1)
    f2 = g.table(lookup[sig])
    assert junta_test(f2, u)
    assert not junta_test(random_group_table(g, RNG, "real"), u)
    # constants are 0-juntas; dictators are 1-juntas
    from qharm.fqlin import zero_space

    assert junta_test(g.constant(2.0), zero_space(g.field, 2))
    assert junta_test(g.table(g.dictator_mask(1, 2).astype(float)), u)


def test_junta_project_idempotent_and_contractive():
    g = get_group("sl", 2, 3)
    u = span_of(g.field, [0, 1])
    for _ in range(5):
        f = random_group_table(g, RNG, "complex")
        p = junta_project(f, u)
        pp = junta_project(p, u)
        assert np.max(np.abs(pp.values - p.values)) < 1e-10
        assert p.norm2sq() <= f.norm2sq() + 1e-12


def test_level_lower_check_random():
    for (n, q) in [(2, 3), (2, 5), (3, 2)]:
        g = get_group("sl", n, q)
        bound = g.size / float(q) ** (n * n)
        assert bound > 1 / (4 * q)
        for d in range(n + 1):
            for _ in range(5):
                f = random_group_table(g, RNG, "complex")
                try:
                    res = level_lower_check(f, d)
                except ToolkitError:
                    continue
                assert res["ok"], res


def test_level_lower_check_constant():
    g = get_group("sl", 2, 3)
    res = level_lower_check(g.constant(1.0), 0)
    # j(1_G)^{=0} has scheme norm^2 (|G|/N)^2; the ratio is exactly |G|/N
    assert abs(res["ratio_j"] - 24 / 81) < 1e-9
    assert res["ok"]


def test_conjugacy_class_counts():
    g6 = get_group("sl", 2, 2)
    cls = g6.conjugacy_classes()
    sizes = sorted(np.bincount(cls).tolist())
    assert sizes == [1, 2, 3]
    assert get_group("sl", 2, 3).class_count() == 7
    assert get_group("sl", 3, 2).class_count() == 6
    for g in (g6, get_group("sl", 2, 3)):
        assert np.bincount(g.conjugacy_classes())[g.conjugacy_classes()[g.identity]] == 1


def test_isotypic_refinement_consistency():
    for (n, q) in [(2, 2), (2, 3), (3, 2)]:
        g = get_group("sl", n, q)
        rep = get_isotypic(g)
        assert rep.sum_of_squares() == g.size
        assert rep.total_blocks() == g.class_count()
        for d, dims in rep.component_dims.items():
            assert all(isinstance(x, int) and x >= 1 for x in dims)


def test_isotypic_sl2_f2_dims():
    # SL_2(F_2) is S_3: irreducibles of dimension 1, 1, 2
    rep = get_isotypic(get_group("sl", 2, 2))
    alldims = sorted(x for v in rep.component_dims.values() for x in v)
    assert alldims == [1, 1, 2]
    assert rep.component_dims[0] == [1]


def test_gl_twisted_levels():
    # on GL the tensor-rank filtration twists the strict one by
    # determinant characters; both saturate at d = n
    g = get_group("gl", 2, 3)
    strict = build_level_basis(g, 2, mode="strict")
    twisted = build_level_basis(g, 2, mode="twisted")
    assert strict.dims[2] == g.size and twisted.dims[2] == g.size
    assert twisted.dims[0] >= strict.dims[0]
    for d in range(3):
        assert twisted.dims[d] >= strict.dims[d]
    # twisted level 0 holds all determinant characters: dim q-1
    assert twisted.dims[0] == g.q - 1
    # on SL the two notions coincide
    s = get_group("sl", 2, 3)
    s_strict = build_level_basis(s, 2, mode="strict")
    s_twisted = build_level_basis(s, 2, mode="twisted")
    assert s_strict.dims == s_twisted.dims


def test_glt_growth_report_shape():
    from qharm.groups import glt_growth_report

    g = get_group("sl", 2, 3)
    rep = get_isotypic(g)
    out = glt_growth_report(g, rep)
    assert "nondecreasing" in out and out["m_1"] >= 1
    assert out["reference_scale"] == (3**2 - 1) // 2 - 1


def test_level_spaces_spanned_by_juntas():
    # each strict level-d space is inside the span of d-junta projections
    g = get_group("sl", 2, 3)
    levels = get_levels(g)
    from qharm.fqlin import enumerate_subspaces

    for d in (1, 2):
        gen_rows = []
        for u in enumerate_subspaces(g.field, g.n, d):
            h = pointwise_stabilizer(g, u)
            m = g.mul_table()
            for x in range(g.size):
                row = np.zeros(g.size)
                row[m[x, h]] = 1.0 / len(h)
                gen_rows.append(row)
        gen = np.array(gen_rows)
        # project the =d basis onto the junta span and check zero residual
        u_, s_, vh = np.linalg.svd(gen, full_matrices=False)
        keep = s_ > 1e-8
        qrows = vh[keep]
        eq = levels.eq_basis(d)
        coeffs = eq @ qrows.conj().T
        recon = coeffs @ qrows
        assert np.max(np.abs(recon - eq)) < 1e-8
