"""Divided-difference engine tests against exact rational oracles."""

import itertools
import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import workprec

from lineinterp import (
    ApComplex,
    ArityError,
    ConfigError,
    DomainError,
    NodeDistinctnessError,
    NodeSequence,
    ParseError,
    ScalarFunction,
    analytic_series,
    conjugation,
    delta,
    delta_analytic,
    delta_table,
    lagrange_sum,
    leibniz_delta,
    make_complex,
    monotone_tuple_count,
    newton_sum,
    product,
    ulps_apart,
)
from support import (
    QC,
    QC_ONE,
    QC_ZERO,
    ap_to_qc,
    qc_dd_table,
    qc_lagrange_sum,
    qc_newton_sum,
    qc_poly_eval,
    qc_to_ap,
    rand_distinct_nodes,
    rand_poly_coeffs,
    rand_qc,
)


def series_function(coeffs_qc):
    """Library ScalarFunction and exact evaluator for the same polynomial."""
    ap_coeffs = [qc_to_ap(c) for c in coeffs_qc]
    return analytic_series(ap_coeffs), lambda z: qc_poly_eval(coeffs_qc, z)


def rel_gap(a, b):
    """|a - b| / max(|a|, |b|) at high precision, 0 for exact agreement."""
    with workprec(600):
        ga = abs(a.to_mpc() - b.to_mpc())
        scale = max(abs(a.to_mpc()), abs(b.to_mpc()))
        if ga == 0:
            return mpmath.mpf(0)
        return ga / scale


def test_delta_order_zero_is_point_value():
    h = conjugation()
    nodes = NodeSequence([make_complex("2", "3")])
    assert delta(h, nodes, 0) == make_complex("2", "-3")


def test_delta_conjugation_three_nodes_frozen():
    # Frozen expected value for h = conj over nodes (1, i, -1): order 2 gives i.
    # Cross-checked below by the exact rational recursion on the same data.
    h = conjugation()
    nodes = NodeSequence(
        [make_complex("1", "0"), make_complex("0", "1"), make_complex("-1", "0")]
    )
    got = delta(h, nodes, 2)
    assert got == make_complex("0", "1")

    qnodes = [QC.of(1, 0), QC.of(0, 1), QC.of(-1, 0)]
    table = qc_dd_table([q.conj() for q in qnodes], qnodes)
    assert table[2][0] == QC.of(0, 1)


def test_table_recursion_invariant_holds_exactly():
    rng = random.Random(11)
    qnodes = rand_distinct_nodes(rng, 6)
    coeffs = rand_poly_coeffs(rng, 5)
    fn, _ = series_function(coeffs)
    nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
    table = delta_table(fn, nodes)
    zs = nodes.to_mpc_list()
    with workprec(nodes.precision_bits):
        for p in range(table.order()):
            for k in range(len(nodes) - p - 1):
                lhs = table.entry_raw(p + 1, k)
                rhs = (table.entry_raw(p, k + 1) - table.entry_raw(p, k)) / (
                    zs[k + p + 1] - zs[k]
                )
                assert abs(lhs - rhs) <= mpmath.ldexp(1, -200) * max(1, abs(lhs))


def test_duplicate_nodes_rejected():
    with pytest.raises(NodeDistinctnessError):
        NodeSequence([make_complex("1", "2"), make_complex("1", "2")])


def test_near_duplicate_flagged_but_usable():
    eps = "1e-60"
    nodes = NodeSequence(
        [make_complex("1", "0"), make_complex("1", eps), make_complex("0", "0")]
    )
    flagged = nodes.near_pairs()
    assert [(i, j) for i, j, _ in flagged] == [(0, 1)]
    table = delta_table(conjugation(), nodes)
    assert table.order() == 2


def test_newton_equals_lagrange_and_oracle():
    rng = random.Random(21)
    for _ in range(25):
        count = rng.randint(2, 8)
        qnodes = rand_distinct_nodes(rng, count)
        coeffs = rand_poly_coeffs(rng, rng.randint(0, 6))
        fn, exact = series_function(coeffs)
        nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
        qx = rand_qc(rng)
        x = qc_to_ap(qx)
        nv = newton_sum(fn, nodes, count, x)
        lv = lagrange_sum(fn, nodes, count, x)
        assert rel_gap(nv, lv) <= mpmath.ldexp(1, -(256 - 32))
        values = [exact(q) for q in qnodes]
        want_n = qc_newton_sum(values, qnodes, qx)
        want_l = qc_lagrange_sum(values, qnodes, qx)
        assert want_n == want_l
        assert rel_gap(nv, qc_to_ap(want_n, 512).at_precision(256)) <= mpmath.ldexp(
            1, -(256 - 40)
        ) or (nv - qc_to_ap(want_n, 512)).magnitude() <= mpmath.ldexp(1, -200)


def test_interpolant_reproduces_low_degree_polynomial():
    rng = random.Random(31)
    for _ in range(10):
        count = rng.randint(2, 7)
        qnodes = rand_distinct_nodes(rng, count)
        coeffs = rand_poly_coeffs(rng, count - 1)
        fn, exact = series_function(coeffs)
        nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
        qx = rand_qc(rng)
        values = [exact(q) for q in qnodes]
        # Exactness in rational arithmetic.
        assert qc_newton_sum(values, qnodes, qx) == exact(qx)
        got = newton_sum(fn, nodes, count, qc_to_ap(qx))
        want = qc_to_ap(exact(qx), 320)
        assert (got - want).magnitude() <= mpmath.ldexp(1, -200)


def test_leibniz_identity_linear_times_linear():
    # g = h = zeta over nodes (0, 1, 2): order-2 difference of zeta^2 is 1.
    ident = analytic_series([make_complex("0"), make_complex("1")])
    nodes = NodeSequence(
        [make_complex("0"), make_complex("1"), make_complex("2")]
    )
    got = leibniz_delta(ident, ident, nodes, 2)
    assert got == make_complex("1")


def test_leibniz_matches_direct_product_table():
    rng = random.Random(41)
    for _ in range(15):
        count = rng.randint(1, 7)
        qnodes = rand_distinct_nodes(rng, count)
        cg = rand_poly_coeffs(rng, rng.randint(0, 4))
        ch = rand_poly_coeffs(rng, rng.randint(0, 4))
        g, exact_g = series_function(cg)
        h, exact_h = series_function(ch)
        nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
        p = count - 1
        got = leibniz_delta(g, h, nodes, p)
        direct = delta(product(g, h), nodes, p)
        assert rel_gap(got, direct) <= mpmath.ldexp(1, -(256 - 32)) or (
            got - direct
        ).magnitude() <= mpmath.ldexp(1, -220)
        # Exact rational route.
        values = [exact_g(q) * exact_h(q) for q in qnodes]
        want = qc_dd_table(values, qnodes)[p][0]
        assert (got - qc_to_ap(want, 320)).magnitude() <= mpmath.ldexp(1, -180)


def test_delta_analytic_matches_recursion():
    rng = random.Random(51)
    for _ in range(15):
        count = rng.randint(1, 8)
        deg = rng.randint(count - 1, 8)
        qnodes = rand_distinct_nodes(rng, count)
        coeffs = rand_poly_coeffs(rng, deg)
        fn, _ = series_function(coeffs)
        nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
        p = count - 1
        direct = delta_analytic([qc_to_ap(c) for c in coeffs], None, nodes, p)
        recursive = delta(fn, nodes, p)
        assert rel_gap(direct, recursive) <= mpmath.ldexp(1, -(256 - 32)) or (
            direct - recursive
        ).magnitude() <= mpmath.ldexp(1, -220)


def test_delta_analytic_annihilates_high_orders():
    # p greater than the truncation degree gives exactly zero, no tolerance.
    rng = random.Random(61)
    qnodes = rand_distinct_nodes(rng, 7)
    nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
    coeffs = [make_complex("3", "-1"), make_complex("0", "2"), make_complex("5")]
    for p in (3, 4, 5, 6):
        assert delta_analytic(coeffs, None, nodes, p).is_zero()
    # The exact rational recursion agrees.
    qcoeffs = [QC.of(3, -1), QC.of(0, 2), QC.of(5, 0)]
    values = [qc_poly_eval(qcoeffs, q) for q in qnodes]
    table = qc_dd_table(values, qnodes)
    for p in (3, 4, 5, 6):
        assert table[p][0] == QC_ZERO


def test_delta_analytic_confluent_limit_recovers_coefficient():
    # Clustering all nodes at the center drives Delta_p to a_p.
    # Terms above order p make the limit nontrivial.
    coeffs = [
        make_complex("2"),
        make_complex("-1", "1"),
        make_complex("0.5"),
        make_complex("0", "-3"),
        make_complex("1", "1"),
        make_complex("-2"),
        make_complex("0.25", "4"),
    ]
    center = make_complex("0.25", "-0.5")
    p = 3
    gaps = []
    for k in (16, 128, 1024):
        shift = Fraction(1, k)
        qnodes = [
            QC(
                Fraction(1, 4) + shift * (j + 1),
                Fraction(-1, 2) + shift * shift * (j + 1) ** 2,
            )
            for j in range(p + 1)
        ]
        nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
        value = delta_analytic(coeffs, center, nodes, p)
        gaps.append((value - coeffs[p]).magnitude())
    assert gaps[2] < gaps[1] < gaps[0]
    assert gaps[2] < mpmath.mpf("0.05")


def test_permutation_invariance_well_separated_16_ulp():
    # Gaps >= 2 keep the recursion amplification-free; permuted evaluations
    # then agree to a few ulp.
    rng = random.Random(71)
    base = [QC.of(2 * j, (j * j) % 5) for j in range(7)]
    coeffs = rand_poly_coeffs(rng, 6)
    fn, _ = series_function(coeffs)
    nodes = NodeSequence([qc_to_ap(q) for q in base])
    p = 6
    reference = delta(fn, nodes, p)
    for trial in range(5):
        perm = list(range(7))
        rng.shuffle(perm)
        permuted = nodes.permuted(perm)
        value = delta(fn, permuted, p)
        assert float(ulps_apart(value, reference)) <= 16.0


def test_permutation_invariance_generic_nodes_tolerance():
    rng = random.Random(81)
    for _ in range(10):
        count = rng.randint(3, 8)
        qnodes = rand_distinct_nodes(rng, count)
        coeffs = rand_poly_coeffs(rng, count - 1)
        fn, _ = series_function(coeffs)
        nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
        p = count - 1
        reference = delta(fn, nodes, p)
        perm = list(range(count))
        rng.shuffle(perm)
        value = delta(fn, nodes.permuted(perm), p)
        assert rel_gap(value, reference) <= mpmath.ldexp(1, -(256 - 40)) or (
            value - reference
        ).magnitude() <= mpmath.ldexp(1, -200)


def test_monotone_tuple_count_matches_enumeration():
    def brute(n, p):
        if p == 0:
            return 1
        count = 0
        for tup in itertools.product(range(n + 1), repeat=p):
            if all(tup[i] >= tup[i + 1] for i in range(p - 1)):
                count += 1
        return count

    for n in range(0, 7):
        for p in range(0, 5):
            assert monotone_tuple_count(n, p) == brute(n, p)


def test_monotone_tuple_count_pascal_recurrence():
    for n in range(1, 31):
        for p in range(1, 31):
            assert monotone_tuple_count(n, p) == monotone_tuple_count(
                n - 1, p
            ) + monotone_tuple_count(n, p - 1)
    assert monotone_tuple_count(0, 4) == 1
    assert monotone_tuple_count(5, 0) == 1
    assert monotone_tuple_count(2, 2) == 6


def test_monotone_tuple_count_domain():
    with pytest.raises(DomainError):
        monotone_tuple_count(-1, 2)


def test_arity_errors():
    h = conjugation()
    nodes = NodeSequence([make_complex("1"), make_complex("2")])
    with pytest.raises(ArityError):
        delta(h, nodes, 2)
    with pytest.raises(ArityError):
        newton_sum(h, nodes, 3, make_complex("0"))
    with pytest.raises(ArityError):
        lagrange_sum(h, nodes, 3, make_complex("0"))
    with pytest.raises(ArityError):
        NodeSequence([])


def test_scalar_function_kind_validated():
    with pytest.raises(ConfigError):
        ScalarFunction(fn=lambda w: w, kind="mystery")


def test_scalar_function_deterministic_and_typed():
    fn = conjugation()
    z = make_complex("1.5", "-2")
    assert fn(z) == fn(z)
    with pytest.raises(ConfigError):
        fn(1.5)


def test_node_json_round_trip():
    nodes = NodeSequence(
        [make_complex("0.5", "-1"), make_complex("2e-3", "7")]
    )
    obj = nodes.to_json_obj()
    back = NodeSequence.from_json_obj(obj, 256)
    assert list(back) == list(nodes)
    with pytest.raises(ParseError):
        NodeSequence.from_json_obj({"nodes": []}, 256)
    with pytest.raises(ParseError):
        NodeSequence.from_json_obj({"points": []}, 256)


def test_table_csv_dump_shape():
    nodes = NodeSequence(
        [make_complex("1"), make_complex("0", "1"), make_complex("-1")]
    )
    text = delta_table(conjugation(), nodes).to_csv_text()
    lines = text.strip().split("\n")
    assert lines[0] == "p,k,re,im"
    assert len(lines) == 1 + 3 + 2 + 1
    # Top entry is the frozen order-2 value i.
    assert lines[-1] == "2,0,0,1"


def test_cluster_shrink_tracks_confluent_limit_recursively():
    # Recursive route on shrinking distinct clusters approaches the series
    # coefficient, the documented substitute for confluent nodes.
    coeffs = [
        make_complex("1"),
        make_complex("2"),
        make_complex("-3", "0.5"),
        make_complex("4", "-1"),
        make_complex("-0.5", "2"),
    ]
    fn = analytic_series(coeffs)
    errs = []
    for k in (8, 32, 128):
        qnodes = [QC(Fraction(j + 1, k * 4), Fraction(0)) for j in range(3)]
        nodes = NodeSequence([qc_to_ap(q) for q in qnodes])
        value = delta(fn, nodes, 2)
        errs.append((value - coeffs[2]).magnitude())
    assert errs[2] < errs[1] < errs[0]
