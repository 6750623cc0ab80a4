import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import formula_corpus
from twkc.circuit import (MonotoneFormula, evaluate, gen_grid_cnf, gen_sint, random_circuit,
                          random_monotone_formula)
from twkc.obdd import (all_orders_min_width, best_order, build, dualize, format_obdd, parse_obdd,
                       residual_counts)
from twkc.errors import ParseError, SizeLimitError


def fn_of(phi):
    return phi.evaluate


def test_sint2_interleaved_order():
    # x1=1, y1=2, x2=3, y2=4; reading x1, x2 first leaves 4 residuals, one constant
    obdd = build(gen_sint(2), (1, 3, 2, 4))
    assert obdd.profile == (1, 2, 3, 1, 0) and obdd.constants == (0, 0, 1, 2, 2)
    assert obdd.profile[2] + obdd.constants[2] == 4
    assert obdd.width == 3 and obdd.width_with_leaves == 4


def test_sint2_best_order():
    order, width = best_order(gen_sint(2))
    assert order == (1, 2, 3, 4) and width == 2 == all_orders_min_width(gen_sint(2))


def test_profile_matches_brute_force():
    for phi in formula_corpus(3, count=8, max_vars=7):
        order = tuple(sorted(phi.variables, reverse=True))
        obdd = build(phi, order)
        ref = oracles.residual_profile(fn_of(phi), list(order))
        assert list(zip(obdd.profile, obdd.constants)) == ref


def test_obdd_evaluates_like_function():
    rng = np.random.default_rng(4)
    for _ in range(10):
        c = random_circuit(rng, 6, 18)
        order = tuple(rng.permutation(c.variables).tolist())
        obdd = build(c, order)
        for val in oracles.valuations(c.variables):
            assert obdd.evaluate(val) == evaluate(c, val)


def test_exhaustive_matches_permutations():
    for phi in formula_corpus(8, count=10, max_vars=6):
        order, width = best_order(phi)
        assert width == build(phi, order).width == all_orders_min_width(phi)
        assert width == oracles.min_width_over_orders(fn_of(phi), phi.variables)


def test_grid_width():
    assert best_order(gen_grid_cnf(2, 3))[1] == 3


def test_greedy_is_an_upper_bound():
    for phi in formula_corpus(9, count=10, max_vars=8):
        g_order, g_width = best_order(phi, "greedy")
        assert sorted(g_order) == sorted(phi.variables)
        assert g_width >= best_order(phi)[1]
    c = random_circuit(np.random.default_rng(1), 5, 14)
    order, width = best_order(c, "greedy")
    assert width >= best_order(c)[1]


def test_exhaustive_limit():
    with pytest.raises(SizeLimitError):
        best_order(gen_sint(6))
    with pytest.raises(ValueError):
        best_order(gen_sint(1), "random")


def test_dualize_gives_same_clauses_other_kind():
    for phi in formula_corpus(10, count=10, max_vars=7):
        order = tuple(sorted(phi.variables))
        dual = dualize(build(phi, order))
        other = phi.dual()
        assert other.clauses == phi.clauses and other.kind != phi.kind
        for val in oracles.valuations(phi.variables):
            assert dual.evaluate(val) == other.evaluate(val)
    x = MonotoneFormula("dnf", 2, (frozenset({1, 2}),))
    d = dualize(build(x, (1, 2)))
    assert [d.evaluate({1: a, 2: b}) for a in (0, 1) for b in (0, 1)] == [0, 1, 1, 1]


def test_text_round_trip():
    obdd = build(gen_grid_cnf(2, 2), (1, 2, 3, 4))
    back = parse_obdd(format_obdd(obdd))
    assert back == obdd
    for bad in ("order 1\n", "order 1\nroot 2\nnode 3 1 0 1\n", "order 1\nroot x\n"):
        with pytest.raises(ParseError):
            parse_obdd(bad)


def test_residual_counts_full_and_empty():
    phi = gen_sint(2)
    counts = residual_counts(phi, (1, 2, 3, 4))
    assert counts[0] == 1 and counts[-1] == 0
    with_leaves = residual_counts(phi, (1, 2, 3, 4), with_leaves=True)
    assert with_leaves[0b0101] == 4 and counts[0b0101] == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["dnf", "cnf"]), st.integers(2, 7),
       st.integers(1, 7))
def test_build_is_reduced_and_equivalent(seed, kind, n, m):
    rng = np.random.default_rng(seed)
    phi = random_monotone_formula(rng, kind, n, m)
    order = tuple(rng.permutation(phi.variables).tolist())
    obdd = build(phi, order)
    assert obdd.truth_table() == phi.truth_table()
    # reduced: no redundant tests, no duplicate nodes
    nodes = obdd.nodes[2:]
    assert all(lo != hi for _, lo, hi in nodes) and len(set(nodes)) == len(nodes)
    # level sizes of the diagram equal the non-constant residual counts
    per_var = {v: 0 for v in order}
    for var, _, _ in nodes:
        per_var[var] += 1
    assert obdd.size == sum(per_var.values()) <= sum(obdd.profile)
