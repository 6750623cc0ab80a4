import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

import oracles
from twkc.circuit import evaluate, random_circuit
from twkc.compile import compile_circuit
from twkc.errors import NotDSDNNFError, ParseError, ProbabilityError, SizeLimitError
from twkc.nnf import (FALSE, TRUE, Model, Nnf, check_d_sdnnf, check_decomposable,
                      check_deterministic_exhaustive, check_structured, enumerate_models,
                      evaluate_nnf, format_nnf, format_vtree, model_count, models_expanded,
                      parse_nnf, parse_vtree, probability, require_d_dnnf,
                      restrict, right_linear_vtree, simplify)

# (x1 AND x2) OR (NOT x1 AND x3): deterministic, decomposable
MUX = Nnf((("L", 1), ("L", 2), ("L", -1), ("L", 3), ("A", (0, 1)), ("A", (2, 3)),
           ("O", (4, 5))), 3)


def brute(nnf):
    variables = range(1, nnf.n_vars + 1)
    return oracles.models(lambda v: evaluate_nnf(nnf, v), variables)


def test_mux_queries():
    assert model_count(MUX) == 4
    assert probability(MUX, {1: 0.5, 2: 0.5, 3: 0.5}) == pytest.approx(0.5)
    assert probability(MUX, [Fraction(1, 3)] * 3, exact=True) == Fraction(1, 3)
    assert set(models_expanded(MUX)) == brute(MUX)
    assert check_d_sdnnf(MUX, parse_vtree("(1 (2 3))")).ok


def test_constants():
    t, f = Nnf((TRUE,), 2), Nnf((FALSE,), 2)
    assert model_count(t) == 4 and model_count(f) == 0
    assert probability(t, [0.3, 0.9]) == 1.0 and probability(f, [0.3, 0.9]) == 0.0
    assert [m.format() for m in enumerate_models(t)] == ["*1 *2"]
    assert list(enumerate_models(f)) == []


def test_nnf_text_round_trip():
    assert parse_nnf(format_nnf(MUX)) == MUX
    assert format_nnf(MUX).splitlines()[0] == "nnf 7 6 3"
    assert "O 0 2 4 5" in format_nnf(MUX)


@pytest.mark.parametrize("text", [
    "",
    "nnf 1 0 1\nL 2\n",
    "nnf 2 1 1\nL 1\nA 1 1\n",
    "nnf 1 0 1\nX 1\n",
    "nnf 2 0 1\nL 1\n",
    "nnf 2 5 1\nL 1\nA 1 0\n",
])
def test_nnf_parse_errors(text):
    with pytest.raises(ParseError):
        parse_nnf(text)


def test_not_decomposable_witness():
    bad = Nnf((("L", 1), ("L", -1), ("A", (0, 1))), 1)
    res = check_decomposable(bad)
    assert not res.ok and res.witness == (2, 1)
    with pytest.raises(NotDSDNNFError):
        require_d_dnnf(bad)


def test_not_deterministic_witness():
    bad = Nnf((("L", 1), ("L", 2), ("O", (0, 1))), 2)
    res = check_deterministic_exhaustive(bad)
    assert not res.ok and res.witness == (2, {1: 1, 2: 1})
    with pytest.raises(SizeLimitError):
        check_deterministic_exhaustive(Nnf((("L", 17),), 17))


def test_structured_cases():
    x1_and_x3 = Nnf((("L", 1), ("L", 3), ("A", (0, 1))), 3)
    assert check_structured(x1_and_x3, parse_vtree("(1 (2 3))")).ok
    assert check_structured(x1_and_x3, parse_vtree("((1 2) 3)")).ok
    # x1 AND (x2 OR x3) cannot split {1} | {2, 3} on ((1 2) 3)
    mixed = Nnf((("L", 1), ("L", 2), ("L", 3), ("O", (1, 2)), ("A", (0, 3))), 3)
    assert check_structured(mixed, parse_vtree("(1 (2 3))")).ok
    res = check_structured(mixed, parse_vtree("((1 2) 3)"))
    assert not res.ok and res.witness == 4
    ternary = Nnf((("L", 1), ("L", 2), ("L", 3), ("A", (0, 1, 2))), 3)
    assert not check_structured(ternary, parse_vtree("((1 2) 3)")).ok
    assert not check_structured(x1_and_x3, parse_vtree("(1 2)")).ok
    # a constant side imposes nothing
    with_const = Nnf((("L", 1), ("L", 2), ("A", (0, 1)), TRUE, ("A", (2, 3))), 2)
    assert check_structured(with_const, parse_vtree("(1 2)")).ok


def test_vtree_parse_and_format():
    v = parse_vtree("((1 2) (3 4))")
    assert format_vtree(v) == "((1 2) (3 4))" and v.leaves == {1, 2, 3, 4} and len(v) == 7
    assert v.leaf_order() == [1, 2, 3, 4] and v.lca({1, 2}) == 1 and v.lca({2, 3}) == 0
    assert format_vtree(parse_vtree("()")) == "()"
    assert format_vtree(right_linear_vtree([3, 1, 2])) == "(3 (1 2))"
    for bad in ("(1 2 3)", "(1", "(1 1)", "1 2", "(a 2)"):
        with pytest.raises(ParseError):
            parse_vtree(bad)


def test_probability_errors():
    with pytest.raises(ProbabilityError):
        probability(MUX, [0.5, 0.5])
    with pytest.raises(ProbabilityError):
        probability(MUX, {1: 0.5, 2: 1.5, 3: 0.5})
    with pytest.raises(ProbabilityError):
        probability(MUX, {1: 0.5})


def test_model_format_and_expand():
    m = Model(frozenset({1, 3}), frozenset({4}))
    assert m.format() == "1 3 *4" and m.size() == 2
    assert sorted(map(sorted, m.expand())) == [[1, 3], [1, 3, 4]]


def test_simplify_merges_and_propagates():
    nodes = [("L", 1), ("L", 1), TRUE, ("A", (0, 2)), ("O", (1, 3)), FALSE, ("O", (4, 5))]
    s = simplify(nodes, 1)
    assert s.nodes == (("L", 1),)
    assert simplify([("L", 1), FALSE, ("A", (0, 1))], 1).nodes == (FALSE,)


def test_restrict_never_grows():
    r = restrict(MUX, {1: 1})
    assert len(r) <= len(MUX) and brute(r) == {m | {1} for m in brute(MUX) if 1 in m} | \
        {m - {1} for m in brute(MUX) if 1 in m}
    with pytest.raises(ValueError):
        restrict(MUX, {4: 1})


def test_free_variables_counted():
    # root mentions only x1 out of three variables
    nnf = Nnf((("L", 1),), 3)
    assert model_count(nnf) == 4 and len(models_expanded(nnf)) == 4


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 8), st.integers(0, 20))
def test_queries_on_compiled_circuits(seed, n_vars, extra):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n_vars, n_vars + 1 + extra)
    comp = compile_circuit(c)
    nnf = comp.nnf
    expected = {frozenset(i + 1 for i, g in enumerate(comp.var_gates) if val[g])
                for val in oracles.valuations(c.variables) if evaluate(c, val)}
    assert model_count(nnf) == len(expected)
    got = models_expanded(nnf)
    assert len(got) == len(set(got)) and set(got) == expected
    total = sum(m.size() for m in enumerate_models(nnf))
    assert total == len(expected)
    pi = [float(x) for x in rng.random(len(comp.var_gates))]
    assert probability(nnf, pi) == pytest.approx(float(probability(nnf, pi, exact=True)), abs=1e-12)
    # restricting a variable keeps the function consistent
    if comp.var_gates:
        r = restrict(nnf, {1: 1})
        assert len(r) <= len(nnf)
        assert brute(r) == {m | {1} for m in expected if 1 in m} | {m - {1} for m in expected if 1 in m}
