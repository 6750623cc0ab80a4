"""One test per acceptance criterion.  Each records a PASS/FAIL line that is
printed in the pytest terminal summary."""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

import oracles
from conftest import formula_corpus
from twkc.bounds import (bounds_report, exclusion_graph, extract_dncpi, greedy_psw_order,
                         order_from_path_decomp, path_decomp_from_order, psw, psw_exact_order,
                         residuals_at_cut, sint_restriction, tree_decomp_from_vtree, tsw,
                         tsw_exact_vtree, verify_dncpi)
from twkc.circuit import Circuit, circuit_truth_table, gen_sdisj, gen_sint, random_circuit
from twkc.compile import compile_circuit, size_bound
from twkc.decomp import exact_pathwidth, exact_treewidth, minfill, validate
from twkc.nnf import (check_decomposable, check_deterministic_exhaustive, check_nnf,
                      check_structured, model_count, models_expanded, nnf_truth_table,
                      probability)

SEED = 2024
N_CIRCUITS = 200


def acceptance_circuits(seed=SEED, count=N_CIRCUITS):
    """Seeded random circuits with <= 16 variables, <= 40 gates and a
    min-fill decomposition of width <= 4 (which the nice form keeps)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n_vars = int(rng.integers(1, 17))
        n_gates = int(rng.integers(n_vars + 1, 41))
        c = random_circuit(rng, n_vars, n_gates, window=int(rng.integers(2, 5)))
        if minfill(c).width <= 4:
            out.append(c)
    return out


@pytest.fixture(scope="module")
def compiled():
    circuits = acceptance_circuits()
    start = time.perf_counter()
    results = [compile_circuit(c) for c in circuits]
    return circuits, results, time.perf_counter() - start


def var_table(circuit, comp):
    """Circuit truth table indexed like the NNF (bit j for variable j + 1)."""
    return circuit_truth_table(circuit, comp.var_gates)


def test_criterion_01_compiler_correctness(compiled, criterion):
    circuits, results, elapsed = compiled
    start = time.perf_counter()
    failures = sum(nnf_truth_table(comp.nnf) != var_table(c, comp)
                   for c, comp in zip(circuits, results))
    total = elapsed + time.perf_counter() - start
    max_vars = max(len(c.variables) for c in circuits)
    max_gates = max(c.n_gates for c in circuits)
    max_width = max(comp.nice.width for comp in results)
    ok = (failures == 0 and total < 60 and len(circuits) == N_CIRCUITS
          and max_vars <= 16 and max_gates <= 40 and max_width <= 4)
    criterion(1, ok, f"{len(circuits)} circuits (vars <= {max_vars}, gates <= {max_gates}, "
                     f"nice width <= {max_width}), {failures} failures, {total:.1f} s (< 60 s)")
    assert ok


def test_criterion_02_structural_guarantees(compiled, criterion):
    circuits, results, _ = compiled
    bad = []
    for i, comp in enumerate(results):
        checks = (check_nnf(comp.nnf), check_decomposable(comp.nnf),
                  check_structured(comp.nnf, comp.vtree),
                  check_deterministic_exhaustive(comp.nnf, 16))
        if not all(checks):
            bad.append(i)
    ok = not bad
    criterion(2, ok, f"{len(results) - len(bad)}/{len(results)} outputs pass nnf, decomposable, "
                     "structured and exhaustive determinism checks")
    assert ok, bad


def ladder(k, length=12):
    """Gate j reads variable j and the previous k gates: min-fill width exactly k."""
    types, inputs = ["var"] * length, [()] * length
    for j in range(length):
        types.append(("and", "or")[j % 2])
        inputs.append(tuple(length + i for i in range(max(0, j - k), j)) + (j,))
    return Circuit(tuple(types), tuple(inputs), 2 * length - 1)


def test_criterion_03_size_bound(compiled, criterion):
    _, results, _ = compiled
    over = [i for i, comp in enumerate(results)
            if len(comp.nnf) > size_bound(len(comp.nice), comp.nice.width)]
    widths, logs, logs_gc = [], [], []
    for k in range(1, 7):
        raw = compile_circuit(ladder(k), gc=False)
        gc = compile_circuit(ladder(k))
        assert raw.stats["size"] <= raw.stats["size_bound"]
        widths.append(raw.stats["width"])
        logs.append(math.log2(raw.stats["size"] / raw.stats["bags"]))
        logs_gc.append(math.log2(gc.stats["size"] / gc.stats["bags"]))
    slope = float(np.polyfit(widths, logs, 1)[0])
    slope_gc = float(np.polyfit(widths, logs_gc, 1)[0])
    ok = not over and widths == [1, 2, 3, 4, 5, 6] and slope <= 5 and slope_gc <= 5
    criterion(3, ok, f"{len(results) - len(over)}/{len(results)} within |T_nice| * 2^(4k+6); "
                     f"width sweep k=1..6 log2-slope {slope:.3f} raw, {slope_gc:.3f} collected (<= 5)")
    assert ok


def test_criterion_04_probability_and_counting(compiled, criterion):
    circuits, results, _ = compiled
    rng = np.random.default_rng(SEED + 4)
    worst, count_fail = 0.0, 0
    for c, comp in zip(circuits, results):
        table = var_table(c, comp)
        n = len(comp.var_gates)
        pi = rng.random(n)
        if n <= 12:
            # exact brute force over valuations
            expected = oracles.probability(
                lambda v: table >> sum(b << j for j, b in enumerate(v.values())) & 1,
                range(n), dict(enumerate(pi)))
        else:
            bits = np.array([(table >> i) & 1 for i in range(1 << n)], dtype=bool)
            idx = np.arange(1 << n)
            weights = np.ones(1 << n)
            for j in range(n):
                on = (idx >> j) & 1
                weights *= np.where(on, pi[j], 1 - pi[j])
            expected = float(weights[bits].sum())
        got = probability(comp.nnf, [float(p) for p in pi])
        worst = max(worst, abs(got - expected))
        if model_count(comp.nnf) != bin(table).count("1"):
            count_fail += 1
    ok = worst <= 1e-9 and count_fail == 0
    criterion(4, ok, f"max |probability error| {worst:.2e} (<= 1e-9), "
                     f"{count_fail} model-count mismatches on {len(results)} circuits")
    assert ok


def test_criterion_05_enumeration(compiled, criterion):
    circuits, results, _ = compiled
    checked = failures = 0
    for c, comp in zip(circuits, results):
        n = len(comp.var_gates)
        if n > 12:
            continue
        checked += 1
        table = var_table(c, comp)
        expected = {frozenset(j + 1 for j in range(n) if i >> j & 1)
                    for i in range(1 << n) if table >> i & 1}
        got = models_expanded(comp.nnf)
        if len(got) != len(set(got)) or set(got) != expected:
            failures += 1
    ok = failures == 0 and checked > 0
    criterion(5, ok, f"{checked} circuits with <= 12 vars, {failures} enumeration mismatches "
                     "or duplicates")
    assert ok


BOUNDS_CORPUS = formula_corpus(7, count=24, max_vars=10)


@pytest.fixture(scope="module")
def reports():
    return [bounds_report(phi) for phi in BOUNDS_CORPUS]


def test_criterion_06_obdd_floor(reports, criterion):
    low = [r for r in reports if r["obdd_min_width"] < r["theorem_obddlower_floor"]]
    high = [r for r in reports if r["obdd_min_width"] > 2 ** (r["pw_exact"] + 2)
            or r["obdd_min_width_with_leaves"] > r["obdd_upper_bound"]]
    nontrivial = sum(r["theorem_obddlower_floor"] > 1 for r in reports)
    ok = not low and not high and all(r["obdd_min_width"] is not None for r in reports)
    criterion(6, ok, f"{len(reports)} formulas (<= 10 vars): {len(low)} below the pathwidth floor, "
                     f"{len(high)} above 2^(pw+2); floor exceeds 1 on {nontrivial} of them")
    assert ok


def test_criterion_07_dsdnnf_floor(reports, criterion):
    low = [r for r in reports if r["compiled_dsdnnf_size"] < r["theorem_dsdnnflower_floor"]]
    nontrivial = sum(r["theorem_dsdnnflower_floor"] > 0 for r in reports)
    ok = not low
    criterion(7, ok, f"{len(reports)} formulas: {len(low)} compiled d-SDNNFs below the treewidth "
                     f"floor; floor exceeds 0 on {nontrivial} of them")
    assert ok


def sint_instances():
    """Formulas with a witness that shatters up to six clauses."""
    out = []
    for n in range(1, 7):
        for phi in (gen_sint(n), gen_sdisj(n)):
            xs = [2 * i + 1 for i in range(n)]
            ys = [2 * i + 2 for i in range(n)]
            out.append((phi, tuple(xs + ys)))
    return out


def test_criterion_08_dncpi_machinery(criterion):
    items = [(phi, w) for phi in BOUNDS_CORPUS
             for w in [greedy_psw_order(phi), psw_exact_order(phi)[1]]
             + ([tsw_exact_vtree(phi)[1]] if phi.n_vars <= 8 else [])]
    items += sint_instances()
    verify_fail = residual_fail = sint_fail = degree_fail = 0
    sizes = set()
    for phi, witness in items:
        g = exclusion_graph(phi)
        degree_fail += g.degree > g.degree_bound()
        dn = extract_dncpi(phi, witness)
        verify_fail += not verify_dncpi(phi, dn.clauses)
        if not dn.clauses:
            continue
        residual_fail += residuals_at_cut(phi, dn.inside) < 2 ** len(dn)
        if len(dn) > 6:
            continue
        sizes.add(len(dn))
        val, pairs = sint_restriction(phi, dn.clauses, dn.inside)
        free = [v for p in pairs for v in p]
        for bits in oracles.valuations(free):
            if phi.kind == "dnf":
                target = int(any(bits[x] and bits[y] for x, y in pairs))
            else:
                target = int(all(bits[x] or bits[y] for x, y in pairs))
            if phi.evaluate({**val, **bits}) != target:
                sint_fail += 1
                break
    ok = not (verify_fail or residual_fail or sint_fail or degree_fail) and max(sizes) == 6
    criterion(8, ok, f"{len(items)} extractions: {verify_fail} verify failures, {degree_fail} "
                     f"exclusion-degree violations, {sint_fail} restrictions not SINT "
                     f"(|S| in {min(sizes)}..{max(sizes)}), {residual_fail} cuts with "
                     "fewer than 2^|S| residuals")
    assert ok


def test_criterion_09_decomposition_constructions(criterion):
    invalid = ineq = checked = 0
    for phi in BOUNDS_CORPUS:
        a, d = phi.arity, phi.degree
        orders = [greedy_psw_order(phi), psw_exact_order(phi)[1]]
        vtrees = [tsw_exact_vtree(phi)[1]] if phi.n_vars <= 8 else []
        for order in orders:
            P = path_decomp_from_order(order, phi)
            invalid += not validate(P, phi)
            ineq += P.width > a * psw(order, phi)
            back = order_from_path_decomp(P, phi)
            ineq += psw(back, phi) > d * (P.width + 1)
            checked += 2
        for vt in vtrees:
            T = tree_decomp_from_vtree(vt, phi)
            invalid += not validate(T, phi)
            ineq += T.width + 1 > 3 * a * tsw(vt, phi)
            checked += 1
        # the exact widths obey the same inequalities
        pw, tw = exact_pathwidth(phi), exact_treewidth(phi)
        ineq += pw > a * psw_exact_order(phi)[0]
        ineq += psw_exact_order(phi)[0] > d * (pw + 1)
        if vtrees:
            ineq += tw > 3 * a * tsw_exact_vtree(phi)[0]
    ok = invalid == 0 and ineq == 0
    criterion(9, ok, f"{checked} constructions on {len(BOUNDS_CORPUS)} formulas: {invalid} invalid "
                     f"decompositions, {ineq} width inequality violations")
    assert ok


def run_pipeline(workdir, hashseed):
    env = {**os.environ, "PYTHONHASHSEED": str(hashseed)}

    def cli(*argv):
        subprocess.run([sys.executable, "-m", "twkc", *map(str, argv)], check=True, env=env,
                       capture_output=True, cwd=workdir)
    workdir.mkdir()
    cli("gen", "circuit", "10", "30", "--seed", "17", "--out", "rand.bc")
    cli("compile", "rand.bc", "--minfill", "--out", "out")
    cli("gen", "cnf", "8", "9", "--seed", "17", "--out", "phi.cnf")
    cli("gen", "formula-circuit", "phi.cnf", "--out", "phi.bc")
    cli("compile", "phi.bc", "--out", "out")
    cli("bounds", "phi.cnf", "--out", "out")
    names = ["rand.bc", "phi.cnf", "out/rand.nnf", "out/rand.vtree", "out/rand.stats.json",
             "out/phi.nnf", "out/phi.vtree", "out/phi.stats.json", "out/phi.bounds.json"]
    return {n: (workdir / n).read_bytes() for n in names}


def test_criterion_10_reproducibility(tmp_path, criterion):
    first = run_pipeline(tmp_path / "a", 1)
    second = run_pipeline(tmp_path / "b", 2)
    differ = [n for n in first if first[n] != second[n]]
    json.loads(first["out/rand.stats.json"])
    ok = not differ
    criterion(10, ok, f"{len(first)} artifacts (NNF, v-tree, JSON) from two seeded runs with "
                      f"different hash seeds; {len(differ)} differ")
    assert ok, differ
