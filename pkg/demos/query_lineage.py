"""Probability that a random subgraph contains two edges sharing one endpoint.

Each edge of a small graph is a fact, present independently with
probability 0.3.  The lineage is a monotone DNF over the facts; compiling
its circuit gives the exact probability, checked here by brute force.
"""

import itertools

from twkc import compile_circuit, formula_to_circuit, gen_lineage_qp, probability
from twkc.bounds import psw_exact
from twkc.decomp import exact_treewidth

edges = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")]
phi = gen_lineage_qp(edges)
print("facts:", [phi.name(v) for v in phi.variables])
print("minimal matches:", [sorted(phi.name(v) for v in c) for c in phi.clauses])
print("treewidth", exact_treewidth(phi), "| pathsplitwidth", psw_exact(phi))

circuit, _ = formula_to_circuit(phi)
comp = compile_circuit(circuit)
p = 0.3
pi = [p] * len(comp.var_gates)
exact = probability(comp.nnf, pi)

brute = 0.0
for bits in itertools.product((0, 1), repeat=phi.n_vars):
    val = dict(zip(phi.variables, bits))
    if phi.evaluate(val):
        brute += p ** sum(bits) * (1 - p) ** (phi.n_vars - sum(bits))
print(f"compiled: {exact:.12f}  brute force: {brute:.12f}")
