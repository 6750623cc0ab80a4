"""Compile a small circuit and query the result.

The circuit is a 2-bit multiplexer guarded by an enable line:
    out = en AND ((s AND a) OR (NOT s AND b))
"""

from twkc import compile_circuit, enumerate_models, model_count, parse_circuit, probability
from twkc.nnf import check_d_sdnnf, format_vtree

TEXT = """\
circuit 9 8
0 var
1 var
2 var
3 var
4 not 1
5 and 1 2
6 and 4 3
7 or 5 6
8 and 0 7
"""

circuit = parse_circuit(TEXT)
comp = compile_circuit(circuit)
names = {0: "en", 1: "s", 2: "a", 3: "b"}
print("variables:", [names[g] for g in comp.var_gates])
print("width", comp.stats["width"], "| nice bags", comp.stats["bags"],
      "| gates created", comp.stats["gates_created"], "| after gc", comp.stats["gates_after_gc"])
print("v-tree:", format_vtree(comp.vtree))
print("d-SDNNF check:", check_d_sdnnf(comp.nnf, comp.vtree).reason)

print("models:", model_count(comp.nnf), "of", 2 ** len(comp.var_gates))
pi = {"en": 0.9, "s": 0.5, "a": 0.2, "b": 0.7}
print("P(out) =", probability(comp.nnf, [pi[names[g]] for g in comp.var_gates]))

print("models (true variables; starred ones are free):")
label = {i + 1: names[g] for i, g in enumerate(comp.var_gates)}
for m in enumerate_models(comp.nnf):
    true = [label[v] for v in sorted(m.true)]
    free = ["*" + label[v] for v in sorted(m.dont_care)]
    print("  ", " ".join(true + free) or "(none)")
