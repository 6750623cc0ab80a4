"""How a large split turns into a lower bound, step by step.

First on set disjointness, AND_i (x_i OR y_i), read in the bad order that
puts every x before every y; then the full report for a 3x3 grid CNF.
"""

from twkc.bounds import (bounds_report, exclusion_graph, extract_dncpi, psw,
                         residuals_at_cut, sint_restriction, verify_dncpi)
from twkc.circuit import gen_grid_cnf, gen_sdisj

phi = gen_sdisj(4)  # x_i = 2i-1, y_i = 2i
order = (1, 3, 5, 7, 2, 4, 6, 8)
print("order", order, "has pathsplitwidth", psw(order, phi))

dn = extract_dncpi(phi, order)
print(f"largest split: {dn.split_size} clauses after the first {dn.position} variables")
print("pairwise far-apart clauses kept:", [sorted(c) for c in dn.clauses],
      "| verified:", verify_dncpi(phi, dn.clauses).ok)
g = exclusion_graph(phi)
print("exclusion graph degree", g.degree, "<= bound", g.degree_bound())

val, pairs = sint_restriction(phi, dn.clauses, dn.inside)
print("nothing left to fix" if not val else f"fix {val}", "-> AND of (x OR y) over", pairs)
print("distinct residual functions at that cut:", residuals_at_cut(phi, dn.inside),
      ">= 2^|S| =", 2 ** len(dn))

print()
grid = gen_grid_cnf(3, 3)
rep = bounds_report(grid)
for key in ("n", "m", "arity", "degree", "pw_exact", "tw_exact", "psw_exact", "tsw_exact",
            "obdd_min_width", "obdd_upper_bound", "theorem_obddlower_floor",
            "compiled_dsdnnf_size", "theorem_dsdnnflower_floor", "dncpi_max", "violations"):
    print(f"{key:>26}: {rep[key]}")
print("(the floors are exponential in width / (arity^3 degree^2), so they stay trivial this small)")
