"""OBDD width depends heavily on the variable order.

For the set-intersection function (x1 AND y1) OR ... OR (xn AND yn), reading
each pair together keeps the width at 2.  Reading all x's first forces the
diagram to remember which x's were true: 2^n - 1 live residuals at the cut.
"""

from twkc.circuit import gen_grid_cnf, gen_sint
from twkc.obdd import best_order, build

print(f"{'n':>2} {'paired':>7} {'x-first':>8}")
for n in range(1, 8):
    phi = gen_sint(n)  # x_i = 2i-1, y_i = 2i
    paired = tuple(range(1, 2 * n + 1))
    split = tuple(range(1, 2 * n, 2)) + tuple(range(2, 2 * n + 1, 2))
    print(f"{n:>2} {build(phi, paired).width:>7} {build(phi, split).width:>8}")

print()
print("grid CNFs, exhaustive minimum width over all orders:")
for a, b in ((2, 2), (2, 3), (2, 4), (3, 3)):
    order, width = best_order(gen_grid_cnf(a, b))
    print(f"  {a}x{b}: width {width} with order {order}")
