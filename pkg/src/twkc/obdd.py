"""Reduced ordered binary decision diagrams over truth tables.

Functions (circuits or monotone formulas) are turned into a truth table in
which the first variable of the order is the most significant index bit.
Fixing a prefix of the order then selects a contiguous block of the table,
so the residual functions reached at each level are just the distinct
blocks.  This is exact and needs no BDD package, at the price of a hard cap
on the number of variables.

Level ``i`` is the set of residual functions reached by all valuations of
the first ``i`` variables of the order.  ``width`` counts non-constant
residuals (at least 1); ``width_with_leaves`` also counts the constants.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _truth
from .circuit import Circuit, MonotoneFormula, circuit_truth_table
from .errors import ParseError, SizeLimitError

MAX_VARS = 26
EXHAUSTIVE_LIMIT = 10


def function_variables(function) -> tuple[int, ...]:
    return tuple(function.variables)


def ordered_table(function, order) -> int:
    """Truth table with ``order[0]`` as the most significant index bit."""
    order = tuple(order)
    if sorted(order) != sorted(function_variables(function)):
        raise ValueError("order must list every variable of the function exactly once")
    if len(order) > MAX_VARS:
        raise SizeLimitError(f"truth-table backend limited to {MAX_VARS} variables")
    rev = order[::-1]
    if isinstance(function, Circuit):
        return circuit_truth_table(function, rev)
    if isinstance(function, MonotoneFormula):
        return function.truth_table(rev)
    raise TypeError(f"cannot build an OBDD for {type(function).__name__}")


@dataclass(frozen=True)
class Obdd:
    """A reduced OBDD.

    Node ids 0 and 1 are the leaves; ``nodes[k]`` for ``k >= 2`` is
    ``(var, lo, hi)``.  ``profile[i]`` is the number of non-constant residual
    functions after reading ``i`` variables, ``constants[i]`` the number of
    constant ones.
    """

    order: tuple[int, ...]
    nodes: tuple[tuple[int, int, int] | None, ...]
    root: int
    profile: tuple[int, ...]
    constants: tuple[int, ...]

    @property
    def width(self) -> int:
        return max(max(self.profile), 1)

    @property
    def width_with_leaves(self) -> int:
        return max(p + c for p, c in zip(self.profile, self.constants))

    @property
    def size(self) -> int:
        """Number of decision (non-leaf) nodes."""
        return len(self.nodes) - 2

    def evaluate(self, valuation) -> int:
        node = self.root
        while node > 1:
            var, lo, hi = self.nodes[node]
            node = hi if valuation[var] else lo
        return node

    def truth_table(self, variables=None) -> int:
        """Truth table over ``variables`` (default: sorted order variables),
        first variable as the least significant index bit."""
        variables = tuple(sorted(self.order) if variables is None else variables)
        pos = {v: j for j, v in enumerate(variables)}
        n = len(variables)
        mask = _truth.full_mask(n)
        tables = [0, mask]
        for k in range(2, len(self.nodes)):
            var, lo, hi = self.nodes[k]
            x = _truth.var_pattern(pos[var], n)
            tables.append((tables[hi] & x) | (tables[lo] & ~x & mask))
        return tables[self.root]


def width_profile(table: int, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Non-constant and constant residual counts per level of an ordered table."""
    level = {table}
    profile, constants = [], []
    for i in range(n + 1):
        m = n - i
        full = _truth.full_mask(m)
        const = sum(1 for t in level if t == 0 or t == full)
        profile.append(len(level) - const)
        constants.append(const)
        if i == n:
            break
        half = 1 << (m - 1)
        low = _truth.full_mask(m - 1)
        level = {part for t in level for part in (t & low, t >> half)}
    return tuple(profile), tuple(constants)


def build(function, order) -> Obdd:
    order = tuple(order)
    n = len(order)
    table = ordered_table(function, order)
    profile, constants = width_profile(table, n)
    nodes: list = [None, None]
    index: dict = {}
    memo: dict = {}

    def node_for(level, t):
        # iterative descent over levels whose variable the function ignores
        key0 = (level, t)
        if key0 in memo:
            return memo[key0]
        while level < n:
            m = n - level
            half = 1 << (m - 1)
            lo, hi = t & _truth.full_mask(m - 1), t >> half
            if lo != hi:
                break
            t, level = lo, level + 1
        if level == n:
            res = t
        else:
            m = n - level
            half = 1 << (m - 1)
            lo_id = node_for(level + 1, t & _truth.full_mask(m - 1))
            hi_id = node_for(level + 1, t >> half)
            key = (order[level], lo_id, hi_id)
            res = index.get(key)
            if res is None:
                res = index[key] = len(nodes)
                nodes.append(key)
        memo[key0] = res
        return res

    root = node_for(0, table)
    return Obdd(order, tuple(nodes), root, profile, constants)


def width(obdd: Obdd) -> int:
    return obdd.width


def dualize(obdd: Obdd) -> Obdd:
    """OBDD of ``x -> not f(not x)``: swap the two edges of every node and the
    two leaves.  For a monotone DNF this is the CNF with the same clauses."""
    swap = {0: 1, 1: 0}
    nodes = [None, None]
    for k in range(2, len(obdd.nodes)):
        var, lo, hi = obdd.nodes[k]
        nodes.append((var, swap.get(hi, hi), swap.get(lo, lo)))
    return Obdd(obdd.order, tuple(nodes), swap.get(obdd.root, obdd.root),
                obdd.profile, obdd.constants)


# --- order search ---------------------------------------------------------

def residual_counts(function, variables=None, *, with_leaves=False) -> np.ndarray:
    """For every subset ``S`` of the variables (bit ``j`` for ``variables[j]``),
    the number of distinct residual functions left after fixing ``S``."""
    variables = tuple(function_variables(function) if variables is None else variables)
    n = len(variables)
    table = ordered_table(function, variables[::-1])  # variables[j] at bit j
    bits = np.array([(table >> i) & 1 for i in range(1 << n)], dtype=np.uint8)
    # axis k of the reshaped cube is variable n-1-k
    cube = bits.reshape((2,) * n) if n else bits.reshape(())
    counts = np.zeros(1 << n, dtype=np.int64)
    for s in range(1 << n):
        fixed = [n - 1 - j for j in range(n) if s >> j & 1]
        free = [n - 1 - j for j in range(n) if not s >> j & 1]
        rows = np.transpose(cube, fixed + free).reshape(1 << len(fixed), -1) if n else bits.reshape(1, 1)
        uniq = np.unique(rows, axis=0)
        if not with_leaves:
            const = (uniq.min(axis=1) == uniq.max(axis=1)).sum()
            counts[s] = len(uniq) - const
        else:
            counts[s] = len(uniq)
    return counts


def _best_chain(counts, n):
    """Min over orders of the max count along prefixes; lexicographically
    smallest optimal order (as positions)."""
    full = (1 << n) - 1
    best = np.zeros(1 << n, dtype=np.int64)
    best[full] = counts[full]
    for s in range(full - 1, -1, -1):
        m = None
        for j in range(n):
            if not s >> j & 1:
                v = best[s | 1 << j]
                if m is None or v < m:
                    m = v
        best[s] = max(counts[s], m)
    opt = int(best[0])
    order, s = [], 0
    for _ in range(n):
        j = next(j for j in range(n) if not s >> j & 1 and best[s | 1 << j] <= opt)
        order.append(j)
        s |= 1 << j
    return opt, order


def best_order(function, mode: str = "exhaustive", *, limit: int = EXHAUSTIVE_LIMIT):
    """Return ``(order, width)``.

    ``exhaustive`` finds a width-minimal order (the lexicographically
    smallest among optimal ones) by dynamic programming over prefix sets,
    which is equivalent to trying every order since the residuals after a
    prefix depend only on its set.  ``greedy`` builds an order keeping the
    number of split clauses small (formulas) or the number of residuals
    small (circuits).
    """
    variables = tuple(sorted(function_variables(function)))
    n = len(variables)
    if mode == "exhaustive":
        if n > limit:
            raise SizeLimitError(f"exhaustive order search limited to {limit} variables, got {n}")
        counts = residual_counts(function, variables)
        opt, pos = _best_chain(counts, n)
        return tuple(variables[j] for j in pos), max(opt, 1)
    if mode == "greedy":
        if isinstance(function, MonotoneFormula):
            from .bounds import greedy_psw_order
            order = greedy_psw_order(function.hypergraph)
        else:
            order = _greedy_residual_order(function, variables)
        return order, build(function, order).width
    raise ValueError(f"unknown mode {mode!r}")


def _greedy_residual_order(function, variables):
    order: list[int] = []
    rest = list(variables)
    while rest:
        scores = []
        for v in rest:
            trial = order + [v] + [u for u in rest if u != v]
            prof, _ = width_profile(ordered_table(function, trial), len(trial))
            scores.append((prof[len(order) + 1], v))
        v = min(scores)[1]
        order.append(v)
        rest.remove(v)
    return tuple(order)


def all_orders_min_width(function) -> int:
    """Minimum width by trying every permutation (test oracle, tiny inputs)."""
    variables = function_variables(function)
    return min(build(function, p).width for p in itertools.permutations(variables))


# --- text I/O ------------------------------------------------------------

def format_obdd(obdd: Obdd) -> str:
    lines = ["order " + " ".join(map(str, obdd.order)), f"root {obdd.root}"]
    for k in range(2, len(obdd.nodes)):
        var, lo, hi = obdd.nodes[k]
        lines.append(f"node {k} {var} {lo} {hi}")
    return "\n".join(lines) + "\n"


def parse_obdd(text: str) -> Obdd:
    """Read a dump written by :func:`format_obdd`; the level profile is
    recomputed from the diagram."""
    order = root = None
    nodes: list = [None, None]
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts:
            continue
        try:
            if parts[0] == "order":
                order = tuple(int(p) for p in parts[1:])
            elif parts[0] == "root":
                root = int(parts[1])
            elif parts[0] == "node" and len(parts) == 5:
                k, var, lo, hi = (int(p) for p in parts[1:])
                if k != len(nodes) or not (0 <= lo < k and 0 <= hi < k):
                    raise ParseError(f"node {k} is out of sequence", lineno)
                nodes.append((var, lo, hi))
            else:
                raise ParseError(f"unrecognized line {raw!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"non-integer field in {raw!r}", lineno) from None
    if order is None or root is None or not 0 <= root < len(nodes):
        raise ParseError("missing order or root line")
    shell = Obdd(order, tuple(nodes), root, (), ())
    table = shell.truth_table(order[::-1])
    profile, constants = width_profile(table, len(order))
    return Obdd(order, tuple(nodes), root, profile, constants)
