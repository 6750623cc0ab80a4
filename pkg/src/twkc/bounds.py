"""Split-based width measures and the lower-bound toolkit for monotone formulas.

An order (or v-tree) *splits* a hyperedge at a position when the edge has
vertices on both sides of the cut.  The maximum number of edges split at
once is the pathsplitwidth of the order (treesplitwidth of the v-tree).
Large splits force large OBDDs and d-SDNNFs: inside any split one finds
many pairwise far-apart clauses (an independent set of the exclusion
graph), which form a *dncpi-set*, and fixing the other variables turns the
formula into a set-intersection function on those clauses.

Hypergraph vertices are the formula variables ``1..n``; edges are referred
to by their index in ``H.edges``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .circuit import Hypergraph, MonotoneFormula, formula_to_circuit
from .decomp import TreeDecomposition, exact_pathwidth, exact_treewidth
from .errors import ClauseTooSmallError, SizeLimitError
from .nnf import VTree

PSW_LIMIT = 12
TSW_LIMIT = 8


def _hypergraph(h) -> Hypergraph:
    return h.hypergraph if isinstance(h, MonotoneFormula) else h


@dataclass(frozen=True)
class Split:
    position: int
    edges: tuple[frozenset, ...]

    def __len__(self):
        return len(self.edges)

    def vertices(self) -> frozenset:
        return frozenset().union(*self.edges) if self.edges else frozenset()


def _crossing(edges, inside):
    return tuple(e for e in edges if e & inside and e - inside)


# --- pathsplitwidth ----------------------------------------------------------

def spl_order(order, H, i: int) -> Split:
    """Edges with a vertex among the first ``i`` of ``order`` and one after."""
    H = _hypergraph(H)
    order = tuple(order)
    if not 1 <= i <= len(order):
        raise ValueError(f"position {i} outside 1..{len(order)}")
    return Split(i, _crossing(H.edges, frozenset(order[:i])))


def splits_order(order, H) -> list[Split]:
    H = _hypergraph(H)
    return [spl_order(order, H, i) for i in range(1, len(order) + 1)]


def psw(order, H) -> int:
    return max((len(s) for s in splits_order(order, H)), default=0)


def _edge_masks(H):
    verts = sorted(H.vertices)
    idx = {v: j for j, v in enumerate(verts)}
    return verts, [sum(1 << idx[v] for v in e) for e in H.edges]


def _cut_counts(H, limit):
    verts, masks = _edge_masks(H)
    n = len(verts)
    if n > limit:
        raise SizeLimitError(f"exact split width limited to {limit} vertices, got {n}")
    subsets = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for m in masks:
        counts += ((subsets & m) != 0) & ((~subsets & m) != 0)
    return verts, counts


def psw_exact_order(H, limit: int = PSW_LIMIT):
    """Pathsplitwidth with a witnessing order (lexicographically smallest)."""
    H = _hypergraph(H)
    verts, counts = _cut_counts(H, limit)
    n = len(verts)
    full = (1 << n) - 1
    best = counts.copy()
    for s in range(full - 1, -1, -1):
        nxt = min(best[s | 1 << j] for j in range(n) if not s >> j & 1)
        best[s] = max(counts[s], nxt)
    opt = int(best[0])
    order, s = [], 0
    for _ in range(n):
        j = next(j for j in range(n) if not s >> j & 1 and best[s | 1 << j] <= opt)
        order.append(verts[j])
        s |= 1 << j
    return opt, tuple(order)


def psw_exact(H, limit: int = PSW_LIMIT) -> int:
    return psw_exact_order(H, limit)[0]


def greedy_psw_order(H) -> tuple[int, ...]:
    """Order built by always placing the vertex that leaves the fewest split
    edges (ties: lowest vertex)."""
    H = _hypergraph(H)
    placed: set = set()
    order = []
    rest = sorted(H.vertices)
    while rest:
        best = min(rest, key=lambda v: (len(_crossing(H.edges, frozenset(placed | {v}))), v))
        order.append(best)
        placed.add(best)
        rest.remove(best)
    return tuple(order)


# --- treesplitwidth --------------------------------------------------------------

def spl_vtree(vtree: VTree, H, node: int) -> Split:
    """Edges with a leaf inside the subtree at ``node`` (preorder index) and one outside."""
    H = _hypergraph(H)
    return Split(node, _crossing(H.edges, vtree.masks[node]))


def tsw(vtree: VTree, H) -> int:
    H = _hypergraph(H)
    return max((len(spl_vtree(vtree, H, n)) for n in range(len(vtree))), default=0)


def tsw_exact_vtree(H, limit: int = TSW_LIMIT):
    """Treesplitwidth with a witnessing v-tree, by DP over leaf sets.

    The best v-tree over a set ``U`` costs the split of ``U`` itself or the
    worse of its two halves, minimized over all bipartitions of ``U``.
    """
    H = _hypergraph(H)
    verts, counts = _cut_counts(H, limit)
    n = len(verts)
    if n == 0:
        return 0, VTree(None)
    size = 1 << n
    best = [0] * size
    choice = [0] * size
    for s in range(1, size):
        if s & (s - 1) == 0:
            best[s] = int(counts[s])
            continue
        low = s & -s
        m, arg = None, 0
        # halves containing the lowest element, so each split is seen once
        rest = s ^ low
        sub = rest
        while True:
            a = sub | low
            if a != s:
                v = max(best[a], best[s ^ a])
                if m is None or v < m:
                    m, arg = v, a
            if sub == 0:
                break
            sub = (sub - 1) & rest
        best[s] = max(int(counts[s]), m)
        choice[s] = arg

    def shape(s):
        if s & (s - 1) == 0:
            return verts[s.bit_length() - 1]
        a = choice[s]
        return (shape(a), shape(s ^ a))

    return best[size - 1], VTree(shape(size - 1))


def tsw_exact(H, limit: int = TSW_LIMIT) -> int:
    return tsw_exact_vtree(H, limit)[0]


def all_vtrees(leaves):
    """Every ordered binary tree over ``leaves`` (test oracle, tiny inputs)."""
    leaves = tuple(leaves)
    if len(leaves) == 1:
        yield leaves[0]
        return
    n = len(leaves)
    for mask in range(1, (1 << n) - 1):
        left = tuple(v for j, v in enumerate(leaves) if mask >> j & 1)
        right = tuple(v for j, v in enumerate(leaves) if not mask >> j & 1)
        for a in all_vtrees(left):
            for b in all_vtrees(right):
                yield (a, b)


def balanced_vtree(order) -> VTree:
    order = list(order)
    if not order:
        return VTree(None)

    def build(lo, hi):
        if hi - lo == 1:
            return order[lo]
        mid = (lo + hi) // 2
        return (build(lo, mid), build(mid, hi))
    return VTree(build(0, len(order)))


# --- exclusion graph and dncpi-sets --------------------------------------------

@dataclass(frozen=True)
class ExclusionGraph:
    """Graph on edge indices of ``H``: two edges are adjacent when some edge
    meets both (distance at most 4 in the incidence graph)."""

    H: Hypergraph

    @cached_property
    def adjacency(self) -> tuple[frozenset, ...]:
        edges = self.H.edges
        adj = [set() for _ in edges]
        for e2 in edges:
            touching = [i for i, e in enumerate(edges) if e & e2]
            for i in touching:
                adj[i].update(touching)
        for i, s in enumerate(adj):
            s.discard(i)
        return tuple(frozenset(s) for s in adj)

    def __len__(self):
        return len(self.H.edges)

    @property
    def degree(self) -> int:
        return max((len(s) for s in self.adjacency), default=0)

    def degree_bound(self) -> int:
        return (self.H.arity * self.H.degree) ** 2 - 1


def exclusion_graph(H) -> ExclusionGraph:
    return ExclusionGraph(_hypergraph(H))


def greedy_mis(G: ExclusionGraph, subset=None) -> tuple[int, ...]:
    """Take the lowest remaining vertex, drop its closed neighbourhood, repeat."""
    remaining = set(range(len(G)) if subset is None else subset)
    chosen = []
    while remaining:
        v = min(remaining)
        chosen.append(v)
        remaining -= G.adjacency[v] | {v}
    return tuple(chosen)


@dataclass(frozen=True)
class Dncpi:
    """A dncpi-set together with the cut that shatters it.

    ``inside`` is the prefix (order) or subtree leaf set (v-tree) at
    ``position``; every clause of ``clauses`` crosses it.
    """

    clauses: tuple[frozenset, ...]
    edge_ids: tuple[int, ...]
    position: int
    inside: frozenset
    split_size: int

    def __len__(self):
        return len(self.clauses)


def extract_dncpi(phi: MonotoneFormula, witness) -> Dncpi:
    """Find a dncpi-set shattered by an order (sequence) or a :class:`VTree`.

    Picks the largest split (earliest on ties) and keeps a greedy
    independent set of the exclusion graph restricted to it.
    """
    H = phi.hypergraph
    if isinstance(witness, VTree):
        cuts = [(n, witness.masks[n]) for n in range(len(witness))]
    else:
        order = tuple(witness)
        cuts = [(i, frozenset(order[:i])) for i in range(1, len(order) + 1)]
    best = None
    for pos, inside in cuts:
        ids = tuple(k for k, e in enumerate(H.edges) if e & inside and e - inside)
        if best is None or len(ids) > len(best[2]):
            best = (pos, inside, ids)
    if best is None:
        return Dncpi((), (), 0, frozenset(), 0)
    pos, inside, ids = best
    chosen = greedy_mis(exclusion_graph(H), ids)
    return Dncpi(tuple(H.edges[k] for k in chosen), chosen, pos, inside, len(ids))


@dataclass(frozen=True)
class Verdict:
    ok: bool
    message: str = "ok"
    witness: object = None

    def __bool__(self):
        return self.ok


def verify_dncpi(phi: MonotoneFormula, clauses) -> Verdict:
    clauses = [frozenset(c) for c in clauses]
    members = set(phi.clauses)
    for c in clauses:
        if c not in members:
            return Verdict(False, f"{sorted(c)} is not a clause of the formula", c)
    for i, a in enumerate(clauses):
        for b in clauses[i + 1:]:
            if a & b:
                return Verdict(False, f"clauses {sorted(a)} and {sorted(b)} overlap", (a, b))
    union = frozenset().union(*clauses) if clauses else frozenset()
    chosen = set(clauses)
    for c in phi.clauses:
        if c <= union and c not in chosen:
            return Verdict(False, f"clause {sorted(c)} is covered but not chosen", c)
    return Verdict(True)


def floor_dncpi_size(split_size: int, arity: int, degree: int) -> int:
    return split_size // (arity * degree) ** 2


def sint_restriction(phi: MonotoneFormula, clauses, inside):
    """Partial valuation turning ``phi`` into a set-intersection function.

    For each clause, ``x`` is its smallest variable inside the cut and ``y``
    its smallest outside.  Returns ``(valuation, pairs)``.  For a DNF the
    other variables of the chosen clauses go to 1 and all remaining ones to
    0, leaving ``OR_i (x_i AND y_i)``; for a CNF the roles of 0 and 1 swap,
    leaving ``AND_i (x_i OR y_i)``.
    """
    inside = frozenset(inside)
    pairs = []
    for c in clauses:
        c = frozenset(c)
        if len(c) < 2:
            raise ClauseTooSmallError(f"clause {sorted(c)} has fewer than two variables")
        a, b = c & inside, c - inside
        if not a or not b:
            raise ClauseTooSmallError(f"clause {sorted(c)} does not cross the cut")
        pairs.append((min(a), min(b)))
    union = frozenset().union(*map(frozenset, clauses)) if clauses else frozenset()
    picked = {v for p in pairs for v in p}
    fill = 1 if phi.kind == "dnf" else 0
    valuation = {v: (fill if v in union else 1 - fill)
                 for v in phi.variables if v not in picked}
    return valuation, tuple(pairs)


def residuals_at_cut(phi: MonotoneFormula, inside) -> int:
    """Distinct residual functions (constants included) after fixing ``inside``."""
    from .obdd import build
    inside = sorted(inside)
    order = inside + [v for v in phi.variables if v not in set(inside)]
    ob = build(phi, order)
    k = len(inside)
    return ob.profile[k] + ob.constants[k]


# --- decompositions from orders and v-trees ------------------------------------------

def path_decomp_from_order(order, H) -> TreeDecomposition:
    """Path of bags ``{v_i}`` plus the vertices of edges split at ``i``."""
    H = _hypergraph(H)
    order = tuple(order)
    bags = [frozenset({v}) | spl_order(order, H, i + 1).vertices() for i, v in enumerate(order)]
    children = tuple((i + 1,) if i + 1 < len(bags) else () for i in range(len(bags)))
    return TreeDecomposition(tuple(bags), children, 0)


def tree_decomp_from_vtree(vtree: VTree, H) -> TreeDecomposition:
    """Same skeleton as the v-tree; an internal node's bag holds the vertices
    of edges split at it or at its children, a leaf's bag its variable."""
    H = _hypergraph(H)
    split_vertices = [spl_vtree(vtree, H, n).vertices() for n in range(len(vtree))]
    bags = []
    for n, kids in enumerate(vtree.kids):
        if kids is None:
            bags.append(frozenset({vtree.labels[n]}))
        else:
            bags.append(split_vertices[n] | split_vertices[kids[0]] | split_vertices[kids[1]])
    children = tuple(() if k is None else k for k in vtree.kids)
    return TreeDecomposition(tuple(bags), children, 0)


def order_from_path_decomp(P: TreeDecomposition, H) -> tuple[int, ...]:
    """Vertices by the first bag (along the path) holding them, then the rest."""
    H = _hypergraph(H)
    ends = [i for i in range(len(P)) if _path_degree(P, i) <= 1]
    start = ends[0] if ends else 0
    walk = _path_walk(P, start)
    seen: list = []
    for b in walk:
        for v in sorted(P.bags[b] - set(seen)):
            seen.append(v)
    seen += sorted(set(H.vertices) - set(seen))
    return tuple(seen)


def _path_degree(P, i):
    return len(P.children[i]) + (P.parent[i] is not None)


def _path_walk(P, start):
    if not P.is_path():
        raise ValueError("decomposition is not a path")
    nbrs = [list(k) for k in P.children]
    for c, p in enumerate(P.parent):
        if p is not None:
            nbrs[c].append(p)
    walk, prev, cur = [start], None, start
    while True:
        nxt = [x for x in nbrs[cur] if x != prev]
        if not nxt:
            return walk
        prev, cur = cur, nxt[0]
        walk.append(cur)


# --- theorem floors and the bounds report ----------------------------------------------

def obdd_floor(pw: int, arity: int, degree: int) -> int:
    return 2 ** (pw // (arity ** 3 * degree ** 2))


def dsdnnf_floor(tw: int, arity: int, degree: int) -> int:
    return 2 ** (tw // (3 * arity ** 3 * degree ** 2)) - 1


def bounds_report(phi: MonotoneFormula, *, max_exhaustive_vars: int = 10,
                  max_exact_vars: int = 16, compile_dsdnnf: bool = True) -> dict:
    """Measured widths, theorem floors and checks for one formula.

    Exact fields beyond their caps are None and listed under ``skipped``.
    ``violations`` lists every measured quantity that contradicts a floor or
    a lemma; it must stay empty.
    """
    from .compile import compile_circuit
    from .obdd import best_order, build

    H = phi.hypergraph
    n, a, d = phi.n_vars, phi.arity, phi.degree
    rep: dict = {"kind": phi.kind, "n": n, "m": len(phi.clauses), "arity": a, "degree": d}
    skipped, violations = [], []

    def exact(name, fn, cap):
        if n > cap:
            skipped.append(name)
            return None
        return fn()

    pw = exact("pw_exact", lambda: exact_pathwidth(H), max_exact_vars)
    tw = exact("tw_exact", lambda: exact_treewidth(H), max_exact_vars)
    psw_opt = exact("psw_exact", lambda: psw_exact_order(H), PSW_LIMIT)
    tsw_opt = exact("tsw_exact", lambda: tsw_exact_vtree(H), TSW_LIMIT)
    rep["pw_exact"] = pw
    rep["tw_exact"] = tw
    rep["psw_exact"] = psw_opt[0] if psw_opt else None
    rep["tsw_exact"] = tsw_opt[0] if tsw_opt else None
    greedy = greedy_psw_order(H)
    rep["psw_greedy"] = psw(greedy, H)

    ob = exact("obdd_min_width", lambda: best_order(phi, "exhaustive", limit=max_exhaustive_vars),
               max_exhaustive_vars)
    if ob is not None:
        best = build(phi, ob[0])
        rep["obdd_min_width"] = best.width
        rep["obdd_min_width_with_leaves"] = best.width_with_leaves
        rep["obdd_best_order"] = list(ob[0])
    else:
        rep["obdd_min_width"] = rep["obdd_min_width_with_leaves"] = rep["obdd_best_order"] = None

    witnesses = [greedy]
    if psw_opt:
        witnesses.append(psw_opt[1])
    if tsw_opt:
        witnesses.append(tsw_opt[1])
    sizes = []
    for w in witnesses:
        dn = extract_dncpi(phi, w)
        sizes.append(len(dn))
        ver = verify_dncpi(phi, dn.clauses)
        if not ver:
            violations.append(f"dncpi extraction: {ver.message}")
        floor = floor_dncpi_size(dn.split_size, a, d)
        if len(dn) < floor:
            violations.append(f"dncpi of size {len(dn)} below floor {floor}")
        if n <= max_exact_vars and dn.clauses:
            seen = residuals_at_cut(phi, dn.inside)
            if seen < 2 ** len(dn):
                violations.append(f"{seen} residuals at a cut shattering {len(dn)} clauses")
    rep["dncpi_max"] = max(sizes)

    if pw is not None:
        rep["theorem_obddlower_floor"] = obdd_floor(pw, a, d)
        rep["obdd_upper_bound"] = 2 ** (pw + 2)
    else:
        rep["theorem_obddlower_floor"] = rep["obdd_upper_bound"] = None
    rep["theorem_dsdnnflower_floor"] = dsdnnf_floor(tw, a, d) if tw is not None else None

    if rep["obdd_min_width"] is not None and pw is not None:
        if rep["obdd_min_width"] < rep["theorem_obddlower_floor"]:
            violations.append("OBDD width below the pathwidth floor")
        if rep["obdd_min_width_with_leaves"] > rep["obdd_upper_bound"]:
            violations.append("OBDD width above 2^(pw+2)")
    if pw is not None and psw_opt:
        if pw > a * psw_opt[0]:
            violations.append("pathwidth above arity * pathsplitwidth")
        if psw_opt[0] > d * (pw + 1):
            violations.append("pathsplitwidth above degree * (pathwidth + 1)")
    if tw is not None and tsw_opt and tw > 3 * a * tsw_opt[0]:
        violations.append("treewidth above 3 * arity * treesplitwidth")

    if compile_dsdnnf:
        circuit, _ = formula_to_circuit(phi)
        compiled = compile_circuit(circuit)
        rep["compiled_dsdnnf_size"] = len(compiled.nnf)
        rep["compiled_width"] = compiled.stats["width"]
        if tw is not None and rep["compiled_dsdnnf_size"] < rep["theorem_dsdnnflower_floor"]:
            violations.append("compiled d-SDNNF smaller than the treewidth floor")
    else:
        rep["compiled_dsdnnf_size"] = None
    rep["skipped"] = skipped
    rep["violations"] = violations
    return rep
