"""Compile a bounded-treewidth circuit into a d-SDNNF with its v-tree.

The compiler walks a nice tree decomposition bottom-up.  At every bag it
guesses the values of the bag's gates (an *almost-evaluation*, which must
respect strong values) together with the set of *suspicious* gates, those
holding a strong value that no input seen so far justifies.  Each guess
becomes an and-gate of the output; guesses at a bag are connected to
compatible guesses at its two children through one or-gate per guess.

Bag contents are handled as local bitmasks: position ``i`` of a bag is the
``i``-th smallest gate id in it.  The small dict-based functions
(:func:`unjustified`, :func:`connectible`, :func:`result`) spell out the same
definitions gate by gate and serve as references in tests.
"""

from __future__ import annotations

import time
from collections.abc import Mapping
from dataclasses import dataclass, field

from .circuit import Circuit
from .decomp import (NiceTreeDecomposition, TreeDecomposition, check_nice, make_nice,
                     minfill, root_for_compile, validate)
from .errors import DecompositionError, DisagreementError
from .nnf import Nnf, VTree, simplify

STRONG = {"and": (0,), "or": (1,), "not": (0, 1), "var": ()}


def is_strong(gate_type: str, value: int) -> bool:
    return value in STRONG[gate_type]


def determined(gate_type: str, input_value: int) -> int:
    return 1 - input_value if gate_type == "not" else input_value


# --- reference definitions (gate-level dicts) --------------------------------

def respects_strong_values(circuit: Circuit, nu: Mapping[int, int]) -> bool:
    for g, val in nu.items():
        t = circuit.types[g]
        for h in circuit.inputs[g]:
            if h in nu and is_strong(t, nu[h]) and val != determined(t, nu[h]):
                return False
    return True


def unjustified(circuit: Circuit, bag, nu: Mapping[int, int]) -> frozenset:
    """Gates of ``bag`` carrying a strong value that no in-bag input justifies."""
    out = set()
    for g in bag:
        t = circuit.types[g]
        if not is_strong(t, nu[g]):
            continue
        if not any(h in bag and is_strong(t, nu[h]) for h in circuit.inputs[g]):
            out.add(g)
    return frozenset(out)


def connectible(suspicious, parent_bag) -> bool:
    return frozenset(suspicious) <= frozenset(parent_bag)


def result(circuit: Circuit, bag, left, right):
    """Combine ``left = (bag_l, nu_l, S_l)`` and ``right`` at their parent ``bag``.

    Returns ``(nu, S)``, or None when the combined values break strong-value
    respect on ``bag``.  Raises :class:`DisagreementError` on a conflict.
    """
    bag = frozenset(bag)
    (bag_l, nu_l, s_l), (bag_r, nu_r, s_r) = left, right
    for g in frozenset(bag_l) & frozenset(bag_r):
        if nu_l[g] != nu_r[g]:
            raise DisagreementError(f"children disagree on gate {g}")
    merged = {**nu_l, **nu_r}
    nu = {g: merged[g] for g in bag}
    if not respects_strong_values(circuit, nu):
        return None
    unf = unjustified(circuit, bag, nu)
    innocent = (bag - unf) | (bag & ((frozenset(bag_l) - frozenset(s_l))
                                     | (frozenset(bag_r) - frozenset(s_r))))
    return nu, bag - innocent


# --- fast bag-local tables ---------------------------------------------------

@dataclass
class _Bag:
    gates: tuple[int, ...]
    valid: list[bool]
    unf: list[int]
    states: dict = field(default_factory=dict)   # (nu, S) -> raw node id


def _bag_tables(circuit: Circuit, gates):
    pos = {g: i for i, g in enumerate(gates)}
    rules = []
    for i, g in enumerate(gates):
        t = circuit.types[g]
        if t != "var":
            rules.append((i, t, [pos[h] for h in circuit.inputs[g] if h in pos]))
    valid, unf = [], []
    for nu in range(1 << len(gates)):
        ok, bad = True, 0
        for i, t, ins in rules:
            val = nu >> i & 1
            if t == "not":
                if ins and val == nu >> ins[0] & 1:
                    ok = False
                    break
                if not ins:
                    bad |= 1 << i
                continue
            strong = 0 if t == "and" else 1
            hit = any((nu >> j & 1) == strong for j in ins)
            if hit and val != strong:
                ok = False
                break
            if val == strong and not hit:
                bad |= 1 << i
        valid.append(ok)
        unf.append(bad)
    return valid, unf


def _projection(src, dst):
    """Per source position, the destination bit (0 when absent)."""
    pos = {g: i for i, g in enumerate(dst)}
    return [1 << pos[g] if g in pos else 0 for g in src]


def _project(mask, proj):
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out |= proj[i]
        mask >>= 1
        i += 1
    return out


def _submasks(mask):
    """Submasks of ``mask`` in increasing order."""
    subs = [0]
    sub = 0
    while True:
        sub = (sub - mask) & mask
        if not sub:
            return subs
        subs.append(sub)


# --- v-tree ------------------------------------------------------------------

def _build_vtree(nice: NiceTreeDecomposition, var_index, n_vars):
    """One node per bag, one per internal bag's children pair, one leaf per
    responsible variable; empty subtrees pruned, unary nodes contracted."""
    shape: dict[int, object] = {}
    for b in nice.postorder():
        parts = []
        kids = nice.children[b]
        if kids:
            pair = [shape[c] for c in kids if shape[c] is not None]
            if len(pair) == 2:
                parts.append(tuple(pair))
            elif pair:
                parts.append(pair[0])
        g = nice.responsible[b]
        if g is not None:
            parts.append(var_index[g])
        shape[b] = None if not parts else parts[0] if len(parts) == 1 else tuple(parts)
    top = shape[nice.root]
    placed = set()
    stack = [top]
    while stack:
        s = stack.pop()
        if isinstance(s, tuple):
            stack.extend(s)
        elif s is not None:
            placed.add(s)
    for v in range(1, n_vars + 1):
        if v not in placed:
            top = v if top is None else (top, v)
    return VTree(top)


# --- compiler -------------------------------------------------------------------

@dataclass
class Compiled:
    """Compiler output.

    ``var_gates[v - 1]`` is the circuit gate of NNF variable ``v``.  When the
    compiler ran with ``keep_raw``, ``raw`` holds the unsimplified
    construction and ``raw_labels`` names each of its nodes:
    ``("lit", g, c)``, ``("pair", b, nu_l, S_l, nu_r, S_r)``,
    ``("children", b, nu, S)`` or ``("bag", b, nu, S)`` with ``nu``/``S``
    as dicts/frozensets over gate ids.
    """

    nnf: Nnf
    vtree: VTree
    stats: dict
    var_gates: tuple[int, ...]
    nice: NiceTreeDecomposition
    raw: Nnf | None = None
    raw_labels: list | None = None
    wall_time: float = 0.0


def size_bound(n_bags: int, width: int) -> int:
    return n_bags * 2 ** (4 * width + 6)


def compile(circuit: Circuit, nice: NiceTreeDecomposition, *, gc: bool = True,
            keep_raw: bool = False) -> Compiled:
    """Compile ``circuit`` along ``nice``, a decomposition rooted by
    :func:`~twkc.decomp.root_for_compile`."""
    start = time.perf_counter()
    report = validate(nice, circuit)
    if not report:
        raise DecompositionError(report.message)
    nice_report = check_nice(nice)
    if not nice_report:
        raise DecompositionError(nice_report.message)
    if nice.bags[nice.root] != {circuit.output}:
        raise DecompositionError("root bag must hold exactly the output gate")
    if len(getattr(nice, "responsible", ())) != len(nice.bags):
        raise DecompositionError("decomposition carries no responsibility map")

    var_gates = circuit.variables
    var_index = {g: i + 1 for i, g in enumerate(var_gates)}
    n_vars = len(var_gates)
    nodes: list = []
    labels: list = []

    def new(node, label):
        nodes.append(node)
        labels.append(label)
        return len(nodes) - 1

    literal = {}
    for g in var_gates:
        literal[g, 1] = new(("L", var_index[g]), ("lit", g, 1))
        literal[g, 0] = new(("L", -var_index[g]), ("lit", g, 0))

    bags: dict[int, _Bag] = {}
    pair_count = 0
    for b in nice.postorder():
        gates = tuple(sorted(nice.bags[b]))
        valid, unf = _bag_tables(circuit, gates)
        info = bags[b] = _Bag(gates, valid, unf)
        resp = nice.responsible[b]
        if resp is not None and resp not in gates:
            raise DecompositionError(f"bag {b} is responsible for a gate it lacks")
        resp_pos = gates.index(resp) if resp is not None else None
        dec = _decode(gates)

        def top_gate(nu, s, inner):
            kids = () if inner is None else (inner,)
            if resp is not None:
                kids += (literal[resp, nu >> resp_pos & 1],)
            return new(("A", kids), ("bag", b, dec(nu), dec(s, True)) if keep_raw else None)

        kids = nice.children[b]
        if not kids:
            for nu in range(1 << len(gates)):
                if valid[nu]:
                    info.states[nu, unf[nu]] = top_gate(nu, unf[nu], None)
            continue

        lb, rb = bags[kids[0]], bags[kids[1]]
        dec_l, dec_r = _decode(lb.gates), _decode(rb.gates)
        label_set = nice.bags[b]
        inputs: dict[tuple[int, int], list[int]] = {}
        # right states indexed by their values on the gates shared with the left child
        shared = [g for g in lb.gates if g in set(rb.gates)]
        key_l, key_r = _projection(lb.gates, shared), _projection(rb.gates, shared)
        up_l, up_r = _projection(lb.gates, gates), _projection(rb.gates, gates)
        out_l = sum(1 << i for i, g in enumerate(lb.gates) if g not in label_set)
        out_r = sum(1 << i for i, g in enumerate(rb.gates) if g not in label_set)
        in_l = _project((1 << len(lb.gates)) - 1, up_l)
        in_r = _project((1 << len(rb.gates)) - 1, up_r)
        right_by_key: dict[int, list] = {}
        for (nu_r, s_r), gate_r in rb.states.items():
            if s_r & out_r:
                continue
            right_by_key.setdefault(_project(nu_r, key_r), []).append(
                (_project(nu_r, up_r), in_r & ~_project(s_r, up_r), gate_r, nu_r, s_r))
        for (nu_l, s_l), gate_l in lb.states.items():
            if s_l & out_l:
                continue
            nu_up = _project(nu_l, up_l)
            innocent_l = in_l & ~_project(s_l, up_l)
            for nu_up_r, innocent_r, gate_r, nu_r, s_r in right_by_key.get(_project(nu_l, key_l), ()):
                nu = nu_up | nu_up_r
                if not valid[nu]:
                    continue
                s = unf[nu] & ~innocent_l & ~innocent_r
                g = new(("A", (gate_l, gate_r)),
                        ("pair", b, dec_l(nu_l), dec_l(s_l, True),
                         dec_r(nu_r), dec_r(s_r, True)) if keep_raw else None)
                pair_count += 1
                inputs.setdefault((nu, s), []).append(g)
        order = [(nu, s) for nu in range(1 << len(gates)) if valid[nu]
                 for s in _submasks(unf[nu])]
        if b == nice.root:
            # the output gate is created last so that it is the NNF root
            order.remove((1, 0))
            order.append((1, 0))
        for nu, s in order:
            ors = new(("O", tuple(inputs.get((nu, s), ()))),
                      ("children", b, dec(nu), dec(s, True)) if keep_raw else None)
            info.states[nu, s] = top_gate(nu, s, ors)
        for c in kids:
            bags[c].states = {}  # children no longer needed

    # a leaf root has no children pass, so its accepting state may be missing
    # (constant false) or not last
    accept = bags[nice.root].states.get((1, 0))
    if accept is None:
        new(("O", ()), None)
    elif accept != len(nodes) - 1:
        new(("A", (accept,)), None)
    raw = Nnf(tuple(nodes), n_vars)
    final = simplify(nodes, n_vars) if gc else raw
    vtree = _build_vtree(nice, var_index, n_vars)
    width = nice.width
    stats = {
        "width": width,
        "bags": len(nice.bags),
        "variables": n_vars,
        "gates_created": len(nodes),
        "pairs_created": pair_count,
        "gates_after_gc": len(final.nodes),
        "edges_after_gc": final.n_edges,
        "size": len(final),
        "size_bound": size_bound(len(nice.bags), width),
        "gc": gc,
    }
    return Compiled(final, vtree, stats, var_gates, nice,
                    raw if keep_raw else None, labels if keep_raw else None,
                    time.perf_counter() - start)


def _decode(gates):
    def dec(mask, as_set=False):
        if as_set:
            return frozenset(g for i, g in enumerate(gates) if mask >> i & 1)
        return {g: mask >> i & 1 for i, g in enumerate(gates)}
    return dec


def prepare(circuit: Circuit, td: TreeDecomposition | None = None) -> NiceTreeDecomposition:
    """Validate (or build by min-fill) a decomposition and root it for compilation."""
    if td is None:
        td = minfill(circuit)
    report = validate(td, circuit)
    if not report:
        raise DecompositionError(report.message)
    return root_for_compile(make_nice(td), circuit.output, circuit.variables)


def compile_circuit(circuit: Circuit, td: TreeDecomposition | None = None, **kwargs) -> Compiled:
    return compile(circuit, prepare(circuit, td), **kwargs)


__all__ = ["Compiled", "compile", "compile_circuit", "connectible", "determined",
           "is_strong", "prepare", "respects_strong_values", "result", "size_bound",
           "unjustified"]
