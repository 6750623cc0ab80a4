"""Boolean circuits, monotone CNF/DNF formulas and their hypergraphs.

Circuits follow the usual gate-DAG model: gates are dense integer ids
``0..n-1`` typed ``var``, ``and``, ``or`` or ``not``, wires go from an input
gate to the gate that reads it, and one gate is the output.  Fan-in-0
``and``/``or`` gates are the constants 1 and 0.

Monotone formulas are kept minimized (no clause contains another) and are
identified with their hypergraph: variables are vertices, clauses are edges.
Formula variables are the integers ``1..n_vars`` as in DIMACS.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _truth
from .errors import (CircuitError, DegenerateInputError, MissingVariableError,
                     ParseError)

GATE_TYPES = ("var", "and", "or", "not")

Valuation = Mapping[int, int]


@dataclass(frozen=True)
class Circuit:
    """A Boolean circuit.

    ``types[g]`` is the type of gate ``g`` and ``inputs[g]`` the sorted tuple
    of its input gates.  Instances are immutable and validated on
    construction.
    """

    types: tuple[str, ...]
    inputs: tuple[tuple[int, ...], ...]
    output: int

    def __post_init__(self):
        types = tuple(self.types)
        inputs = tuple(tuple(sorted(set(ins))) for ins in self.inputs)
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "inputs", inputs)
        n = len(types)
        if len(inputs) != n:
            raise CircuitError("types and inputs have different lengths")
        if not 0 <= self.output < n:
            raise CircuitError(f"output gate {self.output} is not a gate id")
        for g, (t, ins) in enumerate(zip(types, inputs)):
            if t not in GATE_TYPES:
                raise CircuitError(f"gate {g}: unknown type {t!r}")
            if t == "var" and ins:
                raise CircuitError(f"gate {g}: var-gate with inputs")
            if t == "not" and len(ins) != 1:
                raise CircuitError(f"gate {g}: not-gate needs exactly one input")
            for h in ins:
                if not 0 <= h < n:
                    raise CircuitError(f"gate {g}: input {h} is not a gate id")
        self.topological_order  # raises on cycles

    @property
    def n_gates(self):
        return len(self.types)

    @cached_property
    def variables(self) -> tuple[int, ...]:
        """The variable gates, sorted."""
        return tuple(g for g, t in enumerate(self.types) if t == "var")

    @cached_property
    def wires(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((h, g) for g, ins in enumerate(self.inputs) for h in ins))

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        n = len(self.types)
        indeg = [len(ins) for ins in self.inputs]
        readers = [[] for _ in range(n)]
        for g, ins in enumerate(self.inputs):
            for h in ins:
                readers[h].append(g)
        ready = [g for g in range(n) if indeg[g] == 0]
        order = []
        while ready:
            g = ready.pop()
            order.append(g)
            for r in readers[g]:
                indeg[r] -= 1
                if indeg[r] == 0:
                    ready.append(r)
        if len(order) != n:
            raise CircuitError("wire graph has a cycle")
        return tuple(order)

    def __len__(self):
        return len(self.types) + len(self.wires)


def evaluate(circuit: Circuit, valuation: Valuation, *, all_gates=False):
    """Evaluate ``circuit`` under a total valuation of its variable gates.

    Returns the output bit, or the full gate evaluation as a list when
    ``all_gates`` is set.
    """
    values = [0] * circuit.n_gates
    for g in circuit.topological_order:
        t = circuit.types[g]
        ins = circuit.inputs[g]
        if t == "var":
            try:
                values[g] = 1 if valuation[g] else 0
            except KeyError:
                raise MissingVariableError(f"valuation does not assign variable gate {g}") from None
        elif t == "and":
            values[g] = int(all(values[h] for h in ins))
        elif t == "or":
            values[g] = int(any(values[h] for h in ins))
        else:
            values[g] = 1 - values[ins[0]]
    return values if all_gates else values[circuit.output]


def circuit_truth_table(circuit: Circuit, variables=None, *, all_gates=False):
    """Truth table of the output gate over ``variables`` (default: var-gates)."""
    if variables is None:
        variables = circuit.variables
    variables = tuple(variables)
    pos = {v: j for j, v in enumerate(variables)}
    n = len(variables)
    mask = _truth.full_mask(n)
    tables = [0] * circuit.n_gates
    for g in circuit.topological_order:
        t = circuit.types[g]
        ins = circuit.inputs[g]
        if t == "var":
            if g not in pos:
                raise MissingVariableError(f"variable gate {g} is not in the variable list")
            tables[g] = _truth.var_pattern(pos[g], n)
        elif t == "and":
            acc = mask
            for h in ins:
                acc &= tables[h]
            tables[g] = acc
        elif t == "or":
            acc = 0
            for h in ins:
                acc |= tables[h]
            tables[g] = acc
        else:
            tables[g] = mask ^ tables[ins[0]]
    return tables if all_gates else tables[circuit.output]


# --- circuit text format ---------------------------------------------------

def parse_circuit(text: str) -> Circuit:
    """Parse ``circuit <n_gates> <output>`` followed by ``<id> <type> <inputs..>``."""
    header = None
    types: dict[int, str] = {}
    inputs: dict[int, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("c "):
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "circuit" or len(parts) != 3:
                raise ParseError("expected header 'circuit <n_gates> <output_id>'", lineno)
            try:
                header = (int(parts[1]), int(parts[2]))
            except ValueError:
                raise ParseError("non-integer in header", lineno) from None
            continue
        try:
            gid = int(parts[0])
            ins = tuple(int(p) for p in parts[2:])
        except (ValueError, IndexError):
            raise ParseError(f"malformed gate line {raw!r}", lineno) from None
        if len(parts) < 2 or parts[1] not in GATE_TYPES:
            raise ParseError(f"unknown gate type in {raw!r}", lineno)
        if gid in types:
            raise ParseError(f"gate {gid} declared twice", lineno)
        types[gid] = parts[1]
        inputs[gid] = ins
    if header is None:
        raise ParseError("missing 'circuit' header")
    n, out = header
    if sorted(types) != list(range(n)):
        raise ParseError(f"gate ids must be exactly 0..{n - 1}")
    try:
        return Circuit(tuple(types[g] for g in range(n)),
                       tuple(inputs[g] for g in range(n)), out)
    except CircuitError as exc:
        raise ParseError(str(exc)) from None


def format_circuit(circuit: Circuit) -> str:
    lines = [f"circuit {circuit.n_gates} {circuit.output}"]
    for g, (t, ins) in enumerate(zip(circuit.types, circuit.inputs)):
        lines.append(" ".join([str(g), t, *map(str, ins)]))
    return "\n".join(lines) + "\n"


# --- hypergraphs and monotone formulas -----------------------------------

@dataclass(frozen=True)
class Hypergraph:
    vertices: frozenset
    edges: tuple[frozenset, ...]

    def __post_init__(self):
        edges = tuple(sorted({frozenset(e) for e in self.edges}, key=_clause_key))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        if not edges:
            raise DegenerateInputError("a hypergraph needs at least one edge")
        if any(not e for e in edges):
            raise DegenerateInputError("hyperedges must be non-empty")
        if not all(e <= self.vertices for e in edges):
            raise DegenerateInputError("edge mentions a vertex outside the vertex set")

    @cached_property
    def arity(self):
        return max(len(e) for e in self.edges)

    @cached_property
    def degree(self):
        counts: dict = {}
        for e in self.edges:
            for v in e:
                counts[v] = counts.get(v, 0) + 1
        return max(counts.values())

    def incident(self, v):
        """E(v): indices of the edges containing ``v``."""
        return tuple(i for i, e in enumerate(self.edges) if v in e)


def _clause_key(clause):
    return (len(clause), tuple(sorted(clause)))


def minimize_clauses(clauses: Iterable[Iterable[int]]) -> tuple[frozenset, ...]:
    """Drop duplicate clauses and any clause that strictly contains another."""
    uniq = sorted({frozenset(c) for c in clauses}, key=_clause_key)
    kept: list[frozenset] = []
    for c in uniq:
        if not any(k <= c for k in kept):
            kept.append(c)
    return tuple(kept)


@dataclass(frozen=True)
class MonotoneFormula:
    """A minimized monotone DNF or CNF over variables ``1..n_vars``.

    Clauses are stored canonically (sorted by size then content), so clause
    indices are stable for a given function.
    """

    kind: str
    n_vars: int
    clauses: tuple[frozenset, ...]
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("dnf", "cnf"):
            raise DegenerateInputError(f"kind must be 'dnf' or 'cnf', not {self.kind!r}")
        clauses = minimize_clauses(self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if not clauses or any(not c for c in clauses):
            raise DegenerateInputError("a monotone formula needs at least one non-empty clause")
        for c in clauses:
            for v in c:
                if not 1 <= v <= self.n_vars:
                    raise DegenerateInputError(f"variable {v} outside 1..{self.n_vars}")
        if self.names is not None and len(self.names) != self.n_vars:
            raise DegenerateInputError("names must list one name per variable")

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_vars + 1))

    @cached_property
    def hypergraph(self) -> Hypergraph:
        return Hypergraph(frozenset(self.variables), self.clauses)

    @property
    def arity(self):
        return self.hypergraph.arity

    @property
    def degree(self):
        return self.hypergraph.degree

    def name(self, v):
        return self.names[v - 1] if self.names else str(v)

    def dual(self) -> MonotoneFormula:
        """Same clauses with the roles of conjunction and disjunction swapped."""
        return MonotoneFormula("cnf" if self.kind == "dnf" else "dnf",
                               self.n_vars, self.clauses, self.names)

    def evaluate(self, valuation: Valuation) -> int:
        try:
            sat = [all(valuation[v] for v in c) if self.kind == "dnf" else
                   any(valuation[v] for v in c) for c in self.clauses]
        except KeyError as exc:
            raise MissingVariableError(f"valuation does not assign variable {exc.args[0]}") from None
        return int(any(sat) if self.kind == "dnf" else all(sat))

    def truth_table(self, variables=None) -> int:
        variables = tuple(self.variables if variables is None else variables)
        pos = {v: j for j, v in enumerate(variables)}
        n = len(variables)
        mask = _truth.full_mask(n)
        acc = 0 if self.kind == "dnf" else mask
        for c in self.clauses:
            if self.kind == "dnf":
                term = mask
                for v in c:
                    term &= _truth.var_pattern(pos[v], n)
                acc |= term
            else:
                term = 0
                for v in c:
                    term |= _truth.var_pattern(pos[v], n)
                acc &= term
        return acc


def formula_to_circuit(phi: MonotoneFormula) -> tuple[Circuit, dict[int, int]]:
    """Encode ``phi`` as a depth-2 circuit.

    Variable ``v`` becomes gate ``v - 1``; clause ``i`` becomes gate
    ``n_vars + i``; the output gate comes last.  Returns the circuit and the
    map from clause index to its gate.
    """
    n = phi.n_vars
    inner, outer = ("and", "or") if phi.kind == "dnf" else ("or", "and")
    types = ["var"] * n
    inputs: list[tuple[int, ...]] = [()] * n
    gate_of = {}
    for i, c in enumerate(phi.clauses):
        gate_of[i] = len(types)
        types.append(inner)
        inputs.append(tuple(v - 1 for v in sorted(c)))
    types.append(outer)
    inputs.append(tuple(gate_of.values()))
    return Circuit(tuple(types), tuple(inputs), len(types) - 1), gate_of


# --- DIMACS ----------------------------------------------------------------

def parse_dimacs(text: str) -> MonotoneFormula:
    """Parse ``p cnf V C`` or ``p dnf V C`` with positive literals only."""
    kind = None
    n_vars = n_clauses = 0
    clauses: list[list[int]] = []
    current: list[int] = []
    names = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.split()[:2] == ["c", "names"]:
            names = tuple(line.split()[2:])
            continue
        if not line or line[0] in "c%":
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] not in ("cnf", "dnf"):
                raise ParseError("expected 'p cnf V C' or 'p dnf V C'", lineno)
            kind = parts[1]
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("non-integer in problem line", lineno) from None
            continue
        if kind is None:
            raise ParseError("clause before problem line", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
            elif lit < 0:
                raise ParseError("negative literal in a monotone formula", lineno)
            elif lit > n_vars:
                raise ParseError(f"variable {lit} exceeds declared count {n_vars}", lineno)
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if kind is None:
        raise ParseError("missing problem line")
    if len(clauses) != n_clauses:
        raise ParseError(f"declared {n_clauses} clauses, found {len(clauses)}")
    if names is not None and len(names) != n_vars:
        raise ParseError(f"names line lists {len(names)} names for {n_vars} variables")
    try:
        return MonotoneFormula(kind, n_vars, tuple(frozenset(c) for c in clauses), names)
    except DegenerateInputError as exc:
        raise ParseError(str(exc)) from None


def format_dimacs(phi: MonotoneFormula) -> str:
    lines = []
    if phi.names:
        lines.append("c names " + " ".join(phi.names))
    lines.append(f"p {phi.kind} {phi.n_vars} {len(phi.clauses)}")
    for c in phi.clauses:
        lines.append(" ".join(map(str, sorted(c))) + " 0")
    return "\n".join(lines) + "\n"


# --- generators ----------------------------------------------------------

def _check_positive(name, n, minimum=1):
    if not isinstance(n, (int, np.integer)) or n < minimum:
        raise DegenerateInputError(f"{name} must be an integer >= {minimum}, got {n!r}")


def _pairs(n):
    names = []
    for i in range(1, n + 1):
        names += [f"x{i}", f"y{i}"]
    clauses = tuple(frozenset((2 * i - 1, 2 * i)) for i in range(1, n + 1))
    return clauses, tuple(names)


def gen_sint(n: int) -> MonotoneFormula:
    """Set intersection: the DNF (x1 & y1) | ... | (xn & yn).

    ``x_i`` is variable ``2i-1`` and ``y_i`` is variable ``2i``.
    """
    _check_positive("n", n)
    clauses, names = _pairs(n)
    return MonotoneFormula("dnf", 2 * n, clauses, names)


def gen_sdisj(n: int) -> MonotoneFormula:
    """The monotone CNF (x1 | y1) & ... & (xn | yn), same numbering as gen_sint."""
    _check_positive("n", n)
    clauses, names = _pairs(n)
    return MonotoneFormula("cnf", 2 * n, clauses, names)


def gen_grid_cnf(rows: int, cols: int) -> MonotoneFormula:
    """Monotone 2-CNF whose hypergraph is the rows x cols grid graph."""
    _check_positive("rows", rows, 2)
    _check_positive("cols", cols, 2)

    def vid(r, c):
        return r * cols + c + 1

    clauses = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                clauses.append(frozenset((vid(r, c), vid(r, c + 1))))
            if r + 1 < rows:
                clauses.append(frozenset((vid(r, c), vid(r + 1, c))))
    names = tuple(f"v{r}_{c}" for r in range(rows) for c in range(cols))
    return MonotoneFormula("cnf", rows * cols, tuple(clauses), names)


def _qp_match(f1, f2):
    """Can facts ``f1``, ``f2`` play R(x,y)|R(y,x) and R(y,z)|R(z,y) with x != z?"""
    for x, y in (f1, f1[::-1]):
        for y2, z in (f2, f2[::-1]):
            if y == y2 and x != z:
                return True
    return False


def gen_lineage_qp(edges: Iterable[tuple]) -> MonotoneFormula:
    """Lineage of "two facts that share one element" over a binary relation.

    Each distinct fact ``R(a, b)`` of ``edges`` is a variable (numbered in
    sorted fact order).  Clauses are the minimal matches: pairs of distinct
    facts that can be arranged as R(x,y), R(y,z) up to orientation with
    x != z.
    """
    facts = sorted({tuple(e) for e in edges}, key=lambda f: tuple(map(str, f)))
    if any(len(f) != 2 for f in facts):
        raise DegenerateInputError("facts must be pairs")
    clauses = []
    for i, j in itertools.combinations(range(len(facts)), 2):
        if _qp_match(facts[i], facts[j]) or _qp_match(facts[j], facts[i]):
            clauses.append(frozenset((i + 1, j + 1)))
    if not clauses:
        raise DegenerateInputError("the graph needs two incident edges for Q_p to have a match")
    names = tuple(f"{a}{b}" for a, b in facts)
    return MonotoneFormula("dnf", len(facts), tuple(clauses), names)


def random_circuit(rng: np.random.Generator, n_vars: int, n_gates: int,
                   window: int = 3, not_prob: float = 0.15) -> Circuit:
    """Random circuit whose gates read only from a sliding window of recent gates.

    The window keeps the treewidth small (roughly ``window``) without
    fixing it exactly.  The last gate is the output.
    """
    _check_positive("n_vars", n_vars)
    if n_gates <= n_vars:
        raise DegenerateInputError("need more gates than variables")
    types: list[str] = []
    inputs: list[tuple[int, ...]] = []
    recent: list[int] = []
    vars_left, internal_left = n_vars, n_gates - n_vars
    while vars_left or internal_left:
        steps_left = vars_left + internal_left
        emit_var = vars_left and (len(recent) < 2 or internal_left == 0
                                  or rng.random() < vars_left / steps_left)
        g = len(types)
        if emit_var:
            types.append("var")
            inputs.append(())
            vars_left -= 1
        else:
            if rng.random() < not_prob:
                t, fan_in = "not", 1
            else:
                t = "and" if rng.random() < 0.5 else "or"
                fan_in = int(rng.integers(2, 4))
            fan_in = min(fan_in, len(recent))
            # always read the newest gate so the circuit stays connected
            picked = {recent[-1]}
            others = recent[:-1]
            if fan_in > 1 and others:
                extra = rng.choice(len(others), size=min(fan_in - 1, len(others)), replace=False)
                picked |= {others[int(k)] for k in extra}
            types.append(t)
            inputs.append(tuple(sorted(picked)))
            internal_left -= 1
        recent.append(g)
        if len(recent) > window:
            recent.pop(0)
    return Circuit(tuple(types), tuple(inputs), len(types) - 1)


def random_monotone_formula(rng: np.random.Generator, kind: str, n_vars: int,
                            n_clauses: int, max_arity: int = 3,
                            max_degree: int = 3) -> MonotoneFormula:
    """Random minimized monotone formula with bounded arity and degree."""
    _check_positive("n_vars", n_vars, 2)
    uses = [0] * (n_vars + 1)
    clauses = []
    for _ in range(20 * n_clauses):
        if len(clauses) >= n_clauses:
            break
        free = [v for v in range(1, n_vars + 1) if uses[v] < max_degree]
        if len(free) < 2:
            break
        size = int(rng.integers(2, max_arity + 1))
        size = min(size, len(free))
        pick = frozenset(int(free[k]) for k in rng.choice(len(free), size=size, replace=False))
        if any(pick <= c or c <= pick for c in clauses):
            continue
        clauses.append(pick)
        for v in pick:
            uses[v] += 1
    if not clauses:
        clauses.append(frozenset((1, 2)))
    return MonotoneFormula(kind, n_vars, tuple(clauses))
