"""Negation normal form circuits, v-trees, structural checks and queries.

An :class:`Nnf` is a list of nodes in topological order (every child has a
smaller index than its parent) whose last node is the root.  Nodes are

* ``("L", lit)`` a literal, ``lit`` being ``+v`` or ``-v`` for ``v`` in ``1..n_vars``;
* ``("A", children)`` a conjunction, the empty one being constant true;
* ``("O", children)`` a disjunction, the empty one being constant false.

This mirrors the c2d text format read and written by :func:`parse_nnf` and
:func:`format_nnf`.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, NamedTuple

from . import _truth
from .errors import NotDSDNNFError, ParseError, ProbabilityError, SizeLimitError

TRUE = ("A", ())
FALSE = ("O", ())


def _popcount(x):
    return bin(x).count("1")


@dataclass(frozen=True)
class Nnf:
    nodes: tuple
    n_vars: int

    def __post_init__(self):
        nodes = tuple((k, p if k == "L" else tuple(p)) for k, p in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if not nodes:
            raise ValueError("an NNF needs at least one node")
        for i, (kind, payload) in enumerate(nodes):
            if kind == "L":
                if not isinstance(payload, int) or payload == 0 or abs(payload) > self.n_vars:
                    raise ValueError(f"node {i}: literal {payload!r} out of range")
            elif kind in ("A", "O"):
                if any(not 0 <= c < i for c in payload):
                    raise ValueError(f"node {i}: children must precede their parent")
            else:
                raise ValueError(f"node {i}: unknown kind {kind!r}")

    @property
    def root(self):
        return len(self.nodes) - 1

    @property
    def n_edges(self):
        return sum(len(p) for k, p in self.nodes if k != "L")

    def __len__(self):
        """Size as nodes plus edges."""
        return len(self.nodes) + self.n_edges

    @cached_property
    def scopes(self) -> tuple[int, ...]:
        """Per node, the bitmask of variables below it (bit ``v - 1`` for ``v``)."""
        out = []
        for kind, payload in self.nodes:
            if kind == "L":
                out.append(1 << (abs(payload) - 1))
            else:
                acc = 0
                for c in payload:
                    acc |= out[c]
                out.append(acc)
        return tuple(out)

    def scope(self, node=None) -> frozenset:
        mask = self.scopes[self.root if node is None else node]
        return frozenset(j + 1 for j in _truth.iter_ones(mask))

    def reachable(self) -> frozenset:
        seen = {self.root}
        stack = [self.root]
        while stack:
            kind, payload = self.nodes[stack.pop()]
            if kind != "L":
                for c in payload:
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        return frozenset(seen)


def true_nnf(n_vars=0):
    return Nnf((TRUE,), n_vars)


def false_nnf(n_vars=0):
    return Nnf((FALSE,), n_vars)


# --- c2d text format -------------------------------------------------------

def format_nnf(nnf: Nnf) -> str:
    lines = [f"nnf {len(nnf.nodes)} {nnf.n_edges} {nnf.n_vars}"]
    for kind, payload in nnf.nodes:
        if kind == "L":
            lines.append(f"L {payload}")
        elif kind == "A":
            lines.append(" ".join(["A", str(len(payload)), *map(str, payload)]))
        else:
            lines.append(" ".join(["O", "0", str(len(payload)), *map(str, payload)]))
    return "\n".join(lines) + "\n"


def parse_nnf(text: str) -> Nnf:
    header = None
    nodes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError:
            raise ParseError(f"non-integer field in {raw!r}", lineno) from None
        tag = parts[0]
        if header is None:
            if tag != "nnf" or len(nums) != 3:
                raise ParseError("expected header 'nnf <nodes> <edges> <vars>'", lineno)
            header = nums
            continue
        if tag == "L" and len(nums) == 1:
            node = ("L", nums[0])
        elif tag == "A" and nums and len(nums) == nums[0] + 1:
            node = ("A", tuple(nums[1:]))
        elif tag == "O" and len(nums) >= 2 and len(nums) == nums[1] + 2:
            node = ("O", tuple(nums[2:]))
        else:
            raise ParseError(f"malformed node line {raw!r}", lineno)
        if node[0] == "L":
            if node[1] == 0 or abs(node[1]) > header[2]:
                raise ParseError(f"literal {node[1]} out of range", lineno)
        elif any(not 0 <= c < len(nodes) for c in node[1]):
            raise ParseError("child index does not refer to an earlier node", lineno)
        nodes.append(node)
    if header is None:
        raise ParseError("empty NNF file")
    if len(nodes) != header[0]:
        raise ParseError(f"header announces {header[0]} nodes, found {len(nodes)}")
    nnf = Nnf(tuple(nodes), header[2])
    if nnf.n_edges != header[1]:
        raise ParseError(f"header announces {header[1]} edges, found {nnf.n_edges}")
    return nnf


# --- simplification ----------------------------------------------------------

def simplify(nodes, n_vars, root=None, *, collapse_unary=True) -> Nnf:
    """Propagate constants, collapse unary gates, merge identical gates and
    drop everything unreachable from ``root`` (default: last node).

    Node order follows a depth-first traversal, so equal inputs give equal
    outputs.
    """
    nodes = list(nodes)
    if root is None:
        root = len(nodes) - 1
    memo: dict[int, object] = {}
    out: list = []
    index: dict = {}

    def emit(node):
        j = index.get(node)
        if j is None:
            j = index[node] = len(out)
            out.append(node)
        return j

    # iterative post-order to avoid recursion limits on deep inputs
    stack = [(root, False)]
    while stack:
        i, ready = stack.pop()
        if i in memo:
            continue
        kind, payload = nodes[i]
        if kind == "L":
            memo[i] = emit(("L", payload))
            continue
        if not ready:
            stack.append((i, True))
            stack.extend((c, False) for c in reversed(payload) if c not in memo)
            continue
        absorbing = False if kind == "A" else True
        kids = []
        result = None
        for c in payload:
            r = memo[c]
            if r is absorbing:
                result = absorbing
                break
            if r is not (not absorbing) and r not in kids:
                kids.append(r)
        if result is None:
            if not kids:
                result = not absorbing
            elif len(kids) == 1 and collapse_unary:
                result = kids[0]
            else:
                result = emit((kind, tuple(sorted(kids))))
        memo[i] = result
    r = memo[root]
    if r is True or r is False:
        return Nnf((TRUE if r else FALSE,), n_vars)
    # keep only what the root reaches, renumbered in order
    live = set()
    stack = [r]
    while stack:
        j = stack.pop()
        if j in live:
            continue
        live.add(j)
        if out[j][0] != "L":
            stack.extend(out[j][1])
    order = sorted(live)
    new = {j: i for i, j in enumerate(order)}
    final = []
    for j in order:
        kind, payload = out[j]
        final.append((kind, payload) if kind == "L" else (kind, tuple(new[c] for c in payload)))
    return Nnf(tuple(final), n_vars)


def restrict(nnf: Nnf, partial: Mapping[int, int]) -> Nnf:
    """Fix the variables of ``partial`` and simplify; never grows the NNF."""
    for v in partial:
        if not 1 <= v <= nnf.n_vars:
            raise ValueError(f"variable {v} out of range")
    nodes = []
    for kind, payload in nnf.nodes:
        if kind == "L" and abs(payload) in partial:
            value = bool(partial[abs(payload)]) == (payload > 0)
            nodes.append(TRUE if value else FALSE)
        else:
            nodes.append((kind, payload))
    return simplify(nodes, nnf.n_vars)


# --- evaluation oracles ------------------------------------------------------

def evaluate_nnf(nnf: Nnf, valuation: Mapping[int, int]) -> int:
    values = []
    for kind, payload in nnf.nodes:
        if kind == "L":
            values.append(int(bool(valuation[abs(payload)]) == (payload > 0)))
        elif kind == "A":
            values.append(int(all(values[c] for c in payload)))
        else:
            values.append(int(any(values[c] for c in payload)))
    return values[-1]


def nnf_truth_tables(nnf: Nnf, variables=None) -> list[int]:
    """Truth table of every node over ``variables`` (default ``1..n_vars``)."""
    if variables is None:
        variables = range(1, nnf.n_vars + 1)
    pos = {v: j for j, v in enumerate(variables)}
    n = len(pos)
    mask = _truth.full_mask(n)
    tables = []
    for kind, payload in nnf.nodes:
        if kind == "L":
            t = _truth.var_pattern(pos[abs(payload)], n)
            tables.append(t if payload > 0 else mask ^ t)
        elif kind == "A":
            acc = mask
            for c in payload:
                acc &= tables[c]
            tables.append(acc)
        else:
            acc = 0
            for c in payload:
                acc |= tables[c]
            tables.append(acc)
    return tables


def nnf_truth_table(nnf: Nnf, variables=None) -> int:
    return nnf_truth_tables(nnf, variables)[-1]


# --- v-trees -------------------------------------------------------------------

class VTree:
    """A rooted ordered binary tree whose leaves are distinct integers.

    ``shape`` is a nested structure: an ``int`` leaf or a ``(left, right)``
    pair; ``None`` is the empty v-tree.  Nodes are numbered in preorder.
    """

    def __init__(self, shape):
        self.shape = shape
        self.kids: list[tuple[int, int] | None] = []
        self.labels: list[int | None] = []
        self.masks: list[frozenset] = []
        self.parent: list[int | None] = []
        if shape is not None:
            self._index(shape, None)
        seen = [x for x in self.labels if x is not None]
        if len(seen) != len(set(seen)):
            raise ValueError("v-tree leaves must be distinct")

    def _index(self, shape, parent):
        # explicit stack: v-trees can be as deep as the variable count
        stack = [(shape, parent, None, 0)]
        while stack:
            sub, par, slot, side = stack.pop()
            i = len(self.kids)
            self.parent.append(par)
            self.masks.append(frozenset())
            if slot is not None:
                pair = list(self.kids[slot])
                pair[side] = i
                self.kids[slot] = tuple(pair)
            if isinstance(sub, tuple):
                if len(sub) != 2:
                    raise ValueError("v-tree nodes must be binary")
                self.kids.append((-1, -1))
                self.labels.append(None)
                stack.append((sub[1], i, i, 1))
                stack.append((sub[0], i, i, 0))
            else:
                self.kids.append(None)
                self.labels.append(int(sub))
        for i in reversed(range(len(self.kids))):
            if self.kids[i] is None:
                self.masks[i] = frozenset((self.labels[i],))
            else:
                a, b = self.kids[i]
                self.masks[i] = self.masks[a] | self.masks[b]

    def __len__(self):
        return len(self.kids)

    def __eq__(self, other):
        return isinstance(other, VTree) and self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)

    def __repr__(self):
        return f"VTree({format_vtree(self)})"

    @property
    def leaves(self) -> frozenset:
        return self.masks[0] if self.kids else frozenset()

    def leaf_order(self) -> list[int]:
        return [x for x in self.labels if x is not None]

    def lca(self, items) -> int:
        """Deepest node whose leaf set contains ``items`` (which must be a subset)."""
        items = frozenset(items)
        node = 0
        while self.kids[node] is not None:
            a, b = self.kids[node]
            if items <= self.masks[a]:
                node = a
            elif items <= self.masks[b]:
                node = b
            else:
                break
        return node


def format_vtree(vtree: VTree) -> str:
    def fmt(shape):
        if isinstance(shape, tuple):
            return f"({fmt(shape[0])} {fmt(shape[1])})"
        return str(shape)
    return "()" if vtree.shape is None else fmt(vtree.shape)


def parse_vtree(text: str) -> VTree:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    if tokens == ["(", ")"]:
        return VTree(None)
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of v-tree")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            left = take()
            right = take()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ParseError("v-tree node must have exactly two children")
            pos += 1
            return (left, right)
        if tok == ")":
            raise ParseError("unexpected ')' in v-tree")
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"bad v-tree leaf {tok!r}") from None

    shape = take()
    if pos != len(tokens):
        raise ParseError("trailing tokens after v-tree")
    try:
        return VTree(shape)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def right_linear_vtree(order) -> VTree:
    order = list(order)
    if not order:
        return VTree(None)
    shape = order[-1]
    for v in reversed(order[:-1]):
        shape = (v, shape)
    return VTree(shape)


# --- structural checks -----------------------------------------------------

class CheckResult(NamedTuple):
    ok: bool
    reason: str = "ok"
    witness: object = None

    def __bool__(self):
        return self.ok


def check_nnf(nnf: Nnf) -> CheckResult:
    """Children precede parents and negations sit on variables only.

    Both hold by construction of :class:`Nnf`; this re-checks the node list
    for objects built by hand.
    """
    for i, (kind, payload) in enumerate(nnf.nodes):
        if kind == "L":
            if payload == 0 or abs(payload) > nnf.n_vars:
                return CheckResult(False, f"node {i} has an invalid literal", i)
        elif kind not in ("A", "O"):
            return CheckResult(False, f"node {i} has kind {kind!r}", i)
        elif any(not 0 <= c < i for c in payload):
            return CheckResult(False, f"node {i} has a child that does not precede it", i)
    return CheckResult(True)


def check_decomposable(nnf: Nnf) -> CheckResult:
    scopes = nnf.scopes
    for i, (kind, payload) in enumerate(nnf.nodes):
        if kind != "A":
            continue
        seen = 0
        for c in payload:
            shared = seen & scopes[c]
            if shared:
                var = (shared & -shared).bit_length()
                return CheckResult(False, f"and-node {i} shares variable {var} between inputs", (i, var))
            seen |= scopes[c]
    return CheckResult(True)


def check_structured(nnf: Nnf, vtree: VTree) -> CheckResult:
    """Every and-node with two or more inputs is structured by some v-tree node.

    And-nodes with a single input, or with a single input of non-empty scope,
    impose no constraint (they disappear when the matching unary v-tree node
    is contracted).
    """
    variables = frozenset(range(1, nnf.n_vars + 1))
    if vtree.leaves != variables:
        return CheckResult(False, "v-tree leaves differ from the NNF variables",
                           sorted(vtree.leaves ^ variables))
    cache = {}
    for i, (kind, payload) in enumerate(nnf.nodes):
        if kind != "A" or len(payload) < 2:
            continue
        if len(payload) > 2:
            return CheckResult(False, f"and-node {i} has {len(payload)} inputs", i)
        a, b = (nnf.scope(c) for c in payload)
        key = (a, b)
        if key not in cache:
            cache[key] = _structuring_node(vtree, a, b)
        if cache[key] is None:
            return CheckResult(False, f"no v-tree node structures and-node {i}", i)
    return CheckResult(True)


def _structuring_node(vtree, a, b):
    if not (a and b):
        # an empty side is a constant; the v-tree has no node for it (empty
        # subtrees are pruned), so this is treated like a unary and-node
        return 0
    n = vtree.lca(a | b)
    if vtree.kids[n] is None:
        return None
    left, right = vtree.kids[n]
    ml, mr = vtree.masks[left], vtree.masks[right]
    return n if (a <= ml and b <= mr) or (b <= ml and a <= mr) else None


def check_deterministic_exhaustive(nnf: Nnf, max_vars: int = 16) -> CheckResult:
    """Check every or-node for two inputs true at once, over all valuations.

    The witness is ``(node, valuation)``.
    """
    if nnf.n_vars > max_vars:
        raise SizeLimitError(f"exhaustive determinism check limited to {max_vars} variables")
    tables = nnf_truth_tables(nnf)
    variables = tuple(range(1, nnf.n_vars + 1))
    for i, (kind, payload) in enumerate(nnf.nodes):
        if kind != "O":
            continue
        acc = 0
        for c in payload:
            both = acc & tables[c]
            if both:
                index = (both & -both).bit_length() - 1
                return CheckResult(False, f"or-node {i} has two inputs true at once",
                                   (i, _truth.bit_to_valuation(index, variables)))
            acc |= tables[c]
    return CheckResult(True)


def check_d_sdnnf(nnf: Nnf, vtree: VTree | None = None, max_vars: int = 16) -> CheckResult:
    """Run the NNF, decomposability, structuredness and determinism checks in turn."""
    checks = [check_nnf(nnf), check_decomposable(nnf)]
    if vtree is not None:
        checks.append(check_structured(nnf, vtree))
    for res in checks:
        if not res:
            return res
    return check_deterministic_exhaustive(nnf, max_vars)


def require_d_dnnf(nnf: Nnf, vtree: VTree | None = None, max_vars: int = 16):
    res = check_d_sdnnf(nnf, vtree, max_vars) if nnf.n_vars <= max_vars else check_decomposable(nnf)
    if not res:
        raise NotDSDNNFError(res.reason, res.witness)


# --- queries ---------------------------------------------------------------

def _probabilities(nnf, pi, exact):
    if isinstance(pi, Mapping):
        get = pi.get
    else:
        seq = list(pi)
        if len(seq) != nnf.n_vars:
            raise ProbabilityError(f"expected {nnf.n_vars} probabilities, got {len(seq)}")
        get = lambda v: seq[v - 1]  # noqa: E731
    probs = {}
    for v in sorted(nnf.scope()):
        p = get(v)
        if p is None:
            raise ProbabilityError(f"no probability for variable {v}")
        p = Fraction(p) if exact else float(p)
        if not 0 <= p <= 1:
            raise ProbabilityError(f"probability {p} of variable {v} is outside [0, 1]")
        probs[v] = p
    return probs


def probability(nnf: Nnf, pi, *, exact: bool = False):
    """Probability that the NNF is true when each variable ``v`` is
    independently true with probability ``pi[v]``.

    ``pi`` is a mapping from variable to probability or a sequence indexed
    by ``v - 1``.  The NNF must be decomposable and deterministic; this is
    not re-checked.  With ``exact`` the computation uses fractions.
    """
    probs = _probabilities(nnf, pi, exact)
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    values = []
    for kind, payload in nnf.nodes:
        if kind == "L":
            p = probs[abs(payload)]
            values.append(p if payload > 0 else one - p)
        elif kind == "A":
            acc = one
            for c in payload:
                acc *= values[c]
            values.append(acc)
        else:
            acc = zero
            for c in payload:
                acc += values[c]
            values.append(acc)
    return values[-1]


def model_count(nnf: Nnf) -> int:
    """Number of satisfying valuations of ``1..n_vars`` (exact integer)."""
    scopes = nnf.scopes
    counts = []
    for i, (kind, payload) in enumerate(nnf.nodes):
        if kind == "L":
            counts.append(1)
        elif kind == "A":
            acc = 1
            for c in payload:
                acc *= counts[c]
            counts.append(acc)
        else:
            width = _popcount(scopes[i])
            counts.append(sum(counts[c] << (width - _popcount(scopes[c])) for c in payload))
    return counts[-1] << (nnf.n_vars - _popcount(scopes[-1]))


class Model(NamedTuple):
    """A set of valuations: ``true`` variables set, ``dont_care`` free, the rest false."""

    true: frozenset
    dont_care: frozenset

    def expand(self) -> Iterator[frozenset]:
        free = sorted(self.dont_care)
        for bits in range(1 << len(free)):
            yield self.true | {v for j, v in enumerate(free) if bits >> j & 1}

    def size(self):
        return 1 << len(self.dont_care)

    def format(self):
        return " ".join([*map(str, sorted(self.true)), *(f"*{v}" for v in sorted(self.dont_care))])


def _satisfiable(nnf):
    sat = []
    for kind, payload in nnf.nodes:
        if kind == "L":
            sat.append(True)
        elif kind == "A":
            sat.append(all(sat[c] for c in payload))
        else:
            sat.append(any(sat[c] for c in payload))
    return sat


def enumerate_models(nnf: Nnf) -> Iterator[Model]:
    """Stream the models of a deterministic decomposable NNF, each once.

    Every yielded :class:`Model` stands for ``2**len(dont_care)`` valuations;
    distinct models stand for disjoint sets.  Only satisfiable nodes are
    visited, so the delay between outputs is polynomial.
    """
    sat = _satisfiable(nnf)
    if not sat[-1]:
        return
    full = (1 << nnf.n_vars) - 1

    def walk(i):
        # yields (ones, assigned) bitmasks over scope(i)
        kind, payload = nnf.nodes[i]
        if kind == "L":
            bit = 1 << (abs(payload) - 1)
            yield (bit if payload > 0 else 0), bit
        elif kind == "O":
            for c in payload:
                if sat[c]:
                    yield from walk(c)
        else:
            yield from _product(list(payload), 0, 0)

    def _product(kids, ones, assigned):
        if not kids:
            yield ones, assigned
            return
        for o, a in walk(kids[0]):
            yield from _product(kids[1:], ones | o, assigned | a)

    for ones, assigned in walk(nnf.root):
        yield Model(_bits(ones), _bits(full & ~assigned))


def _bits(mask):
    return frozenset(j + 1 for j in _truth.iter_ones(mask))


def models_expanded(nnf: Nnf) -> list[frozenset]:
    """All models as sets of true variables, sorted by (size, members)."""
    out = [m for model in enumerate_models(nnf) for m in model.expand()]
    return sorted(out, key=lambda s: (len(s), sorted(s)))
