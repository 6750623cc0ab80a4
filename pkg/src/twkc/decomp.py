"""Tree and path decompositions.

A decomposition is stored as parallel tuples: ``bags[i]`` is the label of
node ``i`` and ``children[i]`` its children; ``root`` names the root node.
Subjects (what is being decomposed) are passed explicitly: a
:class:`~twkc.circuit.Circuit` (vertices are gates, edges are wires), a
:class:`~twkc.circuit.Hypergraph` or :class:`~twkc.circuit.MonotoneFormula`,
or a plain ``(vertices, edges)`` pair.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .circuit import Circuit, Hypergraph, MonotoneFormula
from .errors import DecompositionError, ParseError, SizeLimitError

EXACT_LIMIT = 20


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset, ...]
    children: tuple[tuple[int, ...], ...]
    root: int = 0

    def __post_init__(self):
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in self.bags))
        object.__setattr__(self, "children", tuple(tuple(c) for c in self.children))
        if len(self.bags) != len(self.children):
            raise DecompositionError("bags and children have different lengths")
        if self.bags and not 0 <= self.root < len(self.bags):
            raise DecompositionError("root is not a node")
        seen = set()
        for node in self.preorder():
            if node in seen:
                raise DecompositionError("decomposition is not a tree")
            seen.add(node)
        if len(seen) != len(self.bags):
            raise DecompositionError("decomposition is not connected")

    def __len__(self):
        return len(self.bags)

    @property
    def width(self):
        return max((len(b) for b in self.bags), default=0) - 1

    @cached_property
    def parent(self) -> tuple[int | None, ...]:
        par: list[int | None] = [None] * len(self.bags)
        for p, kids in enumerate(self.children):
            for c in kids:
                par[c] = p
        return tuple(par)

    def preorder(self):
        if not self.bags:
            return
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(self.children[node]))

    def postorder(self):
        return reversed(list(_reverse_preorder(self)))

    def vertices(self):
        return frozenset().union(*self.bags) if self.bags else frozenset()

    def is_path(self):
        return _undirected_is_path(self)


def _reverse_preorder(td):
    # root, then children right-to-left: reversing yields a valid post-order
    stack = [td.root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(td.children[node])


def _undirected_is_path(td):
    deg = [len(k) for k in td.children]
    for c, p in enumerate(td.parent):
        if p is not None:
            deg[c] += 1
    return all(d <= 2 for d in deg)


@dataclass(frozen=True)
class NiceTreeDecomposition(TreeDecomposition):
    """A nice decomposition plus, per bag, the variable it is responsible for.

    ``responsible[b]`` is the variable whose topmost bag is ``b`` (or None).
    """

    responsible: tuple[int | None, ...] = ()


@dataclass(frozen=True)
class Report:
    ok: bool
    message: str = "ok"
    witness: object = None

    def __bool__(self):
        return self.ok


# --- subjects ------------------------------------------------------------

def subject_graph(subject):
    """Return ``(vertices, edges, edge_noun)`` for any supported subject."""
    if isinstance(subject, Circuit):
        return frozenset(range(subject.n_gates)), subject.wires, "wire"
    if isinstance(subject, MonotoneFormula):
        subject = subject.hypergraph
    if isinstance(subject, Hypergraph):
        return subject.vertices, tuple(tuple(sorted(e)) for e in subject.edges), "edge"
    vertices, edges = subject
    edges = tuple(tuple(e) for e in edges)
    return frozenset(vertices) | {v for e in edges for v in e}, edges, "edge"


def primal_adjacency(subject) -> dict:
    vertices, edges, _ = subject_graph(subject)
    adj = {v: set() for v in vertices}
    for e in edges:
        for u in e:
            for w in e:
                if u != w:
                    adj[u].add(w)
    return adj


# --- validation ----------------------------------------------------------

def validate(td: TreeDecomposition, subject) -> Report:
    """Check both tree decomposition conditions literally.

    Returns a :class:`Report`; the witness is the uncovered edge or the
    vertex whose bags are disconnected.
    """
    _, edges, noun = subject_graph(subject)
    for e in edges:
        es = frozenset(e)
        if not any(es <= b for b in td.bags):
            return Report(False, f"uncovered {noun} {tuple(e)}", tuple(e))
    holders: dict = {}
    for i, b in enumerate(td.bags):
        for v in b:
            holders.setdefault(v, []).append(i)
    par = td.parent
    for v in sorted(holders, key=repr):
        nodes = holders[v]
        # bags holding v are connected iff exactly one of them has its parent outside
        tops = [i for i in nodes if par[i] is None or v not in td.bags[par[i]]]
        if len(tops) != 1:
            return Report(False, f"bags containing vertex {v} are not connected", v)
    return Report(True, f"ok, width {td.width}")


def check_nice(td: TreeDecomposition) -> Report:
    """Check the five niceness conditions."""
    for i, kids in enumerate(td.children):
        b = td.bags[i]
        if len(kids) not in (0, 2):
            return Report(False, f"bag {i} has {len(kids)} children", i)
        if kids:
            if not b <= td.bags[kids[0]] | td.bags[kids[1]]:
                return Report(False, f"bag {i} is not covered by its children", i)
        elif len(b) > 1:
            return Report(False, f"leaf bag {i} has {len(b)} vertices", i)
        p = td.parent[i]
        if p is not None and len(b - td.bags[p]) > 1:
            return Report(False, f"bag {i} forgets {len(b - td.bags[p])} vertices", i)
    if td.bags and len(td.bags[td.root]) > 1:
        return Report(False, "root bag has more than one vertex", td.root)
    return Report(True)


# --- normalization -------------------------------------------------------

class _Builder:
    def __init__(self):
        self.labels: list[frozenset] = []
        self.kids: list[list[int]] = []

    def new(self, label, kids=()):
        self.labels.append(frozenset(label))
        self.kids.append(list(kids))
        return len(self.labels) - 1

    def freeze(self, root, cls=TreeDecomposition, **extra):
        # renumber in preorder so that the root is node 0
        order, stack = [], [root]
        while stack:
            n = stack.pop()
            order.append(n)
            stack.extend(reversed(self.kids[n]))
        index = {n: i for i, n in enumerate(order)}
        return cls(tuple(self.labels[n] for n in order),
                   tuple(tuple(index[c] for c in self.kids[n]) for n in order),
                   0, **extra)


def _introduce_chain(bld, label, base_kids, missing):
    """Chain of bags from ``label`` down to ``label - missing``, one vertex at a time.

    Each chain bag gets a leaf child introducing one vertex; the bottom bag
    takes ``base_kids``.  Returns the top node.
    """
    missing = sorted(missing, key=repr)
    current = frozenset(label) - frozenset(missing)
    if base_kids or current:
        node = bld.new(current, base_kids)
    else:
        # leaf: start the chain from the first vertex alone
        first, missing = missing[0], missing[1:]
        current = frozenset((first,))
        node = bld.new(current)
    for v in missing:
        leaf = bld.new((v,))
        current = current | {v}
        node = bld.new(current, (node, leaf))
    return node


def make_nice(td: TreeDecomposition, k: int | None = None, *, keep=None) -> TreeDecomposition:
    """Turn a tree decomposition into a nice one of the same width.

    Runs four passes: binarize, introduce vertices one at a time, insert
    forget chains, and pad unary bags with an empty leaf.  When ``keep`` is
    given, the root forget chain retains that vertex last.
    """
    if not td.bags:
        raise DecompositionError("empty decomposition")
    if k is not None and td.width > k:
        raise DecompositionError(f"decomposition has width {td.width} > {k}")
    bld = _Builder()
    top: dict[int, int] = {}
    # passes 1 and 2, bottom-up over the original tree
    for node in td.postorder():
        label = td.bags[node]
        kids = [top[c] for c in td.children[node]]
        if len(kids) > 2:
            kids = _binarize(bld, label, kids)
        covered = frozenset().union(*(bld.labels[c] for c in kids)) if kids else frozenset()
        missing = label - covered
        if not kids and len(label) <= 1:
            top[node] = bld.new(label)
        elif missing and (kids or len(label) > 1):
            top[node] = _introduce_chain(bld, label, kids, missing)
        else:
            top[node] = bld.new(label, kids)
    root = top[td.root]
    # pass 3: forget chains on every parent/child interface
    stack = [root]
    while stack:
        p = stack.pop()
        new_kids = []
        for c in bld.kids[p]:
            stack.append(c)
            extra = sorted(bld.labels[c] - bld.labels[p], key=repr)
            cur, label = c, bld.labels[c]
            while len(extra) > 1:
                label = label - {extra.pop(0)}
                cur = bld.new(label, (cur,))
            new_kids.append(cur)
        bld.kids[p] = new_kids
    label = bld.labels[root]
    drop = sorted(label - ({keep} if keep is not None else set()), key=repr)
    while len(label) > 1:
        label = label - {drop.pop(0)}
        root = bld.new(label, (root,))
    # pass 4: full binary tree
    for n in range(len(bld.kids)):
        if len(bld.kids[n]) == 1:
            bld.kids[n].append(bld.new(()))
    return bld.freeze(root)


def _binarize(bld, label, kids):
    while len(kids) > 2:
        pair = kids[-2:]
        joint = label & (bld.labels[pair[0]] | bld.labels[pair[1]])
        kids = kids[:-2] + [bld.new(joint, pair)]
    return kids


def _reroot(td: TreeDecomposition, new_root: int) -> TreeDecomposition:
    adj = [list(k) for k in td.children]
    for c, p in enumerate(td.parent):
        if p is not None:
            adj[c].append(p)
    children: list[list[int]] = [[] for _ in td.bags]
    seen = {new_root}
    queue = deque([new_root])
    while queue:
        n = queue.popleft()
        for m in sorted(adj[n]):
            if m not in seen:
                seen.add(m)
                children[n].append(m)
                queue.append(m)
    return TreeDecomposition(td.bags, tuple(map(tuple, children)), new_root)


def responsibilities(td: TreeDecomposition, variables) -> tuple[int | None, ...]:
    """For each bag, the variable whose topmost bag it is (nice input assumed)."""
    variables = set(variables)
    resp: list[int | None] = [None] * len(td.bags)
    for i, b in enumerate(td.bags):
        p = td.parent[i]
        fresh = [v for v in b if v in variables and (p is None or v not in td.bags[p])]
        if len(fresh) > 1:
            raise DecompositionError(f"bag {i} is topmost for several variables")
        if fresh:
            resp[i] = fresh[0]
    return tuple(resp)


def root_for_compile(nice: TreeDecomposition, output: int,
                     variables=None) -> NiceTreeDecomposition:
    """Re-root a decomposition so that the root bag is exactly ``{output}``.

    The tree is re-rooted at the topmost bag holding ``output`` and the nice
    passes are rerun with ``output`` kept for last in the root forget chain.
    ``variables`` (default: every vertex) selects which vertices get a
    responsible bag.
    """
    holder = next((n for n in nice.preorder() if output in nice.bags[n]), None)
    if holder is None:
        raise DecompositionError(f"output gate {output} occurs in no bag")
    rerooted = _reroot(nice, holder)
    again = make_nice(rerooted, keep=output)
    if variables is None:
        variables = again.vertices()
    resp = responsibilities(again, variables)
    return NiceTreeDecomposition(again.bags, again.children, again.root, resp)


# --- construction --------------------------------------------------------

def _from_elimination(adj, order):
    """Tree decomposition from an elimination ordering of a graph."""
    adj = {v: set(n) for v, n in adj.items()}
    position = {v: i for i, v in enumerate(order)}
    bags = []
    for v in order:
        nb = adj[v]
        bags.append(frozenset(nb | {v}))
        for u in nb:
            adj[u] |= nb - {u}
            adj[u].discard(v)
        del adj[v]
    parent: list[int | None] = []
    for i, v in enumerate(order):
        later = [position[u] for u in bags[i] if u != v]
        parent.append(min(later) if later else None)
    roots = [i for i, p in enumerate(parent) if p is None]
    for a, b in zip(roots, roots[1:]):
        parent[a] = b
    children: list[list[int]] = [[] for _ in bags]
    for i, p in enumerate(parent):
        if p is not None:
            children[p].append(i)
    root = roots[-1] if roots else 0
    return TreeDecomposition(tuple(bags), tuple(map(tuple, children)), root)


def minfill_order(subject):
    adj = primal_adjacency(subject)
    work = {v: set(n) for v, n in adj.items()}
    order = []
    while work:
        def fill(v):
            nb = sorted(work[v], key=repr)
            return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in work[a])
        v = min(work, key=lambda u: (fill(u), u))
        nb = work.pop(v)
        for u in nb:
            work[u] |= nb - {u}
            work[u].discard(v)
        order.append(v)
    return order, adj


def minfill(subject) -> TreeDecomposition:
    """Min-fill heuristic decomposition (ties broken by lowest vertex id)."""
    order, adj = minfill_order(subject)
    if not order:
        raise DecompositionError("nothing to decompose")
    return _from_elimination(adj, order)


def _indexed(subject, limit):
    adj = primal_adjacency(subject)
    verts = sorted(adj, key=repr)
    if len(verts) > limit:
        raise SizeLimitError(f"exact solver limited to {limit} vertices, got {len(verts)}")
    idx = {v: i for i, v in enumerate(verts)}
    masks = [0] * len(verts)
    for v, nb in adj.items():
        for u in nb:
            masks[idx[v]] |= 1 << idx[u]
    return masks


def exact_treewidth(subject, limit: int = EXACT_LIMIT) -> int:
    """Treewidth by dynamic programming over vertex subsets.

    TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|), where Q(S, v)
    is the set of vertices outside S + v reachable from v through S.
    """
    adj = _indexed(subject, limit)
    n = len(adj)
    if n == 0:
        return -1

    def q(s, v):
        seen = (1 << v) | s
        frontier = adj[v]
        out = frontier & ~s
        inner = frontier & s & ~(1 << v)
        seen |= frontier
        while inner:
            low = inner & -inner
            inner ^= low
            u = low.bit_length() - 1
            nb = adj[u] & ~seen
            seen |= nb
            out |= nb & ~s
            inner |= nb & s
        return bin(out & ~(1 << v)).count("1")

    tw = [0] * (1 << n)
    tw[0] = -1
    for s in range(1, 1 << n):
        best = n
        rest = s
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            prev = s ^ low
            cand = max(tw[prev], q(prev, v))
            if cand < best:
                best = cand
        tw[s] = best
    return tw[(1 << n) - 1]


def exact_pathwidth(subject, limit: int = EXACT_LIMIT) -> int:
    """Pathwidth as vertex separation number, by DP over prefix sets."""
    adj = _indexed(subject, limit)
    n = len(adj)
    if n == 0:
        return -1
    full = (1 << n) - 1
    reach = [0] * (1 << n)
    pw = [0] * (1 << n)
    for s in range(1, 1 << n):
        low = s & -s
        reach[s] = reach[s ^ low] | adj[low.bit_length() - 1]
        boundary = bin(reach[s] & ~s & full).count("1")
        best = n
        rest = s
        while rest:
            b = rest & -rest
            rest ^= b
            if pw[s ^ b] < best:
                best = pw[s ^ b]
        pw[s] = max(boundary, best)
    return pw[full]


# --- PACE .td ------------------------------------------------------------

def parse_pace_td(text: str, vertex_offset: int = 1) -> TreeDecomposition:
    """Read a PACE 2017 ``.td`` file; vertices are shifted down by ``vertex_offset``.

    The tree is rooted at bag 1.
    """
    header = None
    bags: dict[int, frozenset] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "s":
                if parts[1] != "td" or len(parts) != 5:
                    raise ParseError("expected 's td <bags> <width+1> <vertices>'", lineno)
                header = tuple(int(p) for p in parts[2:])
            elif parts[0] == "b":
                bags[int(parts[1])] = frozenset(int(p) - vertex_offset for p in parts[2:])
            else:
                if len(parts) != 2:
                    raise ParseError(f"malformed line {raw!r}", lineno)
                edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(f"non-integer in {raw!r}", lineno) from None
    if header is None:
        raise ParseError("missing 's td' line")
    n_bags = header[0]
    if sorted(bags) != list(range(1, n_bags + 1)):
        raise ParseError(f"expected bags 1..{n_bags}")
    if len(edges) != max(n_bags - 1, 0):
        raise ParseError(f"a tree on {n_bags} bags needs {n_bags - 1} edges")
    adj: dict[int, list[int]] = {i: [] for i in bags}
    for a, b in edges:
        if a not in adj or b not in adj:
            raise ParseError(f"edge ({a}, {b}) mentions an unknown bag")
        adj[a].append(b)
        adj[b].append(a)
    children: dict[int, list[int]] = {i: [] for i in bags}
    seen = {1}
    queue = deque([1])
    while queue:
        n = queue.popleft()
        for m in sorted(adj[n]):
            if m not in seen:
                seen.add(m)
                children[n].append(m)
                queue.append(m)
    if len(seen) != n_bags:
        raise ParseError("bag graph is not connected")
    return TreeDecomposition(tuple(bags[i] for i in range(1, n_bags + 1)),
                             tuple(tuple(c - 1 for c in children[i]) for i in range(1, n_bags + 1)),
                             0)


def format_pace_td(td: TreeDecomposition, n_vertices: int, vertex_offset: int = 1) -> str:
    lines = [f"s td {len(td.bags)} {td.width + 1} {n_vertices}"]
    for i, b in enumerate(td.bags):
        lines.append(" ".join(["b", str(i + 1), *(str(v + vertex_offset) for v in sorted(b))]))
    for p, kids in enumerate(td.children):
        for c in kids:
            lines.append(f"{p + 1} {c + 1}")
    return "\n".join(lines) + "\n"
