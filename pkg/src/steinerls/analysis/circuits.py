"""Circuits in the component graph and the tree-packing charging scheme.

Positions on a circuit are 1-based: ``v_1 .. v_{|C|+1}`` with
``v_{|C|+1} == v_1``, and circuit edge ``i`` joins positions ``i`` and
``i + 1``.  Packed trees keep their edges as position pairs ``(a, b)``
standing for the stretch of circuit between those positions; the node a
position refers to is ``node(a)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..connecting import component_order
from ..errors import InvariantViolation, NotMinimallyGuarded
from ..forest import Forest


@dataclass(frozen=True)
class GuardedCircuit:
    node_sequence: tuple[int, ...]
    edge_lengths: tuple[int, ...]

    def __post_init__(self):
        seq = tuple(self.node_sequence)
        object.__setattr__(self, "node_sequence", seq)
        object.__setattr__(self, "edge_lengths", tuple(self.edge_lengths))
        if len(seq) < 3 or seq[0] != seq[-1]:
            raise ValueError("a circuit needs at least two edges and must be closed")
        if len(self.edge_lengths) != len(seq) - 1:
            raise ValueError("one length per circuit edge is required")
        if any(a == b for a, b in zip(seq, seq[1:])):
            raise ValueError("circuits may not contain loops")

    @classmethod
    def from_sequence(cls, nodes: Sequence[int], lengths: Sequence[int] | None = None) -> "GuardedCircuit":
        nodes = tuple(nodes)
        if nodes[0] != nodes[-1]:
            nodes = nodes + (nodes[0],)
        return cls(nodes, tuple(lengths) if lengths is not None else (1,) * (len(nodes) - 1))

    @property
    def size(self) -> int:
        """Number of edges |C|."""
        return len(self.edge_lengths)

    def node(self, pos: int) -> int:
        return self.node_sequence[pos - 1]

    @property
    def visit_counts(self) -> dict[int, int]:
        return dict(Counter(self.node_sequence[:-1]))

    @property
    def xi(self) -> tuple[int, ...]:
        """Distinct nodes, largest first."""
        return tuple(sorted(set(self.node_sequence), reverse=True))

    @property
    def length(self) -> int:
        return sum(self.edge_lengths)

    @property
    def guarded(self) -> bool:
        v1 = self.node_sequence[0]
        return all(v < v1 for v in self.node_sequence[1:-1])

    def guarded_subcircuit(self) -> tuple[int, int] | None:
        """Innermost ``(i1, i2)`` with ``v_i1 == v_i2`` and only smaller nodes
        strictly between, with ``2 <= i1 < i2 <= |C|``; ``None`` if absent."""
        seq = self.node_sequence
        best = None
        last: dict[int, int] = {}
        for i in range(2, self.size + 1):
            v = seq[i - 1]
            if v in last:
                i1 = last[v]
                if all(seq[t - 1] < v for t in range(i1 + 1, i)):
                    if best is None or i - i1 < best[1] - best[0]:
                        best = (i1, i)
            last[v] = i
        return best

    @property
    def minimally_guarded(self) -> bool:
        return self.guarded and self.guarded_subcircuit() is None

    def rotated_to_max(self) -> "GuardedCircuit":
        body = list(self.node_sequence[:-1])
        lens = list(self.edge_lengths)
        k = body.index(max(body))
        body = body[k:] + body[:k]
        lens = lens[k:] + lens[:k]
        return GuardedCircuit(tuple(body + [body[0]]), tuple(lens))


def split_at_maximum(c: GuardedCircuit) -> list[GuardedCircuit]:
    """Cut a circuit at every visit of its largest node; each piece is guarded."""
    c = c.rotated_to_max()
    top = c.node_sequence[0]
    cuts = [i for i in range(1, c.size + 2) if c.node(i) == top]
    out = []
    for a, b in zip(cuts, cuts[1:]):
        out.append(GuardedCircuit(c.node_sequence[a - 1 : b], c.edge_lengths[a - 1 : b - 1]))
    return out


def minimal_decomposition(c: GuardedCircuit) -> list[GuardedCircuit]:
    """Split a guarded circuit into minimally guarded ones by cutting out
    innermost guarded subcircuits.  Edges are partitioned among the parts."""
    if not c.guarded:
        raise ValueError("circuit is not guarded")
    out = []
    stack = [c]
    while stack:
        cur = stack.pop()
        sub = cur.guarded_subcircuit()
        if sub is None:
            out.append(cur)
            continue
        i1, i2 = sub
        seq, lens = cur.node_sequence, cur.edge_lengths
        stack.append(GuardedCircuit(seq[i1 - 1 : i2], lens[i1 - 1 : i2 - 1]))
        stack.append(GuardedCircuit(seq[:i1] + seq[i2:], lens[: i1 - 1] + lens[i2 - 1 :]))
    return out


def _euler_shortcut(f: Forest, comp) -> list[int]:
    """Preorder of the component from its lowest vertex, lowest neighbor first."""
    start = comp.min_vertex
    seen = {start}
    order = []
    stack = [start]
    while stack:
        x = stack.pop()
        order.append(x)
        for y in sorted(f.adj[x], reverse=True):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return order


def extract_circuits(solution: Forest, reference: Forest, inst=None) -> list[GuardedCircuit]:
    """Map each reference component, shortcut to a cycle, onto the component
    graph of ``solution``.  Circuits start at their largest node; they are
    not necessarily guarded."""
    d = (inst or solution.inst).dist
    node_of_comp = {cid: k for k, cid in enumerate(component_order(solution), start=1)}
    node = [node_of_comp[solution.component_of[v]] for v in range(solution.inst.terminal_count)]
    out = []
    for comp in reference.components:
        if len(comp.vertices) < 2:
            continue
        order = _euler_shortcut(reference, comp)
        ring = order + [order[0]]
        kept = [(x, y) for x, y in zip(ring, ring[1:]) if node[x] != node[y]]
        if not kept:
            continue
        seq = [node[x] for x, _ in kept] + [node[kept[0][0]]]
        out.append(GuardedCircuit(tuple(seq), tuple(d[x][y] for x, y in kept)).rotated_to_max())
    return out


# -- tree packing ----------------------------------------------------------


@dataclass
class PackedTree:
    edges: list[tuple[int, int]]
    root: int


@dataclass
class TreePacking:
    """Edge-disjoint trees over circuit edges.

    ``trees`` is the output of the charging scheme; it covers every circuit
    edge except the closing edge ``(|C|, |C|+1)``.  ``full_trees`` adds that
    edge as a tree of its own.
    """

    circuit: GuardedCircuit
    trees: list[PackedTree]
    payments: dict[int, int] = field(default_factory=dict)

    def tree_nodes(self, t: PackedTree) -> frozenset[int]:
        return frozenset(self.circuit.node(x) for e in t.edges for x in e)

    def node_sets(self) -> list[frozenset[int]]:
        return [self.tree_nodes(t) for t in self.trees]

    @property
    def closing_tree(self) -> PackedTree:
        n = self.circuit.size
        return PackedTree([(n, n + 1)], n)

    @property
    def full_trees(self) -> list[PackedTree]:
        return self.trees + [self.closing_tree]

    @property
    def full_payments(self) -> dict[int, int]:
        return _payments([self.tree_nodes(t) for t in self.full_trees])

    def tree_length(self, t: PackedTree) -> int:
        return sum(sum(self.circuit.edge_lengths[a - 1 : b - 1]) for a, b in t.edges)


def _payments(node_sets) -> dict[int, int]:
    out: dict[int, int] = {}
    for nodes in node_sets:
        top = max(nodes)
        for v in nodes:
            if v != top:
                out[v] = out.get(v, 0) + 1
    return out


class _State:
    def __init__(self, c: GuardedCircuit):
        self.c = c
        self.trees: list[PackedTree] = []
        self.paths: dict[tuple[int, int], int | None] = {}

    def path_with_inner(self, j: int) -> tuple[int, int]:
        for a, b in self.paths:
            if a < j < b:
                return (a, b)
        raise KeyError(j)

    def split(self, path, j, left_owner, right_owner):
        a, b = path
        del self.paths[path]
        self.paths[(a, j)] = left_owner
        if j < b:
            self.paths[(j, b)] = right_owner

    def node_tree(self, t: PackedTree):
        """Parent edge (as a position pair) of each node, and node depths."""
        node = self.c.node
        adj: dict[int, list[tuple[int, tuple[int, int]]]] = {}
        for a, b in t.edges:
            adj.setdefault(node(a), []).append((node(b), (a, b)))
            adj.setdefault(node(b), []).append((node(a), (a, b)))
        root = node(t.root)
        parent = {root: None}
        depth = {root: 0}
        queue = [root]
        for x in queue:
            for y, e in adj.get(x, ()):
                if y not in parent:
                    parent[y] = e
                    depth[y] = depth[x] + 1
                    queue.append(y)
        return parent, depth


def _check(state: _State, k: int, xi: tuple[int, ...], counts: dict[int, int]) -> None:
    c = state.c
    n = c.size
    node = c.node

    def fail(msg):
        raise InvariantViolation(f"after iteration {k}: {msg}")

    owned = [(a, b) for t in state.trees for a, b in t.edges]
    # 1 + 4: every tree edge is exactly one current path, hence trees are disjoint
    if len(owned) != len(set(owned)):
        fail("two tree edges share a path")
    for i, t in enumerate(state.trees):
        for e in t.edges:
            if state.paths.get(e, -1) != i:
                fail(f"tree edge {e} does not correspond to a path it claims")
    for p, owner in state.paths.items():
        if owner is not None and p not in state.trees[owner].edges:
            fail(f"path {p} is claimed by a tree that lacks its edge")
    # 2: paths tile positions 1..|C|
    spans = sorted(state.paths)
    if spans[0][0] != 1 or spans[-1][1] != n or any(x[1] != y[0] for x, y in zip(spans, spans[1:])):
        fail(f"paths {spans} do not tile 1..{n}")
    # 3: outer nodes are processed, inner nodes are not (the open tail end excepted)
    done = set(xi[:k])
    for a, b in spans:
        for x in (a, b):
            if x != n and node(x) not in done:
                fail(f"outer node at position {x} is unprocessed")
        if any(node(x) in done for x in range(a + 1, b)):
            fail(f"path {(a, b)} has a processed inner node")
    # 5 and tree shape in node space
    for t in state.trees:
        parent, depth = state.node_tree(t)
        nodes = {node(x) for e in t.edges for x in e}
        if len(nodes) != len(t.edges) + 1 or set(parent) != nodes:
            fail(f"tree {t.edges} is not a tree over components")
        for a, b in t.edges:
            if depth[node(a)] >= depth[node(b)]:
                fail(f"edge {(a, b)} points towards the root")
    # payments
    pay = _payments([{node(x) for e in t.edges for x in e} for t in state.trees])
    for lvl in range(1, k):
        v = xi[lvl]
        if pay.get(v, 0) < counts[v]:
            fail(f"node {v} is paid {pay.get(v, 0)} < {counts[v]} times")


def charge_circuit(c: GuardedCircuit, check: bool = True) -> TreePacking:
    """Pack a minimally guarded circuit into edge-disjoint trees so that every
    node other than the largest is paid for at least as often as it is visited."""
    if not c.minimally_guarded:
        raise NotMinimallyGuarded(f"circuit {c.node_sequence} is not minimally guarded")
    n = c.size
    xi = c.xi
    counts = c.visit_counts
    node = c.node
    state = _State(c)
    (q,) = [j for j in range(2, n + 1) if node(j) == xi[1]]
    state.trees.append(PackedTree([(1, q)], 1))
    state.paths[(1, q)] = 0
    if q < n:
        state.paths[(q, n)] = None
    if check:
        _check(state, 2, xi, counts)
    for k in range(3, len(xi) + 1):
        target = xi[k - 1]
        occ = [j for j in range(2, n + 1) if node(j) == target]
        located = {}
        for j in occ:
            if j == n:
                tail = next(p for p in state.paths if p[1] == n)
                located[j] = tail
            else:
                located[j] = state.path_with_inner(j)
        if len(set(located.values())) != len(occ):
            raise InvariantViolation(f"two visits of {target} fall on one path")
        owners = {j: state.paths[p] for j, p in located.items()}
        # unclaimed stretches: a new single-edge tree claims the left part
        for j in occ:
            if owners[j] is None:
                a, b = located[j]
                state.trees.append(PackedTree([(a, j)], a))
                state.split((a, b), j, len(state.trees) - 1, None)
        # claimed stretches, grouped by tree
        for ti in sorted({o for o in owners.values() if o is not None}):
            t = state.trees[ti]
            mine = [j for j in occ if owners[j] == ti]
            parent, _ = state.node_tree(t)
            own_edges = {located[j]: j for j in mine}

            def clean(j):
                x = node(located[j][0])
                while parent[x] is not None:
                    e = parent[x]
                    if e in own_edges and own_edges[e] != j:
                        return False
                    x = node(e[0]) if node(e[1]) == x else node(e[1])
                return True

            star = next(j for j in mine if clean(j))
            a, b = located[star]
            t.edges.remove((a, b))
            t.edges += [(a, star), (star, b)]
            state.split((a, b), star, ti, ti)
            for j in mine:
                if j == star:
                    continue
                a, b = located[j]
                t.edges.remove((a, b))
                t.edges.append((j, b))
                state.trees.append(PackedTree([(a, j)], a))
                state.split((a, b), j, len(state.trees) - 1, ti)
        if check:
            _check(state, k, xi, counts)
    for t in state.trees:
        t.edges.sort()
        if any(b != a + 1 for a, b in t.edges):
            raise InvariantViolation(f"tree {t.edges} still uses a shortcut edge")
    packing = TreePacking(c, state.trees)
    packing.payments = _payments(packing.node_sets())
    return packing


@dataclass(frozen=True)
class PackingBound:
    lhs: int
    rhs: int
    c: int
    tree_gains: tuple[int, ...]
    tree_lengths: tuple[int, ...]

    @property
    def per_tree_ok(self) -> bool:
        return all(self.c * d >= g for d, g in zip(self.tree_lengths, self.tree_gains))

    @property
    def holds(self) -> bool:
        return self.per_tree_ok and self.lhs <= self.rhs


def packing_bound_terms(c: GuardedCircuit, packing: TreePacking, widths: Mapping[int, int], c_factor: int = 1) -> PackingBound:
    counts = c.visit_counts
    lhs = sum(counts[v] * widths[v] for v in c.xi[1:])
    gains = []
    lens = []
    for t in packing.trees:
        ws = [widths[v] for v in packing.tree_nodes(t)]
        gains.append(sum(ws) - max(ws))
        lens.append(packing.tree_length(t))
    return PackingBound(lhs, c_factor * c.length, c_factor, tuple(gains), tuple(lens))


def verify_packing_lower_bound(
    c: GuardedCircuit, packing: TreePacking, widths: Mapping[int, int], c_factor: int = 1
) -> bool:
    """True iff no packed tree is a ``c``-approximate connecting move and the
    weighted visit count is at most ``c`` times the circuit length."""
    return packing_bound_terms(c, packing, widths, c_factor).holds


def circuit_packing_bounds(
    solution: Forest, reference: Forest, c_factor: int | Fraction = 1
) -> list[tuple[GuardedCircuit, TreePacking, PackingBound]]:
    """Extract circuits, cut them into minimally guarded pieces, pack each and
    evaluate the weighted-visit bound with component widths of ``solution``."""
    order = component_order(solution)
    widths = {k: solution.components[cid].width for k, cid in enumerate(order, start=1)}
    out = []
    for circ in extract_circuits(solution, reference):
        for piece in split_at_maximum(circ):
            for m in minimal_decomposition(piece):
                packing = charge_circuit(m)
                out.append((m, packing, packing_bound_terms(m, packing, widths, c_factor)))
    return out
