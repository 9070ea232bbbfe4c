"""Candidate solutions: forests over the terminal indices of a metric instance.

A :class:`Forest` is an immutable snapshot.  Components are computed once at
construction and carry their length, width and index, so the potential

    phi = total edge length + sum of component widths

is a cheap sum.  Vertex sets are stored as int bitmasks next to the frozensets
because the move code does a lot of set arithmetic on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from scipy.cluster.hierarchy import DisjointSet

from .errors import EndpointsDisconnected, InfeasibleInput, ValidationError
from .instance import Edge, MetricInstance

ESSENTIAL = "essential"
INESSENTIAL = "inessential"


def norm_edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Component:
    cid: int
    vertices: frozenset[int]
    mask: int
    edges: frozenset[Edge]
    length: int
    width: int
    index: int | None

    @property
    def min_vertex(self) -> int:
        return min(self.vertices)


class Forest:
    """An acyclic edge set over the terminals of ``inst``.

    Isolated terminals count as (trivial) components, so the component list
    always partitions ``0..n-1``.
    """

    __slots__ = ("inst", "edges", "components", "component_of", "adj", "length", "width")

    def __init__(self, inst: MetricInstance, edges: Iterable[Edge] = ()):
        n = inst.terminal_count
        es: set[Edge] = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise ValidationError(f"invalid forest edge ({a},{b})")
            es.add(norm_edge(a, b))
        ds = DisjointSet(range(n))
        for a, b in sorted(es):
            if not ds.merge(a, b):
                raise ValidationError(f"edge ({a},{b}) closes a cycle")
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in es:
            adj[a].append(b)
            adj[b].append(a)
        groups: dict[int, list[int]] = {}
        for v in range(n):
            groups.setdefault(ds[v], []).append(v)
        comp_edges: dict[int, list[Edge]] = {}
        for e in es:
            comp_edges.setdefault(ds[e[0]], []).append(e)
        comps = []
        component_of = [0] * n
        for cid, (root, verts) in enumerate(sorted(groups.items(), key=lambda kv: kv[1][0])):
            mask = 0
            for v in verts:
                mask |= 1 << v
                component_of[v] = cid
            ce = frozenset(comp_edges.get(root, ()))
            w, idx = inst.width_of(mask)
            comps.append(Component(cid, frozenset(verts), mask, ce, sum(inst.d(e) for e in ce), w, idx))
        self.inst = inst
        self.edges = frozenset(es)
        self.components = tuple(comps)
        self.component_of = tuple(component_of)
        self.adj = tuple(tuple(sorted(x)) for x in adj)
        self.length = sum(c.length for c in comps)
        self.width = sum(c.width for c in comps)

    @classmethod
    def from_labels(cls, inst: MetricInstance, label_edges: Iterable[tuple[int, int]]) -> "Forest":
        return cls(inst, [inst.edge_of_labels(a, b) for a, b in label_edges])

    @property
    def phi(self) -> int:
        return self.length + self.width

    def label_edges(self) -> list[tuple[int, int]]:
        return sorted(self.inst.labels_of_edge(e) for e in self.edges)

    def with_changes(self, add: Iterable[Edge] = (), remove: Iterable[Edge] = ()) -> "Forest":
        rem = {norm_edge(*e) for e in remove}
        return Forest(self.inst, (self.edges - rem) | {norm_edge(*e) for e in add})

    def same_component(self, a: int, b: int) -> bool:
        return self.component_of[a] == self.component_of[b]

    def tree_path(self, u: int, v: int) -> list[int]:
        """Vertices on the forest path from ``u`` to ``v`` (inclusive)."""
        if not self.same_component(u, v):
            raise EndpointsDisconnected(f"{u} and {v} are in different components")
        parent = {u: u}
        stack = [u]
        while stack:
            x = stack.pop()
            if x == v:
                break
            for y in self.adj[x]:
                if y not in parent:
                    parent[y] = x
                    stack.append(y)
        path = [v]
        while path[-1] != u:
            path.append(parent[path[-1]])
        path.reverse()
        return path

    def edge_sides(self, comp: Component) -> dict[Edge, int]:
        """For each edge of ``comp``, the bitmask of the side not containing
        the component's smallest vertex."""
        root = comp.min_vertex
        parent = {root: -1}
        order = [root]
        for x in order:
            for y in self.adj[x]:
                if y not in parent:
                    parent[y] = x
                    order.append(y)
        sub = {x: 1 << x for x in order}
        sides = {}
        for x in reversed(order[1:]):
            p = parent[x]
            sub[p] |= sub[x]
            sides[norm_edge(x, p)] = sub[x]
        return sides

    def __eq__(self, other) -> bool:
        return isinstance(other, Forest) and other.inst is self.inst and other.edges == self.edges

    def __hash__(self) -> int:
        return hash(self.edges)

    def __repr__(self) -> str:
        return f"Forest(edges={sorted(self.edges)}, d={self.length}, w={self.width})"


def is_feasible(f: Forest, inst: MetricInstance | None = None) -> bool:
    inst = inst or f.inst
    return all(f.component_of[a] == f.component_of[b] for a, b in inst.pair_ends)


def potential(f: Forest) -> int:
    return f.length + f.width


def classify_edges(f: Forest, inst: MetricInstance | None = None) -> dict[Edge, str]:
    """Mark each edge essential (its removal splits a pair) or inessential."""
    inst = inst or f.inst
    if not is_feasible(f, inst):
        raise InfeasibleInput("classify_edges needs a feasible forest")
    out = {}
    for comp in f.components:
        for e, side in f.edge_sides(comp).items():
            out[e] = ESSENTIAL if inst.separates(side) else INESSENTIAL
    return out


def inessential_edges(f: Forest, comp: Component) -> list[Edge]:
    return sorted(e for e, side in f.edge_sides(comp).items() if not f.inst.separates(side))


def cleanup(f: Forest, inst: MetricInstance | None = None) -> Forest:
    """Drop every inessential edge at once.

    Removing one inessential edge never makes another essential edge
    inessential or vice versa, so the simultaneous removal stays feasible.
    """
    inst = inst or f.inst
    cls = classify_edges(f, inst)
    drop = [e for e, c in cls.items() if c == INESSENTIAL]
    return f.with_changes(remove=drop) if drop else f
