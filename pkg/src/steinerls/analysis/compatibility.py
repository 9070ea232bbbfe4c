"""Compatibility classes of tree edges against a reference forest.

Two tree edges e, f are compatible when no reference edge leaves the part of
``tree - {e, f}`` lying between them.  An edge is safe when some reference
edge crosses its cut.  Every check here is structural: the tree does not need
to be locally optimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import networkx as nx

from ..errors import NotATree
from ..forest import Forest
from ..instance import Edge, MetricInstance


def _crossed(mask: int, ref_edges) -> bool:
    return any(((mask >> a) & 1) != ((mask >> b) & 1) for a, b in ref_edges)


@dataclass
class CompatibilityPartition:
    tree: Forest
    reference: Forest
    classes: list[frozenset[Edge]]
    safe: list[bool]
    essential: list[bool]
    unsafe_class: frozenset[Edge]
    transitive: bool
    edge_safe: dict[Edge, bool]
    edge_essential: dict[Edge, bool]

    def class_of(self, e: Edge) -> int:
        return next(i for i, c in enumerate(self.classes) if e in c)

    def safe_classes(self) -> list[frozenset[Edge]]:
        return [c for c, s in zip(self.classes, self.safe) if s]

    def cycle_of(self, f: Edge) -> frozenset[Edge]:
        """Tree path between the endpoints of a reference edge."""
        if f in self.tree.edges:
            return frozenset([f])
        path = self.tree.tree_path(*f)
        return frozenset((min(x, y), max(x, y)) for x, y in zip(path, path[1:]))

    def violations(self) -> list[str]:
        """Structural properties that fail; empty when all hold."""
        out = []
        if not self.transitive:
            out.append("compatibility is not transitive")
        seen: set[Edge] = set()
        for c in self.classes:
            if seen & c:
                out.append("classes overlap")
            seen |= c
        if seen != set(self.tree.edges):
            out.append("classes do not cover the tree")
        for c, s, ess in zip(self.classes, self.safe, self.essential):
            if {self.edge_safe[e] for e in c} != {s} or {self.edge_essential[e] for e in c} != {ess}:
                out.append(f"class {sorted(c)} mixes safe or essential flags")
        unsafe = [c for c, s in zip(self.classes, self.safe) if not s]
        if len(unsafe) > 1:
            out.append(f"unsafe edges form {len(unsafe)} classes")
        for c in self.safe_classes():
            if not self._on_a_path(c):
                out.append(f"safe class {sorted(c)} does not lie on a path")
            for f in self.reference.edges:
                cyc = self.cycle_of(f)
                if not (c <= cyc or not (c & cyc)):
                    out.append(f"reference edge {f} cuts safe class {sorted(c)} partially")
        return out

    def _on_a_path(self, c: frozenset[Edge]) -> bool:
        verts = sorted({x for e in c for x in e})
        for a, b in combinations(verts, 2):
            path = self.tree.tree_path(a, b)
            if c <= {(min(x, y), max(x, y)) for x, y in zip(path, path[1:])}:
                return True
        return len(c) <= 1


def compatibility_partition(tree: Forest, reference: Forest, inst: MetricInstance | None = None) -> CompatibilityPartition:
    inst = inst or tree.inst
    if len(tree.components) != 1:
        raise NotATree(f"tree has {len(tree.components)} components")
    if reference.inst.terminal_count != tree.inst.terminal_count:
        raise ValueError("tree and reference must share the vertex set")
    comp = tree.components[0]
    full = comp.mask
    sides = tree.edge_sides(comp)
    ref = sorted(reference.edges)
    edges = sorted(tree.edges)

    def toward(e, f):
        side = sides[e]
        a, b = f
        return side if (side >> a) & 1 and (side >> b) & 1 else full ^ side

    rel = nx.Graph()
    rel.add_nodes_from(edges)
    related = set()
    for e, f in combinations(edges, 2):
        middle = toward(e, f) & toward(f, e)
        if not _crossed(middle, ref):
            rel.add_edge(e, f)
            related.add((e, f))
    classes = sorted((frozenset(c) for c in nx.connected_components(rel)), key=lambda c: min(c))
    transitive = all((e, f) in related for c in classes for e, f in combinations(sorted(c), 2))
    edge_safe = {e: _crossed(sides[e], ref) for e in edges}
    edge_essential = {e: inst.separates(sides[e]) for e in edges}
    safe = [all(edge_safe[e] for e in c) for c in classes]
    essential = [all(edge_essential[e] for e in c) for c in classes]
    unsafe = frozenset(e for e in edges if not edge_safe[e])
    return CompatibilityPartition(tree, reference, classes, safe, essential, unsafe, transitive, edge_safe, edge_essential)


@dataclass(frozen=True)
class HallResult:
    holds: bool
    flow: int
    required: int
    witness: tuple[frozenset[Edge], ...] = ()


def hall_condition_check(
    tree: Forest, reference: Forest, inst: MetricInstance | None = None, partition: CompatibilityPartition | None = None
) -> HallResult:
    """Can each safe class send 1 unit to reference edges whose tree cycle
    contains it, with every reference edge absorbing at most 7/2?

    Capacities are doubled (2 per class, 7 per reference edge) to stay integral.
    On failure the witness is the set of classes on the source side of a
    minimum cut, which violates Hall's condition.
    """
    part = partition or compatibility_partition(tree, reference, inst)
    classes = part.safe_classes()
    if not classes:
        return HallResult(True, 0, 0)
    g = nx.DiGraph()
    for i, c in enumerate(classes):
        g.add_edge("s", ("class", i), capacity=2)
        for f in sorted(reference.edges):
            if c <= part.cycle_of(f):
                g.add_edge(("class", i), ("ref", f))
    for f in sorted(reference.edges):
        g.add_edge(("ref", f), "t", capacity=7)
    g.add_node("t")
    need = 2 * len(classes)
    flow, _ = nx.maximum_flow(g, "s", "t")
    if flow == need:
        return HallResult(True, flow, need)
    _, (src_side, _) = nx.minimum_cut(g, "s", "t")
    witness = tuple(classes[x[1]] for x in src_side if isinstance(x, tuple) and x[0] == "class")
    return HallResult(False, flow, need, witness)
