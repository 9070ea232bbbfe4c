"""Swap neighborhoods and their exact potential change.

All three generators stream :class:`Move` objects in a fixed order.  None of
them applies anything; the engine picks which move to apply.

Potential changes are computed locally.  Adding an edge (or a virtual edge for
path/set swaps) between two vertices of a component closes a cycle
``c_0 .. c_m``.  Each cycle vertex carries the bitmask of the subtree hanging
off it, so removing cycle edges at positions ``p_1 < .. < p_k`` leaves ``k``
arcs of consecutive cycle vertices.  The first and last arcs are glued by the
added edge, the others become new components, and their widths come straight
from :meth:`MetricInstance.width_of` on the arc masks.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import EndpointsDisconnected
from .forest import Component, Forest, inessential_edges, is_feasible, norm_edge
from .instance import Edge, MetricInstance

EDGE_EDGE = "edge_edge"
EDGE_SET = "edge_set"
PATH_SET = "path_set"
REMOVAL = "removal"
CONNECTING = "connecting"

MAX_TIED_PATHS = 256


@dataclass(frozen=True)
class Move:
    kind: str
    add: frozenset[Edge]
    remove: frozenset[Edge]
    delta_phi: int

    def apply(self, f: Forest) -> Forest:
        return f.with_changes(self.add, self.remove)


@dataclass(frozen=True)
class RemovableSet:
    anchor_edge: Edge
    cycle: tuple[Edge, ...]
    members: tuple[Edge, ...]


def apply_move(f: Forest, move: Move) -> Forest:
    return move.apply(f)


class _CycleView:
    """The cycle closed by a (possibly virtual) edge ``a``--``b`` inside ``comp``."""

    def __init__(self, f: Forest, comp: Component, a: int, b: int):
        inst = f.inst
        path = f.tree_path(a, b)
        self.comp = comp
        self.inst = inst
        self.verts = path
        self.edges = [norm_edge(x, y) for x, y in zip(path, path[1:])]
        self.lens = [inst.d(e) for e in self.edges]
        on_path = set(path)
        prefix = [0]
        for c in path:
            mask = 1 << c
            stack = [c]
            seen = {c}
            while stack:
                x = stack.pop()
                for y in f.adj[x]:
                    if y not in on_path and y not in seen:
                        seen.add(y)
                        mask |= 1 << y
                        stack.append(y)
            prefix.append(prefix[-1] | mask)
        self.prefix = prefix

    @property
    def m(self) -> int:
        return len(self.edges)

    def arc(self, lo: int, hi: int) -> int:
        """Mask of cycle vertices ``c_lo .. c_{hi-1}`` with their subtrees."""
        return self.prefix[hi] ^ self.prefix[lo]

    def removable(self, p: int) -> list[int]:
        """Positions (1-based) of R(e, g_p), sorted along the cycle."""
        out = []
        for q in range(1, self.m + 1):
            if q == p:
                out.append(q)
                continue
            lo, hi = (q, p) if q < p else (p, q)
            if not self.inst.separates(self.arc(lo, hi)):
                out.append(q)
        return out

    def delta(self, positions: tuple[int, ...], add_len: int, merged_mask: int = 0, merged_width: int = 0) -> int:
        bounds = (0, *positions, self.m + 1)
        width = self.inst.width_of
        total = add_len - sum(self.lens[p - 1] for p in positions) - self.comp.width - merged_width
        total += width(self.arc(0, bounds[1]) | self.arc(bounds[-2], bounds[-1]) | merged_mask)[0]
        for t in range(1, len(bounds) - 2):
            total += width(self.arc(bounds[t], bounds[t + 1]))[0]
        return total


def _runs(view: _CycleView, max_remove: int | None) -> Iterator[tuple[int, ...]]:
    """Distinct consecutive runs of every R(e, f), in (anchor, start, end) order."""
    seen = set()
    for p in range(1, view.m + 1):
        r = view.removable(p)
        for s in range(len(r)):
            stop = len(r) if max_remove is None else min(len(r), s + max_remove)
            for t in range(s, stop):
                run = tuple(r[s : t + 1])
                if run not in seen:
                    seen.add(run)
                    yield run


def fundamental_cycle(f: Forest, e: Edge) -> list[Edge]:
    """Forest path between the endpoints of ``e``, ordered from ``e[0]``."""
    a, b = e
    if not f.same_component(a, b):
        raise EndpointsDisconnected(f"endpoints of {e} are in different components")
    if norm_edge(a, b) in f.edges:
        raise ValueError(f"{e} is already a forest edge")
    path = f.tree_path(a, b)
    return [norm_edge(x, y) for x, y in zip(path, path[1:])]


def removable_set(f: Forest, e: Edge, anchor: Edge, inst: MetricInstance | None = None) -> RemovableSet:
    """R(e, anchor): the anchor plus every cycle edge removable together with it."""
    cycle = fundamental_cycle(f, e)
    anchor = norm_edge(*anchor)
    if anchor not in cycle:
        raise ValueError(f"anchor {anchor} is not on the cycle of {e}")
    view = _CycleView(f, f.components[f.component_of[e[0]]], e[0], e[1])
    members = tuple(view.edges[q - 1] for q in view.removable(cycle.index(anchor) + 1))
    after = f.with_changes(add=[e], remove=members)
    assert is_feasible(after), "removable set is not collectively removable"
    return RemovableSet(anchor, tuple(cycle), members)


def enumerate_edge_set_swaps(
    f: Forest,
    inst: MetricInstance | None = None,
    candidate_edges: Iterable[Edge] | None = None,
    max_remove: int | None = None,
) -> Iterator[Move]:
    """Edge/set swaps; ``max_remove=1`` restricts to edge/edge swaps.

    Moves removing a single edge are tagged ``edge_edge``.
    """
    n = f.inst.terminal_count
    if candidate_edges is None:
        cands: Iterable[Edge] = ((a, b) for a in range(n) for b in range(a + 1, n))
    else:
        cands = sorted({norm_edge(*e) for e in candidate_edges})
    d = f.inst.dist
    for a, b in cands:
        if (a, b) in f.edges or not f.same_component(a, b):
            continue
        view = _CycleView(f, f.components[f.component_of[a]], a, b)
        for run in _runs(view, max_remove):
            yield Move(
                EDGE_EDGE if len(run) == 1 else EDGE_SET,
                frozenset([(a, b)]),
                frozenset(view.edges[q - 1] for q in run),
                view.delta(run, d[a][b]),
            )


class _Contraction:
    """Distances between vertices and components, with realizing endpoints."""

    def __init__(self, f: Forest):
        d = f.inst.dist
        comps = f.components
        self.to_comp = [[min((d[x][y], y) for y in c.vertices) for c in comps] for x in range(f.inst.terminal_count)]
        self.between = {}
        for i, ci in enumerate(comps):
            for j in range(i + 1, len(comps)):
                best = min((d[x][y], x, y) for x in ci.vertices for y in comps[j].vertices)
                self.between[(i, j)] = best
                self.between[(j, i)] = (best[0], best[2], best[1])


def _tied_shortest_paths(f: Forest, con: _Contraction, comp: Component, u: int, v: int) -> list[tuple[list, list]]:
    """All shortest u--v paths in the graph where other components are points.

    Nodes are ``"u"``, ``"v"`` and component ids.  Returns ``(via, hops)``
    pairs: the component ids passed through and the realized metric edges.
    """
    d = f.inst.dist
    others = [c.cid for c in f.components if c.cid != comp.cid]

    def weight(x, y):
        if x == "u" and y == "v":
            return d[u][v]
        if x == "u":
            return con.to_comp[u][y][0]
        if y == "v":
            return con.to_comp[v][x][0]
        return con.between[(x, y)][0]

    dist = {"u": 0}
    heap = [(0, 0, "u")]
    done = set()
    order = {c: k + 1 for k, c in enumerate(others)}
    order["u"], order["v"] = -1, 0
    while heap:
        dx, _, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x == "v":
            continue
        for y in ["v", *others]:
            if y in done:
                continue
            nd = dx + weight(x, y)
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, order[y], y))
    target = dist["v"]
    paths: list[list] = []

    def extend(path):
        if len(paths) >= MAX_TIED_PATHS:
            return
        x = path[-1]
        for y in ["v", *others]:
            if y in path or y not in dist:
                continue
            if dist[x] + weight(x, y) != dist[y] or dist[y] > target:
                continue
            if y == "v":
                paths.append(path + ["v"])
            else:
                extend(path + [y])

    extend(["u"])
    out = []
    for nodes in paths:
        hops = []
        for x, y in zip(nodes, nodes[1:]):
            if x == "u" and y == "v":
                hops.append(norm_edge(u, v))
            elif x == "u":
                hops.append(norm_edge(u, con.to_comp[u][y][1]))
            elif y == "v":
                hops.append(norm_edge(con.to_comp[v][x][1], v))
            else:
                _, p, q = con.between[(x, y)]
                hops.append(norm_edge(p, q))
        out.append((nodes[1:-1], hops))
    return out


def enumerate_path_set_swaps(f: Forest, inst: MetricInstance | None = None) -> Iterator[Move]:
    """Path/set swaps over every component and every vertex pair in it.

    Ties between shortest paths are all explored, so the neighborhood does not
    depend on which of several equally short paths a search would pick.
    """
    con = _Contraction(f)
    d = f.inst.dist
    for comp in f.components:
        verts = sorted(comp.vertices)
        for i, u in enumerate(verts):
            for v in verts[i + 1 :]:
                view = None
                for via, hops in _tied_shortest_paths(f, con, comp, u, v):
                    if not via and (u, v) in f.edges:
                        continue
                    if view is None:
                        view = _CycleView(f, comp, u, v)
                    merged_mask = 0
                    merged_width = 0
                    for cid in via:
                        merged_mask |= f.components[cid].mask
                        merged_width += f.components[cid].width
                    add_len = sum(d[a][b] for a, b in hops)
                    add = frozenset(hops)
                    for run in _runs(view, None):
                        yield Move(
                            PATH_SET,
                            add,
                            frozenset(view.edges[q - 1] for q in run),
                            view.delta(run, add_len, merged_mask, merged_width),
                        )


def enumerate_removal_moves(f: Forest, inst: MetricInstance | None = None) -> Iterator[Move]:
    """Per component, drop all of its inessential edges at once."""
    inst = f.inst
    for comp in f.components:
        drop = inessential_edges(f, comp)
        if not drop:
            continue
        gone = set(drop)
        seen = 0
        widths = 0
        for s in sorted(comp.vertices):
            if seen >> s & 1:
                continue
            mask = 1 << s
            stack = [s]
            while stack:
                x = stack.pop()
                for y in f.adj[x]:
                    if not mask >> y & 1 and norm_edge(x, y) not in gone:
                        mask |= 1 << y
                        stack.append(y)
            seen |= mask
            widths += inst.width_of(mask)[0]
        delta = widths - comp.width - sum(inst.d(e) for e in drop)
        yield Move(REMOVAL, frozenset(), frozenset(drop), delta)
