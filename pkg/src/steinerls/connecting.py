"""Connecting moves: merge several components with a tree of new edges.

Components are contracted to nodes ``1..p`` ordered by width.  A tree over
nodes whose largest node is ``i`` saves the widths of all its other nodes, so
finding an improving tree is a rooted node-weighted k-MST question: root
``i``, node weight ``w_j`` for ``j < i``, and a threshold Γ swept over a
geometric grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .errors import CapExceeded, Infeasible
from .forest import Forest, norm_edge
from .instance import Edge, MetricInstance
from .moves import CONNECTING, Move

EXACT_CAP = 18


@dataclass
class ContractedGraph:
    """Components as nodes ``1..p`` with cheapest cross edges.

    ``comp_ids[k-1]`` is the forest component id of node ``k``.
    """

    forest: Forest
    comp_ids: tuple[int, ...]
    widths: tuple[int, ...]
    weight: dict[tuple[int, int], int]
    realize: dict[tuple[int, int], Edge]
    node_weight: dict[int, int] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def p(self) -> int:
        return len(self.comp_ids)

    @property
    def nodes(self) -> range:
        return range(1, self.p + 1)

    def w(self, a: int, b: int) -> int:
        return self.weight[(a, b)]

    def width(self, node: int) -> int:
        return self.widths[node - 1]


@dataclass(frozen=True)
class KmstProblem:
    root: int
    gamma: dict[int, int]
    lower_bound: int

    def __post_init__(self):
        if self.gamma.get(self.root, 0) != 0:
            raise ValueError("gamma(root) must be 0")
        if self.lower_bound < 0 or any(g < 0 for g in self.gamma.values()):
            raise ValueError("weights and threshold must be nonnegative")


@dataclass(frozen=True)
class KmstTree:
    nodes: frozenset[int]
    edges: tuple[tuple[int, int], ...]
    cost: int


@dataclass(frozen=True)
class CertifiedNone:
    """No improving connecting move was found.

    With the exact solver (``c == 1``) this certifies that every tree T of the
    contracted graph satisfies ``(1 + eps) * d(T) >= gain(T)``.
    """

    eps: Fraction
    solver: str
    calls: int
    c: int | None


def component_order(f: Forest) -> list[int]:
    """Component ids sorted by (width, index, smallest vertex)."""
    return [c.cid for c in sorted(f.components, key=lambda c: (c.width, c.index or 0, c.min_vertex))]


def build_contracted_graph(f: Forest, inst: MetricInstance | None = None) -> ContractedGraph:
    d = f.inst.dist
    ids = component_order(f)
    comps = [f.components[c] for c in ids]
    weight = {}
    realize = {}
    for a, ca in enumerate(comps, start=1):
        for b in range(a + 1, len(comps) + 1):
            cost, x, y = min((d[x][y], x, y) for x in ca.vertices for y in comps[b - 1].vertices)
            weight[(a, b)] = weight[(b, a)] = cost
            realize[(a, b)] = realize[(b, a)] = norm_edge(x, y)
    return ContractedGraph(f, tuple(ids), tuple(c.width for c in comps), weight, realize)


def _trivial(p: KmstProblem) -> KmstTree | None:
    if p.lower_bound <= 0:
        return KmstTree(frozenset([p.root]), (), 0)
    if sum(p.gamma.values()) < p.lower_bound:
        raise Infeasible(f"total node weight {sum(p.gamma.values())} is below {p.lower_bound}")
    return None


def _subset_msts(cg: ContractedGraph, root: int, others: tuple[int, ...]):
    """MST cost of ``{root} + subset`` for every subset of ``others``.

    Peels one leaf at a time: a spanning tree of a set minus one of its
    leaves spans the rest, so
    ``mst(S) = min_v mst(S - v) + min_{u in S - v} w(u, v)``.
    """
    key = (root, others)
    hit = cg._cache.get(key)
    if hit is not None:
        return hit
    k = len(others)
    w = cg.weight
    cost = [0] * (1 << k)
    choice: list[tuple[int, int] | None] = [None] * (1 << k)
    for mask in range(1, 1 << k):
        best = None
        for i in range(k):
            if not mask >> i & 1:
                continue
            rest = mask ^ (1 << i)
            v = others[i]
            att, u_best = w[(v, root)], root
            r = rest
            while r:
                low = r & -r
                u = others[low.bit_length() - 1]
                if w[(v, u)] < att:
                    att, u_best = w[(v, u)], u
                r ^= low
            c = cost[rest] + att
            if best is None or c < best:
                best = c
                choice[mask] = (i, u_best)
        cost[mask] = best
    cg._cache[key] = (cost, choice)
    return cost, choice


def kmst_exact(cg: ContractedGraph, p: KmstProblem, cap: int = EXACT_CAP) -> KmstTree:
    """Cheapest tree through the root whose node weights reach the threshold."""
    if len(p.gamma) > cap:
        raise CapExceeded(f"{len(p.gamma)} nodes exceed the exact solver cap {cap}")
    trivial = _trivial(p)
    if trivial is not None:
        return trivial
    others = tuple(sorted(v for v in p.gamma if v != p.root))
    cost, choice = _subset_msts(cg, p.root, others)
    k = len(others)
    gsum = [0] * (1 << k)
    best = None
    for mask in range(1, 1 << k):
        low = mask & -mask
        gsum[mask] = gsum[mask ^ low] + p.gamma[others[low.bit_length() - 1]]
        if gsum[mask] >= p.lower_bound:
            key = (cost[mask], bin(mask).count("1"), mask)
            if best is None or key < best:
                best = key
    mask = best[2]
    nodes = {p.root}
    edges = []
    while mask:
        i, u = choice[mask]
        v = others[i]
        nodes.add(v)
        edges.append((min(u, v), max(u, v)))
        mask ^= 1 << i
    return KmstTree(frozenset(nodes), tuple(sorted(edges)), best[0])


def kmst_greedy(cg: ContractedGraph, p: KmstProblem) -> KmstTree:
    """Attach the node with the cheapest cost per unit of node weight until the
    threshold is met.  No approximation guarantee."""
    trivial = _trivial(p)
    if trivial is not None:
        return trivial
    tree = [p.root]
    edges = []
    total = 0
    got = 0
    while got < p.lower_bound:
        best = None
        for v in sorted(p.gamma):
            if v in tree or p.gamma[v] == 0:
                continue
            att, u = min((cg.w(v, u), u) for u in tree)
            ratio = Fraction(att, p.gamma[v])
            if best is None or ratio < best[0]:
                best = (ratio, v, u, att)
        _, v, u, att = best
        tree.append(v)
        edges.append((min(u, v), max(u, v)))
        total += att
        got += p.gamma[v]
    return KmstTree(frozenset(tree), tuple(sorted(edges)), total)


def threshold_levels(widths: list[int] | tuple[int, ...], eps: Fraction) -> list[int]:
    """Integer thresholds ``ceil((1 + eps/2)^l * w_min)`` up to and including
    the first one reaching ``p * max width``."""
    positive = [w for w in widths if w > 0]
    if not positive:
        return []
    wmin = min(positive)
    top = len(widths) * max(widths)
    step = 1 + Fraction(eps) / 2
    x = Fraction(wmin)
    out = []
    while True:
        g = ceil(x)
        if not out or g != out[-1]:
            out.append(g)
        if g >= top:
            return out
        x *= step


def improving_connecting_move(
    f: Forest,
    inst: MetricInstance | None = None,
    eps: Fraction | int | str = Fraction(1, 4),
    solver: str = "exact",
    cap: int = EXACT_CAP,
) -> Move | CertifiedNone:
    """Sweep every root and threshold level; return the first improving tree
    as a move, or a certificate that none is (1+eps)-approximately improving."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if solver not in ("exact", "greedy"):
        raise ValueError(f"unknown k-MST solver {solver!r}")
    cg = build_contracted_graph(f)
    levels = threshold_levels(cg.widths, eps)
    calls = 0
    for i in range(2, cg.p + 1):
        gamma = {j: cg.width(j) for j in range(1, i)}
        gamma[i] = 0
        total = sum(gamma.values())
        if total == 0:
            continue
        for level in levels:
            if level > total:
                break
            calls += 1
            prob = KmstProblem(i, gamma, level)
            tree = kmst_exact(cg, prob, cap) if solver == "exact" else kmst_greedy(cg, prob)
            gain = sum(gamma[v] for v in tree.nodes)
            if tree.cost < gain:
                add = frozenset(cg.realize[e] for e in tree.edges)
                return Move(CONNECTING, add, frozenset(), tree.cost - gain)
    return CertifiedNone(eps, solver, calls, 1 if solver == "exact" else None)
