"""Exact reference solvers for small instances.

These are deliberately written against networkx and plain enumeration so that
they share no code with the solver they check.  Only the instance data
(distances and the pair ranking) is common.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import networkx as nx

from .connecting import ContractedGraph, KmstProblem, KmstTree
from .errors import BudgetExceeded, Infeasible
from .forest import Forest
from .instance import MetricInstance, WeightedGraph


@dataclass(frozen=True)
class OracleBudget:
    max_terminals: int = 10
    max_contracted_nodes: int = 8

    def __post_init__(self):
        if self.max_terminals <= 0 or self.max_contracted_nodes <= 0:
            raise ValueError("budgets must be positive")


DEFAULT_BUDGET = OracleBudget()


def _complete_graph(inst: MetricInstance, vertices) -> nx.Graph:
    g = nx.Graph()
    vs = sorted(vertices)
    g.add_nodes_from(vs)
    for a, b in combinations(vs, 2):
        g.add_edge(a, b, weight=inst.dist[a][b])
    return g


def _mst(inst: MetricInstance, vertices) -> tuple[set, int]:
    t = nx.minimum_spanning_tree(_complete_graph(inst, vertices), weight="weight", algorithm="kruskal")
    edges = {(min(a, b), max(a, b)) for a, b in t.edges()}
    return edges, sum(inst.dist[a][b] for a, b in edges)


def steiner_tree_dp(inst: MetricInstance, required, budget: OracleBudget = DEFAULT_BUDGET) -> tuple[set, int]:
    """Dreyfus-Wagner over the complete metric graph on all terminals.

    ``required`` holds terminal indices.  Returns (edge set, cost).
    """
    req = sorted(set(required))
    if len(req) > budget.max_terminals:
        raise BudgetExceeded(f"{len(req)} required terminals exceed the budget {budget.max_terminals}")
    if len(req) <= 1:
        return set(), 0
    d = inst.dist
    n = inst.terminal_count
    k = len(req)
    full = (1 << k) - 1
    dp = [[0] * n for _ in range(1 << k)]
    back: list[list[tuple]] = [[()] * n for _ in range(1 << k)]
    for i, t in enumerate(req):
        for v in range(n):
            dp[1 << i][v] = d[t][v]
            back[1 << i][v] = ("leaf", t)
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        merged = [None] * n
        how: list[tuple] = [()] * n
        low = mask & -mask
        for v in range(n):
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    c = dp[sub][v] + dp[mask ^ sub][v]
                    if merged[v] is None or c < merged[v]:
                        merged[v] = c
                        how[v] = ("merge", sub)
                sub = (sub - 1) & mask
        for v in range(n):
            best, arg = merged[v], how[v]
            for u in range(n):
                if u != v and merged[u] + d[u][v] < best:
                    best, arg = merged[u] + d[u][v], ("grow", u, how[u])
            dp[mask][v] = best
            back[mask][v] = arg

    edges: set = set()

    def collect(mask, v, step):
        kind = step[0]
        if kind == "leaf":
            if step[1] != v:
                edges.add((min(step[1], v), max(step[1], v)))
        elif kind == "merge":
            sub = step[1]
            collect(sub, v, back[sub][v])
            collect(mask ^ sub, v, back[mask ^ sub][v])
        else:
            u = step[1]
            edges.add((min(u, v), max(u, v)))
            collect(mask, u, step[2])

    root = req[0]
    cost = dp[full][root]
    collect(full, root, back[full][root])
    verts = {x for e in edges for x in e} | set(req)
    tree, tcost = _mst(inst, verts)
    assert tcost == cost, (tcost, cost)
    return tree, cost


def steiner_tree_enumerate(inst: MetricInstance, required) -> int:
    """Cheapest MST over ``required`` plus any subset of the other terminals."""
    req = set(required)
    if len(req) <= 1:
        return 0
    rest = [v for v in range(inst.terminal_count) if v not in req]
    best = None
    for r in range(len(rest) + 1):
        for extra in combinations(rest, r):
            c = _mst(inst, req | set(extra))[1]
            if best is None or c < best:
                best = c
    return best


def _set_partitions(items: list):
    """Restricted growth strings, yielded as lists of groups."""
    n = len(items)
    if n == 0:
        yield []
        return
    rgs = [0] * n

    def rec(i, top):
        if i == n:
            groups: list[list] = [[] for _ in range(top + 1)]
            for item, g in zip(items, rgs):
                groups[g].append(item)
            yield groups
            return
        for g in range(top + 2):
            rgs[i] = g
            yield from rec(i + 1, max(top, g))

    rgs[0] = 0
    yield from rec(1, 0)


def optimal_forest(inst: MetricInstance, budget: OracleBudget = DEFAULT_BUDGET) -> tuple[Forest, int]:
    """Minimum-length feasible forest by enumerating how pairs are grouped."""
    if inst.terminal_count > budget.max_terminals:
        raise BudgetExceeded(f"{inst.terminal_count} terminals exceed the budget {budget.max_terminals}")
    uf = nx.utils.UnionFind()
    for a, b in inst.pair_ends:
        uf.union(a, b)
    blocks = sorted(sorted(s) for s in uf.to_sets())
    tree_cache: dict[frozenset, tuple[set, int]] = {}

    def tree(vs: frozenset):
        if vs not in tree_cache:
            tree_cache[vs] = steiner_tree_dp(inst, vs, budget)
        return tree_cache[vs]

    best_cost = None
    best_groups = None
    for groups in _set_partitions(blocks):
        total = 0
        for g in groups:
            total += tree(frozenset(v for blk in g for v in blk))[1]
            if best_cost is not None and total >= best_cost:
                break
        else:
            if best_cost is None or total < best_cost:
                best_cost, best_groups = total, groups
    if best_groups is None:
        return Forest(inst, ()), 0
    union = nx.Graph()
    union.add_nodes_from(range(inst.terminal_count))
    for g in best_groups:
        for a, b in tree(frozenset(v for blk in g for v in blk))[0]:
            union.add_edge(a, b, weight=inst.dist[a][b])
    span = nx.minimum_spanning_tree(union, weight="weight")
    forest = Forest(inst, span.edges())
    assert forest.length == best_cost
    return forest, best_cost


def optimal_forest_on_cycle(graph: WeightedGraph, pairs) -> int:
    """Optimal Steiner forest cost when ``graph`` is a single cycle.

    A solution is the cycle minus some edges.  Once one edge is dropped the
    rest is a path, where an edge can be dropped iff no pair straddles it,
    independently of the other drops.
    """
    g = nx.Graph()
    for u, v, w in graph.normalized().edges:
        g.add_edge(u, v, weight=w)
    if not all(d == 2 for _, d in g.degree()) or not nx.is_connected(g):
        raise ValueError("graph is not a single cycle")
    cycle = [u for u, _ in nx.find_cycle(g, source=min(g.nodes))]
    m = len(cycle)
    ring = [(cycle[i], cycle[(i + 1) % m]) for i in range(m)]
    total = sum(g[u][v]["weight"] for u, v in ring)
    best_drop = 0
    for first in range(m):
        order = [ring[(first + 1 + i) % m][0] for i in range(m)]
        pos = {v: i for i, v in enumerate(order)}
        drop = g[ring[first][0]][ring[first][1]]["weight"]
        for i in range(m - 1):
            if all(not (min(pos[a], pos[b]) <= i < max(pos[a], pos[b])) for a, b in pairs):
                drop += g[order[i]][order[i + 1]]["weight"]
        best_drop = max(best_drop, drop)
    return total - best_drop


def kmst_bruteforce(cg: ContractedGraph, p: KmstProblem, budget: OracleBudget = DEFAULT_BUDGET) -> KmstTree:
    if len(p.gamma) > budget.max_contracted_nodes:
        raise BudgetExceeded(f"{len(p.gamma)} nodes exceed the budget {budget.max_contracted_nodes}")
    others = sorted(v for v in p.gamma if v != p.root)
    best = None
    for r in range(len(others) + 1):
        for extra in combinations(others, r):
            if sum(p.gamma[v] for v in extra) < p.lower_bound:
                continue
            g = nx.Graph()
            nodes = [p.root, *extra]
            g.add_nodes_from(nodes)
            for a, b in combinations(nodes, 2):
                g.add_edge(a, b, weight=cg.weight[(a, b)])
            t = nx.minimum_spanning_tree(g, weight="weight")
            cost = int(t.size(weight="weight"))
            key = (cost, len(nodes), tuple(sorted(nodes)))
            if best is None or key < best[0]:
                best = (key, KmstTree(frozenset(nodes), tuple(sorted((min(e), max(e)) for e in t.edges())), cost))
    if best is None:
        raise Infeasible("no subset reaches the threshold")
    return best[1]


# -- brute-force local optimality ------------------------------------------


@dataclass(frozen=True)
class FoundMove:
    kind: str
    add: frozenset
    remove: frozenset
    delta_phi: int


@dataclass
class LocalOptimumReport:
    """``improving`` lists moves inside the implemented neighborhoods;
    ``extended`` lists improving moves outside them (informational)."""

    improving: list[FoundMove] = field(default_factory=list)
    extended: list[FoundMove] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.improving


class _Evaluator:
    def __init__(self, inst: MetricInstance):
        self.inst = inst
        self.ranked = [(inst.dist[a][b], r, a, b) for r, (a, b) in enumerate(inst.pair_ends)]

    def graph(self, edges) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.inst.terminal_count))
        g.add_edges_from(edges)
        return g

    def feasible(self, g: nx.Graph) -> bool:
        return all(nx.has_path(g, a, b) for _, _, a, b in self.ranked)

    def phi(self, g: nx.Graph) -> int:
        total = sum(self.inst.dist[a][b] for a, b in g.edges())
        for comp in nx.connected_components(g):
            inside = [(r, dd) for dd, r, a, b in self.ranked if a in comp and b in comp]
            if inside:
                total += max(inside)[1]
        return total


def _subsets(items):
    for r in range(1, len(items) + 1):
        yield from combinations(items, r)


def _is_run(sub: tuple, r_list: list) -> bool:
    idx = [r_list.index(x) for x in sub if x in r_list]
    return len(idx) == len(sub) and max(idx) - min(idx) + 1 == len(sub)


def bruteforce_local_optimum_check(
    f: Forest, inst: MetricInstance | None = None, eps: Fraction | str | int = Fraction(1, 4), budget: OracleBudget = DEFAULT_BUDGET
) -> LocalOptimumReport:
    """Enumerate every swap, removal and connecting move and report improving ones."""
    inst = inst or f.inst
    eps = Fraction(eps)
    if inst.terminal_count > budget.max_terminals:
        raise BudgetExceeded(f"{inst.terminal_count} terminals exceed the budget {budget.max_terminals}")
    ev = _Evaluator(inst)
    base_edges = {(min(e), max(e)) for e in f.edges}
    g0 = ev.graph(base_edges)
    phi0 = ev.phi(g0)
    report = LocalOptimumReport()
    n = inst.terminal_count

    def try_swap(kind, add, cycle, r_of, skip_virtual=False):
        for sub in _subsets(cycle):
            new_edges = (base_edges - set(sub)) | set(add)
            g = ev.graph(new_edges)
            if not nx.is_forest(g) or not ev.feasible(g):
                continue
            delta = ev.phi(g) - phi0
            if delta >= 0:
                continue
            mv = FoundMove(kind, frozenset(add), frozenset(sub), delta)
            in_hood = any(_is_run(sub, r_of(a)) for a in sub)
            (report.improving if in_hood else report.extended).append(mv)

    def removable(add, anchor, cycle):
        out = []
        for gedge in cycle:
            test = (base_edges | set(add)) - {anchor, gedge}
            if ev.feasible(ev.graph(test)):
                out.append(gedge)
        return out

    # edge/set swaps (edge/edge included)
    for a, b in combinations(range(n), 2):
        if (a, b) in base_edges or not nx.has_path(g0, a, b):
            continue
        path = nx.shortest_path(g0, a, b)
        cycle = [(min(x, y), max(x, y)) for x, y in zip(path, path[1:])]
        rs = {c: removable([(a, b)], c, cycle) for c in cycle}
        try_swap("edge_set", [(a, b)], cycle, rs.__getitem__)

    # path/set swaps
    comps = [sorted(c) for c in nx.connected_components(g0)]
    comps.sort()
    for ci, comp in enumerate(comps):
        others = [c for cj, c in enumerate(comps) if cj != ci]
        for u, v in combinations(comp, 2):
            aux = nx.Graph()
            aux.add_edge("u", "v", weight=inst.dist[u][v], real=(u, v))
            for k, oc in enumerate(others):
                du = min((inst.dist[u][y], y) for y in oc)
                dv = min((inst.dist[v][y], y) for y in oc)
                aux.add_edge("u", k, weight=du[0], real=(u, du[1]))
                aux.add_edge("v", k, weight=dv[0], real=(v, dv[1]))
                for k2 in range(k + 1, len(others)):
                    best = min((inst.dist[x][y], x, y) for x in oc for y in others[k2])
                    aux.add_edge(k, k2, weight=best[0], real=(best[1], best[2]))
            path_uv = nx.shortest_path(g0, u, v)
            cycle = [(min(x, y), max(x, y)) for x, y in zip(path_uv, path_uv[1:])]
            for nodes in nx.all_shortest_paths(aux, "u", "v", weight="weight"):
                hops = [tuple(sorted(aux[x][y]["real"])) for x, y in zip(nodes, nodes[1:])]
                if len(hops) == 1 and hops[0] in base_edges:
                    continue
                rs = {c: removable([(u, v)], c, cycle) if (u, v) not in base_edges else [c] for c in cycle}
                try_swap("path_set", hops, cycle, rs.__getitem__)

    # removal moves
    for comp in comps:
        sub = g0.subgraph(comp)
        ines = [(min(e), max(e)) for e in sub.edges() if ev.feasible(ev.graph(base_edges - {(min(e), max(e))}))]
        ines.sort()
        for s in _subsets(ines):
            g = ev.graph(base_edges - set(s))
            if not ev.feasible(g):
                continue
            delta = ev.phi(g) - phi0
            if delta < 0:
                mv = FoundMove("removal", frozenset(), frozenset(s), delta)
                (report.improving if len(s) == len(ines) else report.extended).append(mv)

    # connecting moves
    def width(comp):
        inside = [(r, dd) for dd, r, a, b in ev.ranked if a in comp and b in comp]
        return max(inside)[1] if inside else 0

    widths = [width(set(c)) for c in comps]
    for r in range(2, len(comps) + 1):
        for group in combinations(range(len(comps)), r):
            cgph = nx.Graph()
            for x, y in combinations(group, 2):
                best = min((inst.dist[p][q], p, q) for p in comps[x] for q in comps[y])
                cgph.add_edge(x, y, weight=best[0], real=(best[1], best[2]))
            t = nx.minimum_spanning_tree(cgph, weight="weight")
            cost = int(t.size(weight="weight"))
            gain = sum(widths[x] for x in group) - max(widths[x] for x in group)
            if cost < gain:
                add = frozenset(tuple(sorted(t[x][y]["real"])) for x, y in t.edges())
                mv = FoundMove("connecting", add, frozenset(), cost - gain)
                (report.improving if (1 + eps) * cost <= gain else report.extended).append(mv)
    return report
