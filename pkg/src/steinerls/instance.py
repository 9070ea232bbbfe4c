"""Problem input: the weighted graph, its metric closure over the terminals,
and the canonical ranking of terminal pairs.

Everything downstream works on :class:`MetricInstance`, a complete graph over
terminal indices ``0..n-1`` with exact integer distances.  Terminal labels
(the vertex ids of the source graph) are only used for ranking ties and for
reporting.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DisconnectedPair, NoProvenance, ValidationError

Edge = tuple[int, int]


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on vertices ``1..vertex_count`` with integer lengths."""

    vertex_count: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        if self.vertex_count < 0:
            raise ValidationError("vertex_count must be nonnegative")
        for u, v, w in self.edges:
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (1 <= u <= self.vertex_count and 1 <= v <= self.vertex_count):
                raise ValidationError(f"edge ({u},{v}) references a vertex outside 1..{self.vertex_count}")
            if not isinstance(w, int) or w < 0:
                raise ValidationError(f"edge ({u},{v}) has invalid length {w!r}")

    def normalized(self) -> "WeightedGraph":
        """Keep only the shortest copy of each parallel edge, sorted."""
        best: dict[Edge, int] = {}
        for u, v, w in self.edges:
            key = (min(u, v), max(u, v))
            if key not in best or w < best[key]:
                best[key] = w
        return WeightedGraph(self.vertex_count, tuple((u, v, w) for (u, v), w in sorted(best.items())))

    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(1, self.vertex_count + 1)}
        for u, v, w in self.normalized().edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def edge_length(self, u: int, v: int) -> int:
        lengths = [w for a, b, w in self.edges if {a, b} == {u, v}]
        if not lengths:
            raise KeyError((u, v))
        return min(lengths)


@dataclass(frozen=True)
class TerminalPair:
    u: int
    ubar: int
    index: int


def _pair_key(dist: int, a: int, b: int) -> tuple[int, int, int]:
    return (dist, min(a, b), max(a, b))


class MetricInstance:
    """Complete metric over terminals plus the ranked terminal pairs.

    Attributes:
        labels: source-graph vertex id of each terminal index, ascending.
        dist: symmetric integer distance matrix indexed by terminal index.
        pairs: ranked :class:`TerminalPair` list (labels, 1-based index).
        pair_ends: the same pairs as ``(i, j)`` terminal indices with ``i < j``.
        graph: the source graph, or ``None`` for a directly built metric.
        provenance: ``(i, j) -> path of vertex ids`` in ``graph`` for ``i < j``.
    """

    def __init__(
        self,
        labels: Sequence[int],
        dist: Sequence[Sequence[int]],
        pair_ends: Sequence[Edge],
        graph: WeightedGraph | None = None,
        provenance: Mapping[Edge, tuple[int, ...]] | None = None,
    ):
        self.labels = tuple(int(x) for x in labels)
        self.dist = tuple(tuple(int(x) for x in row) for row in dist)
        self.pair_ends = tuple((min(a, b), max(a, b)) for a, b in pair_ends)
        self.pair_dist = tuple(self.dist[a][b] for a, b in self.pair_ends)
        self.pairs = tuple(
            TerminalPair(self.labels[a], self.labels[b], r + 1) for r, (a, b) in enumerate(self.pair_ends)
        )
        self.graph = graph
        self.provenance = dict(provenance) if provenance is not None else None
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._pair_masks = tuple((1 << a) | (1 << b) for a, b in self.pair_ends)
        self._width_cache: dict[int, tuple[int, int | None]] = {}
        n = len(self.labels)
        if len(self._index) != n:
            raise ValidationError("terminal labels must be distinct")
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise ValidationError("distance matrix shape does not match terminal count")
        for a, b in self.pair_ends:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValidationError(f"invalid pair ({a},{b})")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_matrix(
        cls,
        dist: Sequence[Sequence[int]],
        pairs: Iterable[tuple[int, int]],
        labels: Sequence[int] | None = None,
        check_metric: bool = True,
    ) -> "MetricInstance":
        """Build an instance directly from a distance matrix.

        ``pairs`` are given as labels (which default to ``1..n``).  Duplicate
        pairs collapse and pairs with identical endpoints are dropped.
        """
        n = len(dist)
        labels = list(range(1, n + 1)) if labels is None else list(labels)
        index = {lab: i for i, lab in enumerate(labels)}
        rows = [[int(x) for x in row] for row in dist]
        if check_metric:
            check_metric_matrix(rows)
        ends = []
        for a, b in pairs:
            if a not in index or b not in index:
                raise ValidationError(f"pair ({a},{b}) references an unknown terminal")
            ends.append((index[a], index[b]))
        order = sorted(labels)
        if order != labels:
            # keep terminal indices sorted by label so ranking ties are stable
            perm = sorted(range(n), key=lambda i: labels[i])
            inv = {old: new for new, old in enumerate(perm)}
            rows = [[rows[perm[i]][perm[j]] for j in range(n)] for i in range(n)]
            ends = [(inv[a], inv[b]) for a, b in ends]
            labels = order
        return cls(labels, rows, rank_pairs(ends, rows, labels))

    def with_distances(self, dist: Sequence[Sequence[int]]) -> "MetricInstance":
        """Same terminals and pair ranking, different distances.

        Used for rounded unit distances, where re-ranking could reorder pairs
        that the rounding made equal.
        """
        inst = MetricInstance(self.labels, dist, self.pair_ends, self.graph, self.provenance)
        if any(x > y for x, y in zip(inst.pair_dist, inst.pair_dist[1:])):
            raise ValidationError("new distances are not monotone in the existing pair ranking")
        return inst

    # -- queries ------------------------------------------------------------

    @property
    def terminal_count(self) -> int:
        return len(self.labels)

    @property
    def n_pairs(self) -> int:
        return len(self.pair_ends)

    @property
    def edge_count(self) -> int:
        """Number of edges of the complete graph over the terminals."""
        n = self.terminal_count
        return n * (n - 1) // 2

    def index_of(self, label: int) -> int:
        return self._index[label]

    def edge_of_labels(self, a: int, b: int) -> Edge:
        i, j = self._index[a], self._index[b]
        return (min(i, j), max(i, j))

    def labels_of_edge(self, e: Edge) -> tuple[int, int]:
        return (self.labels[e[0]], self.labels[e[1]])

    def d(self, e: Edge) -> int:
        return self.dist[e[0]][e[1]]

    def width_of(self, mask: int) -> tuple[int, int | None]:
        """Width and 1-based index of the vertex set encoded by ``mask``.

        The width is the distance of the highest ranked pair with both
        endpoints in the set, or ``(0, None)`` when no pair is inside.
        """
        hit = self._width_cache.get(mask)
        if hit is None:
            hit = (0, None)
            for r in range(len(self._pair_masks) - 1, -1, -1):
                pm = self._pair_masks[r]
                if mask & pm == pm:
                    hit = (self.pair_dist[r], r + 1)
                    break
            self._width_cache[mask] = hit
        return hit

    def separates(self, mask: int) -> bool:
        """True if some pair has exactly one endpoint in ``mask``."""
        for pm in self._pair_masks:
            m = mask & pm
            if m and m != pm:
                return True
        return False

    def max_pair_distance(self) -> int:
        return max(self.pair_dist, default=0)

    def __repr__(self) -> str:
        return f"MetricInstance(terminals={self.terminal_count}, pairs={self.n_pairs})"


def rank_pairs(ends: Iterable[Edge], dist: Sequence[Sequence[int]], labels: Sequence[int]) -> list[Edge]:
    """Canonical pair order: distance, then the sorted label pair."""
    uniq = {(min(a, b), max(a, b)) for a, b in ends if a != b}
    return sorted(uniq, key=lambda e: _pair_key(dist[e[0]][e[1]], labels[e[0]], labels[e[1]]))


def check_metric_matrix(dist: Sequence[Sequence[int]]) -> None:
    n = len(dist)
    for i in range(n):
        if len(dist[i]) != n:
            raise ValidationError("distance matrix is not square")
        if dist[i][i] != 0:
            raise ValidationError(f"nonzero diagonal at {i}")
        for j in range(n):
            if dist[i][j] < 0 or dist[i][j] != dist[j][i]:
                raise ValidationError(f"distance ({i},{j}) is negative or asymmetric")
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            di = dist[i]
            for j in range(n):
                if di[j] > dik + dk[j]:
                    raise ValidationError(f"triangle inequality fails for ({i},{k},{j})")


def _dijkstra(adj: Mapping[int, list[tuple[int, int]]], source: int) -> tuple[dict[int, int], dict[int, int]]:
    dist = {source: 0}
    pred: dict[int, int] = {}
    heap = [(0, source)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for w, length in adj[v]:
            nd = d + length
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                pred[w] = v
                heapq.heappush(heap, (nd, w))
    return dist, pred


def metric_closure(
    g: WeightedGraph, terminals: Iterable[int], pairs: Iterable[tuple[int, int]]
) -> MetricInstance:
    """Shortest-path metric over ``terminals`` with ranked pairs and provenance."""
    terms = sorted(set(terminals))
    tset = set(terms)
    pairs = [tuple(p) for p in pairs]
    for t in terms:
        if not 1 <= t <= g.vertex_count:
            raise ValidationError(f"terminal {t} is not a vertex of the graph")
    for a, b in pairs:
        if a not in tset or b not in tset:
            raise ValidationError(f"pair ({a},{b}) has an endpoint outside the terminal set")
    adj = g.adjacency()
    n = len(terms)
    big = None
    rows = [[0] * n for _ in range(n)]
    provenance: dict[Edge, tuple[int, ...]] = {}
    for i, s in enumerate(terms):
        dist, pred = _dijkstra(adj, s)
        for j in range(i + 1, n):
            t = terms[j]
            if t not in dist:
                rows[i][j] = rows[j][i] = big  # type: ignore[assignment]
                continue
            rows[i][j] = rows[j][i] = dist[t]
            path = [t]
            while path[-1] != s:
                path.append(pred[path[-1]])
            provenance[(i, j)] = tuple(reversed(path))
    index = {t: i for i, t in enumerate(terms)}
    ends = [(index[a], index[b]) for a, b in pairs if a != b]
    for a, b in ends:
        if rows[a][b] is None:
            raise DisconnectedPair(f"pair ({terms[a]},{terms[b]}) is disconnected in the graph")
    # terminals that cannot reach each other never share a component in any
    # feasible solution; give them a distance larger than any path so the
    # closure stays a metric.
    if any(rows[i][j] is None for i in range(n) for j in range(n)):
        inf = 1 + sum(w for _, _, w in g.normalized().edges)
        rows = [[inf if x is None else x for x in row] for row in rows]
    return MetricInstance(terms, rows, rank_pairs(ends, rows, terms), g.normalized(), provenance)


def expand_solution(inst: MetricInstance, edges) -> list[tuple[int, int, int]]:
    """Replace metric edges by their stored shortest paths in the source graph.

    ``edges`` is an iterable of terminal-label pairs or a
    :class:`~steinerls.forest.Forest` over ``inst``.  Returns deduplicated
    ``(u, v, length)`` graph edges with ``u < v``, sorted.
    """
    if inst.provenance is None or inst.graph is None:
        raise NoProvenance("instance has no source graph")
    if hasattr(edges, "edges") and hasattr(edges, "inst"):
        idx_edges = sorted(edges.edges)
    else:
        idx_edges = [inst.edge_of_labels(a, b) for a, b in edges]
    lengths = {(u, v): w for u, v, w in inst.graph.edges}
    out: set[tuple[int, int]] = set()
    for e in idx_edges:
        path = inst.provenance[e]
        for a, b in zip(path, path[1:]):
            out.add((min(a, b), max(a, b)))
    return [(u, v, lengths[(u, v)]) for u, v in sorted(out)]
