import itertools

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _util import random_graph_instance
from steinerls.errors import DisconnectedPair, NoProvenance, ValidationError
from steinerls.forest import Forest
from steinerls.instance import MetricInstance, WeightedGraph, expand_solution, metric_closure


def test_path_closure():
    inst = metric_closure(WeightedGraph(3, ((1, 2, 4), (2, 3, 5))), {1, 3}, [(1, 3)])
    assert inst.labels == (1, 3)
    assert inst.dist[0][1] == 9
    assert inst.pairs[0].index == 1


def test_k4_closure_is_input_and_pair_order(k4_inst):
    d = {(1, 2): 2, (3, 4): 2, (1, 3): 1, (2, 4): 1, (1, 4): 3, (2, 3): 3}
    for (a, b), w in d.items():
        assert k4_inst.dist[a - 1][b - 1] == w
    # tie on distance 2 broken lexicographically
    assert [(p.u, p.ubar, p.index) for p in k4_inst.pairs] == [(1, 2, 1), (3, 4, 2)]


def test_parallel_edges_use_minimum():
    inst = metric_closure(WeightedGraph(2, ((1, 2, 5), (1, 2, 3))), {1, 2}, [(1, 2)])
    assert inst.dist[0][1] == 3


def test_disconnected_pair():
    g = WeightedGraph(4, ((1, 2, 1), (3, 4, 1)))
    with pytest.raises(DisconnectedPair):
        metric_closure(g, {1, 3}, [(1, 3)])


def test_unreachable_nonpair_terminals_stay_metric():
    g = WeightedGraph(4, ((1, 2, 1), (3, 4, 1)))
    inst = metric_closure(g, {1, 2, 3, 4}, [(1, 2), (3, 4)])
    assert inst.dist[0][2] > 2


def test_graph_validation():
    with pytest.raises(ValidationError):
        WeightedGraph(2, ((1, 1, 1),))
    with pytest.raises(ValidationError):
        WeightedGraph(2, ((1, 2, -1),))
    with pytest.raises(ValidationError):
        WeightedGraph(2, ((0, 2, 1),))


def test_expand_path():
    inst = metric_closure(WeightedGraph(3, ((1, 2, 4), (2, 3, 5))), {1, 3}, [(1, 3)])
    assert expand_solution(inst, [(1, 3)]) == [(1, 2, 4), (2, 3, 5)]
    assert expand_solution(inst, []) == []


def test_expand_dedupes_shared_edge():
    # star: center 1, leaves 2,3,4; metric edges 2-3 and 2-4 both use edge 1-2
    g = WeightedGraph(4, ((1, 2, 5), (1, 3, 1), (1, 4, 1)))
    inst = metric_closure(g, {2, 3, 4}, [(2, 3), (2, 4)])
    out = expand_solution(inst, [(2, 3), (2, 4)])
    assert out == [(1, 2, 5), (1, 3, 1), (1, 4, 1)]
    assert sum(w for *_, w in out) == 7 < inst.dist[0][1] + inst.dist[0][2] == 12


def test_expand_needs_provenance():
    inst = MetricInstance.from_matrix([[0, 1], [1, 0]], [(1, 2)])
    with pytest.raises(NoProvenance):
        expand_solution(inst, [(1, 2)])


def test_from_matrix_rejects_non_metric():
    with pytest.raises(ValidationError):
        MetricInstance.from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]], [(1, 2)])


def test_width_uses_highest_ranked_pair(k4_inst):
    full = 0b1111
    assert k4_inst.width_of(full) == (2, 2)
    assert k4_inst.width_of(0b0011) == (2, 1)
    assert k4_inst.width_of(0b0101) == (0, None)


@given(st.integers(0, 10**6))
def test_closure_triangle_inequality(seed):
    inst = random_graph_instance(seed)
    n = inst.terminal_count
    d = inst.dist
    for i, j, k in itertools.product(range(n), repeat=3):
        assert d[i][k] <= d[i][j] + d[j][k]
    for i in range(n):
        assert d[i][i] == 0


@given(st.integers(0, 10**6))
def test_pair_order_is_deterministic_and_sorted(seed):
    a = random_graph_instance(seed, shared=True)
    b = random_graph_instance(seed, shared=True)
    assert a.pairs == b.pairs
    assert list(a.pair_dist) == sorted(a.pair_dist)
    keys = [(a.dist[x][y], a.labels[x], a.labels[y]) for x, y in a.pair_ends]
    assert keys == sorted(keys)


@given(st.integers(0, 10**6))
def test_expand_preserves_connectivity(seed):
    import random

    inst = random_graph_instance(seed, density=0.3)
    rng = random.Random(seed)
    n = inst.terminal_count
    order = list(range(n))
    rng.shuffle(order)
    edges = [(order[i], order[rng.randrange(i)]) for i in range(1, n) if rng.random() < 0.7]
    f = Forest(inst, edges)
    g = nx.Graph()
    g.add_nodes_from(inst.labels)
    g.add_edges_from((u, v) for u, v, _ in expand_solution(inst, f))
    for a, b in itertools.combinations(range(n), 2):
        if f.same_component(a, b):
            assert nx.has_path(g, inst.labels[a], inst.labels[b])
    assert sum(w for *_, w in expand_solution(inst, f)) <= f.length
