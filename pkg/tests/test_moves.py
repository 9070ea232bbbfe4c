import itertools
import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _util import random_feasible_forest, random_graph_instance
from steinerls.errors import EndpointsDisconnected
from steinerls.forest import Forest, is_feasible
from steinerls.instance import MetricInstance, WeightedGraph, metric_closure
from steinerls.moves import (
    EDGE_EDGE,
    EDGE_SET,
    PATH_SET,
    REMOVAL,
    enumerate_edge_set_swaps,
    enumerate_path_set_swaps,
    enumerate_removal_moves,
    fundamental_cycle,
    removable_set,
)


def L(inst, a, b):
    return inst.edge_of_labels(a, b)


def test_fundamental_cycle_path(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 3), (3, 4), (4, 2)])
    cyc = fundamental_cycle(f, L(k4_inst, 1, 2))
    assert cyc == [L(k4_inst, 1, 3), L(k4_inst, 3, 4), L(k4_inst, 2, 4)]


def test_fundamental_cycle_star_and_errors(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 3), (3, 2)])
    assert fundamental_cycle(f, L(k4_inst, 1, 2)) == [L(k4_inst, 1, 3), L(k4_inst, 2, 3)]
    g = Forest.from_labels(k4_inst, [(1, 2)])
    with pytest.raises(EndpointsDisconnected):
        fundamental_cycle(g, L(k4_inst, 1, 3))


def test_removable_set_k4(k4_inst):
    # mechanically: removing {1,3} or {4,2} together with {3,4} isolates 3 or 4,
    # so only the anchor itself is removable
    f = Forest.from_labels(k4_inst, [(1, 3), (3, 4), (4, 2)])
    r = removable_set(f, L(k4_inst, 1, 2), L(k4_inst, 3, 4))
    assert list(r.members) == [L(k4_inst, 3, 4)]
    r = removable_set(f, L(k4_inst, 1, 2), L(k4_inst, 1, 3))
    assert list(r.members) == [L(k4_inst, 1, 3), L(k4_inst, 2, 4)]


def test_removable_set_excludes_splitting_edge():
    # path 1-2-3-4-5-6 with pairs (2,3) and (4,5); add edge (1,6)
    n = 6
    dist = [[abs(i - j) for j in range(n)] for i in range(n)]
    inst = MetricInstance.from_matrix(dist, [(2, 3), (4, 5)])
    f = Forest.from_labels(inst, [(i, i + 1) for i in range(1, n)])
    r = removable_set(f, L(inst, 1, 6), L(inst, 1, 2))
    assert L(inst, 2, 3) not in r.members and L(inst, 4, 5) not in r.members
    assert list(r.members) == [L(inst, 1, 2), L(inst, 3, 4), L(inst, 5, 6)]
    # all-or-nothing: the whole member set is removable at once
    assert is_feasible(f.with_changes(add=[L(inst, 1, 6)], remove=r.members))


def test_edge_set_swaps_k4(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 3), (3, 4), (4, 2)])
    assert (f.length, f.width, f.phi) == (4, 2, 6)
    moves = list(enumerate_edge_set_swaps(f))
    found = {(m.remove, m.delta_phi) for m in moves if m.add == {L(k4_inst, 1, 2)}}
    assert (frozenset({L(k4_inst, 1, 3), L(k4_inst, 2, 4)}), 2) in found
    assert all(m.remove != frozenset(f.edges) for m in moves)
    for m in moves:
        assert is_feasible(m.apply(f))


def test_no_candidates_no_swaps(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 2), (3, 4)])
    assert list(enumerate_edge_set_swaps(f)) == []


def test_path_set_through_other_component():
    # u=1 -a=2 -b=3 -v=4 in the current tree; x=5, y=6 form another component;
    # c=7, d=8 a third pair far away
    edges = ((1, 2, 10), (2, 3, 10), (3, 4, 10), (1, 5, 1), (5, 6, 5), (6, 4, 1), (7, 8, 3), (1, 7, 50))
    inst = metric_closure(WeightedGraph(8, edges), range(1, 9), [(1, 4), (5, 6), (7, 8)])
    f = Forest.from_labels(inst, [(1, 2), (2, 3), (3, 4), (5, 6), (7, 8)])
    tree = frozenset({L(inst, 1, 2), L(inst, 2, 3), L(inst, 3, 4)})
    hits = [m for m in enumerate_path_set_swaps(f) if m.remove == tree]
    assert hits
    m = min(hits, key=lambda m: m.delta_phi)
    assert m.add == {L(inst, 1, 5), L(inst, 4, 6)}
    after = m.apply(f)
    assert after.phi - f.phi == m.delta_phi == -33
    assert is_feasible(after)


def test_path_set_in_single_component_matches_edge_set(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 3), (3, 4), (4, 2)])
    ps = {(m.add, m.remove, m.delta_phi) for m in enumerate_path_set_swaps(f)}
    es = {(m.add, m.remove, m.delta_phi) for m in enumerate_edge_set_swaps(f)}
    assert ps <= es


def test_removal_moves(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 2), (3, 4), (1, 3)])
    (m,) = list(enumerate_removal_moves(f))
    assert m.kind == REMOVAL and m.remove == {L(k4_inst, 1, 3)} and m.delta_phi == 1
    assert list(enumerate_removal_moves(Forest.from_labels(k4_inst, [(1, 2), (3, 4)]))) == []


def _all_moves(f):
    yield from enumerate_edge_set_swaps(f)
    yield from enumerate_path_set_swaps(f)
    yield from enumerate_removal_moves(f)


@given(st.integers(0, 10**6))
def test_every_emitted_move_is_sound(seed):
    inst = random_graph_instance(seed, n_max=7, shared=seed % 2 == 0)
    f = random_feasible_forest(inst, random.Random(seed))
    for m in _all_moves(f):
        g = m.apply(f)
        assert is_feasible(g)
        assert nx.is_forest(nx.Graph(list(g.edges))) if g.edges else True
        assert g.phi - f.phi == m.delta_phi


@given(st.integers(0, 10**6))
def test_edge_edge_is_singleton_edge_set(seed):
    inst = random_graph_instance(seed, n_max=7)
    f = random_feasible_forest(inst, random.Random(seed))
    single = {(m.add, m.remove) for m in enumerate_edge_set_swaps(f) if len(m.remove) == 1}
    restricted = {(m.add, m.remove) for m in enumerate_edge_set_swaps(f, max_remove=1)}
    assert single == restricted
    kinds = {m.kind for m in enumerate_edge_set_swaps(f)}
    assert kinds <= {EDGE_EDGE, EDGE_SET}


@given(st.integers(0, 10**6))
def test_removable_sets_are_maximal_and_all_or_nothing(seed):
    inst = random_graph_instance(seed, n_max=7, shared=True)
    f = random_feasible_forest(inst, random.Random(seed))
    for a, b in itertools.combinations(range(inst.terminal_count), 2):
        e = (a, b)
        if e in f.edges or not f.same_component(a, b):
            continue
        cyc = fundamental_cycle(f, e)
        for anchor in cyc:
            r = removable_set(f, e, anchor)
            assert anchor in r.members and set(r.members) <= set(cyc)
            assert is_feasible(f.with_changes(add=[e], remove=r.members))
            for g in cyc:
                if g not in r.members:
                    assert not is_feasible(f.with_changes(add=[e], remove=[anchor, g]))


def test_path_set_u_equals_v_not_emitted(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 2), (3, 4)])
    for m in enumerate_path_set_swaps(f):
        assert m.kind == PATH_SET
        assert all(a != b for a, b in m.add)
