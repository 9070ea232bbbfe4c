import math
import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _util import random_cg, random_pair_forest, random_problem
from steinerls.connecting import (
    CertifiedNone,
    ContractedGraph,
    KmstProblem,
    build_contracted_graph,
    improving_connecting_move,
    kmst_exact,
    kmst_greedy,
    threshold_levels,
)
from steinerls.errors import CapExceeded, Infeasible
from steinerls.forest import Forest
from steinerls.instance import MetricInstance
from steinerls.moves import CONNECTING
from steinerls.oracle import kmst_bruteforce


def line_instance(points, pairs):
    d = [[abs(a - b) for b in points] for a in points]
    return MetricInstance.from_matrix(d, pairs)


def k3_graph(weight=7, widths=(0, 5, 5)):
    w = {}
    for a, b in combinations((1, 2, 3), 2):
        w[(a, b)] = w[(b, a)] = weight
    return ContractedGraph(None, (0, 1, 2), widths, w, {})


def test_contracted_single_component(k4_inst):
    cg = build_contracted_graph(Forest.from_labels(k4_inst, [(1, 3), (3, 4), (4, 2)]))
    assert cg.p == 1 and cg.weight == {}


def test_contracted_k4(k4_inst):
    cg = build_contracted_graph(Forest.from_labels(k4_inst, [(1, 2), (3, 4)]))
    assert cg.p == 2 and cg.w(1, 2) == cg.w(2, 1) == 1


def test_contracted_three_pairs():
    n = 6
    d = [[0 if i == j else (1 if i // 2 == j // 2 else 7) for j in range(n)] for i in range(n)]
    inst = MetricInstance.from_matrix(d, [(1, 2), (3, 4), (5, 6)])
    cg = build_contracted_graph(Forest.from_labels(inst, [(1, 2), (3, 4), (5, 6)]))
    assert cg.p == 3 and {cg.w(a, b) for a, b in combinations(cg.nodes, 2)} == {7}


def test_node_order_by_width():
    inst = line_instance([0, 10, 100, 103, 200, 201], [(1, 2), (3, 4), (5, 6)])
    f = Forest.from_labels(inst, [(1, 2), (3, 4), (5, 6)])
    assert build_contracted_graph(f).widths == (1, 3, 10)


def test_kmst_examples():
    cg = k3_graph()
    assert kmst_exact(cg, KmstProblem(1, {1: 0, 2: 5, 3: 5}, 0)).cost == 0
    t = kmst_exact(cg, KmstProblem(1, {1: 0, 2: 5, 3: 5}, 5))
    assert t.cost == 7 and len(t.nodes) == 2
    assert kmst_greedy(cg, KmstProblem(1, {1: 0, 2: 5, 3: 5}, 5)).cost == 7
    with pytest.raises(Infeasible):
        kmst_exact(cg, KmstProblem(1, {1: 0, 2: 5, 3: 5}, 11))
    with pytest.raises(Infeasible):
        kmst_greedy(cg, KmstProblem(1, {1: 0, 2: 5, 3: 5}, 11))
    with pytest.raises(ValueError):
        KmstProblem(1, {1: 3, 2: 5}, 1)


def test_kmst_cap():
    cg = random_cg(0, p=5)
    prob = KmstProblem(1, {v: (0 if v == 1 else 1) for v in cg.nodes}, 2)
    with pytest.raises(CapExceeded):
        kmst_exact(cg, prob, cap=4)


def test_threshold_levels():
    assert threshold_levels([2, 3, 5], Fraction(1, 2)) == [2, 3, 4, 5, 7, 8, 10, 12, 15]
    assert threshold_levels([0, 0], Fraction(1, 4)) == []


def test_connecting_move_found():
    inst = line_instance([0, 10, 13, 23], [(1, 2), (3, 4)])
    f = Forest.from_labels(inst, [(1, 2), (3, 4)])
    mv = improving_connecting_move(f)
    assert mv.kind == CONNECTING and mv.delta_phi == -7
    after = mv.apply(f)
    assert after.phi - f.phi == -7 and len(after.components) == len(f.components) - 1


def test_connecting_certified_none():
    inst = line_instance([0, 2, 7, 9], [(1, 2), (3, 4)])
    res = improving_connecting_move(Forest.from_labels(inst, [(1, 2), (3, 4)]))
    assert isinstance(res, CertifiedNone) and res.c == 1


def test_single_component_certified(k4_inst):
    res = improving_connecting_move(Forest.from_labels(k4_inst, [(1, 3), (3, 4), (4, 2)]))
    assert isinstance(res, CertifiedNone) and res.calls == 0


@given(st.integers(0, 10**6))
def test_exact_matches_bruteforce_and_beats_greedy(seed):
    rng = random.Random(seed)
    cg = random_cg(seed)
    prob = random_problem(cg, rng)
    ex = kmst_exact(cg, prob)
    assert ex.cost == kmst_bruteforce(cg, prob).cost
    assert ex.cost <= kmst_greedy(cg, prob).cost
    assert prob.root in ex.nodes and sum(prob.gamma[v] for v in ex.nodes) >= prob.lower_bound


@given(st.integers(0, 10**6))
def test_call_count_bound(seed):
    f = random_pair_forest(seed)
    eps = Fraction(1, 4)
    res = improving_connecting_move(f, eps=eps)
    if isinstance(res, CertifiedNone):
        ws = [c.width for c in f.components if c.width > 0]
        if ws:
            p = len(f.components)
            bound = p * math.log(p * max(ws) / min(ws), 1 + eps / 2) + 2 * p
            assert res.calls <= bound
    else:
        assert res.delta_phi < 0
