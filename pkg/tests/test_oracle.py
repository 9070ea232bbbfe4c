import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _util import random_feasible_forest, random_graph_instance
from steinerls.engine import run
from steinerls.errors import BudgetExceeded
from steinerls.forest import Forest, is_feasible
from steinerls.instance import MetricInstance, WeightedGraph, metric_closure
from steinerls.oracle import (
    OracleBudget,
    bruteforce_local_optimum_check,
    optimal_forest,
    optimal_forest_on_cycle,
    steiner_tree_dp,
    steiner_tree_enumerate,
)
from steinerls.io import gen_figure1


def test_steiner_small_cases(k4_inst):
    assert steiner_tree_dp(k4_inst, [0])[1] == 0
    assert steiner_tree_dp(k4_inst, [0, 3])[1] == k4_inst.dist[0][3]
    edges, cost = steiner_tree_dp(k4_inst, [0, 2, 3])
    assert cost == 3
    assert edges == {k4_inst.edge_of_labels(1, 3), k4_inst.edge_of_labels(3, 4)}


def test_optimal_forest_examples(k4_inst):
    f, cost = optimal_forest(k4_inst)
    assert cost == 4 and is_feasible(f) and f.length == 4
    one = MetricInstance.from_matrix([[0, 5, 9], [5, 0, 4], [9, 4, 0]], [(1, 3)])
    f, cost = optimal_forest(one)
    assert cost == 9 and f.label_edges() in ([(1, 3)], [(1, 2), (2, 3)])


def test_optimal_forest_shared_endpoints():
    pts = [0, 10, 20, 1000, 1001]
    inst = MetricInstance.from_matrix([[abs(a - b) for b in pts] for a in pts], [(1, 2), (2, 3), (4, 5)])
    f, cost = optimal_forest(inst)
    assert cost == 21 and f.same_component(0, 2)


def test_budget():
    inst = random_graph_instance(0, n_min=8, n_max=8)
    with pytest.raises(BudgetExceeded):
        optimal_forest(inst, OracleBudget(max_terminals=5))


def test_cycle_oracle_matches_general_oracle():
    f = gen_figure1(4, 2)
    inst = f.to_instance()
    assert optimal_forest_on_cycle(f.graph, f.pairs) == optimal_forest(inst)[1] == 14


def test_bruteforce_check_examples(k4_inst):
    final, trace = run(k4_inst)
    assert bruteforce_local_optimum_check(trace.converged).ok
    perturbed = Forest.from_labels(k4_inst, [(1, 2), (3, 4), (1, 4)])
    rep = bruteforce_local_optimum_check(perturbed)
    assert not rep.ok and any(m.kind == "removal" for m in rep.improving)
    empty = MetricInstance.from_matrix([[0, 1], [1, 0]], [])
    rep = bruteforce_local_optimum_check(Forest(empty))
    assert rep.ok and not rep.extended


@given(st.integers(0, 10**6))
def test_dp_matches_enumeration(seed):
    inst = random_graph_instance(seed, n_max=7)
    rng = random.Random(seed)
    req = rng.sample(range(inst.terminal_count), rng.randint(1, min(5, inst.terminal_count)))
    edges, cost = steiner_tree_dp(inst, req)
    assert cost == steiner_tree_enumerate(inst, req)
    assert cost == sum(inst.dist[a][b] for a, b in edges)


@given(st.integers(0, 10**5))
def test_optimum_beats_random_feasible_forests(seed):
    inst = random_graph_instance(seed, n_max=7, shared=True)
    _, cost = optimal_forest(inst)
    rng = random.Random(seed)
    for _ in range(25):
        assert cost <= random_feasible_forest(inst, rng).length


@given(st.integers(3, 8), st.integers(0, 10**6))
def test_cycle_oracle_matches_general_oracle_on_random_cycles(n, seed):
    rng = random.Random(seed)
    edges = tuple((v, v % n + 1, rng.randint(0, 30)) for v in range(1, n + 1))
    pairs = {tuple(sorted(rng.sample(range(1, n + 1), 2))) for _ in range(rng.randint(1, n))}
    g = WeightedGraph(n, edges)
    inst = metric_closure(g, range(1, n + 1), sorted(pairs))
    assert optimal_forest_on_cycle(g, sorted(pairs)) == optimal_forest(inst)[1]
