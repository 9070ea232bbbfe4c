"""The circuit charging scheme on two hand-made circuits and one circuit
extracted from a real forest.

A circuit is written as its sequence of contracted nodes, largest first.  The
scheme cuts it into edge-disjoint trees so that every node other than the
maximum is paid for at least as often as the circuit visits it.
"""

from steinerls.analysis import GuardedCircuit, charge_circuit, circuit_packing_bounds
from steinerls.forest import Forest
from steinerls.instance import WeightedGraph, metric_closure


def describe(name, seq):
    c = GuardedCircuit.from_sequence(seq)
    p = charge_circuit(c, check=True)
    print(f"{name}: {c.node_sequence}")
    print(f"  minimally guarded: {c.minimally_guarded}, visits {dict(sorted(c.visit_counts.items()))}")
    for t in p.full_trees:
        print(f"  tree rooted at position {t.root}: edges {t.edges} nodes {sorted(p.tree_nodes(t))}")
    print(f"  payments {dict(sorted(p.full_payments.items()))}")


def embedded():
    # pair components with widths 1..7; a reference path visits components 7, 4, 5, 4, 1
    labels = {}
    nxt = iter(range(1, 15))
    for k in (7, 4, 5, 1, 2, 3, 6):
        labels[k] = (next(nxt), next(nxt))
    edges = [(s, t, k) for k, (s, t) in labels.items()]
    path = [labels[7][0], labels[4][0], labels[5][0], labels[4][1], labels[1][0]]
    edges += [(a, b, 10) for a, b in zip(path, path[1:])]
    pairs = list(labels.values())
    inst = metric_closure(WeightedGraph(14, tuple(edges)), range(1, 15), pairs)
    sol = Forest.from_labels(inst, pairs)
    ref = Forest.from_labels(inst, list(zip(path, path[1:])))
    print("circuits of a seven-component forest against a reference path:")
    for c, p, b in circuit_packing_bounds(sol, ref):
        print(f"  {c.node_sequence}: {len(p.trees)} trees, weighted visits {b.lhs} <= length {b.rhs}: {b.holds}")


if __name__ == "__main__":
    describe("five-node example", (7, 1, 2, 1, 4, 1, 2, 5, 1, 3, 2, 7))
    describe("flower", (7, 1, 2, 1, 3, 1, 4, 1, 5, 1, 6, 1, 7))
    embedded()
