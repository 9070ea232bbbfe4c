"""Walk through one solve on the four-terminal square.

Terminals 1..4, pairs {1,2} and {3,4}.  The two pair edges cost 2 each; the
cheap rungs 1-3 and 2-4 cost 1.  The start solution takes both pair edges
(d=4, two widths of 2, phi=8).  The search then prefers the Z-shaped tree
1-3-4-2: same length, one component, so only one width is paid (phi=6).
"""

from steinerls.analysis import locality_gap_report
from steinerls.engine import SearchConfig, initial_solution, round_instance, run
from steinerls.instance import WeightedGraph, expand_solution, metric_closure
from steinerls.connecting import improving_connecting_move
from steinerls.moves import enumerate_edge_set_swaps, enumerate_path_set_swaps, enumerate_removal_moves
from steinerls.oracle import bruteforce_local_optimum_check, optimal_forest

EDGES = ((1, 2, 2), (3, 4, 2), (1, 3, 1), (2, 4, 1), (1, 4, 3), (2, 3, 3))


def show(title, f):
    print(f"{title}: edges {f.label_edges()}  d={f.length}  w={f.width}  phi={f.phi}")


def main():
    inst = metric_closure(WeightedGraph(4, EDGES), {1, 2, 3, 4}, [(1, 2), (3, 4)])
    print("pairs by rank:", [inst.labels_of_edge(p) for p in inst.pair_ends])

    start = initial_solution(inst)
    show("start", start)
    # an edge between two components closes no cycle, so edge/set swaps
    # have nothing to offer here; the path/set and connecting moves do
    print("improving moves from the start:")
    moves = [*enumerate_edge_set_swaps(start), *enumerate_path_set_swaps(start), *enumerate_removal_moves(start)]
    conn = improving_connecting_move(start)
    if hasattr(conn, "delta_phi"):
        moves.append(conn)
    for mv in moves:
        if mv.delta_phi < 0:
            add = [inst.labels_of_edge(e) for e in sorted(mv.add)]
            rem = [inst.labels_of_edge(e) for e in sorted(mv.remove)]
            print(f"  {mv.kind}: add {add} remove {rem}  dphi={mv.delta_phi}")

    cfg = SearchConfig()
    r = round_instance(inst, cfg.epsilon)
    print(f"rounding unit beta={r.beta}, unit distances {r.unit_dist[0]}")

    final, trace = run(inst, cfg)
    for i, it in enumerate(trace.iterations, 1):
        print(f"  move {i}: {it.kind}  dphi_units={it.delta_units}  phi_units={it.phi_after}")
    show("final", final)
    print("certificates:", trace.certified)
    print("local optimum confirmed by brute force:", bruteforce_local_optimum_check(trace.converged).ok)

    opt, cost = optimal_forest(inst)
    show("optimum", opt)
    rep = locality_gap_report(final, inst, opt)
    print(f"ratio {rep.ratio} against the guarantee {float(rep.bound_factor)}")
    print("in the source graph:", expand_solution(inst, final))


if __name__ == "__main__":
    main()
