"""Why single-edge swaps are not enough.

The instance is a cycle: a line of 2l vertices whose edges alternate between
length k and length l, closed by one bypass edge of length l*k.  Starting
from the chain (the whole line) every single swap is non-improving, so a
search restricted to edge/edge swaps stays stuck at roughly l/(2k) times the
optimum.  The multi-edge neighborhoods escape and reach the optimum.
"""

import sys
import time
from fractions import Fraction

from steinerls.engine import EDGE_EDGE_ONLY, SearchConfig, run
from steinerls.forest import Forest
from steinerls.io import figure1_chain, figure1_costs, gen_figure1
from steinerls.oracle import optimal_forest_on_cycle


def main(cases=((6, 2), (12, 3), (20, 4))):
    print(f"{'l':>3} {'k':>3} {'chain':>6} {'OPT':>5} {'full':>6} {'edge/edge':>10} {'ratio':>7} {'l/(4k)':>7} {'secs':>6}")
    for l, k in cases:
        file = gen_figure1(l, k)
        inst = file.to_instance()
        chain_cost, _ = figure1_costs(l, k)
        opt = optimal_forest_on_cycle(file.graph, file.pairs)
        chain = Forest.from_labels(inst, figure1_chain(l))
        t0 = time.perf_counter()
        full, _ = run(inst, SearchConfig(), chain)
        stuck, _ = run(inst, SearchConfig(neighborhood_order=(EDGE_EDGE_ONLY,)), chain)
        secs = time.perf_counter() - t0
        ratio = Fraction(stuck.length, opt)
        print(
            f"{l:>3} {k:>3} {chain_cost:>6} {opt:>5} {full.length:>6} {stuck.length:>10}"
            f" {float(ratio):>7.3f} {l / (4 * k):>7.2f} {secs:>6.1f}"
        )


if __name__ == "__main__":
    if len(sys.argv) == 3:
        main(((int(sys.argv[1]), int(sys.argv[2])),))
    else:
        main()
