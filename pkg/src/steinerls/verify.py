"""Per-instance verification: run the search, compare with the oracle and run
every structural check that applies."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import circuit_packing_bounds, compatibility_partition, hall_condition_check, locality_gap_report
from .analysis.report import GapReport
from .engine import EDGE_EDGE_ONLY, SearchConfig, SearchTrace, run
from .forest import Forest
from .instance import MetricInstance
from .oracle import DEFAULT_BUDGET, OracleBudget, bruteforce_local_optimum_check, optimal_forest

BRUTEFORCE_TERMINALS = 8


def random_spanning_tree(inst: MetricInstance, rng: random.Random) -> list[tuple[int, int]]:
    order = list(range(inst.terminal_count))
    rng.shuffle(order)
    return [(order[i], order[rng.randrange(i)]) for i in range(1, len(order))]


def swap_optimal_tree(inst: MetricInstance, seed: int = 0, eps: Fraction = Fraction(1, 4)) -> Forest:
    """A spanning tree no single-edge swap improves, reached from a seeded
    random spanning tree.  Swaps keep it spanning."""
    start = random_spanning_tree(inst, random.Random(seed))
    cfg = SearchConfig(epsilon=eps, neighborhood_order=(EDGE_EDGE_ONLY,))
    _, trace = run(inst, cfg, initial=start)
    return Forest(inst, trace.converged.edges)


def trace_accounting_ok(trace: SearchTrace) -> bool:
    """Each applied move lowers the unit potential by at least 1, and the
    move count stays within the iteration bound."""
    phi = trace.initial_phi
    for it in trace.iterations:
        if it.delta_units > -1 or it.phi_after != phi + it.delta_units:
            return False
        phi = it.phi_after
    return trace.iteration_bound is None or trace.n_iterations <= trace.iteration_bound


@dataclass
class VerifyResult:
    final: Forest
    trace: SearchTrace
    opt: Forest
    gap: GapReport
    checks: dict[str, bool] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def verify_instance(
    inst: MetricInstance,
    cfg: SearchConfig | None = None,
    budget: OracleBudget = DEFAULT_BUDGET,
    seed: int = 0,
    structural: bool = True,
) -> VerifyResult:
    cfg = cfg or SearchConfig()
    t0 = time.perf_counter()
    final, trace = run(inst, cfg)
    opt, _ = optimal_forest(inst, budget)
    gap = locality_gap_report(final, inst, opt, c=1, eps=cfg.epsilon)
    checks = {"gap_bound": gap.passed, "accounting": trace_accounting_ok(trace)}
    if gap.tree_bound_ok is not None:
        checks["tree_bound"] = gap.tree_bound_ok
    if trace.rounded is not None and inst.terminal_count <= BRUTEFORCE_TERMINALS:
        rep = bruteforce_local_optimum_check(trace.converged, eps=cfg.epsilon, budget=budget)
        checks["local_optimum"] = rep.ok
    exact = trace.certified.get("connecting") == "exact"
    if structural and trace.rounded is not None and exact:
        conv = trace.converged
        ref = Forest(conv.inst, opt.edges)
        bounds = circuit_packing_bounds(conv, ref, 1 + cfg.epsilon)
        checks["packing_bound"] = all(b.holds for _, _, b in bounds)
    if structural and inst.terminal_count >= 2:
        tree = swap_optimal_tree(inst, seed, cfg.epsilon)
        part = compatibility_partition(tree, opt)
        checks["compatibility"] = not part.violations()
        checks["hall"] = hall_condition_check(tree, opt, partition=part).holds
    return VerifyResult(final, trace, opt, gap, checks, time.perf_counter() - t0)
