"""The local search driver.

Distances are rounded up to multiples of ``beta = eps * max pair distance /
|E|`` and the search runs on the integer multiples ("units").  Every applied
move lowers the unit potential by at least one, which bounds the number of
iterations by the initial unit potential.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Iterable, Iterator

from scipy.cluster.hierarchy import DisjointSet

from .connecting import CertifiedNone, improving_connecting_move
from .errors import CapExceeded, DegenerateInstance, InfeasibleInput, IterationCapExceeded
from .forest import Forest, cleanup, is_feasible
from .instance import MetricInstance
from .moves import (
    CONNECTING,
    EDGE_SET,
    PATH_SET,
    REMOVAL,
    Move,
    enumerate_edge_set_swaps,
    enumerate_path_set_swaps,
    enumerate_removal_moves,
)

log = logging.getLogger(__name__)

EDGE_EDGE_ONLY = "edge_edge"
NEIGHBORHOODS = (EDGE_SET, PATH_SET, REMOVAL, CONNECTING)


@dataclass(frozen=True)
class SearchConfig:
    epsilon: Fraction = Fraction(1, 4)
    pivot: str = "first_improving"
    neighborhood_order: tuple[str, ...] = NEIGHBORHOODS
    kmst_solver: str = "exact"
    max_iterations: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "neighborhood_order", tuple(self.neighborhood_order))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.pivot not in ("first_improving", "best_improving"):
            raise ValueError(f"unknown pivot rule {self.pivot!r}")
        if self.kmst_solver not in ("exact", "greedy"):
            raise ValueError(f"unknown k-MST solver {self.kmst_solver!r}")
        order = self.neighborhood_order
        allowed = set(NEIGHBORHOODS) | {EDGE_EDGE_ONLY}
        if len(set(order)) != len(order) or not set(order) <= allowed or not order:
            raise ValueError(f"neighborhood_order must list distinct names from {sorted(allowed)}")


@dataclass(frozen=True)
class RoundedInstance:
    base: MetricInstance
    beta: Fraction
    units: MetricInstance

    @property
    def unit_dist(self) -> tuple[tuple[int, ...], ...]:
        return self.units.dist


@dataclass(frozen=True)
class IterationRecord:
    kind: str
    delta_units: int
    phi_after: int
    wall_time: float
    move: Move | None = None


@dataclass
class SearchTrace:
    iterations: list[IterationRecord] = field(default_factory=list)
    final: Forest | None = None
    converged: Forest | None = None
    initial_phi: int = 0
    certified: dict[str, str] = field(default_factory=dict)
    rounded: RoundedInstance | None = None
    iteration_bound: Fraction | None = None

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)

    def move_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for it in self.iterations:
            out[it.kind] = out.get(it.kind, 0) + 1
        return out


def round_instance(inst: MetricInstance, eps: Fraction | int | str) -> RoundedInstance:
    """Round every distance up to a whole number of ``beta`` units."""
    eps = Fraction(eps)
    top = inst.max_pair_distance()
    if top == 0:
        raise DegenerateInstance("every terminal pair has distance 0")
    beta = eps * top / inst.edge_count
    units = [[ceil(x / beta) for x in row] for row in inst.dist]
    return RoundedInstance(inst, beta, inst.with_distances(units))


def initial_solution(inst: MetricInstance) -> Forest:
    """One direct edge per pair, skipping edges that would close a cycle.

    Pairs are taken in lexicographic order of their label pairs.
    """
    ds = DisjointSet(range(inst.terminal_count))
    edges = []
    for a, b in sorted(inst.pair_ends, key=inst.labels_of_edge):
        if ds.merge(a, b):
            edges.append((a, b))
    return Forest(inst, edges)


def iteration_bound(inst: MetricInstance, eps: Fraction) -> Fraction:
    return 2 * inst.n_pairs * Fraction(inst.edge_count) / Fraction(eps)


def _stream(f: Forest, name: str, cfg: SearchConfig, trace: SearchTrace) -> Iterator[Move]:
    if name == EDGE_SET:
        yield from enumerate_edge_set_swaps(f)
    elif name == EDGE_EDGE_ONLY:
        yield from enumerate_edge_set_swaps(f, max_remove=1)
    elif name == PATH_SET:
        yield from enumerate_path_set_swaps(f)
    elif name == REMOVAL:
        yield from enumerate_removal_moves(f)
    elif name == CONNECTING:
        solver = cfg.kmst_solver
        try:
            res = improving_connecting_move(f, eps=cfg.epsilon, solver=solver)
        except CapExceeded:
            log.info("contracted graph too large for the exact k-MST solver, using greedy")
            solver = "greedy"
            res = improving_connecting_move(f, eps=cfg.epsilon, solver=solver)
        if isinstance(res, CertifiedNone):
            trace.certified[CONNECTING] = "exact" if res.c == 1 else "greedy (no proven factor)"
        else:
            yield res


def _pick(f: Forest, cfg: SearchConfig, trace: SearchTrace) -> Move | None:
    best = None
    for name in cfg.neighborhood_order:
        for mv in _stream(f, name, cfg, trace):
            if mv.delta_phi < 0:
                if cfg.pivot == "first_improving":
                    return mv
                if best is None or mv.delta_phi < best.delta_phi:
                    best = mv
    return best


def local_search(f: Forest, cfg: SearchConfig, trace: SearchTrace) -> Forest:
    """Apply improving moves until none is left.  ``f`` must live on the
    instance whose distances define the potential being minimized."""
    start = time.perf_counter()
    trace.initial_phi = f.phi
    while True:
        mv = _pick(f, cfg, trace)
        if mv is None:
            break
        if cfg.max_iterations is not None and trace.n_iterations >= cfg.max_iterations:
            raise IterationCapExceeded(f"no convergence within {cfg.max_iterations} iterations")
        nxt = mv.apply(f)
        assert nxt.phi - f.phi == mv.delta_phi, (mv, f)
        f = nxt
        trace.iterations.append(IterationRecord(mv.kind, mv.delta_phi, f.phi, time.perf_counter() - start, mv))
    for name in cfg.neighborhood_order:
        trace.certified.setdefault(name, "no improving move")
    return f


def run(
    inst: MetricInstance, cfg: SearchConfig | None = None, initial: Forest | Iterable | None = None
) -> tuple[Forest, SearchTrace]:
    """Round, search to a local optimum, clean up.

    ``initial`` optionally replaces the default start; it may be a forest
    over ``inst`` or an iterable of terminal-index edges and must be feasible.
    Returns the cleaned-up forest over ``inst`` (true distances) and the trace.
    """
    cfg = cfg or SearchConfig()
    trace = SearchTrace()
    start_edges = None
    if initial is not None:
        start_edges = initial.edges if isinstance(initial, Forest) else list(initial)
        if not is_feasible(Forest(inst, start_edges)):
            raise InfeasibleInput("initial forest is infeasible")
    try:
        rounded = round_instance(inst, cfg.epsilon)
    except DegenerateInstance:
        # only zero-distance pairs: the start itself is optimal after clean-up
        f0 = Forest(inst, start_edges) if start_edges is not None else initial_solution(inst)
        trace.converged = f0
        trace.final = cleanup(f0)
        trace.certified = {name: "degenerate instance" for name in cfg.neighborhood_order}
        return trace.final, trace
    trace.rounded = rounded
    trace.iteration_bound = iteration_bound(inst, cfg.epsilon)
    units = rounded.units
    f = Forest(units, start_edges) if start_edges is not None else initial_solution(units)
    f = local_search(f, cfg, trace)
    trace.converged = f
    trace.final = cleanup(Forest(inst, f.edges))
    log.info("converged after %d iterations, d=%d", trace.n_iterations, trace.final.length)
    return trace.final, trace
