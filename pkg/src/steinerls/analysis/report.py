"""Locality-gap reporting against an oracle optimum."""

from __future__ import annotations

import statistics
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable

from ..forest import Forest
from ..instance import MetricInstance


def forest_bound_factor(c: int | Fraction = 1, eps: Fraction | int | str = Fraction(1, 4)) -> Fraction:
    """Factor ``23 (1 + c) (1 + eps)`` bounding a locally optimal forest."""
    return 23 * (1 + Fraction(c)) * (1 + Fraction(eps))


@dataclass(frozen=True)
class GapReport:
    final_cost: int
    opt_cost: int
    ratio: Fraction
    bound_factor: Fraction
    passed: bool
    single_tree: bool
    tree_bound_ok: bool | None = None
    tree_bound_loose_ok: bool | None = None

    def as_dict(self) -> dict:
        out = asdict(self)
        out["ratio"] = float(self.ratio)
        out["bound_factor"] = float(self.bound_factor)
        return out


def locality_gap_report(
    final: Forest,
    inst: MetricInstance | None = None,
    opt: Forest | int | None = None,
    c: int | Fraction = 1,
    eps: Fraction | int | str = Fraction(1, 4),
) -> GapReport:
    """Compare ``final`` with an optimum given as a forest or as a bare cost.

    When ``final`` is a single tree and ``opt`` is a forest, also check
    ``d(final) <= 10.5 d(opt) + w(opt)`` (scaled by 2 to stay integral) and the
    looser ``d(final) <= 11.5 d(opt)``.
    """
    if opt is None:
        raise ValueError("an optimum (forest or cost) is required")
    opt_cost = opt.length if isinstance(opt, Forest) else int(opt)
    d = final.length
    if opt_cost > 0:
        ratio = Fraction(d, opt_cost)
    else:
        ratio = Fraction(1) if d == 0 else Fraction(10**18)
    factor = forest_bound_factor(c, eps)
    passed = d <= factor * opt_cost
    nontrivial = [comp for comp in final.components if comp.edges]
    single = len(nontrivial) <= 1
    tree_ok = loose_ok = None
    if single and isinstance(opt, Forest):
        tree_ok = 2 * d <= 21 * opt.length + 2 * opt.width
        loose_ok = 2 * d <= 23 * opt.length
    return GapReport(d, opt_cost, ratio, factor, passed, single, tree_ok, loose_ok)


@dataclass(frozen=True)
class BatchSummary:
    count: int
    passed: int
    max_ratio: float
    mean_ratio: float
    median_ratio: float
    single_trees: int


def summarize(reports: Iterable[GapReport]) -> BatchSummary:
    reps = list(reports)
    if not reps:
        return BatchSummary(0, 0, 0.0, 0.0, 0.0, 0)
    ratios = [float(r.ratio) for r in reps]
    return BatchSummary(
        len(reps),
        sum(r.passed for r in reps),
        max(ratios),
        statistics.fmean(ratios),
        statistics.median(ratios),
        sum(r.single_tree for r in reps),
    )
