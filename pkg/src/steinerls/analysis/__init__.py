"""Executable forms of the structural arguments: compatibility classes, the
Hall flow test, circuits in the component graph and their tree packings."""

from .circuits import (
    GuardedCircuit,
    PackedTree,
    TreePacking,
    charge_circuit,
    circuit_packing_bounds,
    extract_circuits,
    minimal_decomposition,
    packing_bound_terms,
    split_at_maximum,
    verify_packing_lower_bound,
)
from .compatibility import CompatibilityPartition, HallResult, compatibility_partition, hall_condition_check
from .report import GapReport, locality_gap_report, summarize

__all__ = [
    "CompatibilityPartition",
    "GapReport",
    "GuardedCircuit",
    "HallResult",
    "PackedTree",
    "TreePacking",
    "charge_circuit",
    "circuit_packing_bounds",
    "compatibility_partition",
    "extract_circuits",
    "hall_condition_check",
    "locality_gap_report",
    "minimal_decomposition",
    "packing_bound_terms",
    "split_at_maximum",
    "summarize",
    "verify_packing_lower_bound",
]
