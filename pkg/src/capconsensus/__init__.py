"""Robust linear-consensus network design under per-edge capacity constraints."""

from .circulant import CirculantSpec, algorithm1, build_circulant, edge_class, find_cmad, find_mad, rotate_tree
from .design import brute_force, check_feasibility, gap_report, solve_complete, validate_solution
from .errors import CapConsensusError
from .graph import (
    CapacitatedGraph,
    SpanningTree,
    average_distance,
    hstar,
    is_connected,
    laplacian,
    min_cut_capacity,
    spectrum,
    total_capacity,
    tree_hstar,
)
from .solution import DesignSolution

__all__ = [
    "CapConsensusError",
    "CapacitatedGraph",
    "CirculantSpec",
    "DesignSolution",
    "SpanningTree",
    "algorithm1",
    "average_distance",
    "brute_force",
    "build_circulant",
    "check_feasibility",
    "edge_class",
    "find_cmad",
    "find_mad",
    "gap_report",
    "hstar",
    "is_connected",
    "laplacian",
    "min_cut_capacity",
    "rotate_tree",
    "solve_complete",
    "spectrum",
    "total_capacity",
    "tree_hstar",
    "validate_solution",
]
