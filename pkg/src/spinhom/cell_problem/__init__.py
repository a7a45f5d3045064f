"""Cell problems on Q_T, their extrapolation and the explicit candidates."""
from .candidates import (
    mixing_bound,
    mixing_candidate,
    node_constant,
    tiled_candidate,
    tiling_bound,
)
from .scan import ConvexityRow, convexity_scan, estimate_ghom, fit_extrapolation
from .solver import relaxed_cell, solve_cell
from .types import Budget, CellSpec, HomogenizationCurve, SolveResult

__all__ = [
    "Budget",
    "CellSpec",
    "ConvexityRow",
    "HomogenizationCurve",
    "SolveResult",
    "convexity_scan",
    "estimate_ghom",
    "fit_extrapolation",
    "mixing_bound",
    "mixing_candidate",
    "node_constant",
    "relaxed_cell",
    "solve_cell",
    "tiled_candidate",
    "tiling_bound",
]
