"""
ReliaSpan - Analysis Package Initialization
"""
from reliaspan.analysis.loss import BadPairGraph, LossReport, loss_report, min_extension
from reliaspan.analysis.resilience1d import bad_mask, damaged_pairs_1d, find_stairway, monotone_path
from reliaspan.analysis.shadow import classify_rounds, compute_shadow

__all__ = [
    "BadPairGraph", "LossReport", "loss_report", "min_extension",
    "bad_mask", "damaged_pairs_1d", "find_stairway", "monotone_path",
    "classify_rounds", "compute_shadow",
]
