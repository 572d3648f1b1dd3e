"""
ReliaSpan - Harness Package Initialization
"""
from reliaspan.harness.engine import ExperimentRunner, Summary, loss_curve, run_trials
from reliaspan.harness.scaling import edge_scaling

__all__ = ["ExperimentRunner", "Summary", "loss_curve", "run_trials", "edge_scaling"]
