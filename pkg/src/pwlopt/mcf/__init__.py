"""Concave-cost multicommodity flow."""
from .brute import brute_force_concave_opt, is_even_flow
from .design import ExpandedDesign, approximate_costs, expand, merge_uniform_grid
from .dual_ascent import DualAscentResult, audit, consolidate, dual_ascent
from .instance import McfInstance, gen_instance
from .report import GapReport, compose_gap, gap_report, run_instance, rows_to_csv

__all__ = ["DualAscentResult", "ExpandedDesign", "GapReport", "McfInstance", "approximate_costs",
           "audit", "brute_force_concave_opt", "consolidate", "compose_gap", "dual_ascent", "expand",
           "gap_report", "gen_instance", "is_even_flow", "merge_uniform_grid", "rows_to_csv",
           "run_instance"]
