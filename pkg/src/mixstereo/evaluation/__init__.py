__all__ = [
    "ErrorMap",
    "EvalResult",
    "RegionBreakdown",
    "Report",
    "aggregate",
    "avg_err",
    "bad_tau",
    "colorize_disparity",
    "d1_error",
    "end_point_error",
    "evaluate_pair",
    "fg_bg_ratio",
    "region_eval",
    "render_evaluation",
    "render_report",
    "rescale_ground_truth",
]

from .colormap import colorize_disparity
from .metrics import (
    ErrorMap,
    EvalResult,
    RegionBreakdown,
    aggregate,
    avg_err,
    bad_tau,
    d1_error,
    end_point_error,
    evaluate_pair,
    fg_bg_ratio,
    region_eval,
    rescale_ground_truth,
)
from .report import Report, render_evaluation, render_report
