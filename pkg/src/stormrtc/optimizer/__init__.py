"""Wet-period quantity control: LP model, simplex solver and planner."""

from .kernels import BACKEND
from .lp import Basis, LpProblem, LpSolution, LpStatus, Relation, build_lp, format_lp, release_weights
from .planning import (
    InfeasiblePlanError,
    OutflowSchedule,
    build_peak_lp,
    max_outflow_deficit,
    min_release_lower_bound,
    plan_outflows,
)
from .simplex import NumericalError, solve_lp

__all__ = [
    "BACKEND",
    "Basis",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "Relation",
    "build_lp",
    "format_lp",
    "release_weights",
    "solve_lp",
    "NumericalError",
    "InfeasiblePlanError",
    "OutflowSchedule",
    "build_peak_lp",
    "plan_outflows",
    "min_release_lower_bound",
    "max_outflow_deficit",
]
