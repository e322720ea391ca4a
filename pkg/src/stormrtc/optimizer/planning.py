"""Wet-weather outflow planning over one forecast horizon.

The plan is a lexicographic optimum.  Stage one minimises the released
volume ``dt * sum_t w_t Q(t)`` (trapezoid weights ``w``).  Stage two pins that total with an extra equality
row and minimises the peak outflow ``p`` subject to ``Q(t) <= p``, which
picks the smoothest release among the equally good stage-one plans.
Stage one starts from the basis where every depth is basic and every
outflow sits at zero; that basis is dual feasible, so the dual simplex
only has to repair depth violations.  Stage two warm-starts from the
stage-one basis plus the new rows' slacks, which is again dual feasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..hydraulics import PondParams, PondState, route_step
from .lp import Basis, LpProblem, Relation, build_lp, release_weights
from .simplex import NumericalError, solve_lp

__all__ = [
    "OutflowSchedule",
    "InfeasiblePlanError",
    "plan_outflows",
    "build_peak_lp",
    "min_release_lower_bound",
    "max_outflow_deficit",
]


class InfeasiblePlanError(ValueError):
    """The forecast cannot be stored even when releasing ``q_max`` throughout.

    Attributes:
        deficit: Smallest overflow volume (m³) any schedule must accept.
    """

    def __init__(self, deficit: float):
        super().__init__(f"inflow exceeds pond capacity at q_max; minimal overflow {deficit:.6g} m³")
        self.deficit = deficit


@dataclass(frozen=True)
class OutflowSchedule:
    outflows: np.ndarray
    depths: np.ndarray
    total_release_volume: float
    peak_outflow: float
    # stage-one objective sum_t w_t Q(t) (m³/s); times dt gives the volume
    objective: float
    phase1_peak: float
    iterations: int = 0

    @property
    def set_point(self) -> float:
        """First outflow not already fixed by the caller: ``Q(1)``."""
        return float(self.outflows[1])


def _depth_basis(n: int) -> Basis:
    return Basis(basic=tuple(range(n + 1, 2 * n + 1)))


def build_peak_lp(base: LpProblem, total: float) -> tuple[LpProblem, list[int]]:
    """Stage-two LP: ``min p`` with ``Q(t) <= p`` and ``sum w_t Q(t) = total``.

    Peak rows are added only for outflows the caller left free; a pinned
    ``Q(0)`` is history and must not set the peak.

    Returns:
        The LP and the list of outflow indices that received a peak row.
    """
    n = (base.num_vars - 1) // 2
    nv = base.num_vars
    free = [t for t in range(n + 1) if base.upper[t] > base.lower[t]]
    k = len(free)
    A = np.zeros((base.num_rows + k + 1, nv + 1))
    A[: base.num_rows, :nv] = base.A
    rows = base.num_rows + np.arange(k)
    A[rows, free] = 1.0
    A[rows, nv] = -1.0
    A[-1, : n + 1] = release_weights(n)
    relations = base.relations + (Relation.LE,) * k + (Relation.EQ,)
    rhs = np.concatenate([base.rhs, np.zeros(k), [total]])
    objective = np.zeros(nv + 1)
    objective[nv] = 1.0
    names = (base.var_names or tuple(f"x{j}" for j in range(nv))) + ("peak",)
    row_names = (base.row_names or tuple(f"c{i}" for i in range(base.num_rows))) + tuple(
        f"peak{t}" for t in free
    ) + ("total",)
    problem = LpProblem(
        objective=objective,
        A=A,
        relations=relations,
        rhs=rhs,
        lower=np.concatenate([base.lower, [0.0]]),
        upper=np.concatenate([base.upper, [np.inf]]),
        var_names=names,
        row_names=row_names,
    )
    return problem, free


def plan_outflows(
    params: PondParams,
    initial_depth: float,
    inflow_forecast,
    initial_outflow: float | None = None,
    backend=None,
) -> OutflowSchedule:
    """Minimum-release, minimum-peak outflow schedule for a forecast.

    Args:
        params: Pond constants; ``n_c`` must equal ``len(inflow_forecast) - 1``.
        initial_depth: Current depth ``H(0)`` (m).
        inflow_forecast: ``I(0..n_c)`` (m³/s).
        initial_outflow: Pins ``Q(0)`` to an outflow already in force.
        backend: Optional kernel backend override.

    Raises:
        InfeasiblePlanError: If no schedule avoids spilling.
    """
    inflow = np.asarray(inflow_forecast, dtype=float)
    base = build_lp(params, initial_depth, inflow, initial_outflow)
    n = params.n_c
    first = solve_lp(base, basis=_depth_basis(n), backend=backend)
    if not first.optimal:
        raise InfeasiblePlanError(max_outflow_deficit(params, initial_depth, inflow, initial_outflow))
    q1 = first.x[: n + 1]
    total = float(release_weights(n) @ q1)
    phase1_peak = float(q1.max())

    second_lp, free = build_peak_lp(base, total)
    if free:
        k = len(free)
        warm = Basis(
            basic=first.basis.basic + tuple(-(base.num_rows + i + 1) for i in range(k + 1)),
            at_upper=first.basis.at_upper,
        )
        second = solve_lp(second_lp, basis=warm, backend=backend)
        if not second.optimal:
            raise NumericalError(f"peak-minimising stage returned {second.status.value}")
        x = second.x[: base.num_vars]
        iterations = first.iterations + second.iterations
    else:
        x = first.x
        iterations = first.iterations

    outflows = np.clip(x[: n + 1], 0.0, params.q_max)
    depths = np.concatenate([[initial_depth], np.clip(x[n + 1 :], 0.0, params.h_max)])
    released = float(release_weights(n) @ outflows)
    return OutflowSchedule(
        outflows=outflows,
        depths=depths,
        total_release_volume=released * params.dt,
        peak_outflow=float(outflows.max()),
        objective=released,
        phase1_peak=phase1_peak,
        iterations=iterations,
    )


def min_release_lower_bound(params: PondParams, initial_depth: float, inflow_forecast) -> float:
    """Volume that must leave the pond before the forecast ends (m³).

    The largest excess of stored-plus-arrived water over capacity at any
    prefix of the horizon, floored at zero.
    """
    inflow = np.asarray(inflow_forecast, dtype=float)
    step_volumes = params.dt * 0.5 * (inflow[:-1] + inflow[1:])
    arrived = np.concatenate([[0.0], np.cumsum(step_volumes)])
    excess = params.area * initial_depth + arrived - params.capacity
    return float(max(0.0, excess.max()))


def max_outflow_deficit(
    params: PondParams, initial_depth: float, inflow_forecast, initial_outflow: float | None = None
) -> float:
    """Overflow volume left when the outlet runs at ``q_max`` the whole horizon."""
    inflow = np.asarray(inflow_forecast, dtype=float)
    state = PondState(depth=initial_depth)
    q_prev = params.q_max if initial_outflow is None else initial_outflow
    for t in range(1, inflow.shape[0]):
        state, q_prev, _ = route_step(state, params, inflow[t - 1], inflow[t], q_prev, params.q_max)
    return state.overflow_total
