"""Level-pool routing of a vertical-walled detention basin.

The pond is a single storage with constant plan area, so storage is
``area * depth``.  Each step applies the trapezoidal mass balance

    area * (H_new - H_old) = dt * ((I_prev + I_now) / 2 - (Q_prev + Q_new) / 2)

with endpoint flows in m³/s.  Unlike the optimizer's idealized model the
plant always stays physical: it spills above ``h_max`` and throttles the
outlet when the commanded outflow would drain the pond below empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "PondParams",
    "PondState",
    "FlowSample",
    "StepResult",
    "route_step",
    "stored_volume",
    "drain_limit",
    "fill_requirement",
    "trapezoid_volume",
]


@dataclass(frozen=True)
class PondParams:
    """Physical and discretization constants of the basin.

    Attributes:
        area: Plan area (m²).
        h_max: Depth at which the pond starts to spill (m).
        q_max: Maximum allowable controlled outflow (m³/s).
        dt: Step length (s).
        n_c: Number of steps in the control horizon.
    """

    area: float
    h_max: float
    q_max: float
    dt: float
    n_c: int = 1

    def __post_init__(self) -> None:
        for name in ("area", "h_max", "q_max", "dt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if int(self.n_c) != self.n_c or self.n_c < 1:
            raise ValueError(f"n_c must be an integer >= 1, got {self.n_c!r}")

    @property
    def capacity(self) -> float:
        """Storage volume at ``h_max`` (m³)."""
        return self.area * self.h_max

    @property
    def beta(self) -> float:
        """Depth change per unit of summed endpoint flow, ``dt / (2 * area)``."""
        return self.dt / (2.0 * self.area)


@dataclass(frozen=True)
class PondState:
    """Plant state at a step boundary.

    Attributes:
        depth: Water depth (m).
        step: Number of steps routed so far.
        overflow_total: Volume spilled so far (m³).
        outflow: Outlet flow at this instant (m³/s), the ``Q_prev`` of the
            next step.
    """

    depth: float = 0.0
    step: int = 0
    overflow_total: float = 0.0
    outflow: float = 0.0
    # Volume by which the trapezoid over-counted an outflow the pond could
    # not supply (pond already empty).  Stays 0 under the shipped controllers.
    shortfall_total: float = 0.0

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth!r}")
        if self.overflow_total < 0:
            raise ValueError("overflow_total must be >= 0")
        if self.outflow < 0:
            raise ValueError(f"outflow must be >= 0, got {self.outflow!r}")


@dataclass(frozen=True)
class FlowSample:
    inflow: float
    outflow: float

    def __post_init__(self) -> None:
        if self.inflow < 0 or self.outflow < 0:
            raise ValueError("flows must be >= 0")


@dataclass(frozen=True)
class StepResult:
    state: PondState
    realized_outflow: float
    overflow_step: float

    def __iter__(self):
        # Allows ``state, q, spill = route_step(...)``.
        return iter((self.state, self.realized_outflow, self.overflow_step))


def route_step(
    state: PondState,
    params: PondParams,
    inflow_prev: float,
    inflow_now: float,
    outflow_prev: float,
    outflow_cmd: float,
) -> StepResult:
    """Advance the pond by one step.

    Args:
        state: Pond state at the start of the step.
        params: Pond constants.
        inflow_prev: Inflow at the start of the step (m³/s).
        inflow_now: Inflow at the end of the step (m³/s).
        outflow_prev: Realized outflow at the start of the step (m³/s).
        outflow_cmd: Commanded outflow for the end of the step (m³/s).

    Returns:
        The new state, the realized end-of-step outflow and the volume
        spilled during the step.

    Raises:
        ValueError: If any flow is negative or the command exceeds ``q_max``.
    """
    flows = {
        "inflow_prev": inflow_prev,
        "inflow_now": inflow_now,
        "outflow_prev": outflow_prev,
        "outflow_cmd": outflow_cmd,
    }
    for name, value in flows.items():
        if not value >= 0:
            raise ValueError(f"{name} must be >= 0, got {value!r}")
    if outflow_cmd > params.q_max:
        raise ValueError(f"outflow_cmd {outflow_cmd!r} exceeds q_max {params.q_max!r}")

    beta = params.beta
    depth = state.depth + beta * (inflow_prev + inflow_now - outflow_prev - outflow_cmd)
    realized = outflow_cmd
    overflow = 0.0
    shortfall = 0.0
    if depth < 0.0:
        # Throttle the outlet so the pond ends exactly empty.
        realized = outflow_cmd + depth / beta
        if realized < 0.0:
            shortfall = -realized * params.dt / 2.0
            realized = 0.0
        depth = 0.0
    elif depth > params.h_max:
        overflow = (depth - params.h_max) * params.area
        depth = params.h_max

    new_state = replace(
        state,
        depth=depth,
        step=state.step + 1,
        overflow_total=state.overflow_total + overflow,
        outflow=realized,
        shortfall_total=state.shortfall_total + shortfall,
    )
    return StepResult(new_state, realized, overflow)


def stored_volume(state: PondState, params: PondParams) -> float:
    """Water volume held in the pond (m³)."""
    return params.area * state.depth


def drain_limit(state: PondState, params: PondParams, inflow_prev: float, outflow_prev: float) -> float:
    """Largest command that keeps the pond drainable whatever inflow follows.

    Commanding at most this value guarantees that the end-of-step depth is
    non-negative and that a zero command on the next step is feasible, even
    if no further inflow arrives.  Without it a pond drained to empty keeps a
    positive endpoint outflow the trapezoid rule cannot pay back.
    """
    # H1 >= H + beta*(I_prev - Q_prev - c) and the following zero-command
    # step drains another beta*c, so require H + beta*(I_prev - Q_prev - 2c) >= 0.
    slack = state.depth / params.beta + inflow_prev - outflow_prev
    return max(0.0, slack / 2.0)


def fill_requirement(
    state: PondState, params: PondParams, inflow_prev: float, inflow_now: float, outflow_prev: float
) -> float:
    """Smallest command that keeps the end-of-step depth at or below ``h_max``.

    The value is checked against the exact expression ``route_step``
    evaluates, so a pond planned to brim-full does not spill round-off.
    """
    beta = params.beta
    need = (state.depth - params.h_max) / beta + inflow_prev + inflow_now - outflow_prev
    if need <= 0.0:
        return 0.0
    for _ in range(8):
        excess = state.depth + beta * (inflow_prev + inflow_now - outflow_prev - need) - params.h_max
        if excess <= 0.0:
            break
        need = math.nextafter(need + excess / beta, math.inf)
    return need


def trapezoid_volume(series, dt: float) -> float:
    """Trapezoidal volume of a flow series sampled every ``dt`` seconds."""
    values = list(series)
    if len(values) < 2:
        return 0.0
    inner = math.fsum(values[1:-1])
    return float(dt * (inner + 0.5 * (float(values[0]) + float(values[-1]))))
