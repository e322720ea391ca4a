"""Rolling-horizon control loop.

At every step the controller looks at the current inflow.  While it is
wet the outflow plan over the whole anticipation horizon is re-solved from
the measured depth and only its next set point is applied.  While it is
dry the release rules decide.  The plant then routes the step with the
commanded outflow and the loop repeats with the realized state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .config import ControllerConfig, DegradedForecast, ForecastMode, ForecastWindow, PerfectForecast
from .hydraulics import PondParams, PondState, drain_limit, fill_requirement, route_step, trapezoid_volume
from .optimizer import InfeasiblePlanError, OutflowSchedule, plan_outflows
from .rules import DryContext, RuleDecision, emptying_time, select_rule
from .scenario_io import Scenario, forecast_window

__all__ = [
    "ControllerConfig",
    "ForecastMode",
    "ForecastWindow",
    "PerfectForecast",
    "DegradedForecast",
    "ControllerMode",
    "ConfigurationError",
    "StepDiagnostics",
    "SimulationTrace",
    "Controller",
    "detect_mode",
    "controller_step",
    "run_simulation",
    "PLAN_TAG",
    "FALLBACK_TAG",
]

PLAN_TAG = "plan"
FALLBACK_TAG = "plan_infeasible"


class ControllerMode(enum.Enum):
    WET = "wet"
    DRY = "dry"


class ConfigurationError(ValueError):
    """Forecast, pond and controller settings do not fit together."""


@dataclass(frozen=True)
class StepDiagnostics:
    """Why the controller chose its command.

    Attributes:
        mode: Wet or dry.
        tag: ``plan`` / ``plan_infeasible`` when wet, the rule name when dry.
        requested: Outflow asked for by the plan or rule before the plant
            guards were applied (m³/s).
        plan: The wet-mode schedule, if one was solved.
        decision: The dry-mode rule decision.
        t_e: Emptying time used by the rules (s).
        deficit: Unavoidable overflow reported by an infeasible plan (m³).
    """

    mode: ControllerMode
    tag: str
    requested: float
    plan: OutflowSchedule | None = None
    decision: RuleDecision | None = None
    t_e: float | None = None
    deficit: float = 0.0


def detect_mode(current_inflow: float, config: ControllerConfig) -> ControllerMode:
    """Wet iff the inflow strictly exceeds ``config.wet_threshold``."""
    if not current_inflow >= 0:
        raise ValueError(f"inflow must be >= 0, got {current_inflow!r}")
    return ControllerMode.WET if current_inflow > config.wet_threshold else ControllerMode.DRY


def controller_step(
    state: PondState,
    params: PondParams,
    config: ControllerConfig,
    forecast: ForecastWindow,
    backend=None,
) -> tuple[float, StepDiagnostics]:
    """Outflow command for the step starting now.

    Wet: plan from the current depth with ``Q(0)`` pinned to the outflow
    already in force and command ``Q(1)``; an unsolvable plan commands
    ``q_max``.  Dry: command the selected rule's outflow.  Rule and
    fallback commands are trimmed so the pond cannot be drawn below empty
    and raised when residual inflow would overtop it.

    Raises:
        ConfigurationError: If the forecast length does not match ``n_c``.
    """
    inflow = forecast.inflow
    if inflow.shape[0] != params.n_c + 1:
        raise ConfigurationError(f"forecast has {inflow.shape[0]} samples; pond n_c={params.n_c} needs {params.n_c + 1}")
    i_now = float(inflow[0])
    q_prev = min(state.outflow, params.q_max)
    mode = detect_mode(i_now, config)

    if mode is ControllerMode.WET:
        try:
            plan = plan_outflows(params, min(state.depth, params.h_max), inflow, initial_outflow=q_prev, backend=backend)
        except InfeasiblePlanError as exc:
            command = min(params.q_max, drain_limit(state, params, i_now, state.outflow))
            return command, StepDiagnostics(mode, FALLBACK_TAG, params.q_max, deficit=exc.deficit)
        # the plan may end a step exactly brim-full; keep round-off from spilling
        floor = fill_requirement(state, params, i_now, float(inflow[1]), state.outflow)
        command = min(max(plan.set_point, floor, 0.0), params.q_max)
        return command, StepDiagnostics(mode, PLAN_TAG, plan.set_point, plan=plan)

    t_e = emptying_time(state, params, config.te_mode)
    ctx = DryContext(
        t_next_rain=forecast.t_next_rain,
        t_f=forecast.t_f,
        now=forecast.now,
        t_e=t_e,
        settle_time=config.settle_time,
    )
    decision = select_rule(ctx, params)
    command = min(decision.outflow, drain_limit(state, params, i_now, state.outflow))
    command = max(command, fill_requirement(state, params, i_now, float(inflow[1]), state.outflow))
    command = min(command, params.q_max)
    return command, StepDiagnostics(mode, decision.tag, decision.outflow, decision=decision, t_e=t_e)


@dataclass(frozen=True)
class SimulationTrace:
    """Per-step record of a run.

    Row ``k`` covers the interval from ``time[k]`` to ``time[k] + dt``.
    ``inflow`` and the decision columns refer to the start of the interval;
    ``realized``, ``depth`` and ``overflow`` to its end.

    Attributes:
        time: Clock time at the start of each step (s).
        inflow: Observed inflow at the start of each step (m³/s).
        commanded: Commanded end-of-step outflow (m³/s).
        realized: Realized end-of-step outflow (m³/s).
        depth: End-of-step depth (m).
        overflow: Volume spilled during the step (m³).
        mode: ``wet``, ``dry`` or ``static`` per step.
        rule: Plan or rule tag per step.
        dt: Step length (s).
        initial_depth: Depth before the first step (m).
        initial_outflow: Outflow before the first step (m³/s).
        shortfall_total: Outflow volume the plant could not supply (m³).
    """

    time: np.ndarray
    inflow: np.ndarray
    commanded: np.ndarray
    realized: np.ndarray
    depth: np.ndarray
    overflow: np.ndarray
    mode: tuple[str, ...]
    rule: tuple[str, ...]
    dt: float
    initial_depth: float = 0.0
    initial_outflow: float = 0.0
    shortfall_total: float = 0.0
    name: str = ""

    def __post_init__(self) -> None:
        n = len(self.mode)
        for attr in ("time", "inflow", "commanded", "realized", "depth", "overflow"):
            arr = np.array(getattr(self, attr), dtype=float).reshape(-1)
            if arr.shape[0] != n:
                raise ValueError(f"trace column {attr} has {arr.shape[0]} rows, expected {n}")
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        if len(self.rule) != n:
            raise ValueError("trace rule column length mismatch")
        object.__setattr__(self, "mode", tuple(self.mode))
        object.__setattr__(self, "rule", tuple(self.rule))

    def __len__(self) -> int:
        return len(self.mode)

    @property
    def overflow_total(self) -> float:
        return float(np.sum(self.overflow))

    def outflow_series(self) -> np.ndarray:
        """Outflow at every step boundary, ``initial_outflow`` first."""
        return np.concatenate([[self.initial_outflow], self.realized])

    def inflow_series(self) -> np.ndarray:
        """Inflow at every step boundary; zero after the last observation."""
        return np.concatenate([self.inflow, [0.0]])

    def mass_balance_residual(self, area: float) -> float:
        """Storage change minus (inflow - outflow - overflow) volume (m³).

        The volume the plant could not release (``shortfall_total``) is
        counted as released in the trapezoid, so it is added back.
        """
        stored = area * (self.depth[-1] - self.initial_depth) if len(self) else 0.0
        net = (
            trapezoid_volume(self.inflow_series(), self.dt)
            - trapezoid_volume(self.outflow_series(), self.dt)
            - self.overflow_total
            + self.shortfall_total
        )
        return stored - net


class Controller:
    """Step-wise driver: feed one forecast at a time, get one routed step.

    Example:
        >>> ctl = Controller(params, config)            # doctest: +SKIP
        >>> cmd, diag = ctl.decide(window)              # doctest: +SKIP
        >>> result = ctl.advance(i_now, i_next, cmd)    # doctest: +SKIP
    """

    def __init__(self, params: PondParams, config: ControllerConfig, state: PondState | None = None, backend=None):
        self.params = params
        self.config = config
        self.state = state if state is not None else PondState(depth=config.initial_depth)
        self.backend = backend

    def decide(self, forecast: ForecastWindow) -> tuple[float, StepDiagnostics]:
        return controller_step(self.state, self.params, self.config, forecast, backend=self.backend)

    def advance(self, inflow_now: float, inflow_next: float, command: float):
        result = route_step(self.state, self.params, inflow_now, inflow_next, self.state.outflow, command)
        self.state = result.state
        return result


def run_simulation(
    scenario: Scenario, params: PondParams, config: ControllerConfig, backend=None
) -> SimulationTrace:
    """Replay ``scenario`` under rolling-horizon control.

    Raises:
        ConfigurationError: If ``params.n_c`` differs from the horizon
            implied by ``config``, or ``dt`` differs from the scenario's.
    """
    if params.dt != scenario.dt:
        raise ConfigurationError(f"pond dt={params.dt!r} but scenario dt={scenario.dt!r}")
    n_c = config.horizon_steps(params.dt)
    if params.n_c != n_c:
        raise ConfigurationError(f"pond n_c={params.n_c} but the anticipation horizon gives {n_c}")
    if config.initial_depth > params.h_max:
        raise ConfigurationError("initial depth exceeds h_max")

    ctl = Controller(params, config, backend=backend)
    n = len(scenario)
    inflow = scenario.inflow
    cols = {k: np.empty(n) for k in ("commanded", "realized", "depth", "overflow")}
    modes: list[str] = []
    rules: list[str] = []
    for k in range(n):
        window = forecast_window(scenario, k, config)
        command, diag = ctl.decide(window)
        i_next = float(inflow[k + 1]) if k + 1 < n else 0.0
        result = ctl.advance(float(inflow[k]), i_next, command)
        cols["commanded"][k] = command
        cols["realized"][k] = result.realized_outflow
        cols["depth"][k] = result.state.depth
        cols["overflow"][k] = result.overflow_step
        modes.append(diag.mode.value)
        rules.append(diag.tag)
    return SimulationTrace(
        time=scenario.start_time + scenario.dt * np.arange(n),
        inflow=inflow,
        mode=tuple(modes),
        rule=tuple(rules),
        dt=scenario.dt,
        initial_depth=config.initial_depth,
        shortfall_total=ctl.state.shortfall_total,
        name=scenario.name,
        **cols,
    )
