"""Static-control baselines, performance metrics and trace files."""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

import numpy as np

from .config import ControllerConfig
from .controller import SimulationTrace
from .hydraulics import PondParams, PondState, drain_limit, route_step, trapezoid_volume
from .scenario_io import DataError, Scenario

__all__ = [
    "GRAVITY",
    "Passthrough",
    "Orifice",
    "StaticBaselineSpec",
    "RetentionEpisode",
    "PerformanceReport",
    "TRACE_HEADER",
    "orifice_outflow",
    "static_baseline",
    "metrics",
    "compare_reports",
    "format_report",
    "emit_trace_csv",
    "load_trace_csv",
]

GRAVITY = 9.81
TRACE_HEADER = ("time_s", "inflow_m3s", "commanded_m3s", "realized_m3s", "depth_m", "overflow_m3", "mode", "rule")


@dataclass(frozen=True)
class Passthrough:
    """No storage: the outlet passes the inflow straight on."""


@dataclass(frozen=True)
class Orifice:
    """Uncontrolled orifice, ``Q = c_area * sqrt(2 g H)``.

    Attributes:
        c_area: Discharge coefficient times orifice area (m²).
    """

    c_area: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c_area) and self.c_area > 0):
            raise ValueError(f"orifice coefficient-area product must be > 0, got {self.c_area!r}")


StaticBaselineSpec = Union[Passthrough, Orifice]


def orifice_outflow(c_area: float, depth: float) -> float:
    return c_area * math.sqrt(2.0 * GRAVITY * max(depth, 0.0))


def static_baseline(
    scenario: Scenario, params: PondParams, spec: StaticBaselineSpec, initial_depth: float = 0.0
) -> SimulationTrace:
    """Route ``scenario`` through the pond with a fixed, unregulated outlet.

    The outlet is not limited to ``q_max``.  The orifice is evaluated at
    the depth at the start of each step and trimmed so the pond never
    drains below empty.  Passthrough starts with the outlet already
    carrying the first inflow sample, so storage never changes.
    """
    # Static outlets have no controller, so lift the q_max cap in the plant.
    plant = replace(params, q_max=sys.float_info.max)
    inflow = scenario.inflow
    n = len(scenario)
    if isinstance(spec, Passthrough):
        tag = "passthrough"
        q0 = float(inflow[0])
    elif isinstance(spec, Orifice):
        tag = "orifice"
        q0 = 0.0
    else:
        raise TypeError(f"unknown baseline {spec!r}")
    state = PondState(depth=initial_depth, outflow=q0)
    cols = {k: np.empty(n) for k in ("commanded", "realized", "depth", "overflow")}
    for k in range(n):
        i_now = float(inflow[k])
        i_next = float(inflow[k + 1]) if k + 1 < n else 0.0
        if isinstance(spec, Passthrough):
            command = i_next
        else:
            command = min(orifice_outflow(spec.c_area, state.depth), drain_limit(state, plant, i_now, state.outflow))
        state, realized, spill = route_step(state, plant, i_now, i_next, state.outflow, command)
        cols["commanded"][k] = command
        cols["realized"][k] = realized
        cols["depth"][k] = state.depth
        cols["overflow"][k] = spill
    return SimulationTrace(
        time=scenario.start_time + scenario.dt * np.arange(n),
        inflow=inflow,
        mode=("static",) * n,
        rule=(tag,) * n,
        dt=scenario.dt,
        initial_depth=initial_depth,
        initial_outflow=q0,
        shortfall_total=state.shortfall_total,
        name=f"{scenario.name}:{tag}",
        **cols,
    )


@dataclass(frozen=True)
class RetentionEpisode:
    """Quiescent hold at the start of one dry period.

    Attributes:
        start_time: Clock time of the first dry step (s).
        retention_time: Length of the zero-command run that opens the
            period (s).
        released: Whether a release ended the hold before the period ended.
        meets_target: ``retention_time >= settle_time``.
        tss_removal: ``1 - exp(-k * retention_time)`` when enabled.
    """

    start_time: float
    retention_time: float
    released: bool
    meets_target: bool
    tss_removal: float | None = None


@dataclass(frozen=True)
class PerformanceReport:
    peak_outflow: float
    total_release_volume: float
    total_overflow_volume: float
    max_depth: float
    episodes: tuple[RetentionEpisode, ...] = ()
    # mean over dry periods, only when a settling rate was given
    tss_removal: float | None = None


def _dry_episodes(trace: SimulationTrace) -> list[tuple[int, int]]:
    spans = []
    k = 0
    n = len(trace)
    while k < n:
        if trace.mode[k] == "dry" and k > 0 and trace.mode[k - 1] == "wet":
            end = k
            while end < n and trace.mode[end] == "dry":
                end += 1
            spans.append((k, end))
            k = end
        else:
            k += 1
    return spans


def metrics(
    trace: SimulationTrace, params: PondParams, config: ControllerConfig, tss_k: float | None = None
) -> PerformanceReport:
    """Summarize a trace.

    A dry period is a run of dry steps directly after a wet one.  Its
    retention time is the length of the zero-command run it opens with.

    Args:
        trace: A controller or baseline trace.
        params: Pond constants.
        config: Supplies ``settle_time``.
        tss_k: First-order settling rate (1/s); enables the TSS estimate.

    Raises:
        ValueError: On an empty trace or a negative settling rate.
    """
    if len(trace) == 0:
        raise ValueError("cannot report on an empty trace")
    if tss_k is not None and not (math.isfinite(tss_k) and tss_k >= 0):
        raise ValueError(f"settling rate must be >= 0, got {tss_k!r}")
    episodes = []
    for start, end in _dry_episodes(trace):
        span = 0
        while start + span < end and trace.commanded[start + span] == 0.0:
            span += 1
        held = span * trace.dt
        tss = None if tss_k is None else 1.0 - math.exp(-tss_k * held)
        episodes.append(
            RetentionEpisode(
                start_time=float(trace.time[start]),
                retention_time=held,
                released=start + span < end,
                meets_target=held >= config.settle_time,
                tss_removal=tss,
            )
        )
    tss_mean = None
    if tss_k is not None and episodes:
        tss_mean = math.fsum(e.tss_removal for e in episodes) / len(episodes)
    return PerformanceReport(
        peak_outflow=float(np.max(trace.realized)),
        total_release_volume=trapezoid_volume(trace.outflow_series(), trace.dt),
        total_overflow_volume=math.fsum(trace.overflow),
        max_depth=float(max(trace.initial_depth, np.max(trace.depth))),
        episodes=tuple(episodes),
        tss_removal=tss_mean,
    )


def compare_reports(dynamic: PerformanceReport, static: PerformanceReport) -> dict[str, float]:
    """Dynamic minus static for the headline numbers."""
    keys = ("peak_outflow", "total_release_volume", "total_overflow_volume", "max_depth")
    return {k: getattr(dynamic, k) - getattr(static, k) for k in keys}


def format_report(report: PerformanceReport, label: str = "") -> str:
    head = f"[{label}]\n" if label else ""
    lines = [
        f"peak_outflow_m3s = {report.peak_outflow:.6g}",
        f"total_release_m3 = {report.total_release_volume:.6g}",
        f"total_overflow_m3 = {report.total_overflow_volume:.6g}",
        f"max_depth_m = {report.max_depth:.6g}",
    ]
    for i, ep in enumerate(report.episodes, start=1):
        line = (
            f"dry_episode_{i} = start {ep.start_time:g} s, held {ep.retention_time / 3600.0:.2f} h, "
            f"target {'met' if ep.meets_target else 'not met'}"
        )
        if ep.tss_removal is not None:
            line += f", tss {ep.tss_removal:.3f}"
        lines.append(line)
    if report.tss_removal is not None:
        lines.append(f"tss_removal_estimate = {report.tss_removal:.6g}  # first-order settling model, not measured")
    return head + "\n".join(lines) + "\n"


def _g17(value: float) -> str:
    return format(float(value), ".17g")


def emit_trace_csv(trace: SimulationTrace, path) -> Path:
    """Write ``trace`` as CSV with floats at 17 significant digits.

    Raises:
        OSError: If the file cannot be written; the message names the path.
    """
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            for k in range(len(trace)):
                writer.writerow(
                    (
                        _g17(trace.time[k]),
                        _g17(trace.inflow[k]),
                        _g17(trace.commanded[k]),
                        _g17(trace.realized[k]),
                        _g17(trace.depth[k]),
                        _g17(trace.overflow[k]),
                        trace.mode[k],
                        trace.rule[k],
                    )
                )
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc.strerror or exc}") from exc
    return path


def load_trace_csv(path, dt: float | None = None, initial_depth: float = 0.0, initial_outflow: float = 0.0) -> SimulationTrace:
    """Read a file written by ``emit_trace_csv`` back into a trace.

    ``dt`` defaults to the spacing of the first two rows.  The initial
    depth and outflow are not stored in the file and must be supplied if
    they were not zero.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_HEADER:
        raise DataError(f"{path}: not a trace file (bad header)")
    body = [r for r in rows[1:] if r]
    if any(len(r) != len(TRACE_HEADER) for r in body):
        raise DataError(f"{path}: trace rows must have {len(TRACE_HEADER)} columns")
    try:
        numeric = np.array([[float(x) for x in r[:6]] for r in body], dtype=float).reshape(-1, 6)
    except (ValueError, IndexError):
        raise DataError(f"{path}: malformed trace row") from None
    if dt is None:
        if len(body) < 2:
            raise DataError(f"{path}: need dt for a trace shorter than two rows")
        dt = float(numeric[1, 0] - numeric[0, 0])
    return SimulationTrace(
        time=numeric[:, 0],
        inflow=numeric[:, 1],
        commanded=numeric[:, 2],
        realized=numeric[:, 3],
        depth=numeric[:, 4],
        overflow=numeric[:, 5],
        mode=tuple(r[6] for r in body),
        rule=tuple(r[7] for r in body),
        dt=dt,
        initial_depth=initial_depth,
        initial_outflow=initial_outflow,
        name=path.stem,
    )
