"""Self-check suite run by ``stormrtc validate``.

Uses only what ships with the package: the bundled fixtures, the
analytic release bound and the plant's own accounting.  The exhaustive
LP oracle lives with the test-suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .controller import run_simulation
from .hydraulics import PondParams
from .optimizer import InfeasiblePlanError, min_release_lower_bound, plan_outflows
from .optimizer.kernels import available_backends
from .report import Passthrough, static_baseline
from .rules import DryContext, Rule, select_rule
from .scenario_io import load_config, load_scenario

__all__ = ["CheckResult", "fixture_path", "run_validation"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def fixture_path(name: str):
    return resources.files("stormrtc") / "data" / name


def _fixture_runs():
    params, config, _ = load_config(fixture_path("reference_basin.cfg"))
    for name in ("design_storm.csv", "retention.csv", "two_storms.csv"):
        scenario = load_scenario(params.dt, inflow_path=fixture_path(name))
        yield name, params, config, scenario


def _check_fixtures() -> list[CheckResult]:
    out = []
    for name, params, config, scenario in _fixture_runs():
        trace = run_simulation(scenario, params, config)
        inflow_volume = max(float(np.sum(scenario.inflow)) * scenario.dt, 1.0)
        resid = abs(trace.mass_balance_residual(params.area)) / inflow_volume
        out.append(CheckResult(f"{name}: mass balance", resid <= 1e-6, f"relative residual {resid:.2e}"))
        out.append(
            CheckResult(f"{name}: no overflow", trace.overflow_total == 0.0, f"overflow {trace.overflow_total:g} m3")
        )
        peak = float(trace.realized.max())
        out.append(CheckResult(f"{name}: outflow <= q_max", peak <= params.q_max, f"peak {peak:.6g} m3/s"))
        static = static_baseline(scenario, params, Passthrough())
        out.append(
            CheckResult(
                f"{name}: passthrough peak = inflow peak",
                float(static.realized.max()) == float(scenario.inflow[1:].max()),
                f"{float(static.realized.max()):.6g} m3/s",
            )
        )
    return out


def _check_bound(instances: int = 40, seed: int = 7) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    below = 0
    for _ in range(instances):
        n = int(rng.integers(1, 13))
        area = float(rng.uniform(50, 500))
        h_max = float(rng.uniform(0.5, 2.0))
        h0 = float(rng.uniform(0, h_max))
        inflow = rng.uniform(0, 2, n + 1)
        # an outlet this large never binds, so the bound is attained
        params = PondParams(area, h_max, 1e4, 300.0, n)
        lb = min_release_lower_bound(params, h0, inflow)
        try:
            got = plan_outflows(params, h0, inflow).total_release_volume
        except InfeasiblePlanError:
            below += 1
            continue
        if got < lb - 1e-8 * max(1.0, lb):
            below += 1
        worst = max(worst, abs(got - lb) / max(1.0, lb))
    return [
        CheckResult("plan attains release bound (non-binding outlet)", below == 0 and worst <= 1e-8, f"max rel gap {worst:.2e}")
    ]


def _check_backends(seed: int = 3) -> list[CheckResult]:
    names = available_backends()
    if len(names) < 2:
        return [CheckResult("backend parity", True, f"only {names[0]} available; skipped")]
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(10):
        n = int(rng.integers(2, 30))
        params = PondParams(300.0, 1.0, float(rng.uniform(0.1, 1.0)), 300.0, n)
        inflow = rng.uniform(0, 1.5, n + 1)
        plans = []
        for b in names:
            try:
                plans.append(plan_outflows(params, 0.2, inflow, backend=b).outflows)
            except InfeasiblePlanError:
                plans.append(None)
        first = plans[0]
        for other in plans[1:]:
            if (first is None) != (other is None) or (first is not None and not np.array_equal(first, other)):
                mismatches += 1
    return [CheckResult("backend parity", mismatches == 0, f"{mismatches} differing schedules")]


def _check_rules() -> list[CheckResult]:
    params = PondParams(1000.0, 1.0, 2.0, 300.0)
    settle = 72000.0
    bad = 0
    values = [0.0, 1.0, 1800.0, 3600.0, 36000.0]
    for t_e, since in itertools.product(values, values):
        for t_next in sorted({0.0, t_e, t_e + settle, t_e + settle + 1.0, t_e / 2, t_e + settle / 2, math.inf}):
            d = select_rule(DryContext(t_next, 0.0, since, t_e, settle), params)
            expected = Rule.EMPTY_AT_MAX if t_next <= t_e else Rule.PROPORTIONAL if t_next <= t_e + settle else Rule.HOLD_CLOSED
            if d.rule is not expected or not 0.0 <= d.outflow <= params.q_max:
                bad += 1
    return [CheckResult("rule partition", bad == 0, f"{bad} misfires")]


def run_validation() -> list[CheckResult]:
    return _check_fixtures() + _check_bound() + _check_backends() + _check_rules()
