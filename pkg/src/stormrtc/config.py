"""Controller settings and the forecast view handed to the controller."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .rules import DEFAULT_SETTLE_TIME, TeMode

__all__ = [
    "PerfectForecast",
    "DegradedForecast",
    "ForecastMode",
    "ControllerConfig",
    "ForecastWindow",
]


@dataclass(frozen=True)
class PerfectForecast:
    """The controller sees the true future inflow."""


@dataclass(frozen=True)
class DegradedForecast:
    """True inflow times independent lognormal noise, fixed by ``seed``.

    The noise stream for a window depends only on ``seed`` and the step at
    which the window is taken, so runs are reproducible.
    """

    sigma: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma!r}")


ForecastMode = Union[PerfectForecast, DegradedForecast]


@dataclass(frozen=True)
class ControllerConfig:
    """Tunable controller settings.

    Attributes:
        anticipation_horizon: Look-ahead of forecasts and plans (s).
        wet_threshold: Inflow above which a step counts as wet (m³/s).
        forecast_mode: Perfect or degraded forecast.
        te_mode: Emptying-time formula used by the dry rules.
        settle_time: Quiescent retention target (s).
        initial_depth: Pond depth at the start of a run (m).
    """

    anticipation_horizon: float = 216000.0
    wet_threshold: float = 1e-3
    forecast_mode: ForecastMode = field(default_factory=PerfectForecast)
    te_mode: TeMode = TeMode.DRAIN_AT_QMAX
    settle_time: float = DEFAULT_SETTLE_TIME
    initial_depth: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.anticipation_horizon) and self.anticipation_horizon > 0):
            raise ValueError("anticipation_horizon must be finite and > 0")
        if not (math.isfinite(self.wet_threshold) and self.wet_threshold >= 0):
            raise ValueError("wet_threshold must be finite and >= 0")
        if not (math.isfinite(self.settle_time) and self.settle_time > 0):
            raise ValueError("settle_time must be finite and > 0")
        if not (math.isfinite(self.initial_depth) and self.initial_depth >= 0):
            raise ValueError("initial_depth must be finite and >= 0")
        object.__setattr__(self, "te_mode", TeMode(self.te_mode))

    def horizon_steps(self, dt: float) -> int:
        """``anticipation_horizon / dt``, which must be a whole number >= 1."""
        steps = self.anticipation_horizon / dt
        n = round(steps)
        if n < 1 or abs(steps - n) > 1e-9 * max(1.0, steps):
            raise ValueError(f"anticipation horizon {self.anticipation_horizon!r} s is not a multiple of dt={dt!r} s")
        return int(n)


@dataclass(frozen=True)
class ForecastWindow:
    """What the controller knows at one decision instant.

    Attributes:
        inflow: Forecast inflow ``I(now + k*dt)`` for ``k = 0..n_c`` (m³/s);
            ``inflow[0]`` is the current observation.
        t_next_rain: Time from now to the first forecast wet sample (s),
            ``0`` while raining, ``math.inf`` if none in the window.
        t_f: Clock time at which the most recent wet episode ended (s).
        now: Clock time of the decision (s).
    """

    inflow: np.ndarray
    t_next_rain: float
    t_f: float
    now: float = 0.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.inflow, dtype=float)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError("forecast inflow needs at least two samples")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("forecast inflow must be finite and >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "inflow", arr)
        if not self.t_next_rain >= 0:
            raise ValueError("t_next_rain must be >= 0")
