"""Loading scenarios, configuration files and forecast windows.

Series files are two-column CSV with the header ``time_s,value`` and
integer or decimal second timestamps at a fixed step.  Configuration files
are ``key = value`` lines with ``#`` comments.  The rainfall-runoff
transform here is a single linear reservoir, a deliberately simple
stand-in for a full sewer-network model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ControllerConfig, DegradedForecast, ForecastWindow, PerfectForecast
from .hydraulics import PondParams
from .rules import TeMode

__all__ = [
    "DataError",
    "SeriesFormatError",
    "ConfigError",
    "TimeSeries",
    "Scenario",
    "CatchmentParams",
    "load_series_csv",
    "rainfall_to_inflow",
    "forecast_window",
    "load_config",
    "load_scenario",
]


class DataError(ValueError):
    """Bad input data: malformed files, inconsistent series, bad keys."""


class SeriesFormatError(DataError):
    pass


class ConfigError(DataError):
    pass


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    dt: float

    def __len__(self) -> int:
        return self.values.shape[0]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Scenario:
    """An inflow history to replay, optionally derived from rainfall.

    Attributes:
        name: Label used in reports.
        dt: Step length (s).
        inflow: Inflow per step (m³/s).
        start_time: Clock time of sample 0 (s).
        rainfall: Rain depth per step (mm), when the inflow came from rain.
    """

    name: str
    dt: float
    inflow: np.ndarray
    start_time: float = 0.0
    rainfall: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise DataError(f"dt must be finite and > 0, got {self.dt!r}")
        inflow = _frozen(self.inflow)
        if inflow.shape[0] == 0:
            raise DataError("scenario inflow is empty")
        if not np.all(np.isfinite(inflow)) or np.any(inflow < 0):
            raise DataError("scenario inflow must be finite and >= 0")
        object.__setattr__(self, "inflow", inflow)
        if self.rainfall is not None:
            rain = _frozen(self.rainfall)
            if not np.all(np.isfinite(rain)) or np.any(rain < 0):
                raise DataError("rainfall must be finite and >= 0")
            object.__setattr__(self, "rainfall", rain)

    def __len__(self) -> int:
        return self.inflow.shape[0]

    def time(self, step: int) -> float:
        return self.start_time + step * self.dt


@dataclass(frozen=True)
class CatchmentParams:
    """Linear-reservoir runoff model of the contributing catchment.

    Attributes:
        area: Contributing area (m²).
        runoff_coefficient: Fraction of rain that becomes runoff.
        time_constant: Reservoir time constant (s).
    """

    area: float
    runoff_coefficient: float
    time_constant: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.area) and self.area > 0):
            raise DataError("catchment area must be > 0")
        if not 0.0 <= self.runoff_coefficient <= 1.0:
            raise DataError("runoff coefficient must lie in [0, 1]")
        if not (math.isfinite(self.time_constant) and self.time_constant > 0):
            raise DataError("reservoir time constant must be > 0")


def load_series_csv(path, expected_dt: float | None = None) -> TimeSeries:
    """Read a ``time_s,value`` series.

    Line numbers in error messages count data rows, the header excluded.

    Args:
        path: CSV file.
        expected_dt: Required spacing (s); inferred from the first two rows
            when omitted.

    Raises:
        SeriesFormatError: On a bad header, malformed row, non-uniform
            spacing or negative value.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8-sig")
    lines = text.splitlines()
    if not lines or lines[0].strip().replace(" ", "") != "time_s,value":
        raise SeriesFormatError(f"{path}: expected header 'time_s,value'")
    times: list[float] = []
    values: list[float] = []
    step = expected_dt
    row = 0
    for raw in lines[1:]:
        if not raw.strip():
            continue
        row += 1
        parts = raw.split(",")
        try:
            if len(parts) != 2:
                raise ValueError
            t = float(parts[0])
            v = float(parts[1])
        except ValueError:
            raise SeriesFormatError(f"{path}: malformed row at line {row}: {raw.strip()!r}") from None
        if not (math.isfinite(t) and math.isfinite(v)):
            raise SeriesFormatError(f"{path}: non-finite entry at line {row}")
        if v < 0:
            raise SeriesFormatError(f"{path}: negative value at line {row}")
        if times:
            gap = t - times[-1]
            if step is None:
                step = gap
            if not (gap > 0 and abs(gap - step) <= 1e-9 * step):
                raise SeriesFormatError(f"{path}: non-uniform step at line {row}")
        times.append(t)
        values.append(v)
    if not values:
        raise SeriesFormatError(f"{path}: no data rows")
    if step is None or not step > 0:
        raise SeriesFormatError(f"{path}: cannot infer a positive step from a single row")
    return TimeSeries(times=_frozen(times), values=_frozen(values), dt=float(step))


def rainfall_to_inflow(rain_mm, catchment: CatchmentParams, dt: float) -> np.ndarray:
    """Route per-step rain depth through a linear reservoir.

    Effective runoff ``p_k = C * rain_k * area / dt`` is treated as constant
    over each step, which makes the exact reservoir update
    ``q_k = a * q_{k-1} + (1 - a) * p_k`` with ``a = exp(-dt / K)``.  Over a
    long enough tail ``sum(q) * dt`` equals ``C * sum(rain) * area``.

    Args:
        rain_mm: Rain depth per step (mm).
        catchment: Runoff model parameters.
        dt: Step length (s).

    Returns:
        Inflow to the pond (m³/s), same length as ``rain_mm``.
    """
    rain = np.asarray(rain_mm, dtype=float).reshape(-1)
    if np.any(rain < 0) or not np.all(np.isfinite(rain)):
        raise DataError("rain depths must be finite and >= 0")
    if not dt > 0:
        raise DataError("dt must be > 0")
    p = catchment.runoff_coefficient * rain * 1e-3 * catchment.area / dt
    a = math.exp(-dt / catchment.time_constant)
    q = np.empty_like(p)
    level = 0.0
    for k, pk in enumerate(p):
        level = a * level + (1.0 - a) * pk
        q[k] = level
    return q


def _last_episode_end(inflow: np.ndarray, now_step: int, threshold: float, dt: float) -> float:
    wet = inflow[: now_step + 1] > threshold
    ends = np.flatnonzero(wet[:-1] & ~wet[1:])
    return float((ends[-1] + 1) * dt) if ends.size else 0.0


def forecast_window(scenario: Scenario, now_step: int, config: ControllerConfig) -> ForecastWindow:
    """Forecast seen by the controller at step ``now_step``.

    The first sample is the current observation.  Samples past the end of
    the scenario are zero.  In degraded mode every later sample is scaled
    by mean-one lognormal noise drawn from a stream keyed on
    ``(seed, now_step)``.

    Args:
        scenario: Inflow history.
        now_step: Index of the current step.
        config: Horizon, wet threshold and forecast mode.
    """
    n = len(scenario)
    if not 0 <= now_step <= n:
        raise DataError(f"step {now_step} outside scenario of length {n}")
    n_c = config.horizon_steps(scenario.dt)
    window = np.zeros(n_c + 1)
    tail = scenario.inflow[now_step : now_step + n_c + 1]
    window[: tail.shape[0]] = tail
    mode = config.forecast_mode
    if isinstance(mode, DegradedForecast) and mode.sigma > 0:
        rng = np.random.default_rng([mode.seed, now_step])
        noise = rng.normal(-0.5 * mode.sigma**2, mode.sigma, n_c)
        window[1:] *= np.exp(noise)
    elif not isinstance(mode, (PerfectForecast, DegradedForecast)):
        raise ConfigError(f"unknown forecast mode {mode!r}")

    wet = np.flatnonzero(window > config.wet_threshold)
    t_next = float(wet[0] * scenario.dt) if wet.size else math.inf
    inflow = scenario.inflow
    if now_step == n:
        t_f = _last_episode_end(np.append(inflow, 0.0), now_step, config.wet_threshold, scenario.dt)
    else:
        t_f = _last_episode_end(inflow, now_step, config.wet_threshold, scenario.dt)
    return ForecastWindow(
        inflow=window,
        t_next_rain=t_next,
        t_f=scenario.start_time + t_f,
        now=scenario.time(now_step),
    )


_REQUIRED = ("area_m2", "h_max_m", "q_max_m3s", "dt_s", "horizon_hours")
_OPTIONAL = (
    "settle_hours",
    "wet_threshold_m3s",
    "te_mode",
    "initial_depth_m",
    "forecast_sigma",
    "forecast_seed",
    "catchment_area_m2",
    "runoff_coefficient",
    "reservoir_time_s",
)
_CATCHMENT = ("catchment_area_m2", "runoff_coefficient", "reservoir_time_s")


def _parse_config_text(text: str, origin: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _REQUIRED and key not in _OPTIONAL:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def load_config(path) -> tuple[PondParams, ControllerConfig, CatchmentParams | None]:
    """Parse a pond configuration file.

    ``n_c`` is derived as ``horizon_hours * 3600 / dt_s``.  The catchment
    keys are optional but must appear together.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        ConfigError: On a missing, unknown, duplicate or unparsable key.
    """
    path = Path(path)
    entries = _parse_config_text(path.read_text(encoding="utf-8"), str(path))
    missing = [k for k in _REQUIRED if k not in entries]
    if missing:
        raise ConfigError(f"{path}: missing required key {missing[0]!r}")

    def number(key: str, default: float | None = None) -> float:
        if key not in entries:
            return default
        try:
            value = float(entries[key])
        except ValueError:
            raise ConfigError(f"{path}: {key} = {entries[key]!r} is not a number") from None
        if not math.isfinite(value):
            raise ConfigError(f"{path}: {key} must be finite")
        return value

    try:
        te_mode = TeMode(entries.get("te_mode", TeMode.DRAIN_AT_QMAX.value))
    except ValueError:
        choices = ", ".join(m.value for m in TeMode)
        raise ConfigError(f"{path}: te_mode must be one of {choices}") from None

    sigma = number("forecast_sigma", 0.0)
    seed = number("forecast_seed", 0.0)
    if seed != int(seed):
        raise ConfigError(f"{path}: forecast_seed must be an integer")
    forecast = DegradedForecast(sigma=sigma, seed=int(seed)) if sigma > 0 else PerfectForecast()

    try:
        config = ControllerConfig(
            anticipation_horizon=number("horizon_hours") * 3600.0,
            wet_threshold=number("wet_threshold_m3s", 1e-3),
            forecast_mode=forecast,
            te_mode=te_mode,
            settle_time=number("settle_hours", 20.0) * 3600.0,
            initial_depth=number("initial_depth_m", 0.0),
        )
        dt = number("dt_s")
        params = PondParams(
            area=number("area_m2"),
            h_max=number("h_max_m"),
            q_max=number("q_max_m3s"),
            dt=dt,
            n_c=config.horizon_steps(dt),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    if config.initial_depth > params.h_max:
        raise ConfigError(f"{path}: initial_depth_m exceeds h_max_m")

    present = [k for k in _CATCHMENT if k in entries]
    catchment = None
    if present:
        if len(present) != len(_CATCHMENT):
            absent = next(k for k in _CATCHMENT if k not in entries)
            raise ConfigError(f"{path}: catchment keys must appear together; missing {absent!r}")
        catchment = CatchmentParams(
            area=number("catchment_area_m2"),
            runoff_coefficient=number("runoff_coefficient"),
            time_constant=number("reservoir_time_s"),
        )
    return params, config, catchment


def load_scenario(
    dt: float,
    inflow_path=None,
    rain_path=None,
    catchment: CatchmentParams | None = None,
    name: str | None = None,
) -> Scenario:
    """Build a scenario from an inflow CSV or a rain CSV plus catchment.

    Raises:
        DataError: If neither or both sources are given, the rain route has
            no catchment, or the file's step differs from ``dt``.
    """
    if (inflow_path is None) == (rain_path is None):
        raise DataError("give exactly one of an inflow series or a rainfall series")
    if inflow_path is not None:
        series = load_series_csv(inflow_path, dt)
        return Scenario(name or Path(inflow_path).stem, dt, series.values, start_time=float(series.times[0]))
    if catchment is None:
        raise DataError("a rainfall series needs catchment parameters in the config")
    series = load_series_csv(rain_path, dt)
    inflow = rainfall_to_inflow(series.values, catchment, dt)
    return Scenario(
        name or Path(rain_path).stem, dt, inflow, start_time=float(series.times[0]), rainfall=series.values
    )
