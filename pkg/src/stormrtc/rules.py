"""Dry-weather release rules.

Between storms the outlet is driven by three rules keyed on how soon the
next rain arrives compared with the emptying time ``t_e`` and the
sedimentation time ``settle_time``:

* next rain within ``t_e``: open fully (``EmptyAtMax``);
* next rain within ``t_e + settle_time``: release a fraction of ``q_max``
  (``ProportionalRelease``);
* otherwise keep the gate shut so solids can settle (``HoldClosed``).

All times are measured relative to the current instant: ``t_next_rain``
is a duration from now and ``t_f' = now - t_f`` is the time elapsed since
the last rain ended.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

from .hydraulics import PondParams, PondState

__all__ = [
    "TeMode",
    "Rule",
    "DryContext",
    "RuleDecision",
    "DEFAULT_SETTLE_TIME",
    "emptying_time",
    "proportional_fraction",
    "select_rule",
]

log = logging.getLogger(__name__)

DEFAULT_SETTLE_TIME = 72000.0  # 20 h


class TeMode(enum.Enum):
    """How the emptying time is computed.

    ``DRAIN_AT_QMAX`` is the time to release the stored volume at full
    outflow.  ``PAPER_LITERAL`` keeps the ``H * A / h_max * 360`` formula
    for side-by-side comparison runs; its result is not a true duration.
    """

    DRAIN_AT_QMAX = "drain_at_qmax"
    PAPER_LITERAL = "paper_literal"


class Rule(enum.Enum):
    EMPTY_AT_MAX = "empty_at_max"
    PROPORTIONAL = "proportional"
    HOLD_CLOSED = "hold_closed"


@dataclass(frozen=True)
class DryContext:
    """Inputs of one dry-weather decision.

    Attributes:
        t_next_rain: Time from now until the next forecast rain (s);
            ``math.inf`` when none is forecast.
        t_f: Clock time at which the previous rain ended (s).
        now: Current clock time (s).
        t_e: Emptying time (s).
        settle_time: Required quiescent retention (s).
    """

    t_next_rain: float
    t_f: float
    now: float
    t_e: float
    settle_time: float = DEFAULT_SETTLE_TIME

    def __post_init__(self) -> None:
        if not self.t_next_rain >= 0:
            raise ValueError(f"t_next_rain must be >= 0, got {self.t_next_rain!r}")
        if not (math.isfinite(self.t_e) and self.t_e >= 0):
            raise ValueError(f"t_e must be finite and >= 0, got {self.t_e!r}")
        if not (math.isfinite(self.settle_time) and self.settle_time > 0):
            raise ValueError(f"settle_time must be > 0, got {self.settle_time!r}")
        if not self.now >= self.t_f:
            raise ValueError(f"now ({self.now!r}) precedes end of last rain ({self.t_f!r})")

    @property
    def since_rain(self) -> float:
        """``t_f'``: seconds elapsed since the previous rain ended."""
        return self.now - self.t_f


@dataclass(frozen=True)
class RuleDecision:
    rule: Rule
    outflow: float
    fraction: float
    degenerate: bool = False

    @property
    def tag(self) -> str:
        return self.rule.value


def emptying_time(state: PondState, params: PondParams, mode: TeMode = TeMode.DRAIN_AT_QMAX) -> float:
    """Emptying time ``t_e`` of the current storage (s).

    Examples:
        >>> p = PondParams(area=100.0, h_max=1.2, q_max=1.0, dt=300.0)
        >>> emptying_time(PondState(depth=1.2), p, TeMode.PAPER_LITERAL)
        36000.0
    """
    mode = TeMode(mode)
    if mode is TeMode.DRAIN_AT_QMAX:
        return params.area * state.depth / params.q_max
    return state.depth * params.area / params.h_max * 360.0


def proportional_fraction(ctx: DryContext) -> tuple[float, bool]:
    """Clamped release fraction ``(t_e - t_f') / (t_next_rain - t_f')``.

    Returns:
        The fraction in ``[0, 1]`` and whether the denominator vanished
        (in which case the fraction is 1).
    """
    t_fp = ctx.since_rain
    denom = ctx.t_next_rain - t_fp
    if denom == 0.0:
        return 1.0, True
    raw = (ctx.t_e - t_fp) / denom
    return min(1.0, max(0.0, raw)), False


def select_rule(ctx: DryContext, params: PondParams) -> RuleDecision:
    """Pick the dry-weather rule and its outflow set point.

    Boundaries are closed on the left: ``t_next_rain == t_e`` empties at
    ``q_max`` and ``t_next_rain == t_e + settle_time`` is still proportional.
    """
    if ctx.t_next_rain <= ctx.t_e:
        return RuleDecision(Rule.EMPTY_AT_MAX, params.q_max, 1.0)
    if ctx.t_next_rain <= ctx.t_e + ctx.settle_time:
        fraction, degenerate = proportional_fraction(ctx)
        if degenerate:
            log.info("proportional rule: next rain coincides with t_f'; releasing at q_max")
        return RuleDecision(Rule.PROPORTIONAL, params.q_max * fraction, fraction, degenerate)
    return RuleDecision(Rule.HOLD_CLOSED, 0.0, 0.0)
