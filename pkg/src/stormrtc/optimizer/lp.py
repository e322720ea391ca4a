"""Linear-program containers and the pond quantity-control model.

Variables of the pond model are ordered ``Q(0..n_c)`` then ``H(1..n_c)``.
The objective is the released volume measured the same way inflow volume
is, by the trapezoid rule: ``Q(0)`` and ``Q(n_c)`` carry weight one half,
interior samples weight one.  Mass-balance rows are written in depth units (divided by ``2 * area``)
so every row has a unit-sized coefficient and the solver tolerances read
directly in metres.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..hydraulics import PondParams

__all__ = [
    "Relation",
    "LpStatus",
    "LpProblem",
    "LpSolution",
    "Basis",
    "build_lp",
    "release_weights",
    "format_lp",
    "q_index",
    "h_index",
]


class Relation(enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class Basis:
    """A simplex basis usable as a warm start.

    ``basic`` holds one entry per constraint row: a non-negative integer is
    a structural variable index, ``-(i + 1)`` is the slack/artificial of
    row ``i``.  ``at_upper`` lists nonbasic structural variables resting on
    their upper bound.
    """

    basic: tuple[int, ...]
    at_upper: frozenset[int] = frozenset()


@dataclass
class LpProblem:
    """``min c·x`` subject to ``A x (rel) b`` and ``lower <= x <= upper``."""

    objective: np.ndarray
    A: np.ndarray
    relations: tuple[Relation, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    var_names: tuple[str, ...] | None = None
    row_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.shape[0]
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.lower = np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.asarray(self.upper, dtype=float).reshape(-1)
        self.relations = tuple(Relation(r) for r in self.relations)
        m = self.A.shape[0]
        if len(self.relations) != m or self.rhs.shape[0] != m:
            raise ValueError("relations and rhs must have one entry per constraint row")
        if self.lower.shape[0] != n or self.upper.shape[0] != n:
            raise ValueError("bounds must have one entry per variable")
        if not np.all(np.isfinite(self.lower)) or np.any(self.lower < 0):
            raise ValueError("lower bounds must be finite and >= 0")
        if np.any(self.upper < self.lower):
            raise ValueError("upper bound below lower bound")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.rhs)) and np.all(np.isfinite(self.objective))):
            raise ValueError("coefficients must be finite")

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def row_counts(self) -> dict[Relation, int]:
        return {rel: sum(1 for r in self.relations if r is rel) for rel in Relation}


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = math.nan
    basis: Basis | None = None
    iterations: int = 0
    max_residual: float = math.nan
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def release_weights(n_c: int) -> np.ndarray:
    """Trapezoid weights on ``Q(0..n_c)``; ``dt * w·Q`` is the released volume."""
    w = np.ones(n_c + 1)
    w[0] = w[-1] = 0.5
    return w


def q_index(t: int) -> int:
    return t


def h_index(t: int, n_c: int) -> int:
    """Column of ``H(t)`` for ``t`` in ``1..n_c``."""
    return n_c + t


def build_lp(
    params: PondParams,
    initial_depth: float,
    inflow_forecast,
    initial_outflow: float | None = None,
) -> LpProblem:
    """Assemble the minimum-release LP for one planning horizon.

    Args:
        params: Pond constants; ``n_c`` is taken from the forecast length.
        initial_depth: Depth ``H(0)`` (m), held fixed.
        inflow_forecast: ``I(0..n_c)`` in m³/s.
        initial_outflow: If given, ``Q(0)`` is pinned to this already-applied
            value; otherwise ``Q(0)`` is free in ``[0, q_max]``.

    Raises:
        ValueError: On a forecast shorter than two samples, negative inflow
            or an initial depth outside ``[0, h_max]``.
    """
    inflow = np.asarray(inflow_forecast, dtype=float).reshape(-1)
    n = inflow.shape[0] - 1
    if n < 1:
        raise ValueError("inflow forecast needs n_c + 1 >= 2 samples")
    if n != params.n_c:
        raise ValueError(f"forecast length {n + 1} does not match n_c + 1 = {params.n_c + 1}")
    if np.any(inflow < 0) or not np.all(np.isfinite(inflow)):
        raise ValueError("inflow forecast must be finite and >= 0")
    if not 0.0 <= initial_depth <= params.h_max:
        raise ValueError(f"initial depth {initial_depth!r} outside [0, {params.h_max!r}]")

    beta = params.beta
    nv = 2 * n + 1
    A = np.zeros((n, nv))
    rhs = np.empty(n)
    rows = np.arange(n)
    t = rows + 1
    # beta*(Q(t-1) + Q(t)) + H(t) - H(t-1) = beta*(I(t-1) + I(t))
    A[rows, t - 1] = beta
    A[rows, t] = beta
    A[rows, n + t] = 1.0
    A[rows[1:], n + t[1:] - 1] = -1.0
    rhs[:] = beta * (inflow[:-1] + inflow[1:])
    rhs[0] += initial_depth

    lower = np.zeros(nv)
    upper = np.concatenate([np.full(n + 1, params.q_max), np.full(n, params.h_max)])
    if initial_outflow is not None:
        if not 0.0 <= initial_outflow <= params.q_max:
            raise ValueError(f"initial outflow {initial_outflow!r} outside [0, q_max]")
        lower[0] = upper[0] = initial_outflow
    objective = np.concatenate([release_weights(n), np.zeros(n)])
    names = tuple(f"Q{k}" for k in range(n + 1)) + tuple(f"H{k}" for k in range(1, n + 1))
    return LpProblem(
        objective=objective,
        A=A,
        relations=(Relation.EQ,) * n,
        rhs=rhs,
        lower=lower,
        upper=upper,
        var_names=names,
        row_names=tuple(f"mass{k}" for k in range(1, n + 1)),
    )


def _fmt(v: float) -> str:
    return repr(float(v))


def format_lp(problem: LpProblem) -> str:
    """Render ``problem`` in CPLEX LP text, one constraint per line."""
    names = problem.var_names or tuple(f"x{j}" for j in range(problem.num_vars))
    rnames = problem.row_names or tuple(f"c{i}" for i in range(problem.num_rows))

    def linear(coefs) -> str:
        terms = [f"{'-' if c < 0 else '+'} {_fmt(abs(c))} {names[j]}" for j, c in enumerate(coefs) if c != 0]
        if not terms:
            return "0 " + names[0]
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else text

    lines = ["\\ stormrtc LP dump", "Minimize", f" obj: {linear(problem.objective)}", "Subject To"]
    for i in range(problem.num_rows):
        rel = problem.relations[i].value
        lines.append(f" {rnames[i]}: {linear(problem.A[i])} {rel} {_fmt(problem.rhs[i])}")
    lines.append("Bounds")
    for j in range(problem.num_vars):
        lo, hi = problem.lower[j], problem.upper[j]
        if lo == hi:
            lines.append(f" {names[j]} = {_fmt(lo)}")
        elif math.isinf(hi):
            lines.append(f" {names[j]} >= {_fmt(lo)}")
        else:
            lines.append(f" {_fmt(lo)} <= {names[j]} <= {_fmt(hi)}")
    lines.append("End")
    return "\n".join(lines) + "\n"
