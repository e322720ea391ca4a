"""Bounded-variable dense simplex.

Every row gets one auxiliary column with coefficient +1: a slack in
``[0, inf)`` for ``<=`` rows, a surplus in ``(-inf, 0]`` for ``>=`` rows
and an artificial fixed at ``[0, 0]`` for equality rows.  Starting from a
basis (auxiliaries by default, or a caller-supplied warm start) the
solver runs

1. the dual simplex, when the start is dual feasible but primal infeasible;
2. otherwise primal phase 1, minimising the sum of bound violations;
3. primal phase 2 on the true objective.

Pricing is Dantzig's rule with a Harris two-pass ratio test.  After 50
consecutive degenerate pivots both passes switch to Bland's smallest-index
rule until progress resumes, which rules out cycling.  The final basis is
refactorized from the original data and the solution is accepted only if
row residuals, bounds and reduced costs pass at the stated tolerances.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels as _kernels
from .lp import Basis, LpProblem, LpSolution, LpStatus, Relation

log = logging.getLogger(__name__)

AT_LOWER = _kernels.AT_LOWER
AT_UPPER = _kernels.AT_UPPER
BASIC = _kernels.BASIC

FEAS_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_LIMIT = 50
REFACTOR_EVERY = 200


class NumericalError(RuntimeError):
    """The solver could not certify its answer."""


class _Breakdown(Exception):
    pass


class _StandardForm:
    def __init__(self, problem: LpProblem):
        A = problem.A
        m, n = A.shape
        scale = np.abs(A).max(axis=1) if n else np.zeros(m)
        scale[scale == 0] = 1.0
        self.row_scale = scale
        self.m, self.n = m, n
        self.A_csc = sp.csc_matrix(A / scale[:, None])
        self.full = sp.hstack([self.A_csc, sp.identity(m, format="csc")], format="csc")
        self.b = problem.rhs / scale
        self.c = np.concatenate([problem.objective, np.zeros(m)])
        aux_lb = np.empty(m)
        aux_ub = np.empty(m)
        for i, rel in enumerate(problem.relations):
            if rel is Relation.LE:
                aux_lb[i], aux_ub[i] = 0.0, np.inf
            elif rel is Relation.GE:
                aux_lb[i], aux_ub[i] = -np.inf, 0.0
            else:
                aux_lb[i], aux_ub[i] = 0.0, 0.0
        self.lb = np.concatenate([problem.lower, aux_lb])
        self.ub = np.concatenate([problem.upper, aux_ub])

    def column(self, key: int) -> int:
        return key if key >= 0 else self.n + (-key - 1)

    def key(self, col: int) -> int:
        return col if col < self.n else -(col - self.n + 1)


class _Tableau:
    """Mutable simplex state over a standard form."""

    def __init__(self, sf: _StandardForm, kern, basis: np.ndarray, state: np.ndarray):
        self.sf = sf
        self.k = kern
        self.basis = basis
        self.state = state
        self.iterations = 0
        self.since_refactor = 0
        self.refactor()

    # -- factorization -------------------------------------------------
    def nonbasic_values(self) -> np.ndarray:
        sf = self.sf
        x = np.where(self.state == AT_UPPER, sf.ub, sf.lb)
        x[self.basis] = 0.0
        return x

    def _lu(self):
        B = self.sf.full[:, self.basis]
        try:
            return spla.splu(B)
        except RuntimeError as exc:
            raise _Breakdown(f"singular basis: {exc}") from exc

    def refactor(self) -> None:
        sf = self.sf
        lu = self._lu()
        binv = lu.solve(np.eye(sf.m))
        T = np.empty((sf.m, sf.n + sf.m))
        T[:, : sf.n] = (sf.A_csc.T @ binv.T).T
        T[:, sf.n :] = binv
        self.T = T
        self.xB = self.basic_values(lu)
        self.since_refactor = 0
        self.set_cost(sf.c)

    def basic_values(self, lu) -> np.ndarray:
        sf = self.sf
        return lu.solve(sf.b - sf.full @ self.nonbasic_values())

    def set_cost(self, cost: np.ndarray) -> None:
        self.d = np.ascontiguousarray(cost - cost[self.basis] @ self.T)
        self.d[self.basis] = 0.0

    @property
    def lbB(self):
        return np.ascontiguousarray(self.sf.lb[self.basis])

    @property
    def ubB(self):
        return np.ascontiguousarray(self.sf.ub[self.basis])

    # -- pivoting --------------------------------------------------------
    def _pivot(self, r: int, q: int, enter_value: float, leave_upper: bool) -> None:
        leave = self.basis[r]
        self.state[leave] = AT_UPPER if leave_upper else AT_LOWER
        self.xB[r] = enter_value
        self.k.pivot(self.T, self.d, r, q)
        self.basis[r] = q
        self.state[q] = BASIC
        self.iterations += 1
        self.since_refactor += 1

    def maybe_refactor(self, cost: np.ndarray) -> None:
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()
            self.set_cost(cost)

    def primal_infeasibility(self) -> float:
        lbB, ubB = self.lbB, self.ubB
        viol = np.maximum(np.maximum(lbB - self.xB, self.xB - ubB), 0.0)
        return float(viol.max()) if viol.size else 0.0

    def dual_feasible(self) -> bool:
        sf, d, st = self.sf, self.d, self.state
        movable = sf.ub > sf.lb
        bad_low = (st == AT_LOWER) & movable & (d < -DUAL_TOL)
        bad_up = (st == AT_UPPER) & movable & (d > DUAL_TOL)
        return not (bad_low.any() or bad_up.any())

    def flip_to_dual_feasible(self) -> bool:
        """Move boxed nonbasics to the bound their reduced cost favours."""
        sf, d, st = self.sf, self.d, self.state
        to_up = (st == AT_LOWER) & (d < -DUAL_TOL) & np.isfinite(sf.ub) & (sf.ub > sf.lb)
        to_low = (st == AT_UPPER) & (d > DUAL_TOL)
        if to_up.any() or to_low.any():
            delta = np.zeros(sf.n + sf.m)
            delta[to_up] = sf.ub[to_up] - sf.lb[to_up]
            delta[to_low] = sf.lb[to_low] - sf.ub[to_low]
            st[to_up] = AT_UPPER
            st[to_low] = AT_LOWER
            idx = np.flatnonzero(delta)
            self.xB -= self.T[:, idx] @ delta[idx]
        return self.dual_feasible()

    # -- algorithms ------------------------------------------------------
    def dual_simplex(self, max_iter: int) -> bool:
        """Returns False when a row proves primal infeasibility."""
        k, sf = self.k, self.sf
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                raise NumericalError("iteration limit reached in dual simplex")
            self.maybe_refactor(sf.c)
            bland = degenerate >= DEGENERATE_LIMIT
            lbB, ubB = self.lbB, self.ubB
            r = k.dual_leaving(self.xB, lbB, ubB, self.basis, FEAS_TOL, bland)
            if r < 0:
                return True
            increase = self.xB[r] < lbB[r]
            row = self.T[r]
            q = k.dual_ratio(row, self.d, self.state, sf.lb, sf.ub, increase, DUAL_TOL, PIVOT_TOL, bland)
            if q < 0:
                return False
            bound = lbB[r] if increase else ubB[r]
            delta = (self.xB[r] - bound) / row[q]
            start = sf.ub[q] if self.state[q] == AT_UPPER else sf.lb[q]
            degenerate = degenerate + 1 if abs(self.d[q]) <= DUAL_TOL else 0
            self.xB -= delta * self.T[:, q]
            self._pivot(r, q, start + delta, leave_upper=not increase)

    def primal(self, phase_one: bool, max_iter: int) -> LpStatus | None:
        """Primal simplex.  Phase 1 returns None once feasible."""
        k, sf = self.k, self.sf
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                raise NumericalError("iteration limit reached in primal simplex")
            lbB, ubB = self.lbB, self.ubB
            if phase_one:
                if self.since_refactor >= REFACTOR_EVERY:
                    self.refactor()
                    lbB, ubB = self.lbB, self.ubB
                cB = np.where(self.xB < lbB - FEAS_TOL, -1.0, np.where(self.xB > ubB + FEAS_TOL, 1.0, 0.0))
                nz = np.flatnonzero(cB)
                if nz.size == 0:
                    return None
                self.d = np.ascontiguousarray(-(cB[nz] @ self.T[nz]))
                self.d[self.basis] = 0.0
            else:
                self.maybe_refactor(sf.c)
            bland = degenerate >= DEGENERATE_LIMIT
            q = k.price(self.d, self.state, sf.lb, sf.ub, DUAL_TOL, bland)
            if q < 0:
                return LpStatus.INFEASIBLE if phase_one else LpStatus.OPTIMAL
            direction = 1.0 if self.state[q] == AT_LOWER else -1.0
            col = self.T[:, q]
            r, theta, leave_upper = k.primal_ratio(
                col, direction, self.xB, lbB, ubB, self.basis, FEAS_TOL, PIVOT_TOL, bland
            )
            span = sf.ub[q] - sf.lb[q]
            if r < 0 and math.isinf(span):
                if phase_one:
                    raise NumericalError("phase 1 objective unbounded")
                return LpStatus.UNBOUNDED
            degenerate = degenerate + 1 if min(theta, span) <= FEAS_TOL else 0
            if span <= theta:
                self.xB -= (span * direction) * col
                self.state[q] = AT_UPPER if self.state[q] == AT_LOWER else AT_LOWER
                self.iterations += 1
                continue
            start = sf.lb[q] if direction > 0 else sf.ub[q]
            self.xB -= (theta * direction) * col
            self._pivot(r, q, start + direction * theta, leave_upper)


def _initial_basis(sf: _StandardForm, warm: Basis | None):
    n_tot = sf.n + sf.m
    state = np.zeros(n_tot, dtype=np.int8)
    if warm is not None:
        if len(warm.basic) != sf.m:
            raise ValueError(f"warm basis has {len(warm.basic)} entries for {sf.m} rows")
        basis = np.array([sf.column(k) for k in warm.basic], dtype=np.intp)
        if len(set(basis.tolist())) != sf.m or basis.min() < 0 or basis.max() >= n_tot:
            raise ValueError("warm basis entries must be distinct valid columns")
        for j in warm.at_upper:
            if 0 <= j < sf.n and math.isfinite(sf.ub[j]):
                state[j] = AT_UPPER
    else:
        basis = np.arange(sf.n, n_tot, dtype=np.intp)
    # A nonbasic variable without a finite lower bound starts at its upper one.
    state[~np.isfinite(sf.lb)] = AT_UPPER
    state[basis] = BASIC
    return basis, state


def _certify(tab: _Tableau) -> tuple[bool, bool, float]:
    """Recompute the basic solution and duals from a fresh LU and check them.

    On success ``tab.xB`` and ``tab.d`` hold the recomputed values; the
    tableau itself is left as is.
    """
    sf = tab.sf
    lu = tab._lu()
    tab.xB = tab.basic_values(lu)
    y = lu.solve(sf.c[tab.basis], trans="T")
    tab.d = np.ascontiguousarray(sf.c - sf.full.T @ y)
    tab.d[tab.basis] = 0.0
    x = tab.nonbasic_values()
    x[tab.basis] = tab.xB
    residual = float(np.abs(sf.full @ x - sf.b).max()) if sf.m else 0.0
    primal_ok = residual <= FEAS_TOL and tab.primal_infeasibility() <= FEAS_TOL
    dual_ok = tab.dual_feasible()
    if not (primal_ok and dual_ok):
        tab.refactor()
    return primal_ok, dual_ok, residual


def solve_lp(problem: LpProblem, basis: Basis | None = None, backend=None, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem`` to optimality, or prove it infeasible or unbounded.

    Args:
        problem: The LP.
        basis: Optional warm-start basis (e.g. from a previous solve).
        backend: ``"python"`` or ``"cython"`` to force a kernel backend.
        max_iter: Pivot limit; defaults to ``20 * (rows + columns) + 1000``.

    Raises:
        NumericalError: If the result cannot be certified at tolerance.
    """
    kern = _kernels.backend if backend is None else _kernels.load_backend(backend)
    sf = _StandardForm(problem)
    if max_iter is None:
        max_iter = 20 * (sf.m + sf.n + sf.m) + 1000

    if sf.m == 0:
        return _solve_bounds_only(problem)

    try:
        tab = _Tableau(sf, kern, *_initial_basis(sf, basis))
    except _Breakdown:
        log.debug("warm basis singular, falling back to slack basis")
        tab = _Tableau(sf, kern, *_initial_basis(sf, None))

    status = None
    for attempt in range(4):
        try:
            status = _run(tab, max_iter)
        except _Breakdown as exc:
            raise NumericalError(str(exc)) from exc
        if status is not LpStatus.OPTIMAL:
            if status is LpStatus.INFEASIBLE and attempt == 0:
                # Confirm with a fresh factorization before reporting.
                tab.refactor()
                continue
            break
        primal_ok, dual_ok, residual = _certify(tab)
        if primal_ok and dual_ok:
            break
        log.debug("certificate failed (attempt %d): residual %.3g", attempt, residual)
    else:
        raise NumericalError("could not certify LP solution after refactorization")

    if status is not LpStatus.OPTIMAL:
        return LpSolution(status=status, iterations=tab.iterations)

    x_full = tab.nonbasic_values()
    x_full[tab.basis] = tab.xB
    x = x_full[: sf.n].copy()
    residual = float(np.abs(sf.full @ x_full - sf.b).max())
    warm = Basis(
        basic=tuple(sf.key(int(c)) for c in tab.basis),
        at_upper=frozenset(int(j) for j in np.flatnonzero(tab.state[: sf.n] == AT_UPPER)),
    )
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective=float(problem.objective @ x),
        basis=warm,
        iterations=tab.iterations,
        max_residual=residual,
    )


def _run(tab: _Tableau, max_iter: int) -> LpStatus:
    if tab.primal_infeasibility() > FEAS_TOL and tab.flip_to_dual_feasible():
        if not tab.dual_simplex(max_iter):
            # Let phase 1 confirm: the dual ratio test can miss on tolerances.
            tab.refactor()
    if tab.primal_infeasibility() > FEAS_TOL:
        status = tab.primal(phase_one=True, max_iter=max_iter)
        if status is LpStatus.INFEASIBLE:
            tab.refactor()
            if tab.primal_infeasibility() > FEAS_TOL:
                return LpStatus.INFEASIBLE
        tab.set_cost(tab.sf.c)
    return tab.primal(phase_one=False, max_iter=max_iter)


def _solve_bounds_only(problem: LpProblem) -> LpSolution:
    c = problem.objective
    if np.any((c < 0) & np.isinf(problem.upper)):
        return LpSolution(status=LpStatus.UNBOUNDED)
    x = np.where(c < 0, problem.upper, problem.lower)
    return LpSolution(status=LpStatus.OPTIMAL, x=x, objective=float(c @ x), basis=Basis(()), max_residual=0.0)
