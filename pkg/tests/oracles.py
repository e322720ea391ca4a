"""Independent reference computations for the test-suite.

Nothing here imports the package's solver or planner.  The LP oracle is
plain basic-solution enumeration: every choice of basic columns, every
assignment of nonbasic variables to a finite bound, keep the feasible
points, take the cheapest.  Exponential, so only for tiny problems.
"""

import itertools

import numpy as np

LE, EQ, GE = "<=", "=", ">="


def to_standard_form(c, A, rel, b, lb, ub):
    """Add one slack per inequality row; returns (c, A, b, lb, ub)."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    ineq = [i for i, r in enumerate(rel) if r != EQ]
    S = np.zeros((m, len(ineq)))
    for k, i in enumerate(ineq):
        S[i, k] = 1.0 if rel[i] == LE else -1.0
    A_eq = np.hstack([A, S])
    c_eq = np.concatenate([np.asarray(c, float), np.zeros(len(ineq))])
    lb_eq = np.concatenate([np.asarray(lb, float), np.zeros(len(ineq))])
    ub_eq = np.concatenate([np.asarray(ub, float), np.full(len(ineq), np.inf)])
    return c_eq, A_eq, np.asarray(b, float), lb_eq, ub_eq


def enumerate_lp(c, A, b, lb, ub, tol=1e-9):
    """Minimise ``c·x`` over ``A x = b, lb <= x <= ub`` by enumeration.

    Returns ``(objective, x)`` of the best basic feasible solution, or
    ``(None, None)`` if none exists.  The feasible set must be bounded.
    """
    A = np.asarray(A, float)
    m, n = A.shape
    c = np.asarray(c, float)
    b = np.asarray(b, float)
    lb = np.asarray(lb, float)
    ub = np.asarray(ub, float)
    best_obj, best_x = None, None
    A_all, b_all = A, b
    # keep a maximal independent set of rows; dropped rows are re-checked below
    keep = []
    for i in range(m):
        if np.linalg.matrix_rank(A[keep + [i]], tol=1e-10) == len(keep) + 1:
            keep.append(i)
    A, b = A[keep], b[keep]
    m = len(keep)
    if m == 0:
        x = np.where(c < 0, ub, lb)
        if np.all(np.abs(A_all @ x - b_all) <= tol * (1 + np.abs(b_all))):
            return float(c @ x), x
        return None, None
    for basic in itertools.combinations(range(n), m):
        basic = list(basic)
        B = A[:, basic]
        if np.linalg.matrix_rank(B, tol=1e-10) < m:
            continue
        nonbasic = [j for j in range(n) if j not in basic]
        choices = []
        for j in nonbasic:
            opts = [v for v in {lb[j], ub[j]} if np.isfinite(v)]
            choices.append(sorted(opts))
        if nonbasic:
            XN = np.array(list(itertools.product(*choices)), dtype=float).T
            rhs = b[:, None] - A[:, nonbasic] @ XN
        else:
            XN = np.zeros((0, 1))
            rhs = b[:, None]
        XB = np.linalg.solve(B, rhs)
        scale = 1.0 + np.abs(XB)
        ok = np.all((XB >= lb[basic, None] - tol * scale) & (XB <= ub[basic, None] + tol * scale), axis=0)
        if A_all.shape[0] > m and ok.any():
            X = np.zeros((n, XB.shape[1]))
            X[basic] = XB
            if nonbasic:
                X[nonbasic] = XN
            ok &= np.all(np.abs(A_all @ X - b_all[:, None]) <= 1e-8 * (1 + np.abs(b_all[:, None])), axis=0)
        if not ok.any():
            continue
        objs = c[basic] @ XB + (c[nonbasic] @ XN if nonbasic else 0.0)
        objs = np.where(ok, objs, np.inf)
        k = int(np.argmin(objs))
        if best_obj is None or objs[k] < best_obj:
            x = np.zeros(n)
            x[basic] = XB[:, k]
            if nonbasic:
                x[nonbasic] = XN[:, k]
            best_obj, best_x = float(objs[k]), x
    return best_obj, best_x


def pond_lp(area, h_max, q_max, dt, h0, inflow, q0=None):
    """The minimum-release pond LP written out directly from the mass balance.

    Variables ``Q(0..n), H(1..n)``; the cost is released volume in m³,
    rows are in volume units
    ``dt*Q(t) + dt*Q(t-1) + 2A*H(t) - 2A*H(t-1) = dt*(I(t-1)+I(t))``.
    """
    inflow = np.asarray(inflow, float)
    n = len(inflow) - 1
    nv = 2 * n + 1
    A = np.zeros((n, nv))
    b = np.zeros(n)
    for t in range(1, n + 1):
        A[t - 1, t] += dt
        A[t - 1, t - 1] += dt
        A[t - 1, n + t] = 2 * area
        if t > 1:
            A[t - 1, n + t - 1] = -2 * area
        b[t - 1] = dt * (inflow[t - 1] + inflow[t]) + (2 * area * h0 if t == 1 else 0.0)
    # released volume by the trapezoid rule, the same measure as inflow
    c = np.concatenate([np.full(n + 1, dt), np.zeros(n)])
    c[0] = c[n] = dt / 2.0
    lb = np.zeros(nv)
    ub = np.concatenate([np.full(n + 1, q_max), np.full(n, h_max)])
    if q0 is not None:
        lb[0] = ub[0] = q0
    return c, A, b, lb, ub


def pond_min_release(area, h_max, q_max, dt, h0, inflow, q0=None):
    """Minimal released volume (m³) of the pond LP by enumeration (None if infeasible)."""
    c, A, b, lb, ub = pond_lp(area, h_max, q_max, dt, h0, inflow, q0)
    # rows in volume units span ~1e5; rescale each row before enumerating
    s = np.abs(A).max(axis=1)
    obj, x = enumerate_lp(c, A / s[:, None], b / s, lb, ub)
    return obj, x


def prefix_deficit(area, h_max, dt, h0, inflow):
    """max_t (stored + arrived - capacity), floored at 0, by explicit loop."""
    stored = area * h0
    worst = stored - area * h_max
    for t in range(1, len(inflow)):
        stored += dt * (inflow[t - 1] + inflow[t]) / 2.0
        worst = max(worst, stored - area * h_max)
    return max(0.0, worst)


def pond_min_release_chain(area, h_max, q_max, dt, h0, inflow, q0=None, tol=1e-9):
    """Minimal released volume of the pond LP by chain-structured enumeration.

    Same answer as ``pond_min_release`` but scales to a dozen steps.  With
    ``beta = dt / (2 area)`` row ``t`` reads ``beta Q(t) + H(t) = r_t - c(t-1)``
    where the carry ``c(t) = beta Q(t) - H(t)``.  A basic solution is built
    link by link: each link ``(Q(t), H(t))`` either has one basic member
    (the other at a bound), both at bounds (closing the row that left a
    basic variable unresolved), or both basic (opening one unresolved
    variable ``u``).  Two unresolved variables at once would make the basis
    singular, so the enumeration carries at most one, stored as affine
    coefficients in ``u`` together with the interval ``u`` must lie in.

    Returns:
        ``(volume, None)``; volume is None when infeasible.
    """
    inflow = np.asarray(inflow, float)
    n = len(inflow) - 1
    beta = dt / (2.0 * area)
    r = beta * (inflow[:-1] + inflow[1:])
    w = np.full(n + 1, dt)
    w[0] = w[n] = dt / 2.0
    qlo, qhi = (0.0, q_max) if q0 is None else (q0, q0)

    def bounds_for(t):
        lo, hi = (qlo, qhi) if t == 0 else (0.0, q_max)
        return sorted({lo, hi}), lo, hi

    # state columns: carry a + b u, cost k + m u, u in [ulo, uhi], pending flag
    qs, lo0, hi0 = bounds_for(0)
    rows = [(beta * q - h0, 0.0, w[0] * q, 0.0, -np.inf, np.inf, 0.0) for q in qs]
    rows.append((-h0, beta, 0.0, w[0], lo0, hi0, 1.0))
    S = np.array(rows)

    def clip_u(ulo, uhi, coef, const, lo, hi):
        # impose lo <= const + coef*u <= hi on u
        with np.errstate(divide="ignore", invalid="ignore"):
            a = (lo - const) / coef
            b = (hi - const) / coef
        pos = coef > 0
        neg = coef < 0
        new_lo = np.where(pos, np.maximum(ulo, a), np.where(neg, np.maximum(ulo, b), ulo))
        new_hi = np.where(pos, np.minimum(uhi, b), np.where(neg, np.minimum(uhi, a), uhi))
        ok = np.where(pos | neg, True, (const >= lo - tol) & (const <= hi + tol))
        return new_lo, new_hi, ok

    for t in range(1, n + 1):
        a, b, k, m, ulo, uhi, pend = S.T
        s0, s1 = r[t - 1] - a, -b
        known = pend == 0.0
        qs, qlo_t, qhi_t = bounds_for(t)
        out = []
        for q in qs:
            # H basic: H = s - beta q
            nlo, nhi, ok = clip_u(ulo, uhi, s1, s0 - beta * q, 0.0, h_max)
            ok &= nlo <= nhi + tol
            out.append(np.column_stack([2 * beta * q - s0, -s1, k + w[t] * q, m, nlo, nhi, pend])[ok])
        for h in sorted({0.0, h_max}):
            # Q basic: Q = (s - h) / beta
            nlo, nhi, ok = clip_u(ulo, uhi, s1 / beta, (s0 - h) / beta, qlo_t, qhi_t)
            ok &= nlo <= nhi + tol
            out.append(
                np.column_stack([s0 - 2 * h, s1, k + w[t] * (s0 - h) / beta, m + w[t] * s1 / beta, nlo, nhi, pend])[ok]
            )
        for q in qs:
            for h in sorted({0.0, h_max}):
                # both at bounds: resolves the pending u
                sel = ~known & (np.abs(s1) > 1e-14)
                u = np.where(sel, (beta * q + h - s0) / np.where(sel, s1, 1.0), 0.0)
                span = tol * (1.0 + np.abs(u))
                ok = sel & (u >= ulo - span) & (u <= uhi + span)
                z = np.zeros(ok.sum())
                out.append(
                    np.column_stack([z + beta * q - h, z, (k + m * u + w[t] * q)[ok], z, z - np.inf, z + np.inf, z])
                )
        # both basic from a resolved state: Q(t) = u, H(t) = s - beta u
        sk = S[known]
        if sk.size:
            s0k = r[t - 1] - sk[:, 0]
            ulo_k = np.maximum(qlo_t, (s0k - h_max) / beta)
            uhi_k = np.minimum(qhi_t, s0k / beta)
            ok = ulo_k <= uhi_k + tol
            out.append(
                np.column_stack([-s0k, np.full(len(sk), 2 * beta), sk[:, 2], np.full(len(sk), w[t]), ulo_k, uhi_k, np.ones(len(sk))])[ok]
            )
        S = np.vstack(out) if out else np.zeros((0, 7))
        # resolved states with equal carry: keep the cheapest
        kn = S[:, 6] == 0.0
        if kn.sum() > 1:
            K = S[kn]
            key = np.round(K[:, 0], 12)
            order = np.lexsort((K[:, 2], key))
            K = K[order]
            first = np.concatenate([[True], key[order][1:] != key[order][:-1]])
            S = np.vstack([K[first], S[~kn]])
    final = S[S[:, 6] == 0.0]
    if final.size == 0:
        return None, None
    return float(final[:, 2].min()), None
