"""NumPy implementation of the simplex inner-loop kernels.

Mirrors ``_kernels.pyx`` call for call.  Both operate in place on a dense
tableau ``T`` (rows = basic variables, columns = structural + auxiliary
variables) and a reduced-cost vector ``d``.  Variable status codes are
``0`` at lower bound, ``1`` at upper bound, ``2`` basic.
"""

import numpy as np

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2

DROP_TOL = 1e-13


def pivot(T, d, r, q):
    """Gauss-Jordan pivot on ``T[r, q]``, updating ``d`` alongside."""
    prow = T[r] / T[r, q]
    prow[q] = 1.0
    nzc = np.flatnonzero(prow)
    col = T[:, q].copy()
    col[r] = 0.0
    nzr = np.flatnonzero(col)
    if nzr.size:
        block = np.ix_(nzr, nzc)
        sub = T[block] - np.outer(col[nzr], prow[nzc])
        sub[np.abs(sub) < DROP_TOL] = 0.0
        T[block] = sub
        T[nzr, q] = 0.0
    T[r] = prow
    dq = d[q]
    if dq != 0.0:
        upd = d[nzc] - dq * prow[nzc]
        upd[np.abs(upd) < DROP_TOL] = 0.0
        d[nzc] = upd
        d[q] = 0.0


def price(d, state, lb, ub, dtol, bland):
    """Primal entering variable, or -1 when no reduced cost improves."""
    up = (state == AT_LOWER) & (d < -dtol) & (ub > lb)
    down = (state == AT_UPPER) & (d > dtol)
    elig = up | down
    if not elig.any():
        return -1
    if bland:
        return int(np.flatnonzero(elig)[0])
    score = np.where(elig, np.abs(d), 0.0)
    return int(np.argmax(score))


def primal_ratio(col, direction, xB, lbB, ubB, basis, ptol, pivtol, bland):
    """Ratio test when the entering variable moves by ``direction``.

    Basic values change as ``xB - theta * direction * col``.  Infeasible
    basics (phase 1) block only when they reach the bound they violate.

    Returns:
        ``(row, theta, leaves_at_upper)``; ``row`` is -1 if nothing blocks.
    """
    a = col * direction
    dec = a > pivtol
    inc = a < -pivtol
    slack = np.full(a.shape, np.inf)
    to_upper = np.zeros(a.shape, dtype=bool)

    above = xB > ubB + ptol
    below = xB < lbB - ptol
    # decreasing basics
    m = dec & above
    slack[m] = xB[m] - ubB[m]
    to_upper[m] = True
    m = dec & ~above & ~below & np.isfinite(lbB)
    slack[m] = xB[m] - lbB[m]
    # increasing basics
    m = inc & below
    slack[m] = lbB[m] - xB[m]
    m = inc & ~below & ~above & np.isfinite(ubB)
    slack[m] = ubB[m] - xB[m]
    to_upper[m] = True

    limited = np.isfinite(slack)
    if not limited.any():
        return -1, np.inf, False
    idx = np.flatnonzero(limited)
    absa = np.abs(a[idx])
    s = np.maximum(slack[idx], 0.0)
    ratios = s / absa
    if bland:
        tmin = ratios.min()
        ties = idx[ratios <= tmin + 1e-12 * (1.0 + tmin)]
        r = int(ties[np.argmin(basis[ties])])
    else:
        bound = ((s + ptol) / absa).min()
        cand = ratios <= bound
        pick = np.argmax(np.where(cand, absa, -1.0))
        r = int(idx[pick])
    theta = max(slack[r], 0.0) / abs(a[r])
    return r, float(theta), bool(to_upper[r])


def dual_leaving(xB, lbB, ubB, basis, ptol, bland):
    """Row of the most infeasible basic variable, or -1 if primal feasible."""
    infeas = np.maximum(lbB - xB, xB - ubB)
    bad = infeas > ptol
    if not bad.any():
        return -1
    if bland:
        idx = np.flatnonzero(bad)
        return int(idx[np.argmin(basis[idx])])
    return int(np.argmax(np.where(bad, infeas, -1.0)))


def dual_ratio(row, d, state, lb, ub, increase, dtol, pivtol, bland):
    """Dual ratio test on tableau row ``row``.

    ``increase`` is true when the leaving basic sits below its lower bound.
    Returns the entering column or -1 (the row proves infeasibility).
    """
    movable = (state != BASIC) & (ub > lb)
    at_lower = state == AT_LOWER
    if increase:
        elig = movable & ((at_lower & (row < -pivtol)) | (~at_lower & (row > pivtol)))
    else:
        elig = movable & ((at_lower & (row > pivtol)) | (~at_lower & (row < -pivtol)))
    if not elig.any():
        return -1
    idx = np.flatnonzero(elig)
    absa = np.abs(row[idx])
    dj = np.where(at_lower[idx], d[idx], -d[idx])
    dj = np.maximum(dj, 0.0)
    ratios = dj / absa
    if bland:
        tmin = ratios.min()
        ties = ratios <= tmin + 1e-12 * (1.0 + tmin)
        return int(idx[np.flatnonzero(ties)[0]])
    bound = ((dj + dtol) / absa).min()
    cand = ratios <= bound
    pick = np.argmax(np.where(cand, absa, -1.0))
    return int(idx[pick])
