# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simplex inner-loop kernels.

Same contract as ``_kernels_py``.  The pivot skips zero entries of the
pivot row and column, which keeps the cost proportional to the tableau's
fill rather than its size.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY, isfinite

cnp.import_array()

DEF AT_LOWER = 0
DEF AT_UPPER = 1
DEF BASIC = 2
DEF DROP_TOL = 1e-13


def pivot(double[:, ::1] T, double[::1] d, Py_ssize_t r, Py_ssize_t q):
    cdef Py_ssize_t m = T.shape[0], n = T.shape[1]
    cdef Py_ssize_t i, k, j, nnz = 0
    cdef double piv = T[r, q]
    cdef double f, v
    cdef cnp.ndarray[cnp.intp_t, ndim=1] cols_arr = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[::1] cols = cols_arr

    for k in range(n):
        if k == q:
            T[r, k] = 1.0
        else:
            v = T[r, k]
            if v != 0.0:
                T[r, k] = v / piv
        if T[r, k] != 0.0:
            cols[nnz] = k
            nnz += 1

    for i in range(m):
        if i == r:
            continue
        f = T[i, q]
        if f == 0.0:
            continue
        for j in range(nnz):
            k = cols[j]
            v = T[i, k] - f * T[r, k]
            if fabs(v) < DROP_TOL:
                v = 0.0
            T[i, k] = v
        T[i, q] = 0.0

    f = d[q]
    if f != 0.0:
        for j in range(nnz):
            k = cols[j]
            v = d[k] - f * T[r, k]
            if fabs(v) < DROP_TOL:
                v = 0.0
            d[k] = v
        d[q] = 0.0


def price(double[::1] d, signed char[::1] state, double[::1] lb, double[::1] ub,
          double dtol, bint bland):
    cdef Py_ssize_t n = d.shape[0], j, best = -1
    cdef double score, best_score = -1.0
    cdef bint elig
    for j in range(n):
        if state[j] == AT_LOWER:
            elig = d[j] < -dtol and ub[j] > lb[j]
        elif state[j] == AT_UPPER:
            elig = d[j] > dtol
        else:
            elig = False
        if not elig:
            continue
        if bland:
            return j
        score = fabs(d[j])
        if score > best_score:
            best_score = score
            best = j
    return best


def primal_ratio(double[:] col, double direction, double[::1] xB, double[::1] lbB,
                 double[::1] ubB, cnp.intp_t[::1] basis, double ptol, double pivtol,
                 bint bland):
    cdef Py_ssize_t m = xB.shape[0], i, r = -1
    cdef double a, s, v, absa, ratio, bound = INFINITY, tmin = INFINITY, best_a = -1.0
    cdef bint above, below
    cdef cnp.ndarray[double, ndim=1] slack_arr = np.full(m, np.inf)
    cdef cnp.ndarray[cnp.npy_bool, ndim=1] up_arr = np.zeros(m, dtype=np.bool_)
    cdef double[::1] slack = slack_arr
    cdef cnp.npy_bool[::1] to_upper = up_arr

    for i in range(m):
        a = col[i] * direction
        above = xB[i] > ubB[i] + ptol
        below = xB[i] < lbB[i] - ptol
        if a > pivtol:
            if above:
                slack[i] = xB[i] - ubB[i]
                to_upper[i] = True
            elif not below and isfinite(lbB[i]):
                slack[i] = xB[i] - lbB[i]
        elif a < -pivtol:
            if below:
                slack[i] = lbB[i] - xB[i]
            elif not above and isfinite(ubB[i]):
                slack[i] = ubB[i] - xB[i]
                to_upper[i] = True

    for i in range(m):
        if not isfinite(slack[i]):
            continue
        absa = fabs(col[i] * direction)
        s = slack[i] if slack[i] > 0.0 else 0.0
        ratio = s / absa
        if ratio < tmin:
            tmin = ratio
        v = (s + ptol) / absa
        if v < bound:
            bound = v
    if not isfinite(tmin):
        return -1, np.inf, False

    for i in range(m):
        if not isfinite(slack[i]):
            continue
        absa = fabs(col[i] * direction)
        s = slack[i] if slack[i] > 0.0 else 0.0
        ratio = s / absa
        if bland:
            if ratio <= tmin + 1e-12 * (1.0 + tmin):
                if r < 0 or basis[i] < basis[r]:
                    r = i
        elif ratio <= bound and absa > best_a:
            best_a = absa
            r = i
    s = slack[r] if slack[r] > 0.0 else 0.0
    return r, s / fabs(col[r] * direction), bool(to_upper[r])


def dual_leaving(double[::1] xB, double[::1] lbB, double[::1] ubB, cnp.intp_t[::1] basis,
                 double ptol, bint bland):
    cdef Py_ssize_t m = xB.shape[0], i, r = -1
    cdef double inf_lo, inf_hi, v, best = -1.0
    for i in range(m):
        inf_lo = lbB[i] - xB[i]
        inf_hi = xB[i] - ubB[i]
        v = inf_lo if inf_lo > inf_hi else inf_hi
        if not v > ptol:
            continue
        if bland:
            if r < 0 or basis[i] < basis[r]:
                r = i
        elif v > best:
            best = v
            r = i
    return r


def dual_ratio(double[::1] row, double[::1] d, signed char[::1] state, double[::1] lb,
               double[::1] ub, bint increase, double dtol, double pivtol, bint bland):
    cdef Py_ssize_t n = row.shape[0], j, q = -1
    cdef double a, dj, absa, ratio, tmin = INFINITY, bound = INFINITY, best_a = -1.0
    cdef bint lower, elig

    for j in range(n):
        if state[j] == BASIC or not ub[j] > lb[j]:
            continue
        a = row[j]
        lower = state[j] == AT_LOWER
        if increase:
            elig = (lower and a < -pivtol) or (not lower and a > pivtol)
        else:
            elig = (lower and a > pivtol) or (not lower and a < -pivtol)
        if not elig:
            continue
        dj = d[j] if lower else -d[j]
        if dj < 0.0:
            dj = 0.0
        absa = fabs(a)
        ratio = dj / absa
        if ratio < tmin:
            tmin = ratio
        ratio = (dj + dtol) / absa
        if ratio < bound:
            bound = ratio
    if not isfinite(tmin):
        return -1

    for j in range(n):
        if state[j] == BASIC or not ub[j] > lb[j]:
            continue
        a = row[j]
        lower = state[j] == AT_LOWER
        if increase:
            elig = (lower and a < -pivtol) or (not lower and a > pivtol)
        else:
            elig = (lower and a > pivtol) or (not lower and a < -pivtol)
        if not elig:
            continue
        dj = d[j] if lower else -d[j]
        if dj < 0.0:
            dj = 0.0
        absa = fabs(a)
        ratio = dj / absa
        if bland:
            if ratio <= tmin + 1e-12 * (1.0 + tmin):
                return j
        elif ratio <= bound and absa > best_a:
            best_a = absa
            q = j
    return q
