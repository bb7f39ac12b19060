# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels.

Mirrors ``pure.py`` operation for operation; both backends must produce
bit-identical results.  Compiled with -ffp-contract=off so no fused
multiply-adds diverge from NumPy's elementwise arithmetic.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

cdef double RC_TOL = 1e-9
cdef double PIV_TOL = 1e-9
cdef double DEGEN_TOL = 1e-12
cdef int BLAND_AFTER = 200

cdef double INF = float("inf")


def simplex_loop(double[:, ::1] T, double[::1] rc, double[::1] xB,
                 long long[::1] basis, signed char[::1] vstat,
                 double[::1] lb, double[::1] ub, long long max_iter):
    """Bounded-variable primal simplex iterations, in place."""
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t n = T.shape[1]
    cdef long long iters = 0
    cdef int degen_streak = 0
    cdef bint bland = False

    cdef Py_ssize_t e, i, j, r
    cdef long long lv, bi
    cdef double best, v, d, aa, roomi, rmin, rng_e, step, delta
    cdef double anchor, piv, rc_e, colr, q

    cdef cnp.ndarray[cnp.float64_t, ndim=1] col_arr = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prow_arr = np.empty(n)
    cdef double[::1] col = col_arr
    cdef double[::1] prow = prow_arr

    while iters < max_iter:
        # pricing
        e = -1
        if not bland:
            best = -INF
            for j in range(n):
                if ub[j] - lb[j] > 0.0:
                    if vstat[j] == 0:
                        v = rc[j]
                    elif vstat[j] == 1:
                        v = -rc[j]
                    else:
                        continue
                    if v > best:
                        best = v
                        e = j
            if e < 0 or not best > RC_TOL:
                return OPTIMAL, iters
        else:
            for j in range(n):
                if ub[j] - lb[j] > 0.0:
                    if (vstat[j] == 0 and rc[j] > RC_TOL) or \
                       (vstat[j] == 1 and rc[j] < -RC_TOL):
                        e = j
                        break
            if e < 0:
                return OPTIMAL, iters

        d = 1.0 if vstat[e] == 0 else -1.0
        for i in range(m):
            col[i] = T[i, e]

        # ratio test: minimum room, ties by lowest basic variable index
        rmin = INF
        r = -1
        lv = -1
        for i in range(m):
            aa = d * col[i]
            if aa > PIV_TOL:
                bi = basis[i]
                if lb[bi] == -INF:
                    continue
                roomi = (xB[i] - lb[bi]) / aa
            elif aa < -PIV_TOL:
                bi = basis[i]
                if ub[bi] == INF:
                    continue
                roomi = (ub[bi] - xB[i]) / (-aa)
            else:
                continue
            if roomi < 0.0:
                roomi = 0.0
            if roomi < rmin:
                rmin = roomi
                r = i
                lv = basis[i]
            elif roomi == rmin and r >= 0 and basis[i] < lv:
                r = i
                lv = basis[i]

        rng_e = ub[e] - lb[e]

        if rng_e <= rmin:
            if rng_e == INF:
                return UNBOUNDED, iters
            delta = d * rng_e
            for i in range(m):
                xB[i] = xB[i] - col[i] * delta
            vstat[e] = 1 - vstat[e]
            degen_streak = 0
            bland = False
            iters += 1
            continue
        if rmin == INF:
            return UNBOUNDED, iters

        step = rmin
        delta = d * step
        anchor = lb[e] if vstat[e] == 0 else ub[e]
        for i in range(m):
            xB[i] = xB[i] - col[i] * delta
        lv = basis[r]
        vstat[lv] = 0 if d * col[r] > 0.0 else 1

        piv = T[r, e]
        for j in range(n):
            prow[j] = T[r, j] / piv
        for i in range(m):
            colr = col[i]
            if colr != 0.0:
                for j in range(n):
                    T[i, j] = T[i, j] - colr * prow[j]
        for j in range(n):
            T[r, j] = prow[j]
        for i in range(m):
            T[i, e] = 0.0
        T[r, e] = 1.0
        rc_e = rc[e]
        for j in range(n):
            rc[j] = rc[j] - rc_e * prow[j]
        rc[e] = 0.0

        basis[r] = e
        vstat[e] = 2
        xB[r] = anchor + delta
        iters += 1

        if step <= DEGEN_TOL:
            degen_streak += 1
            if degen_streak > BLAND_AFTER:
                bland = True
        else:
            degen_streak = 0
            bland = False

    return ITERATION_LIMIT, iters


def pb_convolve(double[::1] probs):
    """PMF of a sum of independent Bernoulli variables (length m + 1)."""
    cdef Py_ssize_t m = probs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pmf_arr = np.zeros(m + 1)
    cdef double[::1] pmf = pmf_arr
    cdef Py_ssize_t k, j
    cdef double p, q
    pmf[0] = 1.0
    for k in range(m):
        p = probs[k]
        q = 1.0 - p
        for j in range(k + 1, 0, -1):
            pmf[j] = pmf[j] * q + pmf[j - 1] * p
        pmf[0] = pmf[0] * q
    return pmf_arr
