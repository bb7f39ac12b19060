"""Pure NumPy implementations of the hot kernels.

The compiled backend in ``_native.pyx`` mirrors these routines operation
for operation (same elementwise arithmetic, same tie-breaking) so that
both produce bit-identical pivot trajectories and distributions.  Any
semantic change here must be applied to both.
"""

from __future__ import annotations

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

RC_TOL = 1e-9       # reduced-cost threshold to keep improving
PIV_TOL = 1e-9      # smallest usable pivot magnitude
DEGEN_TOL = 1e-12   # step sizes at or below this count as degenerate
BLAND_AFTER = 200   # consecutive degenerate pivots before Bland's rule


def simplex_loop(T, rc, xB, basis, vstat, lb, ub, max_iter):
    """Bounded-variable primal simplex iterations, in place.

    ``T`` is the (m, n) tableau (basis inverse times the full column set),
    ``rc`` the maximization reduced costs, ``xB`` the basic variable
    values, ``basis`` the basic column per row, ``vstat`` the column
    status (0 at lower bound, 1 at upper bound, 2 basic).  Starts from a
    feasible basis and returns (status, iterations).
    """
    m, n = T.shape
    iters = 0
    degen_streak = 0
    bland = False
    movable = (ub - lb) > 0.0

    while iters < max_iter:
        # pricing
        if not bland:
            viol = np.where(
                (vstat == 0) & movable, rc,
                np.where((vstat == 1) & movable, -rc, -np.inf),
            )
            e = int(np.argmax(viol))
            if not viol[e] > RC_TOL:
                return OPTIMAL, iters
        else:
            cand = movable & (
                ((vstat == 0) & (rc > RC_TOL)) | ((vstat == 1) & (rc < -RC_TOL))
            )
            idx = np.nonzero(cand)[0]
            if idx.size == 0:
                return OPTIMAL, iters
            e = int(idx[0])

        d = 1.0 if vstat[e] == 0 else -1.0
        col = T[:, e].copy()
        a = d * col

        room = np.full(m, np.inf)
        pos = a > PIV_TOL
        neg = a < -PIV_TOL
        if np.any(pos):
            room[pos] = (xB[pos] - lb[basis[pos]]) / a[pos]
        if np.any(neg):
            room[neg] = (ub[basis[neg]] - xB[neg]) / (-a[neg])
        np.maximum(room, 0.0, out=room)

        rmin = room.min() if m else np.inf
        rng_e = ub[e] - lb[e]

        if rng_e <= rmin:
            if not np.isfinite(rng_e):
                return UNBOUNDED, iters
            # bound flip: entering variable crosses to its other bound
            xB -= col * (d * rng_e)
            vstat[e] = 1 - vstat[e]
            degen_streak = 0
            bland = False
            iters += 1
            continue
        if not np.isfinite(rmin):
            return UNBOUNDED, iters

        # leaving row: minimum ratio, ties by lowest basic variable index
        tied = np.nonzero(room == rmin)[0]
        r = int(tied[np.argmin(basis[tied])])

        step = rmin
        delta = d * step
        anchor = lb[e] if vstat[e] == 0 else ub[e]
        xB -= col * delta
        lv = basis[r]
        vstat[lv] = 0 if d * col[r] > 0.0 else 1

        piv = T[r, e]
        prow = T[r, :] / piv
        T -= col[:, None] * prow[None, :]
        T[r, :] = prow
        T[:, e] = 0.0
        T[r, e] = 1.0
        rc_e = rc[e]
        rc -= rc_e * prow
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


def pb_convolve(probs):
    """PMF of a sum of independent Bernoulli variables.

    O(m^2) convolution: fold each success probability into the running
    pmf.  Returns an array of length m + 1.
    """
    probs = np.asarray(probs, dtype=np.float64)
    m = probs.shape[0]
    pmf = np.zeros(m + 1)
    pmf[0] = 1.0
    for k in range(m):
        p = probs[k]
        q = 1.0 - p
        pmf[1:k + 2] = pmf[1:k + 2] * q + pmf[0:k + 1] * p
        pmf[0] = pmf[0] * q
    return pmf
