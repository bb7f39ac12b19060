"""Self-contained linear and mixed-integer programming.

The LP core is a bounded-variable two-phase primal simplex whose pivot
loop lives in :mod:`aavr._kernels` (compiled when available).  Integer
programs are handled by best-first branch and bound with two branching
rules: branching on unit-coefficient sums of integer variables taken
from the constraint rows (which closes assignment-style ties quickly),
and classic most-fractional variable branching as the fallback.

Everything here is deterministic: ties in pricing, ratio tests, branch
selection, and incumbent updates are broken by fixed index rules, so a
given program always produces the same solution.
"""

from __future__ import annotations

import heapq
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

# statuses shared by solve_lp / solve_milp
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NODE_BUDGET = "node_budget"

_FEAS_TOL = 1e-7   # feasibility recheck against the original data
_INT_TOL = 1e-7    # how far from an integer a value may sit
_GAP_TOL = 1e-9    # absolute bound gap below which nodes are pruned

_RELATIONS = ("<=", "=", ">=")


@dataclass
class LinearProgram:
    """A linear (or mixed-integer) program in row form.

    Rows are ``A @ x <relation> b`` with relations drawn from ``<=``,
    ``=`` and ``>=``; variables carry explicit lower/upper bounds (use
    ``-inf``/``inf`` for unbounded sides) and a per-variable integrality
    flag.  ``sense`` is ``"max"`` or ``"min"``.
    """

    objective: np.ndarray
    A: np.ndarray
    relations: list
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integrality: np.ndarray | None = None
    sense: str = "max"
    variable_names: list | None = None
    constraint_names: list | None = None
    name: str = "problem"

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=np.float64)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        self.b = np.asarray(self.b, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        m, n = self.A.shape
        if self.objective.shape != (n,):
            raise ValueError(f"objective has {self.objective.shape} entries, expected {n}")
        if self.b.shape != (m,):
            raise ValueError(f"rhs has {self.b.shape} entries, expected {m}")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound arrays must have one entry per variable")
        self.relations = ["=" if r == "==" else r for r in self.relations]
        if len(self.relations) != m:
            raise ValueError("one relation per constraint row required")
        bad = [r for r in self.relations if r not in _RELATIONS]
        if bad:
            raise ValueError(f"unknown relation(s) {sorted(set(bad))!r}")
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if self.integrality is None:
            self.integrality = np.zeros(n, dtype=bool)
        else:
            spec = list(self.integrality)
            if len(spec) != n:
                raise ValueError("integrality mask must have one entry per variable")
            mask = np.zeros(n, dtype=bool)
            for j, flag in enumerate(spec):
                if flag in ("binary", "b"):
                    mask[j] = True
                    self.lower[j] = max(self.lower[j], 0.0)
                    self.upper[j] = min(self.upper[j], 1.0)
                elif flag in ("integer", "i") or (not isinstance(flag, str) and flag):
                    mask[j] = True
                elif flag in ("continuous", "c") or not flag:
                    pass
                else:
                    raise ValueError(f"unknown integrality flag {flag!r}")
            self.integrality = mask
        if not np.all(np.isfinite(self.A)):
            raise ValueError("constraint matrix contains non-finite entries")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("rhs contains non-finite entries")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective contains non-finite entries")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("variable bounds contain NaN")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("variable bounds leave an empty interval")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise ValueError(f"variable {j} has lower bound above upper bound")
        if self.variable_names is not None and len(self.variable_names) != n:
            raise ValueError("one variable name per column required")
        if self.constraint_names is not None and len(self.constraint_names) != m:
            raise ValueError("one constraint name per row required")

    @property
    def n_variables(self) -> int:
        return self.A.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]


@dataclass
class Solution:
    """Result of an LP or MILP solve."""

    status: str
    values: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    nodes: int = 0

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _Standardized:
    """Maximization form with <=/= rows and a finite anchor per column.

    Free variables (both bounds infinite) are split into a difference of
    two nonnegative columns; every other column keeps its identity, so
    bound tightening during branch and bound applies directly.
    """

    def __init__(self, lp: LinearProgram):
        sign = 1.0 if lp.sense == "max" else -1.0
        n = lp.n_variables
        A = lp.A.copy()
        b = lp.b.copy()
        eq = np.zeros(lp.n_constraints, dtype=bool)
        for i, rel in enumerate(lp.relations):
            if rel == ">=":
                A[i] = -A[i]
                b[i] = -b[i]
            elif rel == "=":
                eq[i] = True
        c = sign * lp.objective
        lb = lp.lower.copy()
        ub = lp.upper.copy()

        free = np.flatnonzero(~np.isfinite(lb) & ~np.isfinite(ub))
        self.split_of = {}
        if free.size:
            extra_A = -A[:, free]
            extra_c = -c[free]
            A = np.hstack([A, extra_A])
            c = np.concatenate([c, extra_c])
            lb = np.concatenate([lb, np.zeros(free.size)])
            ub = np.concatenate([ub, np.full(free.size, np.inf)])
            for k, j in enumerate(free):
                lb[j] = 0.0
                self.split_of[int(j)] = n + k

        self.A = A
        self.b = b
        self.eq = eq
        self.c = c
        self.lb = lb
        self.ub = ub
        self.n_orig = n
        self.sign = sign

    def to_original(self, x_std: np.ndarray) -> np.ndarray:
        x = x_std[: self.n_orig].copy()
        for j, k in self.split_of.items():
            x[j] = x_std[j] - x_std[k]
        return x


def _solve_relaxation(std: _Standardized, lb_node, ub_node,
                      extra_rows=None, extra_rhs=None, max_iter=None):
    """Two-phase simplex on standardized data with node-level bounds.

    ``extra_rows``/``extra_rhs`` are additional <= rows (used for sum
    branches).  Returns (status, x_std, objective, iterations).
    """
    kern = _kernels.active()
    A = std.A
    b = std.b
    eq = std.eq
    if extra_rows is not None and len(extra_rows):
        A = np.vstack([A, np.asarray(extra_rows, dtype=np.float64)])
        b = np.concatenate([b, np.asarray(extra_rhs, dtype=np.float64)])
        eq = np.concatenate([eq, np.zeros(len(extra_rows), dtype=bool)])
    m, ns = A.shape

    # anchor every nonbasic column at a finite bound
    at_upper = ~np.isfinite(lb_node)
    if np.any(at_upper & ~np.isfinite(ub_node)):
        raise RuntimeError("column with no finite bound survived standardization")
    x0 = np.where(at_upper, ub_node, lb_node)
    resid = b - A @ x0

    # crash: on each equality row, seat the lowest-index column that is
    # zero in every other equality row and lands inside its bounds
    eq_rows = np.flatnonzero(eq)
    eq_nnz = (A[eq_rows] != 0.0).sum(axis=0) if eq_rows.size else np.zeros(ns)
    crash_rows, crash_cols = [], []
    used = set()
    for i in eq_rows:
        row = A[i]
        for j in np.flatnonzero(row != 0.0):
            j = int(j)
            if j in used or eq_nnz[j] != 1:
                continue
            v = x0[j] + resid[i] / row[j]
            if lb_node[j] <= v <= ub_node[j]:
                crash_rows.append(int(i))
                crash_cols.append(j)
                used.add(j)
                x0[j] = v
                break
    resid = b - A @ x0
    crash_set = dict(zip(crash_rows, crash_cols))

    # remaining rows: slack basic when feasible, artificial otherwise
    n_slack = m
    art_rows, art_sign = [], []
    basis = np.empty(m, dtype=np.int64)
    xB = np.empty(m, dtype=np.float64)
    for i in range(m):
        if i in crash_set:
            basis[i] = crash_set[i]
            xB[i] = x0[crash_set[i]]
        elif eq[i]:
            if resid[i] == 0.0:
                basis[i] = ns + i          # fixed slack, basic at zero
                xB[i] = 0.0
            else:
                art_rows.append(i)
                art_sign.append(1.0 if resid[i] > 0 else -1.0)
                basis[i] = ns + n_slack + len(art_rows) - 1
                xB[i] = abs(resid[i])
        else:
            if resid[i] >= 0.0:
                basis[i] = ns + i
                xB[i] = resid[i]
            else:
                art_rows.append(i)
                art_sign.append(-1.0)
                basis[i] = ns + n_slack + len(art_rows) - 1
                xB[i] = -resid[i]

    n_art = len(art_rows)
    n_tot = ns + n_slack + n_art
    T = np.zeros((m, n_tot))
    T[:, :ns] = A
    T[np.arange(m), ns + np.arange(m)] = 1.0
    for k, (i, s) in enumerate(zip(art_rows, art_sign)):
        T[i, ns + n_slack + k] = s

    for i, j in crash_set.items():
        T[i] /= A[i, j]
    for i, s in zip(art_rows, art_sign):
        if s < 0:
            T[i] *= -1.0

    if crash_rows:
        others = np.setdiff1d(np.arange(m), np.array(crash_rows), assume_unique=False)
        if others.size:
            M = T[np.ix_(others, crash_cols)].copy()
            T[others] -= M @ T[crash_rows]
            T[np.ix_(others, crash_cols)] = 0.0
        T[np.ix_(crash_rows, crash_cols)] = np.eye(len(crash_rows))

    lb_all = np.concatenate([lb_node, np.where(eq, 0.0, 0.0), np.zeros(n_art)])
    ub_all = np.concatenate([ub_node, np.where(eq, 0.0, np.inf), np.full(n_art, np.inf)])
    vstat = np.zeros(n_tot, dtype=np.int8)
    vstat[:ns][at_upper] = 1
    vstat[basis] = 2

    T = np.ascontiguousarray(T)
    xB = np.ascontiguousarray(xB)
    if max_iter is None:
        max_iter = 50 * (m + n_tot) + 10_000
    iters = 0

    if n_art:
        c1 = np.zeros(n_tot)
        c1[ns + n_slack:] = -1.0
        rc1 = np.ascontiguousarray(c1 - c1[basis] @ T)
        st, it1 = kern.simplex_loop(T, rc1, xB, basis, vstat, lb_all, ub_all, max_iter)
        iters += it1
        if st == _kernels.pure.ITERATION_LIMIT:
            return ITERATION_LIMIT, None, None, iters
        if st == _kernels.pure.UNBOUNDED:
            raise RuntimeError("phase 1 reported unbounded; numerical trouble")
        art_first = ns + n_slack
        ph1 = float(xB[basis >= art_first].sum())
        if ph1 > _FEAS_TOL:
            return INFEASIBLE, None, None, iters
        # drive surviving zero-level artificials out of the basis
        for r in np.flatnonzero(basis >= art_first):
            cand = np.flatnonzero(np.abs(T[r, :art_first]) > _kernels.pure.PIV_TOL)
            if cand.size == 0:
                continue  # redundant row; artificial stays basic at zero
            movable = cand[ub_all[cand] > lb_all[cand]]
            j = int(movable[0]) if movable.size else int(cand[0])
            piv = T[r, j]
            delta = xB[r] / piv
            anchor = lb_all[j] if vstat[j] == 0 else ub_all[j]
            col = T[:, j].copy()
            old = basis[r]
            xB -= col * delta
            prow = T[r] / piv
            T -= col[:, None] * prow[None, :]
            T[r] = prow
            T[:, j] = 0.0
            T[r, j] = 1.0
            basis[r] = j
            vstat[old] = 0
            vstat[j] = 2
            xB[r] = anchor + delta
        lb_all[art_first:] = 0.0
        ub_all[art_first:] = 0.0

    c2 = np.zeros(n_tot)
    c2[:ns] = std.c
    rc2 = np.ascontiguousarray(c2 - c2[basis] @ T)
    st, it2 = kern.simplex_loop(T, rc2, xB, basis, vstat, lb_all, ub_all, max_iter)
    iters += it2
    if st == _kernels.pure.ITERATION_LIMIT:
        return ITERATION_LIMIT, None, None, iters
    if st == _kernels.pure.UNBOUNDED:
        return UNBOUNDED, None, None, iters

    x_all = lb_all.copy()
    up = vstat == 1
    x_all[up] = ub_all[up]
    x_all[basis] = xB
    x_std = x_all[:ns]
    return OPTIMAL, x_std, float(std.c @ x_std), iters


def _max_violation(lp: LinearProgram, x: np.ndarray) -> float:
    Ax = lp.A @ x
    worst = 0.0
    for i, rel in enumerate(lp.relations):
        if rel == "<=":
            worst = max(worst, Ax[i] - lp.b[i])
        elif rel == ">=":
            worst = max(worst, lp.b[i] - Ax[i])
        else:
            worst = max(worst, abs(Ax[i] - lp.b[i]))
    worst = max(worst, float(np.max(lp.lower - x, initial=0.0)))
    worst = max(worst, float(np.max(x - lp.upper, initial=0.0)))
    return worst


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> Solution:
    """Solve the continuous relaxation of ``lp`` (integrality ignored)."""
    std = _Standardized(lp)
    status, x_std, _, iters = _solve_relaxation(std, std.lb, std.ub, max_iter=max_iter)
    if status != OPTIMAL:
        return Solution(status=status, iterations=iters)
    x = std.to_original(x_std)
    x = np.clip(x, lp.lower, lp.upper)
    viol = _max_violation(lp, x)
    if viol > _FEAS_TOL:
        raise RuntimeError(f"simplex returned an infeasible point (violation {viol:.3e})")
    return Solution(status=OPTIMAL, values=x,
                    objective_value=float(lp.objective @ x), iterations=iters)


def _sum_branch_candidates(lp: LinearProgram):
    """Constraint rows that are plain sums of two or more integer variables."""
    out, seen = [], set()
    for i in range(lp.n_constraints):
        support = np.flatnonzero(lp.A[i] != 0.0)
        if support.size < 2:
            continue
        if not np.all(lp.integrality[support]):
            continue
        if not np.all(lp.A[i, support] == 1.0):
            continue
        key = tuple(int(j) for j in support)
        if key in seen:
            continue
        seen.add(key)
        out.append(np.array(key, dtype=np.int64))
    return out


def _partition_rows(lp: LinearProgram):
    """Equality rows that pick exactly k variables out of a unit-sum group.

    Returns ``(support, k)`` pairs for rows of the form
    ``sum(x[j] for j in support) == k`` with all-ones coefficients over
    integer variables and a small nonnegative integer rhs.  Rounding the
    relaxation with plain nearest-integer destroys such rows (two halves
    both round down), so the incumbent heuristic repairs them by keeping
    the k largest entries instead.
    """
    out = []
    for i in range(lp.n_constraints):
        if lp.relations[i] != "=":
            continue
        support = np.flatnonzero(lp.A[i] != 0.0)
        if support.size < 2:
            continue
        if not np.all(lp.integrality[support]):
            continue
        if not np.all(lp.A[i, support] == 1.0):
            continue
        k = lp.b[i]
        if k < 0.0 or abs(k - round(k)) > _INT_TOL:
            continue
        out.append((support, int(round(k))))
    return out


class _Node:
    __slots__ = ("lb", "ub", "rows", "rhs", "x", "bound", "depth")

    def __init__(self, lb, ub, rows, rhs, x, bound, depth):
        self.lb = lb
        self.ub = ub
        self.rows = rows
        self.rhs = rhs
        self.x = x
        self.bound = bound
        self.depth = depth


def solve_milp(lp: LinearProgram, max_iter: int | None = None,
               node_budget: int = 200_000) -> Solution:
    """Branch-and-bound solve of a mixed-integer program.

    Nodes are explored best bound first (ties: deeper, then newer).  At
    fractional nodes a rounding heuristic fixes the integer variables to
    the nearest integers, repairs any exactly-k unit-sum equality rows
    by keeping their k largest entries, and re-solves for the continuous
    completion, which typically produces an early incumbent.  Bound
    pruning uses an absolute gap of 1e-9, so the returned solution is
    exact for the integer programs used here.  If the node budget is
    exhausted the status is ``node_budget`` (with the best incumbent,
    if any).
    """
    int_cols = np.flatnonzero(lp.integrality)
    if int_cols.size == 0:
        return solve_lp(lp, max_iter=max_iter)
    both_inf = ~np.isfinite(lp.lower[int_cols]) & ~np.isfinite(lp.upper[int_cols])
    if np.any(both_inf):
        raise ValueError("integer variables need at least one finite bound")

    std = _Standardized(lp)
    sums = _sum_branch_candidates(lp)
    partitions = [(s, k) for s, k in _partition_rows(lp)
                  if np.all(lp.lower[s] >= 0.0) and np.all(lp.upper[s] <= 1.0)]
    pos_of = np.zeros(lp.n_variables, dtype=np.int64)
    pos_of[int_cols] = np.arange(int_cols.size)
    total_iters = 0
    nodes_created = 0

    def relax(lb, ub, rows, rhs):
        nonlocal total_iters
        status, x_std, obj, iters = _solve_relaxation(
            std, lb, ub, extra_rows=rows, extra_rhs=rhs, max_iter=max_iter)
        total_iters += iters
        if status == ITERATION_LIMIT:
            raise RuntimeError("simplex iteration limit hit inside branch and bound")
        if status == UNBOUNDED:
            raise ValueError("relaxation is unbounded; cannot branch")
        if status != OPTIMAL:
            return None
        return std.to_original(x_std), obj

    root = relax(std.lb, std.ub, [], [])
    if root is None:
        return Solution(status=INFEASIBLE, iterations=total_iters, nodes=1)
    nodes_created = 1

    best_x = None
    best_val = -math.inf
    tried_patterns = set()
    heap = []
    counter = 0

    def fractional(x):
        vals = x[int_cols]
        frac = np.abs(vals - np.round(vals))
        return frac > _INT_TOL

    def consider(x, val):
        nonlocal best_x, best_val
        if val > best_val + _GAP_TOL:
            best_x = x.copy()
            best_val = val

    def repair_partitions(vals, node_x, lb_node, ub_node):
        """Re-round each partition row to keep exactly its k largest entries."""
        for support, k in partitions:
            v = node_x[support]
            forced = lb_node[support] >= 0.5
            allowed = ub_node[support] >= 0.5
            if forced.sum() > k or np.any(forced & ~allowed):
                continue  # node box contradicts the row; the LP will say so
            order = np.lexsort((support, -v, ~forced))
            picked = [idx for idx in order if allowed[idx]][:k]
            if len(picked) < k:
                continue
            sel = np.zeros(support.size)
            sel[picked] = 1.0
            vals[pos_of[support]] = sel

    def try_pattern(vals, node_x, lb_node, ub_node):
        nonlocal nodes_created
        vals = np.clip(vals, lb_node[int_cols], ub_node[int_cols])
        if partitions:
            repair_partitions(vals, node_x, lb_node, ub_node)
        if np.max(np.abs(vals - np.round(vals)), initial=0.0) > _INT_TOL:
            return False   # clipping landed between integers; no pattern here
        key = tuple(vals.tolist())
        if key in tried_patterns:
            return False
        tried_patterns.add(key)
        lb_h = std.lb.copy()
        ub_h = std.ub.copy()
        lb_h[int_cols] = vals
        ub_h[int_cols] = vals
        nodes_created += 1
        got = relax(lb_h, ub_h, [], [])
        if got is None:
            return False
        consider(got[0], got[1])
        return True

    def dive(node_x, lb_node, ub_node):
        """Depth-first plunge for an incumbent when rounding keeps failing.

        Fixes the most fractional integer to its nearest value, re-solves
        the relaxation, and repeats; an infeasible fix is retried once
        with the opposite rounding.  Each LP counts against the node
        budget, so the plunge is abandoned rather than overrunning it.
        """
        nonlocal nodes_created
        lb_d = lb_node.copy()
        ub_d = ub_node.copy()
        x_cur = node_x
        for _ in range(int_cols.size):
            vals = x_cur[int_cols]
            frac = np.abs(vals - np.round(vals))
            if float(np.max(frac, initial=0.0)) <= _INT_TOL:
                try_pattern(np.round(vals), x_cur, lb_d, ub_d)
                return
            j = int(int_cols[np.argmax(frac)])
            v = float(x_cur[j])
            near = float(np.round(v))
            other = float(np.floor(v)) if near > v else float(np.ceil(v))
            moved = False
            for t in dict.fromkeys(
                    (min(max(c, lb_d[j]), ub_d[j]) for c in (near, other))):
                if abs(t - round(t)) > _INT_TOL:
                    continue   # the node box holds no integer on this side
                if nodes_created >= node_budget:
                    return
                lb_t, ub_t = lb_d.copy(), ub_d.copy()
                lb_t[j] = ub_t[j] = t
                nodes_created += 1
                got = relax(lb_t, ub_t, [], [])
                if got is not None:
                    lb_d, ub_d, x_cur = lb_t, ub_t, got[0]
                    moved = True
                    break
            if not moved:
                return

    def heuristic(node_x, lb_node, ub_node):
        """Fix the integers to a rounding of the node point and re-solve.

        Tries nearest-integer first; if that completion is infeasible
        (packing rows can overfill) falls back to rounding down, which
        a monotone <= structure always accepts.  Unit-sum equality rows
        are repaired in both patterns.  If neither pattern has produced
        any incumbent yet, a bounded dive hunts for one.
        """
        if not try_pattern(np.round(node_x[int_cols]), node_x, lb_node, ub_node):
            try_pattern(np.floor(node_x[int_cols] + _INT_TOL),
                        node_x, lb_node, ub_node)
        if best_x is None:
            dive(node_x, lb_node, ub_node)

    root_node = _Node(std.lb.copy(), std.ub.copy(), [], [], root[0], root[1], 0)
    heapq.heappush(heap, (-root_node.bound, -root_node.depth, -counter, root_node))
    budget_hit = False

    while heap:
        _, _, _, node = heapq.heappop(heap)
        if best_x is not None and node.bound <= best_val + _GAP_TOL:
            continue
        frac_mask = fractional(node.x)
        if not np.any(frac_mask):
            consider(node.x, node.bound)
            continue

        heuristic(node.x, node.lb, node.ub)
        if best_x is not None and node.bound <= best_val + _GAP_TOL:
            continue

        # branch: a fractional unit sum of integer variables if one
        # exists, otherwise the most fractional single variable
        branch_sum = None
        best_frac = _INT_TOL
        for S in sums:
            v = float(node.x[S].sum())
            f = abs(v - round(v))
            if f > best_frac:
                best_frac = f
                branch_sum = (S, v)
        children = []
        if branch_sum is not None:
            S, v = branch_sum
            row = np.zeros(std.A.shape[1])
            row[S] = 1.0
            lo = math.floor(v)
            children.append((node.lb, node.ub, node.rows + [row], node.rhs + [float(lo)]))
            children.append((node.lb, node.ub, node.rows + [-row], node.rhs + [-float(lo + 1)]))
        else:
            vals = node.x[int_cols]
            frac = np.abs(vals - np.round(vals))
            frac[~frac_mask] = -1.0
            j = int(int_cols[np.argmax(frac)])
            v = float(node.x[j])
            lb_lo, ub_lo = node.lb.copy(), node.ub.copy()
            ub_lo[j] = min(ub_lo[j], math.floor(v))
            lb_hi, ub_hi = node.lb.copy(), node.ub.copy()
            lb_hi[j] = max(lb_hi[j], math.floor(v) + 1.0)
            children.append((lb_lo, ub_lo, node.rows, node.rhs))
            children.append((lb_hi, ub_hi, node.rows, node.rhs))

        for lb_c, ub_c, rows_c, rhs_c in children:
            if np.any(lb_c > ub_c):
                continue
            nodes_created += 1
            if nodes_created > node_budget:
                budget_hit = True
                break
            got = relax(lb_c, ub_c, rows_c, rhs_c)
            if got is None:
                continue
            x_c, bound_c = got
            if best_x is not None and bound_c <= best_val + _GAP_TOL:
                continue
            counter += 1
            child = _Node(lb_c, ub_c, rows_c, rhs_c, x_c, bound_c, node.depth + 1)
            heapq.heappush(heap, (-bound_c, -child.depth, -counter, child))
        if budget_hit:
            break

    status = NODE_BUDGET if budget_hit else OPTIMAL
    if best_x is None:
        return Solution(status=NODE_BUDGET if budget_hit else INFEASIBLE,
                        iterations=total_iters, nodes=nodes_created)

    x = best_x
    drift = np.max(np.abs(x[int_cols] - np.round(x[int_cols])), initial=0.0)
    if drift > _INT_TOL:
        raise RuntimeError(f"incumbent integer drift {drift:.3e} exceeds tolerance")
    x[int_cols] = np.round(x[int_cols])
    x = np.clip(x, lp.lower, lp.upper)
    viol = _max_violation(lp, x)
    if viol > _FEAS_TOL:
        raise RuntimeError(f"rounded incumbent infeasible (violation {viol:.3e})")
    return Solution(status=status, values=x,
                    objective_value=float(lp.objective @ x),
                    iterations=total_iters, nodes=nodes_created)


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def _terms(coefs, names, cols) -> str:
    parts = []
    for j in cols:
        c = coefs[j]
        if c == 0.0:
            continue
        lead = "-" if c < 0 else ("+" if parts else "")
        mag = _fmt(abs(c))
        parts.append(f"{lead} {mag} {names[j]}".strip())
    if not parts:
        parts.append(f"0 {names[0]}")
    return " ".join(parts)


def write_lp(lp: LinearProgram, target) -> None:
    """Write ``lp`` in CPLEX LP text format.

    ``target`` is a path or a writable text file object.  Output is
    deterministic (12 significant digits) so exported models can be
    compared byte for byte.
    """
    n = lp.n_variables
    vnames = lp.variable_names or [f"x{j}" for j in range(n)]
    cnames = lp.constraint_names or [f"c{i}" for i in range(lp.n_constraints)]
    buf = io.StringIO()
    buf.write(f"\\ Problem: {lp.name}\n")
    buf.write("Maximize\n" if lp.sense == "max" else "Minimize\n")
    buf.write(f" obj: {_terms(lp.objective, vnames, range(n))}\n")
    buf.write("Subject To\n")
    for i in range(lp.n_constraints):
        cols = np.flatnonzero(lp.A[i] != 0.0)
        lhs = _terms(lp.A[i], vnames, cols) if cols.size else f"0 {vnames[0]}"
        buf.write(f" {cnames[i]}: {lhs} {lp.relations[i]} {_fmt(lp.b[i])}\n")
    buf.write("Bounds\n")
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo == hi:
            buf.write(f" {vnames[j]} = {_fmt(lo)}\n")
        elif not np.isfinite(lo) and not np.isfinite(hi):
            buf.write(f" {vnames[j]} free\n")
        elif not np.isfinite(hi):
            buf.write(f" {vnames[j]} >= {_fmt(lo)}\n")
        elif not np.isfinite(lo):
            buf.write(f" {vnames[j]} <= {_fmt(hi)}\n")
        else:
            buf.write(f" {_fmt(lo)} <= {vnames[j]} <= {_fmt(hi)}\n")
    ints = np.flatnonzero(lp.integrality)
    if ints.size:
        buf.write("Generals\n")
        for k in range(0, ints.size, 8):
            chunk = " ".join(vnames[j] for j in ints[k:k + 8])
            buf.write(f" {chunk}\n")
    buf.write("End\n")
    text = buf.getvalue()
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
