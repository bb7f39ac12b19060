"""Recommenders: the adherence-aware model and four baselines.

Every builder turns a :class:`FleetSnapshot` into a
:class:`~aavr.solver.LinearProgram`; the ``solve_*`` wrappers run the
bundled MILP solver and package results.  The adherence-aware model and
the per-driver baselines (B1, B2) return driver-level
:class:`RecommendationPlan` objects; the aggregate baselines (B3, B4)
return region-to-region :class:`AggregateFlow` tables which
:func:`flows_to_drivers` expands deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import RegionGraph, ScenarioConfig
from .solver import LinearProgram, Solution, solve_milp

_TIE_TOL = 1e-12      # objective change treated as a tie during exchange
_Z_MATCH_TOL = 1e-6   # solver Z must equal min(E[s], nu) this closely


class SolveFailed(RuntimeError):
    """A recommender's optimization program did not reach optimality."""

    def __init__(self, model: str, status: str):
        super().__init__(f"{model} solve failed with status {status!r}")
        self.model = model
        self.status = status

    def __reduce__(self):
        # two-argument __init__ needs explicit pickle support (worker
        # processes send these back through the result queue)
        return (SolveFailed, (self.model, self.status), self.__dict__)


def _run_solver(lp: LinearProgram, model: str,
                node_budget: int | None) -> Solution:
    """Solve ``lp``, honoring an optional branch-and-bound node cap.

    Without a cap only a proven optimum is accepted.  With one, the best
    incumbent found inside the cap is accepted as well; simulations use
    this because fleet-scale programs carry near-tie optima whose proof
    would dominate the runtime without changing any recommendation that
    matters.
    """
    if node_budget is None:
        sol = solve_milp(lp)
        ok = sol.status == "optimal"
    else:
        sol = solve_milp(lp, node_budget=int(node_budget))
        ok = sol.values is not None
    if not ok:
        raise SolveFailed(model, sol.status)
    return sol


@dataclass(frozen=True)
class FleetSnapshot:
    """Idle fleet state handed to the recommenders.

    Per idle driver: id, current region, adherence probability mu, and
    the preference distribution L over destination regions.  ``nu`` is
    the expected demand per region for the upcoming horizon.
    """

    driver_ids: np.ndarray
    regions: np.ndarray
    mu: np.ndarray
    L: np.ndarray
    nu: np.ndarray
    graph: RegionGraph
    config: ScenarioConfig

    def __post_init__(self):
        ids = np.asarray(self.driver_ids, dtype=np.int64)
        regions = np.asarray(self.regions, dtype=np.int64)
        mu = np.asarray(self.mu, dtype=np.float64)
        L = np.atleast_2d(np.asarray(self.L, dtype=np.float64))
        nu = np.asarray(self.nu, dtype=np.float64)
        n = ids.size
        R = self.graph.n_regions
        if len({int(i) for i in ids}) != n:
            raise ValueError("driver ids must be unique")
        if regions.shape != (n,) or mu.shape != (n,):
            raise ValueError("regions and mu must have one entry per driver")
        if n and (regions.min() < 0 or regions.max() >= R):
            raise ValueError("driver region out of range")
        if n and (mu.min() < 0.0 or mu.max() > 1.0):
            raise ValueError("adherence probabilities must lie in [0, 1]")
        if L.shape != (n, R):
            raise ValueError(f"L must be ({n}, {R}), got {L.shape}")
        if n and (L.min() < 0.0 or np.max(np.abs(L.sum(axis=1) - 1.0)) > 1e-9):
            raise ValueError("each preference row must be a distribution over regions")
        if nu.shape != (R,) or np.any(~np.isfinite(nu)) or np.any(nu < 0):
            raise ValueError("nu must be a nonnegative demand vector per region")
        H = self.config.horizon.minutes
        tt = self.graph.expected_travel_time
        for k in range(n):
            if not np.any(tt[regions[k]] <= H):
                raise ValueError(
                    f"driver {int(ids[k])} cannot reach any region within the horizon")
        for arr in (ids, regions, mu, L, nu):
            arr.setflags(write=False)
        object.__setattr__(self, "driver_ids", ids)
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "nu", nu)

    @property
    def n_drivers(self) -> int:
        return self.driver_ids.size

    @property
    def n_regions(self) -> int:
        return self.graph.n_regions

    def travel_times(self) -> np.ndarray:
        """Minutes from each driver's region to every region, (n, R)."""
        return self.graph.expected_travel_time[self.regions]

    def distances(self) -> np.ndarray:
        return self.graph.distance[self.regions]

    def idle_counts(self) -> np.ndarray:
        return np.bincount(self.regions, minlength=self.n_regions).astype(np.int64)


@dataclass(frozen=True)
class RecommendationPlan:
    """Driver-level outcome of a recommender.

    ``recommended`` marks drivers the model actually addressed; the rest
    stay in place and later follow their own preference.  Supply
    diagnostics are truthful about that split: a recommended driver
    contributes mu to the destination and (1-mu)L everywhere, an
    unaddressed driver contributes their bare preference row.
    """

    model: str
    driver_ids: np.ndarray
    from_region: np.ndarray
    destination: np.ndarray
    recommended: np.ndarray
    expected_supply: np.ndarray
    expected_allocation: np.ndarray
    objective_value: float | None

    def __post_init__(self):
        n = self.driver_ids.size
        for name in ("from_region", "destination", "recommended"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have one entry per driver")

    @property
    def n_drivers(self) -> int:
        return self.driver_ids.size

    def assignment_matrix(self, n_regions: int) -> np.ndarray:
        """Binary (n_drivers, n_regions) matrix of recommended targets."""
        x = np.zeros((self.n_drivers, n_regions))
        rows = np.flatnonzero(self.recommended)
        x[rows, self.destination[rows]] = 1.0
        return x

    def counts_to(self, n_regions: int) -> np.ndarray:
        """Recommended drivers per destination region."""
        dest = self.destination[self.recommended]
        return np.bincount(dest, minlength=n_regions).astype(np.int64)


@dataclass(frozen=True)
class AggregateFlow:
    """Region-to-region recommended repositioning counts."""

    X: np.ndarray
    objective_value: float | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] != X.shape[1]:
            raise ValueError("flow table must be square")
        if np.any(X < 0):
            raise ValueError("flows must be nonnegative")
        object.__setattr__(self, "X", X)


def expected_supply(snapshot: FleetSnapshot, destination, recommended) -> np.ndarray:
    """E[supply_j]: mu mass on recommended targets plus preference mass."""
    dest = np.asarray(destination, dtype=np.int64)
    rec = np.asarray(recommended, dtype=bool)
    out = np.zeros(snapshot.n_regions)
    for c in range(snapshot.n_drivers):
        if rec[c]:
            out[dest[c]] += snapshot.mu[c]
            out += (1.0 - snapshot.mu[c]) * snapshot.L[c]
        else:
            out += snapshot.L[c]
    return out


def _make_plan(snapshot, model, destination, recommended, objective_value):
    esup = expected_supply(snapshot, destination, recommended)
    return RecommendationPlan(
        model=model,
        driver_ids=snapshot.driver_ids.copy(),
        from_region=snapshot.regions.copy(),
        destination=np.asarray(destination, dtype=np.int64),
        recommended=np.asarray(recommended, dtype=bool),
        expected_supply=esup,
        expected_allocation=np.minimum(esup, snapshot.nu),
        objective_value=objective_value,
    )


def _x_names(snapshot):
    return [f"x_d{int(c)}_r{j}" for c in snapshot.driver_ids
            for j in range(snapshot.n_regions)]


def build_aavr(snapshot: FleetSnapshot) -> LinearProgram:
    """Adherence-aware recommender as a mixed-integer program.

    Binary x[c, j] picks each driver's recommended destination (exactly
    one, and never a region beyond the horizon).  Continuous Z[j] in
    [0, nu_j] captures min(E[supply_j], nu_j) through the constraint
    Z_j - sum_c mu_c x_cj <= sum_c (1 - mu_c) L_cj, which is tight at
    any optimum because Z carries positive objective weight.
    """
    n, R = snapshot.n_drivers, snapshot.n_regions
    beta = snapshot.config.beta
    H = snapshot.config.horizon.minutes
    T = snapshot.travel_times()

    nx = n * R
    nvar = nx + R
    c = np.zeros(nvar)
    c[:nx] = -beta * T.reshape(-1)
    c[nx:] = 1.0

    lower = np.zeros(nvar)
    upper = np.ones(nvar)
    upper[:nx][(T > H).reshape(-1)] = 0.0
    upper[nx:] = snapshot.nu
    integrality = np.zeros(nvar, dtype=bool)
    integrality[:nx] = True

    rows, rels, rhs, cnames = [], [], [], []
    for k in range(n):
        row = np.zeros(nvar)
        row[k * R:(k + 1) * R] = 1.0
        rows.append(row)
        rels.append("=")
        rhs.append(1.0)
        cnames.append(f"assign_d{int(snapshot.driver_ids[k])}")
    base = snapshot.L.T @ (1.0 - snapshot.mu)
    for j in range(R):
        row = np.zeros(nvar)
        row[j:nx:R] = -snapshot.mu
        row[nx + j] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(base[j]))
        cnames.append(f"capture_r{j}")
    # redundant per-destination counting rows; they give branch and
    # bound a whole-count handle when assignment ties are fractional
    for j in range(R):
        row = np.zeros(nvar)
        row[j:nx:R] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(n))
        cnames.append(f"count_r{j}")

    names = _x_names(snapshot) + [f"Z_r{j}" for j in range(R)]
    return LinearProgram(objective=c, A=np.array(rows), relations=rels,
                         b=np.array(rhs), lower=lower, upper=upper,
                         integrality=integrality, sense="max",
                         variable_names=names, constraint_names=cnames,
                         name="aavr")


def _true_objective(snapshot, destination, esup=None):
    if esup is None:
        esup = expected_supply(snapshot, destination, np.ones(snapshot.n_drivers, bool))
    T = snapshot.travel_times()
    travel = float(T[np.arange(snapshot.n_drivers), destination].sum())
    return float(np.minimum(esup, snapshot.nu).sum()) - snapshot.config.beta * travel


def _canonical_exchange(snapshot: FleetSnapshot, destination: np.ndarray) -> np.ndarray:
    """Resolve assignment ties toward high-adherence drivers.

    The program often has many optimal assignments (drivers at the same
    region with the same preferences are interchangeable once a region's
    capture saturates).  This pass performs pairwise destination swaps
    that keep the objective intact (or improve it) and, on exact ties,
    moves the higher-mu driver (lower id on equal mu) to the
    higher-indexed region.  The fixpoint is a canonical plan: on the
    saturated two-station scenarios it is exactly the greedy
    highest-adherence prefix.
    """
    dest = np.asarray(destination, dtype=np.int64).copy()
    n = snapshot.n_drivers
    if n < 2:
        return dest
    mu = snapshot.mu
    nu = snapshot.nu
    T = snapshot.travel_times()
    beta = snapshot.config.beta
    esup = expected_supply(snapshot, dest, np.ones(n, bool))

    order = np.lexsort((snapshot.driver_ids, -mu))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)

    for _ in range(100):
        changed = False
        groups = {}
        for j in np.unique(dest):
            groups[int(j)] = np.flatnonzero(dest == j)
        regions_present = sorted(groups)
        for gi, j1 in enumerate(regions_present):
            for j2 in regions_present[gi + 1:]:
                for a in groups[j1]:
                    if dest[a] != j1:
                        continue
                    for b in groups[j2]:
                        if dest[b] != j2 or dest[a] != j1:
                            continue
                        da, db = j1, j2
                        ea = esup[da] - mu[a] + mu[b]
                        eb = esup[db] - mu[b] + mu[a]
                        d_cap = (min(ea, nu[da]) + min(eb, nu[db])
                                 - min(esup[da], nu[da]) - min(esup[db], nu[db]))
                        d_travel = -beta * (T[a, db] + T[b, da] - T[a, da] - T[b, db])
                        delta = d_cap + d_travel
                        if delta > _TIE_TOL:
                            take = True
                        elif delta >= -_TIE_TOL:
                            a_superior = rank[a] < rank[b]
                            a_on_high = da > db
                            take = a_superior != a_on_high
                        else:
                            take = False
                        if take:
                            dest[a], dest[b] = db, da
                            esup[da], esup[db] = ea, eb
                            changed = True
        if not changed:
            break
    return dest


def solve_aavr(snapshot: FleetSnapshot, exchange: bool = True,
               node_budget: int | None = None) -> RecommendationPlan:
    """Solve the adherence-aware program and assemble the plan.

    Verifies the linearization: each solver Z_j must equal
    min(E[supply_j], nu_j) within 1e-6 at the optimum.  With
    ``exchange`` (default) the assignment is then canonicalized by
    objective-preserving swaps so equal-value optima resolve the same
    way every time.  ``node_budget`` caps branch and bound and accepts
    the incumbent (see :func:`_run_solver`).
    """
    lp = build_aavr(snapshot)
    sol = _run_solver(lp, "aavr", node_budget)
    n, R = snapshot.n_drivers, snapshot.n_regions
    x = np.rint(sol.values[:n * R].reshape(n, R)).astype(np.int64)
    if np.any(x.sum(axis=1) != 1):
        raise SolveFailed("aavr", "assignment rows not one-hot")
    dest = np.argmax(x, axis=1).astype(np.int64)

    rec = np.ones(n, dtype=bool)
    esup = expected_supply(snapshot, dest, rec)
    xi = np.minimum(esup, snapshot.nu)
    z = sol.values[n * R:]
    if np.max(np.abs(z - xi), initial=0.0) > _Z_MATCH_TOL:
        raise SolveFailed("aavr", "capture variables diverge from min(E[s], nu)")

    if exchange:
        dest = _canonical_exchange(snapshot, dest)
    return _make_plan(snapshot, "aavr", dest, rec,
                      _true_objective(snapshot, dest))


def build_b1(snapshot: FleetSnapshot) -> LinearProgram:
    """Demand-weighted assignment with a saturation cap per region.

    Maximizes sum x_cj nu_j (1 - T_cj/H); each driver gets at most one
    recommendation; per region the time-discounted inflow is capped at
    rho nu_j.
    """
    n, R = snapshot.n_drivers, snapshot.n_regions
    cfg = snapshot.config
    H = cfg.horizon.minutes
    T = snapshot.travel_times()
    disc = 1.0 - T / H

    nvar = n * R
    c = (disc * snapshot.nu[None, :]).reshape(-1)
    lower = np.zeros(nvar)
    upper = np.ones(nvar)
    upper[(T > H).reshape(-1)] = 0.0
    integrality = np.ones(nvar, dtype=bool)

    rows, rels, rhs, cnames = [], [], [], []
    for k in range(n):
        row = np.zeros(nvar)
        row[k * R:(k + 1) * R] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(1.0)
        cnames.append(f"assign_d{int(snapshot.driver_ids[k])}")
    for j in range(R):
        row = np.zeros(nvar)
        row[j:nvar:R] = disc[:, j]
        rows.append(row)
        rels.append("<=")
        rhs.append(float(cfg.rho * snapshot.nu[j]))
        cnames.append(f"saturation_r{j}")
    for j in range(R):
        row = np.zeros(nvar)
        row[j:nvar:R] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(n))
        cnames.append(f"count_r{j}")

    return LinearProgram(objective=c, A=np.array(rows), relations=rels,
                         b=np.array(rhs), lower=lower, upper=upper,
                         integrality=integrality, sense="max",
                         variable_names=_x_names(snapshot),
                         constraint_names=cnames, name="b1")


def solve_b1(snapshot: FleetSnapshot,
             node_budget: int | None = None) -> RecommendationPlan:
    lp = build_b1(snapshot)
    sol = _run_solver(lp, "b1", node_budget)
    n, R = snapshot.n_drivers, snapshot.n_regions
    x = np.rint(sol.values.reshape(n, R)).astype(np.int64)
    assigned = x.sum(axis=1) > 0
    dest = np.where(assigned, np.argmax(x, axis=1), snapshot.regions)
    return _make_plan(snapshot, "b1", dest.astype(np.int64), assigned,
                      float(sol.objective_value))


def build_b2(snapshot: FleetSnapshot) -> LinearProgram:
    """Proportional supply matching with an L1 deviation objective.

    Minimizes || share_j - nu_j/sum(nu) ||_1 + beta * assigned distance,
    where share_j is the fraction of the fleet recommended to j.  The
    deviation is linearized with one auxiliary t_j per region.  The
    source formulation prints the distance term with a minus sign inside
    the minimization (rewarding long trips); the default implements the
    evident intent (+), and ``config.literal_b2_sign`` restores the
    printed sign.
    """
    n, R = snapshot.n_drivers, snapshot.n_regions
    cfg = snapshot.config
    total_nu = float(snapshot.nu.sum())
    if n < 1:
        raise ValueError("B2 needs at least one idle driver")
    if total_nu <= 0:
        raise ValueError("B2 needs positive total demand")
    H = cfg.horizon.minutes
    T = snapshot.travel_times()
    D = snapshot.distances()
    target = snapshot.nu / total_nu

    nx = n * R
    nvar = nx + R
    sign = -1.0 if cfg.literal_b2_sign else 1.0
    c = np.zeros(nvar)
    c[:nx] = sign * cfg.beta * D.reshape(-1)
    c[nx:] = 1.0

    lower = np.zeros(nvar)
    upper = np.concatenate([np.ones(nx), np.full(R, np.inf)])
    upper[:nx][(T > H).reshape(-1)] = 0.0
    integrality = np.zeros(nvar, dtype=bool)
    integrality[:nx] = True

    rows, rels, rhs, cnames = [], [], [], []
    for k in range(n):
        row = np.zeros(nvar)
        row[k * R:(k + 1) * R] = 1.0
        rows.append(row)
        rels.append("=")
        rhs.append(1.0)
        cnames.append(f"assign_d{int(snapshot.driver_ids[k])}")
    for j in range(R):
        row = np.zeros(nvar)
        row[j:nx:R] = 1.0 / n
        row[nx + j] = -1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(target[j]))
        cnames.append(f"dev_pos_r{j}")
        row = np.zeros(nvar)
        row[j:nx:R] = -1.0 / n
        row[nx + j] = -1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(-target[j]))
        cnames.append(f"dev_neg_r{j}")
    for j in range(R):
        row = np.zeros(nvar)
        row[j:nx:R] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(n))
        cnames.append(f"count_r{j}")

    names = _x_names(snapshot) + [f"t_r{j}" for j in range(R)]
    return LinearProgram(objective=c, A=np.array(rows), relations=rels,
                         b=np.array(rhs), lower=lower, upper=upper,
                         integrality=integrality, sense="min",
                         variable_names=names, constraint_names=cnames,
                         name="b2")


def solve_b2(snapshot: FleetSnapshot,
             node_budget: int | None = None) -> RecommendationPlan:
    lp = build_b2(snapshot)
    sol = _run_solver(lp, "b2", node_budget)
    n, R = snapshot.n_drivers, snapshot.n_regions
    x = np.rint(sol.values[:n * R].reshape(n, R)).astype(np.int64)
    if np.any(x.sum(axis=1) != 1):
        raise SolveFailed("b2", "assignment rows not one-hot")
    dest = np.argmax(x, axis=1).astype(np.int64)
    return _make_plan(snapshot, "b2", dest, np.ones(n, bool),
                      float(sol.objective_value))


def _proportional_targets(nu: np.ndarray, N: int, integer: bool) -> np.ndarray:
    share = nu / nu.sum() * N
    if not integer:
        return share
    floors = np.floor(share)
    leftover = int(round(N - floors.sum()))
    frac = share - floors
    # largest remainder, ties to the lowest region index
    order = np.lexsort((np.arange(nu.size), -frac))
    floors[order[:leftover]] += 1
    return floors


def build_b3(snapshot: FleetSnapshot, integer_targets: bool = False) -> LinearProgram:
    """Proportional redistribution via minimum-travel-time integer flows.

    Flow X_ij moves idle drivers from i to j; each region must end with
    at least its demand-proportional share of the fleet.  The source
    prints the balance constraint with inflow and outflow as the same
    term; this builds V_i + inflow_i - outflow_i (the evident intent),
    and ``config.literal_balance`` zeroes the net term to match the
    letter of the text.  ``integer_targets`` apportions the fractional
    shares to integers by largest remainder, which keeps the program
    feasible for integer flows (the simulator uses this).
    """
    cfg = snapshot.config
    if snapshot.nu.sum() <= 0:
        raise ValueError("B3 needs positive total demand")
    R = snapshot.n_regions
    V = snapshot.idle_counts().astype(np.float64)
    N = int(V.sum())
    tau = snapshot.graph.expected_travel_time
    target = _proportional_targets(snapshot.nu, N, integer_targets)

    nvar = R * R
    c = tau.reshape(-1).astype(np.float64)
    lower = np.zeros(nvar)
    upper = np.full(nvar, np.inf)
    for i in range(R):
        upper[i * R + i] = 0.0  # no self-flows; they only burn capacity
    integrality = np.ones(nvar, dtype=bool)

    rows, rels, rhs, cnames = [], [], [], []
    for i in range(R):
        row = np.zeros(nvar)
        if not cfg.literal_balance:
            row[i::R] += 1.0         # inflow: X_ji for all j
            row[i * R:(i + 1) * R] -= 1.0  # outflow: X_ij for all j
        rows.append(row)
        rels.append(">=")
        rhs.append(float(target[i] - V[i]))
        cnames.append(f"balance_r{i}")
    for i in range(R):
        row = np.zeros(nvar)
        row[i * R:(i + 1) * R] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(V[i]))
        cnames.append(f"outflow_r{i}")

    names = [f"X_{i}_{j}" for i in range(R) for j in range(R)]
    return LinearProgram(objective=c, A=np.array(rows), relations=rels,
                         b=np.array(rhs), lower=lower, upper=upper,
                         integrality=integrality, sense="min",
                         variable_names=names, constraint_names=cnames,
                         name="b3")


def solve_b3(snapshot: FleetSnapshot, integer_targets: bool = False,
             node_budget: int | None = None) -> AggregateFlow:
    lp = build_b3(snapshot, integer_targets=integer_targets)
    sol = _run_solver(lp, "b3", node_budget)
    R = snapshot.n_regions
    X = np.rint(sol.values.reshape(R, R)).astype(np.int64)
    return AggregateFlow(X=X, objective_value=float(sol.objective_value))


def build_b4(snapshot: FleetSnapshot) -> LinearProgram:
    """Flow rebalancing with explicit allocation and shortfall terms.

    Moves X_ij (integer, only within the horizon), allocates Y (integer,
    diagonal only: driver and passenger must share a region), and pays
    gamma per unit of unmet demand T_i = nu_i - Y_ii.  S_i is the
    post-move supply.  gamma defaults to 1e4 x the largest distance so
    serving demand dominates travel cost.  ``config.literal_balance``
    zeroes the net flow term in the supply identity, as printed.
    """
    cfg = snapshot.config
    R = snapshot.n_regions
    V = snapshot.idle_counts().astype(np.float64)
    D = snapshot.graph.distance
    tau = snapshot.graph.expected_travel_time
    H = cfg.horizon.minutes
    gamma = cfg.gamma if cfg.gamma is not None else 1e4 * float(D.max())
    b4_beta = 1.0  # allocation-distance weight; inert when only Y_ii is free

    # layout: X (R*R), Y (R*R), S (R), T (R)
    nX = R * R
    off_Y = nX
    off_S = 2 * nX
    off_T = 2 * nX + R
    nvar = 2 * nX + 2 * R

    c = np.zeros(nvar)
    c[:nX] = D.reshape(-1)
    c[off_Y:off_S] = b4_beta * D.T.reshape(-1)
    c[off_T:] = gamma

    lower = np.zeros(nvar)
    upper = np.full(nvar, np.inf)
    for i in range(R):
        for j in range(R):
            if tau[i, j] > H:
                upper[i * R + j] = 0.0     # unreachable within the horizon
            if i == j:
                upper[i * R + j] = 0.0     # self-moves excluded
    for i in range(R):
        for j in range(R):
            if i != j:
                upper[off_Y + i * R + j] = 0.0  # w = 0: same-region allocation only
    integrality = np.zeros(nvar, dtype=bool)
    integrality[:off_S] = True

    rows, rels, rhs, cnames = [], [], [], []
    for i in range(R):
        row = np.zeros(nvar)
        row[off_Y + i:off_S:R] = 1.0   # sum_j Y_ji
        row[off_S + i] = -1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(0.0)
        cnames.append(f"alloc_supply_r{i}")
    for i in range(R):
        row = np.zeros(nvar)
        row[off_Y + i * R:off_Y + (i + 1) * R] = 1.0  # sum_j Y_ij
        rows.append(row)
        rels.append("<=")
        rhs.append(float(snapshot.nu[i]))
        cnames.append(f"alloc_demand_r{i}")
    for i in range(R):
        row = np.zeros(nvar)
        row[i * R:(i + 1) * R] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(float(V[i]))
        cnames.append(f"outflow_r{i}")
    for i in range(R):
        row = np.zeros(nvar)
        row[off_T + i] = 1.0
        row[off_Y + i * R:off_Y + (i + 1) * R] = 1.0
        rows.append(row)
        rels.append("=")
        rhs.append(float(snapshot.nu[i]))
        cnames.append(f"shortfall_r{i}")
    for i in range(R):
        row = np.zeros(nvar)
        row[off_S + i] = 1.0
        if not cfg.literal_balance:
            row[i:nX:R] -= 1.0             # inflow X_ji
            row[i * R:(i + 1) * R] += 1.0  # outflow X_ij
        rows.append(row)
        rels.append("=")
        rhs.append(float(V[i]))
        cnames.append(f"supply_r{i}")

    names = ([f"X_{i}_{j}" for i in range(R) for j in range(R)]
             + [f"Y_{i}_{j}" for i in range(R) for j in range(R)]
             + [f"S_{i}" for i in range(R)] + [f"T_{i}" for i in range(R)])
    return LinearProgram(objective=c, A=np.array(rows), relations=rels,
                         b=np.array(rhs), lower=lower, upper=upper,
                         integrality=integrality, sense="min",
                         variable_names=names, constraint_names=cnames,
                         name="b4")


def solve_b4(snapshot: FleetSnapshot,
             node_budget: int | None = None) -> AggregateFlow:
    lp = build_b4(snapshot)
    sol = _run_solver(lp, "b4", node_budget)
    R = snapshot.n_regions
    X = np.rint(sol.values[:R * R].reshape(R, R)).astype(np.int64)
    return AggregateFlow(X=X, objective_value=float(sol.objective_value))


MODELS = ("aavr", "b1", "b2", "b3", "b4")


def solve_model(model: str, snapshot: FleetSnapshot) -> RecommendationPlan:
    """Dispatch to the named recommender and return a driver-level plan.

    Flow-based models (b3, b4) are lifted to driver level with
    :func:`flows_to_drivers`.  The snapshot config's ``node_budget``
    applies to every solve.
    """
    budget = snapshot.config.node_budget
    if model == "aavr":
        return solve_aavr(snapshot, node_budget=budget)
    if model == "b1":
        return solve_b1(snapshot, node_budget=budget)
    if model == "b2":
        return solve_b2(snapshot, node_budget=budget)
    if model == "b3":
        return flows_to_drivers(
            solve_b3(snapshot, integer_targets=True, node_budget=budget),
            snapshot, model="b3")
    if model == "b4":
        return flows_to_drivers(solve_b4(snapshot, node_budget=budget),
                                snapshot, model="b4")
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def flows_to_drivers(flow: AggregateFlow, snapshot: FleetSnapshot,
                     model: str = "flow") -> RecommendationPlan:
    """Expand an aggregate flow table into per-driver recommendations.

    For each origin region the idle drivers are taken in ascending id
    order and dealt out to destinations in ascending region order;
    drivers beyond the flow totals stay unaddressed.  This is the
    deterministic solution of the constant-objective assignment program
    (any driver split meeting the flow counts is optimal there).
    """
    R = snapshot.n_regions
    if flow.X.shape != (R, R):
        raise ValueError("flow table does not match the snapshot's region count")
    dest = snapshot.regions.copy()
    rec = np.zeros(snapshot.n_drivers, dtype=bool)
    order = np.argsort(snapshot.driver_ids, kind="stable")
    for i in range(R):
        members = [k for k in order if snapshot.regions[k] == i]
        out_total = int(flow.X[i].sum())
        if out_total > len(members):
            raise ValueError(
                f"flow out of region {i} ({out_total}) exceeds its {len(members)} idle drivers")
        ptr = 0
        for j in range(R):
            take = int(flow.X[i, j])
            for k in members[ptr:ptr + take]:
                dest[k] = j
                rec[k] = True
            ptr += take
    return _make_plan(snapshot, model, dest, rec, flow.objective_value)


def plan_to_flow(plan: RecommendationPlan, n_regions: int) -> AggregateFlow:
    """Aggregate a driver-level plan back into a region flow table."""
    X = np.zeros((n_regions, n_regions), dtype=np.int64)
    for k in np.flatnonzero(plan.recommended):
        i, j = int(plan.from_region[k]), int(plan.destination[k])
        if i != j:
            X[i, j] += 1
    return AggregateFlow(X=X, objective_value=plan.objective_value)


def write_plan_csv(plan: RecommendationPlan, graph: RegionGraph, path) -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["driver_id", "from_region", "to_region", "expected_travel_min"])
        for k in range(plan.n_drivers):
            i, j = int(plan.from_region[k]), int(plan.destination[k])
            w.writerow([int(plan.driver_ids[k]), i, j,
                        format(float(graph.expected_travel_time[i, j]), ".12g")])


def write_flow_csv(flow: AggregateFlow, path) -> None:
    import csv
    R = flow.X.shape[0]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["from", "to", "count"])
        for i in range(R):
            for j in range(R):
                w.writerow([i, j, int(flow.X[i, j])])
