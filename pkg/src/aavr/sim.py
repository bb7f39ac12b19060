"""Discrete-time fleet simulator.

Each period: demand lands, co-located idle drivers are matched first
come first served, the chosen recommender repositions the rest, drivers
accept or follow their own preference, movements realize with noisy
travel times, late-period arrivals serve what demand remains, and
repositioning outcomes feed back into the drivers' beliefs.

Replications are keyed by an integer seed; every random draw comes from
a labelled stream of that seed, so two models run against the same seed
see identical demand, decisions, and travel noise (common random
numbers), and identical invocations reproduce bit-identical metrics.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .behavior import (
    IDLE,
    ON_TRIP,
    REPOSITIONING,
    DriverAgent,
    acceptance_probability,
    preference_distribution,
    sample_decision,
    standardize_features,
    update_belief,
)
from .core import ScenarioConfig, seeded_rng
from .rebalance import (
    MODELS,
    FleetSnapshot,
    RecommendationPlan,
    SolveFailed,
    solve_model,
)
from .stochastic import sample_demand


def sample_travel_time(graph, origin: int, destination: int, z: float) -> float:
    """Realized minutes for one leg: tau + stddev * z, floored at zero."""
    t = graph.expected_travel_time[origin, destination]
    s = graph.travel_time_stddev[origin, destination]
    return max(float(t + s * z), 0.0)


def record_outcome(agent: DriverAgent, accepted: int, allocated: int,
                   config: ScenarioConfig) -> DriverAgent:
    """Feed one completed repositioning back into the driver's beliefs.

    An accepted recommendation updates the belief about the system,
    a self-directed move the belief about the driver's own judgment;
    in both cases the evidence is whether a trip followed within the
    horizon.
    """
    if accepted not in (0, 1) or allocated not in (0, 1):
        raise ValueError("accepted and allocated must be 0 or 1")
    if accepted:
        agent.belief_system = update_belief(agent.belief_system, allocated,
                                            config.epsilon0, config.epsilon1)
    else:
        agent.belief_self = update_belief(agent.belief_self, allocated,
                                          config.epsilon0, config.epsilon1)
    return agent


@dataclass
class PendingMove:
    """A driver in motion: where to, when they get there, and why."""

    driver_id: int
    destination: int
    arrival: float
    kind: str                 # "reposition" or "trip"
    accepted: bool = False    # repositionings only


@dataclass
class SimState:
    """Everything one replication carries between periods."""

    bundle: "object"                  # ScenarioBundle; untyped to avoid a cycle
    rep_seed: int
    drivers: list
    in_flight: dict = field(default_factory=dict)
    period: int = 0
    demand_scale: float = 1.0
    # cumulative per-driver counters, indexed like ``drivers``
    n_recommended: np.ndarray = None
    n_accepted: np.ndarray = None
    n_allocated: np.ndarray = None
    fares_by_driver: np.ndarray = None
    rebalance_km: np.ndarray = None
    trip_km: np.ndarray = None

    def __post_init__(self):
        n = len(self.drivers)
        for name in ("n_recommended", "n_accepted", "n_allocated"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(n, dtype=np.int64))
        for name in ("fares_by_driver", "rebalance_km", "trip_km"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(n, dtype=np.float64))

    @property
    def n_drivers(self) -> int:
        return len(self.drivers)

    def index_of(self, driver_id: int) -> int:
        return self._id_index[driver_id]

    @property
    def _id_index(self) -> dict:
        idx = getattr(self, "_id_index_cache", None)
        if idx is None or len(idx) != len(self.drivers):
            idx = {d.id: k for k, d in enumerate(self.drivers)}
            object.__setattr__(self, "_id_index_cache", idx)
        return idx

    def status_counts(self) -> dict:
        out = {IDLE: 0, REPOSITIONING: 0, ON_TRIP: 0}
        for d in self.drivers:
            out[d.status] += 1
        return out


@dataclass
class PeriodMetrics:
    period: int
    demand: np.ndarray            # realized requests per region
    served_initial: np.ndarray    # matched at the period start
    served_late: np.ndarray       # matched on mid-period arrival
    reposition_arrivals: np.ndarray
    lost: np.ndarray
    n_recommended: int            # cross-region recommendations issued
    n_accepted: int
    n_self_moves: int
    waiting_total: float
    fares: float
    rebalance_km: float
    trip_km: float
    idle: int
    repositioning: int
    on_trip: int
    events: list | None = None

    @property
    def served_total(self) -> int:
        return int(self.served_initial.sum() + self.served_late.sum())

    @property
    def demand_total(self) -> int:
        return int(self.demand.sum())

    @property
    def mean_waiting(self) -> float | None:
        s = self.served_total
        return (self.waiting_total / s) if s else None


@dataclass
class SimMetrics:
    """One replication's aggregate, plus its per-period trace."""

    model: str
    seed: int
    n_periods: int
    served_total: int
    demand_total: int
    lost_total: int
    waiting_total: float
    fares_total: float
    platform_earnings: float
    driver_profit: float
    rebalance_km: float
    trip_km: float
    recommendations: int
    acceptances: int
    n_recommended_by_driver: np.ndarray
    n_accepted_by_driver: np.ndarray
    n_allocated_by_driver: np.ndarray
    periods: list

    @property
    def mean_waiting(self) -> float | None:
        return (self.waiting_total / self.served_total) if self.served_total else None

    @property
    def mean_served_per_period(self) -> float:
        return self.served_total / self.n_periods if self.n_periods else 0.0

    def to_row(self) -> dict:
        return {
            "model": self.model,
            "seed": self.seed,
            "periods": self.n_periods,
            "served_total": self.served_total,
            "demand_total": self.demand_total,
            "lost_total": self.lost_total,
            "mean_waiting_min": "" if self.mean_waiting is None else f"{self.mean_waiting:.6f}",
            "fares_total": f"{self.fares_total:.6f}",
            "platform_earnings": f"{self.platform_earnings:.6f}",
            "driver_profit": f"{self.driver_profit:.6f}",
            "rebalance_km": f"{self.rebalance_km:.6f}",
            "trip_km": f"{self.trip_km:.6f}",
            "recommendations": self.recommendations,
            "acceptances": self.acceptances,
        }


_ROW_FIELDS = ["model", "seed", "periods", "served_total", "demand_total",
               "lost_total", "mean_waiting_min", "fares_total",
               "platform_earnings", "driver_profit", "rebalance_km",
               "trip_km", "recommendations", "acceptances"]


def _period_hour(config: ScenarioConfig, period: int) -> tuple[int, int]:
    minutes = period * config.horizon.minutes
    hour = int(minutes // 60) % 24
    weekday = int(minutes // (60 * 24)) % 7
    return hour, weekday


def forecast_nu(bundle, period: int, demand_scale: float) -> np.ndarray:
    """Expected requests per region for the coming period."""
    hour, _ = _period_hour(bundle.config, period)
    nu = bundle.demand.mean * bundle.hourly_profile[hour] * demand_scale
    return np.maximum(nu, 0.0)


def _realized_demand(bundle, period: int, demand_scale: float, rng) -> np.ndarray:
    from .stochastic import DemandModel
    hour, _ = _period_hour(bundle.config, period)
    mean = bundle.demand.mean * bundle.hourly_profile[hour] * demand_scale
    model = DemandModel(mean=mean, stddev=bundle.demand.stddev)
    return sample_demand(model, rng)


def _compute_mu(state: SimState, idle_idx: list, config: ScenarioConfig) -> np.ndarray:
    bundle = state.bundle
    if bundle.pinned_mu is not None:
        return bundle.pinned_mu[[state.drivers[k].id for k in idle_idx]].astype(float)
    out = np.empty(len(idle_idx))
    for pos, k in enumerate(idle_idx):
        d = state.drivers[k]
        rng = seeded_rng(state.rep_seed, f"confidence/{state.period}/{d.id}")
        out[pos] = acceptance_probability(d.belief_system, d.belief_self,
                                          config.M, rng)
    return out


def _compute_L(state: SimState, idle_idx: list) -> np.ndarray:
    bundle = state.bundle
    if bundle.pinned_L is not None:
        return bundle.pinned_L[[state.drivers[k].id for k in idle_idx]].astype(float)
    feats = standardize_features(bundle.region_features)
    return np.vstack([
        preference_distribution(state.drivers[k].preference, feats)
        for k in idle_idx])


def _copy_state(s: SimState) -> SimState:
    # beliefs and preference models are immutable, so sharing them is safe
    return SimState(
        bundle=s.bundle, rep_seed=s.rep_seed,
        drivers=[dataclasses.replace(d) for d in s.drivers],
        in_flight={k: dataclasses.replace(v) for k, v in s.in_flight.items()},
        period=s.period, demand_scale=s.demand_scale,
        n_recommended=s.n_recommended.copy(), n_accepted=s.n_accepted.copy(),
        n_allocated=s.n_allocated.copy(),
        fares_by_driver=s.fares_by_driver.copy(),
        rebalance_km=s.rebalance_km.copy(), trip_km=s.trip_km.copy())


def run_period(state: SimState, model: str, config: ScenarioConfig | None = None,
               rng=None, *, plan: RecommendationPlan | None = None,
               collect_events: bool = False) -> tuple[SimState, PeriodMetrics]:
    """Advance one planning horizon; returns a new state, input untouched.

    ``rng`` optionally overrides the replication seed the period's
    streams derive from.  ``plan`` injects a precomputed recommendation
    (the plan's driver ids must be exactly the idle drivers after the
    opening allocation); Monte-Carlo replications of a fixed scenario
    reuse one solve this way.  A solve failure raises
    :class:`~aavr.rebalance.SolveFailed` with ``period`` attached and
    leaves the input state unchanged.
    """
    state = _copy_state(state)
    bundle = state.bundle
    if config is None:
        config = bundle.config
    seed = state.rep_seed if rng is None else int(rng)
    p = state.period
    H = config.horizon.minutes
    t0, t1 = p * H, (p + 1) * H
    graph = bundle.graph
    R = graph.n_regions
    events = [] if collect_events else None

    def log(driver_id, action, detail):
        if events is not None:
            events.append((p, driver_id, action, detail))

    # 0: activate moves that completed in an earlier period
    for mv in sorted(state.in_flight.values(), key=lambda m: (m.arrival, m.driver_id)):
        if mv.arrival <= t0:
            d = state.drivers[state.index_of(mv.driver_id)]
            d.become_idle(mv.destination)
            if mv.kind == "reposition":
                # arrived too late for its own horizon: counts as a miss
                record_outcome(d, int(mv.accepted), 0, config)
                log(d.id, "arrive_late", mv.destination)
            else:
                log(d.id, "trip_end", mv.destination)
            del state.in_flight[mv.driver_id]

    # 1: demand
    demand = _realized_demand(bundle, p, state.demand_scale,
                              seeded_rng(seed, f"demand/{p}"))
    trip_rng = seeded_rng(seed, f"trips/{p}")
    req_dest, req_dur = [], []
    od_cum = np.cumsum(bundle.od, axis=1)
    for j in range(R):
        dj = int(demand[j])
        u = trip_rng.random(dj)
        z = trip_rng.standard_normal(dj)
        dest = np.searchsorted(od_cum[j], u, side="right").clip(0, R - 1)
        dur = np.maximum(graph.expected_travel_time[j, dest]
                         + graph.travel_time_stddev[j, dest] * z, 0.0)
        req_dest.append(dest)
        req_dur.append(dur)
    next_req = np.zeros(R, dtype=np.int64)

    served_initial = np.zeros(R, dtype=np.int64)
    served_late = np.zeros(R, dtype=np.int64)
    arrivals = np.zeros(R, dtype=np.int64)
    waiting_total = 0.0
    fares = 0.0
    rebalance_km = 0.0
    trip_km = 0.0

    def start_trip(k: int, pickup: int, wait: float) -> None:
        nonlocal fares, trip_km, waiting_total
        d = state.drivers[k]
        r = next_req[pickup]
        next_req[pickup] += 1
        dest = int(req_dest[pickup][r])
        arrival = t0 + wait + float(req_dur[pickup][r])
        fare = config.fare_base + config.fare_per_km * graph.distance[pickup, dest]
        fares += fare
        state.fares_by_driver[k] += fare
        trip_km += graph.distance[pickup, dest]
        state.trip_km[k] += graph.distance[pickup, dest]
        waiting_total += wait
        state.n_allocated[k] += 1
        d.begin_trip(arrival)
        state.in_flight[d.id] = PendingMove(d.id, dest, arrival, "trip")
        log(d.id, "allocate", pickup)

    # 2: first-come-first-served matching of co-located idle drivers
    idle_by_region = [[] for _ in range(R)]
    order = sorted(range(state.n_drivers), key=lambda k: state.drivers[k].id)
    for k in order:
        d = state.drivers[k]
        if d.status == IDLE:
            idle_by_region[d.region].append(k)
    for j in range(R):
        take = min(int(demand[j]), len(idle_by_region[j]))
        served_initial[j] = take
        for k in idle_by_region[j][:take]:
            start_trip(k, j, 0.0)

    # 3: adherence and preference for the drivers still idle
    idle_idx = [k for k in order if state.drivers[k].status == IDLE]
    nu = forecast_nu(bundle, p, state.demand_scale)
    plan_used = None
    if idle_idx:
        mu = _compute_mu(state, idle_idx, config)
        L = _compute_L(state, idle_idx)
        snapshot = FleetSnapshot(
            driver_ids=np.array([state.drivers[k].id for k in idle_idx]),
            regions=np.array([state.drivers[k].region for k in idle_idx]),
            mu=mu, L=L, nu=nu, graph=graph, config=config)
        # 4: solve (or reuse) the recommendation program
        if plan is not None:
            if not np.array_equal(plan.driver_ids, snapshot.driver_ids):
                raise ValueError("injected plan does not cover the idle drivers")
            plan_used = plan
        else:
            try:
                plan_used = solve_model(model, snapshot)
            except SolveFailed as exc:
                exc.period = p
                raise

    # 5 + 6: decide and start moving
    n_recommended = n_accepted = n_self = 0
    if idle_idx:
        dec = seeded_rng(seed, f"decisions/{p}").random((state.n_drivers, 2))
        z_move = seeded_rng(seed, f"travel/{p}").standard_normal(state.n_drivers)
        for pos, k in enumerate(idle_idx):
            d = state.drivers[k]
            here = d.region
            u_acc, u_pref = dec[k]
            rec = bool(plan_used.recommended[pos])
            rec_dest = int(plan_used.destination[pos])
            accepted = False
            if rec:
                # a stay-put recommendation still takes the adherence
                # draw: accepting it means staying, not re-deciding
                accepted = bool(u_acc < mu[pos])
                if rec_dest != here:
                    n_recommended += 1
                    state.n_recommended[k] += 1
                    if accepted:
                        n_accepted += 1
                        state.n_accepted[k] += 1
            if accepted:
                dest = rec_dest
                if dest != here:
                    log(d.id, "accept", dest)
            else:
                row = np.cumsum(L[pos])
                dest = int(min(np.searchsorted(row, u_pref, side="right"), R - 1))
                if dest != here:
                    n_self += 1
                    log(d.id, "self_move", dest)
            if dest == here:
                log(d.id, "stay", here)
                continue
            minutes = sample_travel_time(graph, here, dest, float(z_move[k]))
            km = graph.distance[here, dest]
            rebalance_km += km
            state.rebalance_km[k] += km
            d.begin_repositioning(t0 + minutes)
            state.in_flight[d.id] = PendingMove(d.id, dest, t0 + minutes,
                                                "reposition", accepted=accepted)

    # 7 + 8: mid-period arrivals serve leftovers; outcomes hit beliefs
    due = [mv for mv in state.in_flight.values()
           if mv.kind == "reposition" and mv.arrival <= t1]
    for mv in sorted(due, key=lambda m: (m.arrival, m.driver_id)):
        k = state.index_of(mv.driver_id)
        d = state.drivers[k]
        j = mv.destination
        arrivals[j] += 1
        del state.in_flight[mv.driver_id]
        d.become_idle(j)
        if next_req[j] < int(demand[j]):
            served_late[j] += 1
            record_outcome(d, int(mv.accepted), 1, config)
            start_trip(k, j, mv.arrival - t0)
        else:
            record_outcome(d, int(mv.accepted), 0, config)
            log(d.id, "arrive_idle", j)

    # 9: unmet requests leave
    lost = demand - served_initial - served_late
    for j in range(R):
        if lost[j]:
            log(-1, "expire", (j, int(lost[j])))

    counts = state.status_counts()
    if sum(counts.values()) != state.n_drivers:
        raise RuntimeError("driver conservation violated")

    state.period = p + 1
    metrics = PeriodMetrics(
        period=p, demand=demand, served_initial=served_initial,
        served_late=served_late, reposition_arrivals=arrivals,
        lost=lost, n_recommended=n_recommended, n_accepted=n_accepted,
        n_self_moves=n_self, waiting_total=waiting_total, fares=fares,
        rebalance_km=rebalance_km, trip_km=trip_km,
        idle=counts[IDLE], repositioning=counts[REPOSITIONING],
        on_trip=counts[ON_TRIP], events=events)
    return state, metrics


def make_state(bundle, seed: int, demand_scale: float = 1.0) -> SimState:
    """Fresh replication state from a scenario bundle."""
    return SimState(bundle=bundle, rep_seed=int(seed),
                    drivers=bundle.make_drivers(), demand_scale=demand_scale)


def run_replication(bundle, model: str, seed: int, n_periods: int,
                    *, demand_scale: float = 1.0, keep_periods: bool = True) -> SimMetrics:
    """Run one seeded replication for ``n_periods`` and aggregate."""
    if n_periods < 0:
        raise ValueError("n_periods must be nonnegative")
    state = make_state(bundle, seed, demand_scale)
    periods = []
    totals = dict(served=0, demand=0, lost=0, waiting=0.0, fares=0.0,
                  rebalance=0.0, trip=0.0, rec=0, acc=0)
    for _ in range(n_periods):
        state, pm = run_period(state, model)
        if keep_periods:
            periods.append(pm)
        totals["served"] += pm.served_total
        totals["demand"] += pm.demand_total
        totals["lost"] += int(pm.lost.sum())
        totals["waiting"] += pm.waiting_total
        totals["fares"] += pm.fares
        totals["rebalance"] += pm.rebalance_km
        totals["trip"] += pm.trip_km
        totals["rec"] += pm.n_recommended
        totals["acc"] += pm.n_accepted
    cfg = bundle.config
    earnings = cfg.commission_rate * totals["fares"]
    profit = (1.0 - cfg.commission_rate) * totals["fares"] \
        - cfg.cost_per_km * (totals["rebalance"] + totals["trip"])
    return SimMetrics(
        model=model, seed=int(seed), n_periods=n_periods,
        served_total=totals["served"], demand_total=totals["demand"],
        lost_total=totals["lost"], waiting_total=totals["waiting"],
        fares_total=totals["fares"], platform_earnings=earnings,
        driver_profit=profit, rebalance_km=totals["rebalance"],
        trip_km=totals["trip"], recommendations=totals["rec"],
        acceptances=totals["acc"],
        n_recommended_by_driver=state.n_recommended.copy(),
        n_accepted_by_driver=state.n_accepted.copy(),
        n_allocated_by_driver=state.n_allocated.copy(),
        periods=periods)


def _replication_task(args):
    bundle, model, seed, n_periods, demand_scale, keep_periods = args
    return run_replication(bundle, model, seed, n_periods,
                           demand_scale=demand_scale, keep_periods=keep_periods)


@dataclass
class ExperimentResult:
    models: list
    seeds: list
    rows: list                    # SimMetrics, ordered (model, seed)

    def for_model(self, model: str) -> list:
        return [r for r in self.rows if r.model == model]

    def summary(self) -> list[dict]:
        out = []
        for m in self.models:
            rows = self.for_model(m)
            served = float(np.mean([r.served_total for r in rows]))
            waits = [r.mean_waiting for r in rows if r.mean_waiting is not None]
            out.append({
                "model": m,
                "seeds": len(rows),
                "mean_served": f"{served:.6f}",
                "mean_waiting_min": f"{float(np.mean(waits)):.6f}" if waits else "",
                "mean_platform_earnings": f"{float(np.mean([r.platform_earnings for r in rows])):.6f}",
                "mean_driver_profit": f"{float(np.mean([r.driver_profit for r in rows])):.6f}",
                "mean_lost": f"{float(np.mean([r.lost_total for r in rows])):.6f}",
            })
        return out


def run_experiment(bundle, models, n_periods: int, n_seeds: int, *,
                   base_seed: int | None = None, jobs: int = 1,
                   demand_scale: float = 1.0,
                   keep_periods: bool = True) -> ExperimentResult:
    """Replicate each model over the same seed list (common random numbers).

    Seeds are ``base_seed .. base_seed + n_seeds - 1`` (default: the
    bundle config's seed).  With ``jobs > 1`` replications run in
    worker processes; results are merged in (model, seed) order, so the
    output is identical for any job count.
    """
    if n_periods < 1:
        raise ValueError("n_periods must be at least 1")
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    if isinstance(models, str):
        models = list(MODELS) if models == "all" else [models]
    for m in models:
        if m not in MODELS:
            raise ValueError(f"unknown model {m!r}; expected one of {MODELS}")
    if base_seed is None:
        base_seed = bundle.config.seed
    seeds = [int(base_seed) + k for k in range(n_seeds)]
    tasks = [(bundle, m, s, n_periods, demand_scale, keep_periods)
             for m in models for s in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_replication_task, tasks))
    else:
        rows = [_replication_task(t) for t in tasks]
    return ExperimentResult(models=list(models), seeds=seeds, rows=rows)


def opening_snapshot(bundle, seed: int | None = None) -> FleetSnapshot:
    """The fleet snapshot a recommender would see in the first period."""
    if seed is None:
        seed = bundle.config.seed
    proto = make_state(bundle, seed)
    idle = [k for k in range(proto.n_drivers) if proto.drivers[k].status == IDLE]
    mu = _compute_mu(proto, idle, bundle.config)
    L = _compute_L(proto, idle)
    return FleetSnapshot(
        driver_ids=np.array([proto.drivers[k].id for k in idle]),
        regions=np.array([proto.drivers[k].region for k in idle]),
        mu=mu, L=L, nu=forecast_nu(bundle, 0, 1.0),
        graph=bundle.graph, config=bundle.config)


def monte_carlo_case_study(bundle, model: str, n_replications: int, *,
                           base_seed: int | None = None) -> dict:
    """Single-period Monte Carlo with the recommendation solved once.

    The scenario's opening state is identical in every replication, so
    the (deterministic) program is solved one time and injected into
    each :func:`run_period` call; only decisions, travel noise, and
    matching re-randomize.  Returns mean served demand, mean idle
    repositioning arrivals per region, and mean accepted moves.
    """
    if n_replications < 1:
        raise ValueError("n_replications must be at least 1")
    if base_seed is None:
        base_seed = bundle.config.seed
    snapshot = opening_snapshot(bundle, base_seed)
    plan = solve_model(model, snapshot)

    served = np.zeros(n_replications)
    idle_arrivals = np.zeros((n_replications, bundle.graph.n_regions))
    accepted = np.zeros(n_replications)
    for rep in range(n_replications):
        state = make_state(bundle, base_seed + rep)
        _, pm = run_period(state, model, plan=plan)
        served[rep] = pm.served_total
        idle_arrivals[rep] = pm.reposition_arrivals - pm.served_late
        accepted[rep] = pm.n_accepted
    return {
        "model": model,
        "replications": n_replications,
        "mean_served": float(served.mean()),
        "mean_idle_arrivals": idle_arrivals.mean(axis=0),
        "mean_accepted": float(accepted.mean()),
        "recommended": int(np.count_nonzero(
            plan.recommended & (plan.destination != plan.from_region))),
    }


def write_metrics_csv(result: ExperimentResult, path) -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=_ROW_FIELDS)
        w.writeheader()
        for r in result.rows:
            w.writerow(r.to_row())


_SUMMARY_FIELDS = ["model", "seeds", "mean_served", "mean_waiting_min",
                   "mean_platform_earnings", "mean_driver_profit", "mean_lost"]


def write_summary_csv(result: ExperimentResult, path) -> None:
    import csv
    rows = result.summary()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=_SUMMARY_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow(row)


def write_period_csv(result: ExperimentResult, path) -> None:
    import csv
    fields = ["model", "seed", "period", "demand", "served", "lost",
              "mean_waiting_min", "fares", "recommendations", "acceptances"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in result.rows:
            for pm in r.periods:
                w.writerow({
                    "model": r.model, "seed": r.seed, "period": pm.period,
                    "demand": pm.demand_total, "served": pm.served_total,
                    "lost": int(pm.lost.sum()),
                    "mean_waiting_min": ""
                    if pm.mean_waiting is None else f"{pm.mean_waiting:.6f}",
                    "fares": f"{pm.fares:.6f}",
                    "recommendations": pm.n_recommended,
                    "acceptances": pm.n_accepted,
                })


def write_driver_counts_csv(metrics: SimMetrics, path) -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["driver_id", "recommended", "accepted", "allocated"])
        for k in range(metrics.n_recommended_by_driver.size):
            w.writerow([k, int(metrics.n_recommended_by_driver[k]),
                        int(metrics.n_accepted_by_driver[k]),
                        int(metrics.n_allocated_by_driver[k])])
