"""Supply aggregation, demand models, and travel-time utilities.

The number of drivers that end up in a region is a sum of independent
Bernoulli moves with heterogeneous probabilities, i.e. Poisson binomial.
Expectations are cheap (sum of probabilities); the exact PMF uses an
O(m^2) convolution so downstream code can evaluate capped expectations
like E[min(supply, demand)] without enumeration.
"""

from __future__ import annotations

import csv
import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import RegionGraph, RegionId

_PMF_MAX = 10_000


@dataclass(frozen=True)
class PoissonBinomial:
    """Sum of independent Bernoulli trials with per-trial probabilities."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1:
            raise ValueError("probs must be a 1-D vector")
        if p.size and (p.min() < 0.0 or p.max() > 1.0):
            raise ValueError("success probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", p)


def _probs(pb) -> np.ndarray:
    if isinstance(pb, PoissonBinomial):
        return pb.probs
    return PoissonBinomial(np.asarray(pb, dtype=np.float64)).probs


def pb_expectation(pb) -> float:
    """Expected number of successes: the plain sum of probabilities."""
    return float(_probs(pb).sum())


def pb_pmf(pb) -> np.ndarray:
    """Exact PMF over {0, ..., m} via iterative convolution."""
    p = _probs(pb)
    if p.size > _PMF_MAX:
        raise ValueError(f"PMF convolution capped at {_PMF_MAX} trials, got {p.size}")
    return np.asarray(_kernels.active().pb_convolve(p))


def pb_variance(pb) -> float:
    p = _probs(pb)
    return float((p * (1.0 - p)).sum())


def expected_allocation(pb, capacity: float) -> float:
    """E[min(S, capacity)] for a Poisson binomial supply S."""
    if capacity < 0:
        raise ValueError("capacity must be nonnegative")
    pmf = pb_pmf(pb)
    k = np.minimum(np.arange(pmf.size, dtype=np.float64), float(capacity))
    return float(k @ pmf)


def expected_excess(pb, capacity: float) -> float:
    """E[(S - capacity)^+]: drivers beyond what the region can absorb."""
    pmf = pb_pmf(pb)
    k = np.maximum(np.arange(pmf.size, dtype=np.float64) - float(capacity), 0.0)
    return float(k @ pmf)


@dataclass(frozen=True)
class DemandModel:
    """Per-region demand forecast: mean and residual standard deviation."""

    mean: np.ndarray
    stddev: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.stddev, dtype=np.float64)
        if mean.ndim != 1 or std.shape != mean.shape:
            raise ValueError("mean and stddev must be 1-D vectors of equal length")
        if np.any(~np.isfinite(mean)) or np.any(~np.isfinite(std)):
            raise ValueError("demand parameters must be finite")
        if np.any(std < 0):
            raise ValueError("stddev must be nonnegative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "stddev", std)

    @property
    def n_regions(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class DemandObservation:
    demand: float
    hour: int
    weekday: int
    day_of_month: int = 1


class DemandHistory:
    """Windowed per-region demand series with calendar covariates.

    Keeps at most ``window`` most-recent observations per region.
    """

    def __init__(self, n_regions: int, window: int = 168):
        if n_regions < 1:
            raise ValueError("need at least one region")
        if window < 1:
            raise ValueError("window length must be >= 1")
        self.n_regions = n_regions
        self.window = window
        self._series = [deque(maxlen=window) for _ in range(n_regions)]

    def add(self, region: RegionId, demand: float, hour: int, weekday: int,
            day_of_month: int = 1) -> None:
        if not 0 <= region < self.n_regions:
            raise ValueError(f"region {region} out of range")
        if demand < 0:
            raise ValueError("demand observations must be nonnegative")
        if not 0 <= hour <= 23:
            raise ValueError("hour must be in 0..23")
        if not 0 <= weekday <= 6:
            raise ValueError("weekday must be in 0..6")
        self._series[region].append(DemandObservation(float(demand), int(hour),
                                                      int(weekday), int(day_of_month)))

    def series(self, region: RegionId) -> list:
        return list(self._series[region])

    @property
    def n_observations(self) -> int:
        return sum(len(s) for s in self._series)


def seasonal_mean_forecast(history: DemandHistory, *, hour=None, weekday=None) -> np.ndarray:
    """Average demand in the matching (hour, weekday) bucket per region.

    Falls back to the hour-only bucket, then to the region's overall
    mean, when the requested bucket is empty.
    """
    out = np.empty(history.n_regions)
    for r in range(history.n_regions):
        obs = history.series(r)
        if not obs:
            raise ValueError(f"demand history for region {r} is empty")
        pools = []
        if hour is not None and weekday is not None:
            pools.append([o.demand for o in obs if o.hour == hour and o.weekday == weekday])
        if hour is not None:
            pools.append([o.demand for o in obs if o.hour == hour])
        pools.append([o.demand for o in obs])
        for pool in pools:
            if pool:
                out[r] = float(np.mean(pool))
                break
    return out


def forecast_demand(forecaster, history: DemandHistory, *, hour=None, weekday=None) -> np.ndarray:
    """Apply a forecaster to the history; output is clamped at zero.

    ``forecaster`` is either None / ``"seasonal-mean"`` for the bundled
    default or any callable ``f(history, hour=..., weekday=...)``
    returning one value per region.
    """
    if history.n_observations == 0:
        raise ValueError("cannot forecast from an empty demand history")
    if forecaster is None or forecaster == "seasonal-mean":
        nu = seasonal_mean_forecast(history, hour=hour, weekday=weekday)
    elif callable(forecaster):
        nu = np.asarray(forecaster(history, hour=hour, weekday=weekday), dtype=np.float64)
    else:
        raise ValueError(f"unknown forecaster {forecaster!r}")
    if nu.shape != (history.n_regions,):
        raise ValueError("forecaster must return one value per region")
    return np.maximum(nu, 0.0)


def estimate_residual_stddev(actuals, predictions) -> float:
    """Root mean squared residual between two equal-length series."""
    a = np.asarray(actuals, dtype=np.float64)
    p = np.asarray(predictions, dtype=np.float64)
    if a.shape != p.shape:
        raise ValueError("actuals and predictions must have the same length")
    if a.size < 2:
        raise ValueError("need at least two points to estimate a residual stddev")
    return float(np.sqrt(np.mean((a - p) ** 2)))


def sample_demand(model: DemandModel, rng: np.random.Generator) -> np.ndarray:
    """Draw integer demand per region: Gaussian, rounded, clamped at 0."""
    draws = rng.normal(model.mean, model.stddev)
    return np.maximum(np.rint(draws), 0.0).astype(np.int64)


def driver_travel_time(graph: RegionGraph, driver_region: RegionId, dest: RegionId) -> float:
    """Expected repositioning minutes from the driver's region to dest."""
    n = graph.n_regions
    if not (0 <= driver_region < n and 0 <= dest < n):
        raise ValueError(f"region pair ({driver_region}, {dest}) out of range")
    return float(graph.expected_travel_time[driver_region, dest])


def load_demand_history(path, n_regions: int, window: int = 168) -> DemandHistory:
    """Read a demand history CSV.

    Columns: region_id, period_index, hour, weekday, day_of_month, demand.
    Rows are applied in period order so the window keeps the most recent.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"region_id", "period_index", "hour", "weekday", "day_of_month", "demand"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            missing = sorted(need - set(reader.fieldnames or ()))
            raise ValueError(f"demand history CSV is missing columns: {missing}")
        for rec in reader:
            rows.append((int(rec["period_index"]), int(rec["region_id"]),
                         float(rec["demand"]), int(rec["hour"]),
                         int(rec["weekday"]), int(rec["day_of_month"])))
    rows.sort(key=lambda t: (t[0], t[1]))
    hist = DemandHistory(n_regions, window=window)
    for _, region, demand, hour, weekday, dom in rows:
        hist.add(region, demand, hour, weekday, dom)
    return hist


def shortest_path_tables(road_edges, region_centers):
    """All-pairs shortest km and minutes between region centers.

    ``road_edges`` is an iterable of (origin, destination, km, minutes)
    over arbitrary hashable node ids; ``region_centers`` lists the nodes
    that act as region centers, in region-index order.  Runs one
    Dijkstra per center and metric.  A center pair with no connecting
    route is an error naming the pair.
    """
    centers = list(region_centers)
    if not centers:
        raise ValueError("need at least one region center")
    adj_km: dict = {}
    adj_min: dict = {}
    for u, v, km, minutes in road_edges:
        if km < 0 or minutes < 0 or not (np.isfinite(km) and np.isfinite(minutes)):
            raise ValueError(f"edge ({u!r}, {v!r}) has invalid weights")
        adj_km.setdefault(u, []).append((v, float(km)))
        adj_min.setdefault(u, []).append((v, float(minutes)))
        adj_km.setdefault(v, [])
        adj_min.setdefault(v, [])
    for c in centers:
        adj_km.setdefault(c, [])
        adj_min.setdefault(c, [])

    def dijkstra(adj, source):
        dist = {source: 0.0}
        seen = set()
        pq = [(0.0, 0, source)]
        tiebreak = 0
        while pq:
            d, _, u = heapq.heappop(pq)
            if u in seen:
                continue
            seen.add(u)
            for v, w in adj[u]:
                nd = d + w
                if nd < dist.get(v, np.inf):
                    dist[v] = nd
                    tiebreak += 1
                    heapq.heappush(pq, (nd, tiebreak, v))
        return dist

    n = len(centers)
    km_table = np.zeros((n, n))
    min_table = np.zeros((n, n))
    for i, src in enumerate(centers):
        for table, adj in ((km_table, adj_km), (min_table, adj_min)):
            dist = dijkstra(adj, src)
            for j, dst in enumerate(centers):
                if dst not in dist:
                    raise ValueError(f"no route between region centers {src!r} and {dst!r}")
                table[i, j] = dist[dst]
    return km_table, min_table
