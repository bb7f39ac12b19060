"""Domain primitives shared by every other module.

Region and driver identifiers, the region graph with its travel tables,
planning-horizon and scenario configuration, and the deterministic RNG
streams that all randomness in the package must flow through.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "RegionId",
    "DriverId",
    "PlanningHorizon",
    "RegionGraph",
    "ScenarioConfig",
    "reachability_fraction",
    "seeded_rng",
]

RegionId = int
DriverId = int


def seeded_rng(seed: int, stream_label: str) -> np.random.Generator:
    """Return a Generator keyed by ``(seed, stream_label)``.

    Identical pairs yield identical streams across runs and platforms;
    distinct labels yield streams that are independent for all practical
    purposes.  Every random draw in the package goes through a labelled
    stream so that experiments are bit-reproducible.
    """
    if not isinstance(stream_label, str) or not stream_label:
        raise ValueError("stream_label must be a non-empty string")
    digest = hashlib.sha256(stream_label.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(seed) % 2**64, *words]))


@dataclass(frozen=True)
class PlanningHorizon:
    """Length of one rebalancing period, in minutes."""

    minutes: float = 5.0

    def __post_init__(self):
        if not np.isfinite(self.minutes) or self.minutes <= 0:
            raise ValueError(f"horizon must be a positive number of minutes, got {self.minutes}")


def _as_table(name: str, value, n: int | None) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} regions, expected {n}")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} entries must be finite and nonnegative")
    return arr


@dataclass(frozen=True)
class RegionGraph:
    """Region-level travel tables.

    ``distance`` is in km, ``expected_travel_time`` and
    ``travel_time_stddev`` in minutes.  Immutable after construction; the
    arrays are marked read-only so instances are safe to share.
    """

    distance: np.ndarray
    expected_travel_time: np.ndarray
    travel_time_stddev: np.ndarray
    n_regions: int = field(init=False)

    def __post_init__(self):
        dist = _as_table("distance", self.distance, None)
        n = dist.shape[0]
        tt = _as_table("expected_travel_time", self.expected_travel_time, n)
        sd = _as_table("travel_time_stddev", self.travel_time_stddev, n)
        if np.any(np.diag(dist) != 0.0):
            raise ValueError("distance diagonal must be zero")
        if np.any(np.diag(tt) != 0.0):
            raise ValueError("expected_travel_time diagonal must be zero")
        for arr in (dist, tt, sd):
            arr.setflags(write=False)
        object.__setattr__(self, "distance", dist)
        object.__setattr__(self, "expected_travel_time", tt)
        object.__setattr__(self, "travel_time_stddev", sd)
        object.__setattr__(self, "n_regions", n)


def reachability_fraction(graph: RegionGraph, horizon: PlanningHorizon) -> float:
    """Fraction of ordered region pairs reachable within the horizon.

    Counts the diagonal: a region always reaches itself, so the result is
    at least ``1/n`` and reaches 1.0 once the horizon covers the slowest
    pair.
    """
    n = graph.n_regions
    hits = np.count_nonzero(graph.expected_travel_time <= horizon.minutes)
    return hits / float(n * n)


@dataclass(frozen=True)
class ScenarioConfig:
    """Tunable parameters shared by the recommenders and the simulator.

    ``gamma=None`` lets the demand-shortfall weight default to
    ``1e4 * max(distance)`` at solve time, which makes serving demand
    dominate travel cost.
    """

    horizon: PlanningHorizon = PlanningHorizon(5.0)
    beta: float = 1e-4            # travel-time weight in the recommenders
    rho: float = 1.0              # saturation multiplier
    gamma: float | None = None    # demand-shortfall weight (None = auto)
    epsilon0: float = 1.0         # belief step on a failed repositioning
    epsilon1: float = 1.0         # belief step on a successful one
    M: int = 1000                 # paired samples for the confidence estimate
    fare_base: float = 2.5
    fare_per_km: float = 1.5
    cost_per_km: float = 0.3
    commission_rate: float = 0.2
    # fidelity switches: reproduce the source formulations letter for
    # letter instead of their evident intent (see solve_b2 / solve_b3)
    literal_b2_sign: bool = False
    literal_balance: bool = False
    # cap on branch-and-bound nodes per solve; None proves optimality.
    # Large fleets produce near-tie optima whose proof cost is all in
    # the beta-scale travel term, so simulations set a budget and take
    # the best incumbent (still deterministic: nodes, not wall time).
    node_budget: int | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.horizon, (int, float)):
            object.__setattr__(self, "horizon", PlanningHorizon(float(self.horizon)))
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.epsilon0 <= 0 or self.epsilon1 <= 0:
            raise ValueError("belief steps epsilon0/epsilon1 must be positive")
        if int(self.M) < 1:
            raise ValueError("M must be a positive integer")
        object.__setattr__(self, "M", int(self.M))
        if not 0.0 <= self.commission_rate <= 1.0:
            raise ValueError("commission_rate must lie in [0, 1]")
        for name in ("fare_base", "fare_per_km", "cost_per_km"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.node_budget is not None:
            if int(self.node_budget) < 1:
                raise ValueError("node_budget must be a positive integer or None")
            object.__setattr__(self, "node_budget", int(self.node_budget))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        """Load a config from a JSON file whose keys match the field names."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValueError(f"config {path} must contain a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"config {path} has unknown keys: {', '.join(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["horizon"] = self.horizon.minutes
        return d
