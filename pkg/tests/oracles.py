"""Reference implementations the tests trust.

Everything here is deliberately slow and obvious: subset enumeration,
exhaustive assignment search, closed forms.  The library must agree
with these, never the other way around.
"""

from __future__ import annotations

import itertools

import numpy as np

from aavr.core import RegionGraph, ScenarioConfig
from aavr.rebalance import FleetSnapshot


def pb_pmf_enum(probs) -> np.ndarray:
    """Poisson-binomial PMF by summing over all 2^m outcomes."""
    probs = np.asarray(probs, dtype=np.float64)
    m = probs.size
    pmf = np.zeros(m + 1)
    for bits in itertools.product((0, 1), repeat=m):
        p = 1.0
        for b, q in zip(bits, probs):
            p *= q if b else 1.0 - q
        pmf[sum(bits)] += p
    return pmf


def enumerate_binary_program(c, A, relations, b, sense="max", tol=1e-9):
    """Optimum of a pure 0/1 program by trying all 2^n points.

    Returns (best_objective, best_x) or (None, None) if infeasible.
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = c.size
    best_val, best_x = None, None
    for bits in itertools.product((0.0, 1.0), repeat=n):
        x = np.array(bits)
        lhs = A @ x
        ok = True
        for i, rel in enumerate(relations):
            if rel == "<=" and lhs[i] > b[i] + tol:
                ok = False
            elif rel == ">=" and lhs[i] < b[i] - tol:
                ok = False
            elif rel == "=" and abs(lhs[i] - b[i]) > tol:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        val = float(c @ x)
        if best_val is None or (val > best_val if sense == "max" else val < best_val):
            best_val, best_x = val, x
    return best_val, best_x


def true_objective(snapshot: FleetSnapshot, destination) -> float:
    """Nonlinear objective of an all-drivers assignment, from scratch."""
    dest = np.asarray(destination, dtype=np.int64)
    n, R = snapshot.n_drivers, snapshot.n_regions
    esup = np.zeros(R)
    for k in range(n):
        esup[dest[k]] += snapshot.mu[k]
        esup += (1.0 - snapshot.mu[k]) * snapshot.L[k]
    captured = float(np.minimum(esup, snapshot.nu).sum())
    T = snapshot.graph.expected_travel_time
    travel = sum(float(T[snapshot.regions[k], dest[k]]) for k in range(n))
    return captured - snapshot.config.beta * travel


def brute_force_assignment(snapshot: FleetSnapshot):
    """Best assignment over every reachable destination combination."""
    n, R = snapshot.n_drivers, snapshot.n_regions
    H = snapshot.config.horizon.minutes
    T = snapshot.graph.expected_travel_time
    choices = [[j for j in range(R) if T[snapshot.regions[k], j] <= H]
               for k in range(n)]
    best_val, best_dest = -np.inf, None
    for combo in itertools.product(*choices):
        val = true_objective(snapshot, np.array(combo))
        if val > best_val:
            best_val, best_dest = val, np.array(combo)
    return best_val, best_dest


def greedy_mu_prefix(mu, capacity: float) -> np.ndarray:
    """Indices of the max-mu prefix whose mu mass first covers capacity."""
    mu = np.asarray(mu, dtype=np.float64)
    order = np.lexsort((np.arange(mu.size), -mu))
    csum = np.cumsum(mu[order])
    k = int(np.searchsorted(csum, capacity - 1e-12) + 1)
    return order[:min(k, mu.size)]


def random_snapshot(rng: np.random.Generator, n_max: int = 8, r_max: int = 3,
                    allow_unreachable: bool = True) -> FleetSnapshot:
    """Small random fleet snapshot for exactness sweeps."""
    n = int(rng.integers(1, n_max + 1))
    R = int(rng.integers(1, r_max + 1))
    H = 5.0
    T = rng.uniform(0.5, H * (1.4 if allow_unreachable else 0.9), size=(R, R))
    T = (T + T.T) / 2.0
    np.fill_diagonal(T, 0.0)
    graph = RegionGraph(distance=T * 0.5, expected_travel_time=T,
                        travel_time_stddev=np.zeros((R, R)))
    L = rng.dirichlet(np.ones(R), size=n)
    snapshot = FleetSnapshot(
        driver_ids=np.arange(n),
        regions=rng.integers(0, R, size=n),
        mu=rng.uniform(0.05, 0.95, size=n),
        L=L,
        nu=rng.uniform(0.0, float(n), size=R),
        graph=graph,
        config=ScenarioConfig(horizon=H, beta=float(rng.uniform(1e-4, 5e-2))),
    )
    return snapshot


def random_binary_program(rng: np.random.Generator, n_max: int = 12):
    """Random 0/1 program with mixed relations; sometimes infeasible."""
    from aavr.solver import LinearProgram
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, 7))
    c = rng.normal(0.0, 3.0, size=n).round(3)
    A = rng.normal(0.0, 1.5, size=(m, n)).round(3)
    A[rng.random(size=A.shape) < 0.3] = 0.0
    relations = [str(rng.choice(["<=", ">=", "="])) for _ in range(m)]
    # anchor most rows near an achievable point so feasibility is common
    x0 = rng.integers(0, 2, size=n).astype(float)
    b = A @ x0 + rng.normal(0.0, 0.5, size=m).round(3)
    b = b.round(3)
    sense = str(rng.choice(["max", "min"]))
    lp = LinearProgram(objective=c, A=A, relations=relations, b=b,
                       lower=np.zeros(n), upper=np.ones(n),
                       integrality=np.ones(n, dtype=bool), sense=sense)
    return lp


def planted_decision_corpus(rng: np.random.Generator, *, n_drivers: int = 12,
                            n_decisions: int = 30, n_regions: int = 4,
                            weights=(2.0, -1.0, 0.5)):
    """Decisions sampled from a known logit; returns (corpus, weights).

    Corpus rows mimic :func:`aavr.behavior.load_decision_corpus` output:
    (driver_id, period, chosen_region, features).
    """
    w = np.asarray(weights, dtype=np.float64)
    corpus = []
    for d in range(n_drivers):
        for p in range(n_decisions):
            X = rng.normal(0.0, 1.0, size=(n_regions, w.size))
            s = X @ w
            probs = np.exp(s - s.max())
            probs /= probs.sum()
            chosen = int(rng.choice(n_regions, p=probs))
            corpus.append((d, p, chosen, X))
    return corpus, w
