"""Driver decision making: preferences, confidence beliefs, and choices.

A driver first decides whether to follow the recommendation at all
(confidence in the system vs. confidence in their own judgment, modeled
as a pair of Beta beliefs compared by Thompson sampling), and only if
they decline does their learned region preference pick the destination.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy import stats

from .core import DriverId, RegionId

# convention: a driver's feature description of one candidate region is a
# plain 1-D vector; a scenario hands models an (n_regions, d) matrix
RegionFeatures = np.ndarray

IDLE = "idle"
REPOSITIONING = "repositioning"
ON_TRIP = "on_trip"

_FIT_L2 = 1e-4
_FIT_ITERS = 500


@dataclass(frozen=True)
class PreferenceModel:
    """Logit repositioning preference; last weight entry is the intercept."""

    weights: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a 1-D vector with an intercept entry")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def feature_dim(self) -> int:
        return self.weights.size - 1


@dataclass(frozen=True)
class BetaBelief:
    """Beta(alpha, beta) confidence belief."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Beta parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass
class DriverAgent:
    """Mutable driver state carried through the simulation."""

    id: DriverId
    region: RegionId
    preference: PreferenceModel
    belief_system: BetaBelief
    belief_self: BetaBelief
    status: str = IDLE
    arrival_time: float | None = None

    def begin_repositioning(self, arrival_time: float) -> None:
        if self.status != IDLE:
            raise ValueError(f"driver {self.id} cannot reposition while {self.status}")
        self.status = REPOSITIONING
        self.arrival_time = float(arrival_time)

    def begin_trip(self, arrival_time: float) -> None:
        if self.status != IDLE:
            raise ValueError(f"driver {self.id} cannot take a trip while {self.status}")
        self.status = ON_TRIP
        self.arrival_time = float(arrival_time)

    def become_idle(self, region: RegionId) -> None:
        self.status = IDLE
        self.arrival_time = None
        self.region = region


def _sigmoid(s):
    out = np.empty_like(s, dtype=np.float64)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    es = np.exp(s[~pos])
    out[~pos] = es / (1.0 + es)
    return out


def _feature_matrix(features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError("features must be an (n_regions, d) matrix or list of vectors")
    return X


def preference_distribution(model: PreferenceModel, features) -> np.ndarray:
    """Probability of each region being the driver's own pick.

    Scores each region with a sigmoid of the linear model, then
    normalizes the sigmoids across regions.
    """
    X = _feature_matrix(features)
    if X.shape[1] != model.feature_dim:
        raise ValueError(
            f"feature dimension {X.shape[1]} does not match model ({model.feature_dim})")
    s = X @ model.weights[:-1] + model.weights[-1]
    sig = _sigmoid(s)
    total = sig.sum()
    if total <= 0.0:
        # sigmoids underflowed to zero everywhere; fall back to uniform
        return np.full(X.shape[0], 1.0 / X.shape[0])
    return sig / total


def standardize_features(features) -> np.ndarray:
    """Z-score each feature column across regions; constant columns go to 0."""
    X = _feature_matrix(features).copy()
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    X -= mean
    nonzero = std > 0
    X[:, nonzero] /= std[nonzero]
    X[:, ~nonzero] = 0.0
    return X


def fit_preference(history) -> PreferenceModel:
    """Fit logit preference weights from repositioning decisions.

    ``history`` is a sequence of (chosen_region, features) pairs where
    ``features`` is the (n_regions, d) matrix the driver chose among.
    Each decision contributes one positive row (the chosen region) and
    negative rows for every alternative.  Maximizes the L2-regularized
    Bernoulli log-likelihood with plain gradient ascent and step
    halving, which is deterministic for a given history.
    """
    history = list(history)
    if not history:
        raise ValueError("need at least one decision to fit preferences")
    rows, labels = [], []
    d = None
    for chosen, features in history:
        X = _feature_matrix(features)
        if d is None:
            d = X.shape[1]
        elif X.shape[1] != d:
            raise ValueError("inconsistent feature dimensions across decisions")
        if not 0 <= chosen < X.shape[0]:
            raise ValueError(f"chosen region {chosen} outside the offered set")
        for j in range(X.shape[0]):
            rows.append(X[j])
            labels.append(1.0 if j == chosen else 0.0)
    X = np.asarray(rows)
    y = np.asarray(labels)

    if np.allclose(X, X[0], atol=0.0, rtol=0.0):
        import warnings
        warnings.warn("degenerate preference history: all feature rows identical",
                      stacklevel=2)
        return PreferenceModel(np.zeros(d + 1), degenerate=True)

    Xb = np.hstack([X, np.ones((X.shape[0], 1))])
    w = np.zeros(d + 1)
    reg = np.full(d + 1, _FIT_L2)
    reg[-1] = 0.0  # intercept unpenalized

    def objective(wv):
        s = Xb @ wv
        # log-likelihood of Bernoulli labels under sigmoid(s)
        ll = -(np.logaddexp(0.0, -s) @ y + np.logaddexp(0.0, s) @ (1.0 - y))
        return ll - 0.5 * float(reg @ (wv * wv))

    obj = objective(w)
    lr = 1.0
    for _ in range(_FIT_ITERS):
        p = _sigmoid(Xb @ w)
        grad = Xb.T @ (y - p) - reg * w
        while lr > 1e-12:
            cand = w + lr * grad
            cand_obj = objective(cand)
            if cand_obj > obj:
                w, obj = cand, cand_obj
                break
            lr *= 0.5
        else:
            break
    return PreferenceModel(w)


def update_belief(b: BetaBelief, outcome: int, eps0: float, eps1: float) -> BetaBelief:
    """Conjugate update: success bumps alpha by eps1, failure beta by eps0."""
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    if outcome == 1:
        return BetaBelief(b.alpha + eps1, b.beta)
    return BetaBelief(b.alpha, b.beta + eps0)


def acceptance_probability(belief_system: BetaBelief, belief_self: BetaBelief,
                           M: int, rng: np.random.Generator) -> float:
    """Thompson estimate of P(system belief beats self belief).

    Draws M paired samples and returns the win fraction.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    theta_r = rng.beta(belief_system.alpha, belief_system.beta, size=M)
    theta_p = rng.beta(belief_self.alpha, belief_self.beta, size=M)
    return float(np.mean(theta_r > theta_p))


def acceptance_probability_exact(belief_system: BetaBelief, belief_self: BetaBelief) -> float:
    """P(Theta_r > Theta_p) by numerical integration (no sampling noise)."""
    fr = stats.beta(belief_system.alpha, belief_system.beta)
    fp = stats.beta(belief_self.alpha, belief_self.beta)
    val, _ = integrate.quad(lambda x: fr.pdf(x) * fp.cdf(x), 0.0, 1.0,
                            epsabs=1e-10, epsrel=1e-10, limit=200)
    return float(min(max(val, 0.0), 1.0))


def sample_decision(agent: DriverAgent, recommendation: RegionId, mu: float,
                    L, rng: np.random.Generator):
    """One draw of the two-stage choice.

    Returns (accepted, destination): with probability mu the driver
    follows the recommendation; otherwise the destination comes from
    the preference distribution L.
    """
    L = np.asarray(L, dtype=np.float64)
    if abs(L.sum() - 1.0) > 1e-9:
        raise ValueError("preference distribution must sum to 1")
    if rng.random() < mu:
        return 1, int(recommendation)
    cum = np.cumsum(L)
    j = int(np.searchsorted(cum, rng.random(), side="right"))
    return 0, min(j, L.size - 1)


def load_drivers(path) -> list:
    """Read a driver population CSV.

    Columns: driver_id, region, alpha_r, beta_r, alpha_p, beta_p,
    w_0..w_k (preference weights, last one the intercept).
    """
    agents = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fixed = ["driver_id", "region", "alpha_r", "beta_r", "alpha_p", "beta_p"]
        if reader.fieldnames is None or not set(fixed).issubset(reader.fieldnames):
            missing = sorted(set(fixed) - set(reader.fieldnames or ()))
            raise ValueError(f"driver CSV is missing columns: {missing}")
        wcols = [c for c in reader.fieldnames if c.startswith("w_")]
        wcols.sort(key=lambda c: int(c[2:]))
        if not wcols:
            raise ValueError("driver CSV has no preference weight columns (w_0..)")
        for rec in reader:
            weights = np.array([float(rec[c]) for c in wcols])
            agents.append(DriverAgent(
                id=int(rec["driver_id"]),
                region=int(rec["region"]),
                preference=PreferenceModel(weights),
                belief_system=BetaBelief(float(rec["alpha_r"]), float(rec["beta_r"])),
                belief_self=BetaBelief(float(rec["alpha_p"]), float(rec["beta_p"])),
            ))
    agents.sort(key=lambda a: a.id)
    ids = [a.id for a in agents]
    if len(set(ids)) != len(ids):
        raise ValueError("driver CSV contains duplicate driver ids")
    return agents


def load_decision_corpus(path):
    """Read a repositioning-decision corpus CSV.

    One row per (decision, candidate region): driver_id, period, region,
    chosen_region, then one column per feature.  Returns a list of
    (driver_id, period, chosen_region, features-matrix) in (driver,
    period) order.
    """
    fixed = ["driver_id", "period", "region", "chosen_region"]
    by_decision = {}
    feat_names = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(fixed).issubset(reader.fieldnames):
            missing = sorted(set(fixed) - set(reader.fieldnames or ()))
            raise ValueError(f"decision CSV is missing columns: {missing}")
        feat_names = [c for c in reader.fieldnames if c not in fixed]
        if not feat_names:
            raise ValueError("decision CSV has no feature columns")
        for rec in reader:
            key = (int(rec["driver_id"]), int(rec["period"]))
            entry = by_decision.setdefault(key, {"chosen": int(rec["chosen_region"]), "rows": {}})
            if int(rec["chosen_region"]) != entry["chosen"]:
                raise ValueError(f"decision {key} has conflicting chosen_region values")
            region = int(rec["region"])
            if region in entry["rows"]:
                raise ValueError(f"decision {key} lists region {region} twice")
            entry["rows"][region] = [float(rec[c]) for c in feat_names]

    out = []
    for key in sorted(by_decision):
        entry = by_decision[key]
        regions = sorted(entry["rows"])
        if regions != list(range(len(regions))):
            raise ValueError(f"decision {key} does not cover regions 0..{len(regions) - 1}")
        X = np.array([entry["rows"][r] for r in regions])
        if not 0 <= entry["chosen"] < len(regions):
            raise ValueError(f"decision {key} chose region {entry['chosen']} outside the set")
        out.append((key[0], key[1], entry["chosen"], X))
    return out
