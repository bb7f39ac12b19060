"""Adherence-aware vehicle rebalancing toolkit.

Recommends idle-driver repositioning while accounting for the chance
each driver actually follows the recommendation.  The pieces:

- :mod:`aavr.core` -- region graph, planning horizon, scenario config,
  seeded RNG streams
- :mod:`aavr.behavior` -- driver preference logits and Beta confidence
  beliefs
- :mod:`aavr.stochastic` -- demand forecasting and the probability that
  a given number of drivers shows up (Poisson-binomial)
- :mod:`aavr.solver` -- self-contained branch-and-bound MILP solver
- :mod:`aavr.rebalance` -- the adherence-aware recommender and four
  baselines, all driver-level plans
- :mod:`aavr.sim` -- discrete-time fleet simulator and experiment
  harness
- :mod:`aavr.scenarios` -- canonical case studies, synthetic networks,
  trip-record ingestion
- :mod:`aavr.cli` -- the ``aavr`` command
"""

from .behavior import (
    BetaBelief,
    DriverAgent,
    PreferenceModel,
    acceptance_probability,
    acceptance_probability_exact,
    fit_preference,
    load_decision_corpus,
    load_drivers,
    preference_distribution,
    sample_decision,
    standardize_features,
    update_belief,
)
from .core import (
    PlanningHorizon,
    RegionGraph,
    ScenarioConfig,
    reachability_fraction,
    seeded_rng,
)
from .rebalance import (
    MODELS,
    AggregateFlow,
    FleetSnapshot,
    RecommendationPlan,
    SolveFailed,
    expected_supply,
    flows_to_drivers,
    plan_to_flow,
    solve_aavr,
    solve_b1,
    solve_b2,
    solve_b3,
    solve_b4,
    solve_model,
)
from .scenarios import (
    ScenarioBundle,
    case_study_1,
    case_study_2,
    case_study_3,
    ingest_trip_records,
    synthetic_network,
)
from .sim import (
    monte_carlo_case_study,
    opening_snapshot,
    run_experiment,
    run_period,
    run_replication,
)
from .solver import LinearProgram, Solution, solve_milp, write_lp
from .stochastic import (
    DemandHistory,
    DemandModel,
    PoissonBinomial,
    expected_allocation,
    forecast_demand,
    pb_expectation,
    pb_pmf,
    sample_demand,
    seasonal_mean_forecast,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateFlow",
    "BetaBelief",
    "DemandHistory",
    "DemandModel",
    "DriverAgent",
    "FleetSnapshot",
    "LinearProgram",
    "MODELS",
    "PlanningHorizon",
    "PoissonBinomial",
    "PreferenceModel",
    "RecommendationPlan",
    "RegionGraph",
    "ScenarioBundle",
    "ScenarioConfig",
    "Solution",
    "SolveFailed",
    "acceptance_probability",
    "acceptance_probability_exact",
    "case_study_1",
    "case_study_2",
    "case_study_3",
    "expected_allocation",
    "expected_supply",
    "fit_preference",
    "flows_to_drivers",
    "forecast_demand",
    "ingest_trip_records",
    "load_decision_corpus",
    "load_drivers",
    "monte_carlo_case_study",
    "opening_snapshot",
    "pb_expectation",
    "pb_pmf",
    "plan_to_flow",
    "preference_distribution",
    "reachability_fraction",
    "run_experiment",
    "run_period",
    "run_replication",
    "sample_decision",
    "sample_demand",
    "seasonal_mean_forecast",
    "seeded_rng",
    "solve_aavr",
    "solve_b1",
    "solve_b2",
    "solve_b3",
    "solve_b4",
    "solve_milp",
    "solve_model",
    "standardize_features",
    "synthetic_network",
    "update_belief",
    "write_lp",
]
