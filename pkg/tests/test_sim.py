"""Simulator semantics: period mechanics, determinism, CRN, writers."""

import csv

import numpy as np
import pytest

from aavr.behavior import IDLE, ON_TRIP, BetaBelief, DriverAgent, PreferenceModel
from aavr.core import RegionGraph, ScenarioConfig
from aavr.rebalance import SolveFailed
from aavr.scenarios import ScenarioBundle, synthetic_network
from aavr.sim import (
    ExperimentResult,
    forecast_nu,
    make_state,
    monte_carlo_case_study,
    opening_snapshot,
    record_outcome,
    run_experiment,
    run_period,
    run_replication,
    sample_travel_time,
    write_metrics_csv,
    write_period_csv,
    write_summary_csv,
)
from aavr.stochastic import DemandModel


def tiny_bundle(n=6, mean=(0.0, 3.0), stddev=(0.0, 0.0), mu=1.0,
                L_row=(1.0, 0.0), regions=None, tt_sd=0.0, profile=None,
                **cfg):
    """Two-region bundle small enough to solve in milliseconds."""
    graph = RegionGraph(
        distance=[[0.0, 2.0], [2.0, 0.0]],
        expected_travel_time=[[0.0, 4.0], [4.0, 0.0]],
        travel_time_stddev=[[0.0, tt_sd], [tt_sd, 0.0]])
    if regions is None:
        regions = np.zeros(n, dtype=np.int64)
    return ScenarioBundle(
        name="tiny", graph=graph,
        demand=DemandModel(mean=np.asarray(mean, float),
                           stddev=np.asarray(stddev, float)),
        od=np.eye(2),
        config=ScenarioConfig(horizon=5.0, **cfg),
        initial_regions=np.asarray(regions, dtype=np.int64),
        pinned_mu=np.full(n, float(mu)),
        pinned_L=np.tile(np.asarray(L_row, float), (n, 1)),
        hourly_profile=profile)


def test_sample_travel_time_clamps_at_zero(graph_ab):
    graph = RegionGraph(distance=graph_ab.distance,
                        expected_travel_time=graph_ab.expected_travel_time,
                        travel_time_stddev=[[0.0, 2.0], [2.0, 0.0]])
    assert sample_travel_time(graph, 0, 1, 0.5) == pytest.approx(5.0)
    assert sample_travel_time(graph, 0, 1, -10.0) == 0.0


def test_record_outcome_routes_by_acceptance():
    def agent():
        return DriverAgent(id=0, region=0, preference=PreferenceModel([0.0]),
                           belief_system=BetaBelief(1.0, 1.0),
                           belief_self=BetaBelief(1.0, 1.0))

    cfg = ScenarioConfig(epsilon0=0.5, epsilon1=2.0)
    d = record_outcome(agent(), accepted=1, allocated=1, config=cfg)
    assert (d.belief_system.alpha, d.belief_system.beta) == (3.0, 1.0)
    assert (d.belief_self.alpha, d.belief_self.beta) == (1.0, 1.0)
    d = record_outcome(agent(), accepted=0, allocated=0, config=cfg)
    assert (d.belief_self.alpha, d.belief_self.beta) == (1.0, 1.5)
    assert (d.belief_system.alpha, d.belief_system.beta) == (1.0, 1.0)
    with pytest.raises(ValueError):
        record_outcome(agent(), accepted=2, allocated=0, config=cfg)


def test_make_state_initials():
    bundle = tiny_bundle(n=4, regions=[0, 0, 1, 1])
    state = make_state(bundle, seed=9)
    assert state.period == 0 and state.rep_seed == 9
    assert [d.region for d in state.drivers] == [0, 0, 1, 1]
    assert all(d.status == IDLE for d in state.drivers)
    assert state.n_recommended.sum() == 0
    assert state.fares_by_driver.sum() == 0.0


def test_run_period_serves_colocated_first():
    # 2 idle drivers at A, 3 deterministic requests at A: 2 served at
    # once with zero wait, 1 expires
    bundle = tiny_bundle(n=2, mean=(3.0, 0.0))
    state, pm = run_period(make_state(bundle, 0), "b4")
    assert pm.served_initial.tolist() == [2, 0]
    assert pm.lost.tolist() == [1, 0]
    assert pm.waiting_total == 0.0
    cfg = bundle.config
    km = bundle.graph.distance[0, 0]
    assert pm.fares == pytest.approx(2 * (cfg.fare_base + cfg.fare_per_km * km))
    assert state.status_counts()[ON_TRIP] == 2


def test_run_period_reposition_arrivals_serve_late():
    # fully adherent drivers at A, demand only at B: the recommender
    # sends 3, they arrive after 4 minutes and clear the backlog
    bundle = tiny_bundle(n=6, mean=(0.0, 3.0), mu=1.0)
    state, pm = run_period(make_state(bundle, 0), "aavr")
    assert pm.served_initial.tolist() == [0, 0]
    assert pm.served_late.tolist() == [0, 3]
    assert pm.lost.sum() == 0
    assert pm.n_recommended == 3 and pm.n_accepted == 3
    assert pm.waiting_total == pytest.approx(3 * 4.0)
    assert pm.mean_waiting == pytest.approx(4.0)
    # a served arrival is a success for the belief about the system
    movers = [d for d in state.drivers if d.status == ON_TRIP]
    assert len(movers) == 3
    for d in movers:
        assert (d.belief_system.alpha, d.belief_system.beta) == (2.0, 1.0)


def test_run_period_leaves_input_state_untouched():
    bundle = tiny_bundle(n=2, mean=(3.0, 0.0))
    before = make_state(bundle, 0)
    after, _ = run_period(before, "b4")
    assert before.period == 0 and after.period == 1
    assert all(d.status == IDLE for d in before.drivers)
    assert before.n_allocated.sum() == 0
    assert after.n_allocated.sum() == 2


def test_run_period_solve_failure_reports_period():
    # literal balance zeroes the net-flow terms, so any region below its
    # target is unfixable and b3 is infeasible
    bundle = tiny_bundle(n=4, mean=(0.0, 3.0), literal_balance=True)
    state = make_state(bundle, 0)
    with pytest.raises(SolveFailed, match="infeasible") as exc_info:
        run_period(state, "b3")
    assert exc_info.value.period == 0
    assert state.period == 0    # input untouched on failure


def test_run_period_rejects_mismatched_plan():
    from aavr.rebalance import flows_to_drivers, solve_b4

    snap = opening_snapshot(tiny_bundle(n=5))
    plan = flows_to_drivers(solve_b4(snap), snap, model="b4")
    with pytest.raises(ValueError, match="idle drivers"):
        run_period(make_state(tiny_bundle(n=3), 0), "b4", plan=plan)


def test_plan_injection_matches_in_period_solve():
    bundle = tiny_bundle(n=6, mean=(0.0, 3.0), mu=0.7)
    from aavr.rebalance import solve_model
    plan = solve_model("aavr", opening_snapshot(bundle, seed=0))
    _, solved = run_period(make_state(bundle, 0), "aavr")
    _, injected = run_period(make_state(bundle, 0), "aavr", plan=plan)
    assert injected.served_total == solved.served_total
    assert injected.waiting_total == solved.waiting_total
    assert injected.n_accepted == solved.n_accepted


def test_rng_override_matches_rep_seed():
    bundle = tiny_bundle(n=4, mean=(2.0, 2.0), stddev=(1.0, 1.0), mu=0.5)
    _, a = run_period(make_state(bundle, 3), "b1")
    _, b = run_period(make_state(bundle, 3), "b1", rng=3)
    _, c = run_period(make_state(bundle, 3), "b1", rng=4)
    assert a.demand.tolist() == b.demand.tolist()
    assert a.served_total == b.served_total
    assert a.demand.tolist() != c.demand.tolist()


def test_run_replication_reproducible():
    bundle = tiny_bundle(n=5, mean=(1.0, 2.0), stddev=(0.5, 0.5), mu=0.5,
                         tt_sd=0.5)
    a = run_replication(bundle, "aavr", seed=1, n_periods=4)
    b = run_replication(bundle, "aavr", seed=1, n_periods=4)
    assert a.to_row() == b.to_row()
    assert a.served_total + a.lost_total == a.demand_total
    assert len(a.periods) == 4
    c = run_replication(bundle, "aavr", seed=2, n_periods=4)
    assert c.to_row() != a.to_row()


def test_run_replication_keep_periods_totals_match():
    bundle = tiny_bundle(n=5, mean=(1.0, 2.0), stddev=(0.5, 0.5), mu=0.5)
    full = run_replication(bundle, "b2", seed=0, n_periods=3)
    slim = run_replication(bundle, "b2", seed=0, n_periods=3,
                           keep_periods=False)
    assert slim.periods == []
    assert slim.to_row() == full.to_row()
    with pytest.raises(ValueError):
        run_replication(bundle, "b2", seed=0, n_periods=-1)


def test_common_random_numbers_across_models():
    bundle = tiny_bundle(n=5, mean=(2.0, 2.0), stddev=(1.0, 1.0), mu=0.5)
    a = run_replication(bundle, "b1", seed=11, n_periods=3)
    b = run_replication(bundle, "b4", seed=11, n_periods=3)
    for pa, pb in zip(a.periods, b.periods):
        assert pa.demand.tolist() == pb.demand.tolist()


def test_generative_bundle_replication():
    # exercises belief sampling and preference scoring (nothing pinned)
    bundle = synthetic_network(3, 6, seed=2)
    a = run_replication(bundle, "aavr", seed=0, n_periods=2)
    b = run_replication(bundle, "aavr", seed=0, n_periods=2)
    assert a.to_row() == b.to_row()
    assert a.served_total + a.lost_total == a.demand_total


def test_run_experiment_orders_and_validates():
    bundle = tiny_bundle(n=4, mean=(1.0, 1.0), stddev=(0.5, 0.5), mu=0.5)
    res = run_experiment(bundle, ["b1", "b4"], n_periods=2, n_seeds=2,
                         base_seed=5)
    assert res.seeds == [5, 6]
    assert [(r.model, r.seed) for r in res.rows] == [
        ("b1", 5), ("b1", 6), ("b4", 5), ("b4", 6)]
    assert [r.model for r in res.for_model("b4")] == ["b4", "b4"]
    with pytest.raises(ValueError):
        run_experiment(bundle, ["b1"], n_periods=0, n_seeds=1)
    with pytest.raises(ValueError):
        run_experiment(bundle, ["b1"], n_periods=1, n_seeds=0)
    with pytest.raises(ValueError, match="unknown model"):
        run_experiment(bundle, ["b9"], n_periods=1, n_seeds=1)


def test_run_experiment_all_expands_models():
    bundle = tiny_bundle(n=4, mean=(1.0, 1.0), mu=0.5)
    res = run_experiment(bundle, "all", n_periods=1, n_seeds=1)
    assert res.models == ["aavr", "b1", "b2", "b3", "b4"]


def test_run_experiment_jobs_do_not_change_results():
    bundle = tiny_bundle(n=4, mean=(1.0, 1.0), stddev=(0.5, 0.5), mu=0.5)
    serial = run_experiment(bundle, ["b1", "b4"], n_periods=2, n_seeds=2)
    parallel = run_experiment(bundle, ["b1", "b4"], n_periods=2, n_seeds=2,
                              jobs=2)
    assert [r.to_row() for r in serial.rows] == [r.to_row() for r in parallel.rows]


def test_summary_means():
    bundle = tiny_bundle(n=4, mean=(1.0, 1.0), stddev=(0.5, 0.5), mu=0.5)
    res = run_experiment(bundle, ["b1"], n_periods=2, n_seeds=3)
    row = res.summary()[0]
    expect = np.mean([r.served_total for r in res.rows])
    assert row["model"] == "b1" and row["seeds"] == 3
    assert float(row["mean_served"]) == pytest.approx(expect)


def test_csv_writers(tmp_path):
    bundle = tiny_bundle(n=4, mean=(1.0, 1.0), stddev=(0.5, 0.5), mu=0.5)
    res = run_experiment(bundle, ["b1", "b2"], n_periods=2, n_seeds=2)
    mpath, spath, ppath = (tmp_path / n for n in
                           ("metrics.csv", "summary.csv", "periods.csv"))
    write_metrics_csv(res, mpath)
    write_summary_csv(res, spath)
    write_period_csv(res, ppath)
    with open(mpath, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert rows[0]["model"] == "b1" and rows[0]["seed"] == "0"
    assert {"served_total", "mean_waiting_min", "driver_profit"} <= rows[0].keys()
    with open(spath, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["model"] for r in rows] == ["b1", "b2"]
    with open(ppath, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 2 * 2
    assert {r["period"] for r in rows} == {"0", "1"}


def test_empty_experiment_result_headers(tmp_path):
    res = ExperimentResult(models=["aavr"], seeds=[], rows=[])
    path = tmp_path / "metrics.csv"
    write_metrics_csv(res, path)
    with open(path, newline="") as fh:
        header = fh.readline().strip()
    assert header.startswith("model,seed,periods,served_total")


def test_opening_snapshot_reflects_bundle():
    bundle = tiny_bundle(n=5, mean=(0.0, 3.0), mu=0.25, regions=[0, 0, 0, 1, 1])
    snap = opening_snapshot(bundle)
    assert snap.driver_ids.tolist() == [0, 1, 2, 3, 4]
    assert snap.regions.tolist() == [0, 0, 0, 1, 1]
    assert snap.mu.tolist() == [0.25] * 5
    assert snap.nu.tolist() == forecast_nu(bundle, 0, 1.0).tolist()


def test_forecast_nu_profile_and_scale():
    profile = np.ones(24)
    profile[1] = 2.0
    bundle = tiny_bundle(n=2, mean=(0.0, 3.0), profile=profile)
    # horizon 5 min: period 13 starts at minute 65 -> hour 1
    assert forecast_nu(bundle, 0, 1.0).tolist() == [0.0, 3.0]
    assert forecast_nu(bundle, 13, 1.0).tolist() == [0.0, 6.0]
    assert forecast_nu(bundle, 0, 2.0).tolist() == [0.0, 6.0]


def test_monte_carlo_case_study_basics():
    bundle = tiny_bundle(n=6, mean=(0.0, 3.0), mu=1.0)
    out = monte_carlo_case_study(bundle, "aavr", n_replications=3)
    assert out["replications"] == 3
    assert out["recommended"] == 3
    assert out["mean_served"] == pytest.approx(3.0)
    assert out["mean_accepted"] == pytest.approx(3.0)
    with pytest.raises(ValueError):
        monte_carlo_case_study(bundle, "aavr", n_replications=0)
