import numpy as np
import pytest

from aavr.core import (
    PlanningHorizon,
    RegionGraph,
    ScenarioConfig,
    reachability_fraction,
    seeded_rng,
)


def test_seeded_rng_is_reproducible():
    a = seeded_rng(3, "demand/0").random(5)
    b = seeded_rng(3, "demand/0").random(5)
    assert np.array_equal(a, b)


def test_seeded_rng_streams_differ_by_label_and_seed():
    base = seeded_rng(3, "demand/0").random(5)
    assert not np.array_equal(base, seeded_rng(3, "demand/1").random(5))
    assert not np.array_equal(base, seeded_rng(4, "demand/0").random(5))


def test_seeded_rng_rejects_bad_labels():
    with pytest.raises(ValueError):
        seeded_rng(0, "")
    with pytest.raises(ValueError):
        seeded_rng(0, None)


def test_planning_horizon_validation():
    assert PlanningHorizon(5.0).minutes == 5.0
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            PlanningHorizon(bad)


def test_region_graph_validation():
    ok = RegionGraph(distance=np.zeros((2, 2)),
                     expected_travel_time=np.zeros((2, 2)),
                     travel_time_stddev=np.zeros((2, 2)))
    assert ok.n_regions == 2
    with pytest.raises(ValueError):
        RegionGraph(distance=np.zeros((2, 3)),
                    expected_travel_time=np.zeros((2, 2)),
                    travel_time_stddev=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        RegionGraph(distance=np.zeros((2, 2)),
                    expected_travel_time=np.full((2, 2), -1.0),
                    travel_time_stddev=np.zeros((2, 2)))
    with pytest.raises(ValueError):   # nonzero diagonal
        RegionGraph(distance=np.eye(2),
                    expected_travel_time=np.zeros((2, 2)),
                    travel_time_stddev=np.zeros((2, 2)))


def test_region_graph_arrays_are_read_only(graph_ab):
    with pytest.raises(ValueError):
        graph_ab.distance[0, 1] = 9.0


def test_config_defaults_and_coercion():
    cfg = ScenarioConfig(horizon=7)
    assert cfg.horizon.minutes == 7.0
    assert cfg.gamma is None and cfg.node_budget is None
    assert ScenarioConfig(node_budget=10.0).node_budget == 10


@pytest.mark.parametrize("kwargs", [
    {"beta": -1.0},
    {"rho": 0.0},
    {"gamma": -2.0},
    {"epsilon0": 0.0},
    {"M": 0},
    {"commission_rate": 1.5},
    {"fare_base": -0.1},
    {"node_budget": 0},
])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        ScenarioConfig(**kwargs)


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"beta": 0.005, "horizon": 10, "node_budget": 60}')
    cfg = ScenarioConfig.from_file(path)
    assert cfg.beta == 0.005
    assert cfg.horizon.minutes == 10.0
    assert cfg.node_budget == 60
    d = cfg.to_dict()
    assert d["horizon"] == 10.0 and d["beta"] == 0.005


def test_config_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"nope": 1}')
    with pytest.raises(ValueError, match="unknown keys"):
        ScenarioConfig.from_file(path)


def test_reachability_counts_ordered_pairs(graph_ab):
    # diagonal always reachable; the A<->B legs need 4 minutes
    assert reachability_fraction(graph_ab, PlanningHorizon(1.0)) == 0.5
    assert reachability_fraction(graph_ab, PlanningHorizon(4.0)) == 1.0
