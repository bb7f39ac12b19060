import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))   # for oracles.py

from aavr.core import RegionGraph, ScenarioConfig
from aavr.rebalance import FleetSnapshot


@pytest.fixture
def graph_ab():
    """Two regions, 4 minutes apart."""
    return RegionGraph(
        distance=np.array([[0.0, 2.0], [2.0, 0.0]]),
        expected_travel_time=np.array([[0.0, 4.0], [4.0, 0.0]]),
        travel_time_stddev=np.zeros((2, 2)),
    )


@pytest.fixture
def small_snapshot(graph_ab):
    """Five drivers at A, all demand at B."""
    n = 5
    return FleetSnapshot(
        driver_ids=np.arange(n),
        regions=np.zeros(n, dtype=np.int64),
        mu=np.full(n, 0.5),
        L=np.tile([1.0, 0.0], (n, 1)),
        nu=np.array([0.0, 2.0]),
        graph=graph_ab,
        config=ScenarioConfig(),
    )
