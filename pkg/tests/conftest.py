"""Shared builders for the test suite.

tiny_instance mixes two families inside the oracle's tiny limits: random
connected networks with scattered demand, and "relay" line networks whose
duration cap is too short for one bus to cover the line, so passenger
hand-offs between buses actually pay off and the transfer machinery gets
exercised end to end.
"""

import numpy as np
import pytest

from modularbus.instance import (
    BusType,
    CostParams,
    DemandMatrix,
    FleetSpec,
    IncentiveSpec,
    RoadNetwork,
    Station,
    generate_demand,
    make_instance,
)


def random_tiny_instance(seed: int):
    rng = np.random.default_rng(seed)
    n = int(rng.choice([2, 3, 3, 4]))
    perm = rng.permutation(n)
    edges = []
    seen = set()
    for a, b in zip(perm, perm[1:]):
        edges.append((int(a), int(b), float(rng.integers(10, 31)) / 10.0))
        seen.add(frozenset((int(a), int(b))))
    for _ in range(int(rng.integers(0, n))):
        a, b = (int(v) for v in rng.integers(0, n, 2))
        if a != b and frozenset((a, b)) not in seen:
            edges.append((a, b, float(rng.integers(10, 31)) / 10.0))
            seen.add(frozenset((a, b)))
    net = RoadNetwork(
        stations=tuple(Station(i, f"S{i}") for i in range(n)),
        edges=tuple(edges),
        bus_speed=30.0,
    )
    K = int(rng.integers(1, 3))
    fleet = FleetSpec(
        num_routes=K,
        unit_capacity=2,
        types=(BusType(1, 0.35), BusType(2, 0.5)),
        max_units=K + 1,
    )
    incentives = IncentiveSpec(cons=1.0, costs=(0.0, 1.0, 2.0))
    costs = CostParams(
        c_t=6.0,
        c_e=3.7,
        weights=(0.4, 0.4, 0.2),
        max_route_duration=float(rng.integers(12, 31)) / 60.0,
    )
    total = int(rng.integers(0, 5))
    demand = generate_demand(seed + 1000, total, n)
    inst = make_instance(net, demand, fleet, incentives, costs)
    n_draws = int(rng.integers(1, 6))
    return inst, n_draws


def relay_tiny_instance(seed: int):
    """Line network sized so through-demand must change buses midway."""
    rng = np.random.default_rng(seed)
    n = int(rng.choice([3, 4]))
    lengths = [float(rng.integers(15, 26)) / 10.0 for _ in range(n - 1)]
    edges = tuple((i, i + 1, lengths[i]) for i in range(n - 1))
    net = RoadNetwork(
        stations=tuple(Station(i, f"S{i}") for i in range(n)),
        edges=edges,
        bus_speed=30.0,
    )
    fleet = FleetSpec(
        num_routes=2,
        unit_capacity=2,
        types=(BusType(1, 0.35), BusType(2, 0.5)),
        max_units=3,
    )
    incentives = IncentiveSpec(cons=1.0, costs=(0.0, 1.0, 2.0, 3.0))
    # cap covers just over half the line: one bus cannot run end to end
    cap_h = (sum(lengths) * 0.62) / 30.0
    costs = CostParams(c_t=6.0, c_e=10.0, weights=(0.4, 0.4, 0.2), max_route_duration=cap_h)
    q = np.zeros((n, n), dtype=np.int64)
    q[0, n - 1] = int(rng.integers(1, 3))
    q[0, n - 2] += 1
    if int(q.sum()) < 4 and rng.random() < 0.5:
        q[1, n - 1] += 1
    demand = DemandMatrix(q=q)
    inst = make_instance(net, demand, fleet, incentives, costs)
    # four-station relays are the heaviest mix member; keep their draw count low
    n_draws = int(rng.integers(2, 4)) if n == 4 else int(rng.integers(2, 6))
    return inst, n_draws


def tiny_instance(seed: int):
    if seed % 3 == 2:
        return relay_tiny_instance(seed)
    return random_tiny_instance(seed)


def two_station_instance(edge_km=1.0, demand_ab=1, c_e=3.7):
    net = RoadNetwork(
        stations=(Station(0, "a"), Station(1, "b")),
        edges=((0, 1, edge_km),),
        bus_speed=30.0,
    )
    q = np.zeros((2, 2), dtype=np.int64)
    q[0, 1] = demand_ab
    return make_instance(
        net,
        DemandMatrix(q=q),
        FleetSpec(num_routes=1, unit_capacity=2, types=(BusType(1, 0.35), BusType(2, 0.5)), max_units=2),
        IncentiveSpec(cons=1.0, costs=(0.0, 1.0, 2.0, 3.0)),
        CostParams(c_t=6.0, c_e=c_e, weights=(0.4, 0.4, 0.2), max_route_duration=0.5),
    )


@pytest.fixture
def example7_path():
    from pathlib import Path

    return str(Path(__file__).resolve().parents[1] / "src" / "modularbus" / "data" / "example7.instance")
