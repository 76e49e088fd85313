import numpy as np
import pytest

from modularbus.instance import (
    BusType,
    DemandMatrix,
    FleetSpec,
    IncentiveSpec,
    RoadNetwork,
    SchemaError,
    Station,
    apportion_largest_remainder,
    derive_metrics,
    generate_demand,
    load_instance,
    to_document,
)


def net(n, edges, speed=30.0):
    return RoadNetwork(
        stations=tuple(Station(i, f"S{i}") for i in range(n)),
        edges=tuple(edges),
        bus_speed=speed,
    )


class TestDeriveMetrics:
    def test_triangle_unit_edges(self):
        m = derive_metrics(net(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]))
        off = ~np.eye(3, dtype=bool)
        assert np.allclose(m.dist[off], 1.0)
        assert np.allclose(m.time[off], 1.0 / 30.0)
        assert np.allclose(np.diagonal(m.dist), 0.0)

    def test_path_graph_sums(self):
        m = derive_metrics(net(3, [(0, 1, 2.0), (1, 2, 2.0)]))
        assert m.dist[0, 2] == pytest.approx(4.0)
        assert m.time[0, 2] == pytest.approx(4.0 / 30.0)

    def test_single_edge_time(self):
        m = derive_metrics(net(2, [(0, 1, 3.0)]))
        assert m.time[0, 1] == pytest.approx(0.1)

    def test_long_edge_shortcut(self):
        # direct 5 km edge loses to the 1+1 two-hop path
        m = derive_metrics(net(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]))
        assert m.dist[0, 2] == pytest.approx(2.0)

    def test_disconnected_rejected(self):
        with pytest.raises(SchemaError):
            net(4, [(0, 1, 1.0), (2, 3, 1.0)])

    @pytest.mark.parametrize("seed", range(8))
    def test_closure_properties(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 7))
        edges = [(i, i + 1, float(rng.integers(1, 9))) for i in range(n - 1)]
        for _ in range(n):
            a, b = (int(v) for v in rng.integers(0, n, 2))
            if a != b:
                edges.append((a, b, float(rng.integers(1, 9))))
        m = derive_metrics(net(n, edges))
        d = m.dist
        assert np.allclose(d, d.T)
        for mid in range(n):
            assert (d <= d[:, [mid]] + d[[mid], :] + 1e-9).all()
        # idempotence: closing the closed matrix changes nothing
        again = np.minimum.reduce([d[:, [k]] + d[[k], :] for k in range(n)])
        assert np.allclose(np.minimum(d, again), d)


class TestGenerateDemand:
    def test_zero_total(self):
        assert generate_demand(3, 0, 4).q.sum() == 0

    def test_apportionment_tie_goes_lexicographic(self):
        shares = apportion_largest_remainder({(0, 1): 1, (1, 0): 1}, 5)
        assert shares == {(0, 1): 3, (1, 0): 2}

    def test_apportionment_exact_split(self):
        shares = apportion_largest_remainder({"a": 2, "b": 1, "c": 1}, 8)
        assert shares == {"a": 4, "b": 2, "c": 2}

    @pytest.mark.parametrize("seed,total,n", [(0, 100, 7), (5, 13, 3), (9, 4, 4), (2, 1, 2)])
    def test_postconditions(self, seed, total, n):
        dm = generate_demand(seed, total, n)
        assert int(dm.q.sum()) == total
        assert (dm.q >= 0).all()
        assert not np.diagonal(dm.q).any()

    def test_deterministic(self):
        a = generate_demand(11, 50, 5)
        b = generate_demand(11, 50, 5)
        assert (a.q == b.q).all()
        assert (a.q != generate_demand(12, 50, 5).q).any()


class TestValidation:
    def test_negative_edge(self):
        with pytest.raises(SchemaError, match="edges"):
            net(2, [(0, 1, -1.0)])

    def test_self_loop(self):
        with pytest.raises(SchemaError, match="self-loop"):
            net(2, [(0, 0, 1.0), (0, 1, 1.0)])

    def test_fleet_invariants(self):
        with pytest.raises(SchemaError, match="increasing"):
            FleetSpec(num_routes=1, unit_capacity=10, types=(BusType(1, 0.5), BusType(2, 0.4)), max_units=2)
        with pytest.raises(SchemaError, match="max_units"):
            FleetSpec(num_routes=3, unit_capacity=10, types=(BusType(1, 0.35),), max_units=2)

    def test_incentive_invariants(self):
        with pytest.raises(SchemaError, match="cost 0"):
            IncentiveSpec(cons=1.0, costs=(1.0, 2.0))
        with pytest.raises(SchemaError, match="increasing"):
            IncentiveSpec(cons=1.0, costs=(0.0, 2.0, 2.0))
        with pytest.raises(SchemaError, match="positive"):
            IncentiveSpec(cons=0.0, costs=(0.0, 1.0))

    def test_demand_invariants(self):
        with pytest.raises(SchemaError, match="diagonal"):
            DemandMatrix(q=np.eye(3, dtype=np.int64))
        with pytest.raises(SchemaError, match="non-negative"):
            DemandMatrix(q=np.array([[0, -1], [0, 0]]))


class TestLoadInstance:
    def doc(self):
        return {
            "network": {
                "stations": ["a", "b", "c"],
                "edges": [[0, 1, 1.0], [1, 2, 1.0], [0, 2, 1.0]],
                "bus_speed": 30,
            },
            "demand": {"seed": 1, "total": 6},
            "fleet": {
                "num_routes": 1,
                "unit_capacity": 10,
                "max_units": 3,
                "types": [{"p": 1, "cost_per_km": 0.35}],
            },
            "incentives": {"cons": 1.0, "costs": [0, 1]},
            "costs": {"c_t": 6.0, "c_e": 3.7, "weights": [0.4, 0.4, 0.2], "T_bar_minutes": 26},
        }

    def test_triangle_document(self):
        inst = load_instance(self.doc())
        assert inst.n_stations == 3
        assert inst.metrics.time[0, 1] == pytest.approx(1.0 / 30.0)
        assert inst.demand.total == 6
        assert inst.costs.max_route_duration == pytest.approx(26.0 / 60.0)

    def test_missing_bus_speed_names_field(self):
        doc = self.doc()
        del doc["network"]["bus_speed"]
        with pytest.raises(SchemaError, match="network.bus_speed"):
            load_instance(doc)

    def test_demand_total_mismatch_names_field(self):
        doc = self.doc()
        doc["demand"] = {"matrix": [[0, 1, 0], [0, 0, 0], [1, 0, 0]], "total": 5}
        with pytest.raises(SchemaError, match="demand.total"):
            load_instance(doc)

    def test_bundled_example7(self, example7_path):
        inst = load_instance(example7_path)
        assert inst.n_stations == 7
        assert len(inst.network.edges) == 9
        assert inst.fleet.num_routes == 3
        assert inst.fleet.max_units == 8
        assert [t.cost_per_km for t in inst.fleet.types] == [0.35, 0.5, 0.7]
        assert list(inst.incentives.costs) == [0, 1, 2, 3]
        assert inst.demand.total == 100

    def test_deterministic_load(self, example7_path):
        a = load_instance(example7_path)
        b = load_instance(example7_path)
        assert a.digest() == b.digest()
        assert (a.demand.q == b.demand.q).all()

    def test_json_text_source(self):
        import json

        inst = load_instance(json.dumps(self.doc()))
        assert inst.n_stations == 3

    def test_roundtrip_document(self):
        inst = load_instance(self.doc())
        again = load_instance(to_document(inst))
        assert again.digest() == inst.digest()

    def test_arrays_frozen(self):
        inst = load_instance(self.doc())
        with pytest.raises(ValueError):
            inst.demand.q[0, 1] = 99
        with pytest.raises(ValueError):
            inst.metrics.dist[0, 1] = 99.0
