import numpy as np
import pytest

from conftest import relay_tiny_instance, two_station_instance
from modularbus.choice import sample_draws
from modularbus.evaluate import (
    BusPlan,
    DesignOutcome,
    KPI_CSV_HEADER,
    TransferPlan,
    compute_kpis,
    decode,
    kpi_csv_row,
    validate_nonlinear,
)
from modularbus.formulation import build_elp, make_lazy_separator
from modularbus.instance import (
    BusType,
    CostParams,
    DemandMatrix,
    FleetSpec,
    IncentiveSpec,
    RoadNetwork,
    Station,
    make_instance,
)
from modularbus.solver import Solution, SolverConfig, solve_milp


def five_station_instance():
    net = RoadNetwork(
        stations=tuple(Station(i, str(i + 1)) for i in range(5)),
        edges=tuple((i, i + 1, 1.0) for i in range(4)),
        bus_speed=30.0,
    )
    q = np.zeros((5, 5), dtype=np.int64)
    q[3, 4] = 2
    return make_instance(
        net,
        DemandMatrix(q=q),
        FleetSpec(num_routes=1, unit_capacity=2, types=(BusType(1, 0.35),), max_units=1),
        IncentiveSpec(cons=1.0, costs=(0.0, 1.0)),
        CostParams(c_t=6.0, c_e=3.7, weights=(0.4, 0.4, 0.2), max_route_duration=0.5),
    )


def hand_solution(art, assignments):
    values = {vid: 0.0 for vid in range(art.model.n_variables)}
    for (family, idx), val in assignments.items():
        values[art.var(family, *idx)] = float(val)
    return Solution("optimal", 0.0, values, 0.0)


class TestDecode:
    def test_route_follows_arcs(self):
        inst = five_station_instance()
        draws = sample_draws(0, 1, 5, 1)
        art = build_elp(inst, draws)
        assign = {
            ("x", ("s", 3, 0)): 1,
            ("x", (3, 4, 0)): 1,
            ("x", (4, "t", 0)): 1,
            ("y", (1, 0)): 1,
        }
        for m in range(5):
            assign[("p", (m, 0, 1))] = 1
        sol = hand_solution(art, assign)
        out = decode(sol, art)
        assert out.bus_plans[0].route == [3, 4]
        assert out.bus_plans[0].capacity == 2
        assert out.served_total == 0
        kpis = compute_kpis(out, inst)
        assert kpis.sr_pct == 0.0
        assert kpis.aivtt_min is None and kpis.tr_pct is None

    def test_branching_support_rejected(self):
        inst = five_station_instance()
        art = build_elp(inst, sample_draws(0, 1, 5, 1))
        assign = {
            ("x", ("s", 3, 0)): 1,
            ("x", (3, 4, 0)): 1,
            ("x", (3, 2, 0)): 1,
            ("x", (4, "t", 0)): 1,
            ("y", (1, 0)): 1,
        }
        with pytest.raises(ValueError, match="branching"):
            decode(hand_solution(art, assign), art)

    def test_fractional_values_rejected(self):
        inst = five_station_instance()
        art = build_elp(inst, sample_draws(0, 1, 5, 1))
        assign = {("x", ("s", 3, 0)): 0.4}
        with pytest.raises(ValueError, match="not integral"):
            decode(hand_solution(art, assign), art)


def hand_outcome(inst, *, load=1, r_extra=0):
    # one bus 0 -> 1, `load` passengers of OD (0, 1)
    plan = BusPlan(
        k=0,
        p=1,
        capacity=inst.fleet.unit_capacity,
        route=[0, 1],
        loads={(0, 1): load},
        length_km=float(inst.metrics.dist[0, 1]),
        time_h=float(inst.metrics.time[0, 1]),
        served=load,
    )
    r = {}
    transfer_plans = []
    if r_extra:
        r[(0, 1, 2, 0)] = r_extra
        transfer_plans.append(TransferPlan(station=2, k=0, strategy=1, incentive_cost=0.0, count=r_extra))
    return DesignOutcome(
        bus_plans=[plan],
        transfer_plans=transfer_plans,
        z={(0, 1, 0, 1, 0): load},
        r=r,
        strategy={(m, 0): 1 for m in range(inst.n_stations)},
        served_od={(0, 1): load},
        objective=None,
    )


class TestValidateNonlinear:
    def test_feasible_two_station_outcome_clean(self):
        inst = two_station_instance()
        draws = sample_draws(1, 3, 2, 1)
        report = validate_nonlinear(hand_outcome(inst), inst, draws)
        assert report.ok, report.violations

    def test_capacity_violation_flagged(self):
        inst = two_station_instance()
        draws = sample_draws(1, 3, 2, 1)
        outcome = hand_outcome(inst, load=3)  # capacity is 2
        report = validate_nonlinear(outcome, inst, draws)
        assert any(v.startswith("capacity[0,1,0]") for v in report.violations)

    def test_inflated_transfer_count_flagged(self):
        net = RoadNetwork(
            stations=tuple(Station(i, str(i)) for i in range(3)),
            edges=((0, 1, 1.0), (1, 2, 1.0)),
            bus_speed=30.0,
        )
        q = np.zeros((3, 3), dtype=np.int64)
        q[0, 1] = 1
        inst = make_instance(
            net,
            DemandMatrix(q=q),
            FleetSpec(num_routes=1, unit_capacity=2, types=(BusType(1, 0.35),), max_units=1),
            IncentiveSpec(cons=1.0, costs=(0.0, 1.0)),
            CostParams(c_t=6.0, c_e=3.7, weights=(0.4, 0.4, 0.2), max_route_duration=0.5),
        )
        draws = sample_draws(1, 3, 3, 1)
        outcome = hand_outcome(inst, r_extra=1)  # r without matching net alightings
        report = validate_nonlinear(outcome, inst, draws)
        assert any(v.startswith("transfercount[") for v in report.violations)

    def test_served_above_demand_flagged(self):
        inst = two_station_instance(demand_ab=1)
        draws = sample_draws(1, 3, 2, 1)
        report = validate_nonlinear(hand_outcome(inst, load=2), inst, draws)
        assert any(v.startswith("demand[0,1]") for v in report.violations)


class TestKpis:
    def test_component_arithmetic(self):
        inst = two_station_instance(edge_km=2.0, demand_ab=2)
        out = hand_outcome(inst, load=2)
        kp = compute_kpis(out, inst)
        assert kp.co1 == pytest.approx(0.35 * 2.0)  # cheapest type over 2 km
        assert kp.ttd_km == pytest.approx(2.0)
        # 2 passengers x (2 km / 30 km/h) x 6 $/h
        assert kp.ct == pytest.approx(2 * (2.0 / 30.0) * 6.0)
        assert kp.ce == pytest.approx(0.0)
        assert kp.sr_pct == pytest.approx(100.0)
        assert kp.tsc == pytest.approx(0.4 * kp.co1 + 0.4 * kp.ct + 0.2 * kp.ce)

    def test_travel_cost_example(self):
        # ten passengers riding 0.1 h each at 6 $/h -> 6 $
        inst = two_station_instance(edge_km=3.0, demand_ab=10)
        inst = make_instance(
            inst.network,
            inst.demand,
            FleetSpec(num_routes=1, unit_capacity=10, types=(BusType(1, 0.35),), max_units=1),
            inst.incentives,
            inst.costs,
        )
        out = hand_outcome(inst, load=10)
        kp = compute_kpis(out, inst)
        assert kp.ct == pytest.approx(6.0)
        assert kp.aivtt_min == pytest.approx(6.0)

    def test_service_rate_ratio(self):
        inst = two_station_instance(demand_ab=100)
        inst = make_instance(
            inst.network,
            inst.demand,
            FleetSpec(num_routes=1, unit_capacity=92, types=(BusType(1, 0.35),), max_units=1),
            inst.incentives,
            inst.costs,
        )
        out = hand_outcome(inst, load=92)
        kp = compute_kpis(out, inst)
        assert kp.sr_pct == pytest.approx(92.0)
        assert kp.ce == pytest.approx(3.7 * 8)

    def test_csv_row_shape(self):
        inst = two_station_instance()
        kp = compute_kpis(hand_outcome(inst), inst)
        row = kpi_csv_row(kp)
        assert len(row.split(",")) == len(KPI_CSV_HEADER.split(","))
        out0 = hand_outcome(inst, load=0)
        out0.served_od = {}
        out0.z = {}
        out0.bus_plans[0].loads = {}
        out0.bus_plans[0].served = 0
        row0 = kpi_csv_row(compute_kpis(out0, inst))
        assert row0.split(",")[1] == "nan"  # undefined AIVTT, not zero


class TestSolvedPipelineConsistency:
    @pytest.mark.parametrize("seed", [2, 5])
    def test_objective_reconstruction(self, seed):
        inst, D = relay_tiny_instance(seed)
        draws = sample_draws(seed, D, inst.n_stations, inst.fleet.num_routes)
        art = build_elp(inst, draws)
        sol = solve_milp(art.model, SolverConfig(), lazy=make_lazy_separator(art))
        assert sol.status == "optimal"
        out = decode(sol, art)
        report = validate_nonlinear(out, inst, draws)
        assert report.ok, report.violations
        kp = compute_kpis(out, inst)
        assert kp.tsc == pytest.approx(sol.objective, abs=1e-6)
        assert out.served_total == sum(out.served_od.values())
