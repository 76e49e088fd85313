import numpy as np
import pytest

from conftest import random_tiny_instance, relay_tiny_instance, two_station_instance
from modularbus.choice import DrawSet, sample_draws
from modularbus.formulation import (
    build_elp,
    build_mtz_variant,
    compute_big_m,
    expected_constraint_count,
    expected_variable_count,
    make_lazy_separator,
    separate_subtours,
    subtour_cut_sets,
)
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
from modularbus.milp import BINARY, CONTINUOUS, MilpModel
from modularbus.solver import SolverConfig, solve_milp

DENSE = SolverConfig(lp_backend="dense")


def three_station_instance(S=4, total=2):
    net = RoadNetwork(
        stations=tuple(Station(i, f"S{i}") for i in range(3)),
        edges=((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.5)),
        bus_speed=30.0,
    )
    q = np.zeros((3, 3), dtype=np.int64)
    if total:
        q[0, 2] = total
    return make_instance(
        net,
        DemandMatrix(q=q),
        FleetSpec(num_routes=1, unit_capacity=2, types=(BusType(1, 0.35), BusType(2, 0.5)), max_units=2),
        IncentiveSpec(cons=1.0, costs=tuple(float(s) for s in range(S))),
        CostParams(c_t=6.0, c_e=3.7, weights=(0.4, 0.4, 0.2), max_route_duration=0.5),
    )


class TestVariableDomains:
    def test_family_sizes_three_stations(self):
        # |F|=3, K=1, S=4, D=2
        inst = three_station_instance()
        draws = sample_draws(0, 2, 3, 1)
        art = build_elp(inst, draws)
        assert len(art.index["x"]) == 1 * (3 * 2 + 2 * 3) == 12
        assert len(art.index["w"]) == 3 * 1 * 2 * 2 == 12
        assert len(art.index["p"]) == 3 * 1 * 4 == 12
        assert len(art.index["z"]) == 6 * 4 * 1
        assert len(art.index["r"]) == len(art.index["b"]) == 6

    @pytest.mark.parametrize("seed", [0, 2, 3, 5])
    @pytest.mark.parametrize("mode", ["lazy", "mtz"])
    def test_totals_match_counting_formulas(self, seed, mode):
        inst, D = (random_tiny_instance(seed) if seed % 3 != 2 else relay_tiny_instance(seed))
        draws = sample_draws(seed, D, inst.n_stations, inst.fleet.num_routes)
        art = build_elp(inst, draws, subtour_mode=mode)
        assert art.model.n_variables == expected_variable_count(inst, D, mode)
        assert art.model.n_constraints == expected_constraint_count(inst, D, mode)

    def test_no_incentive_adds_pin_rows(self):
        inst = three_station_instance()
        draws = sample_draws(0, 2, 3, 1)
        art = build_elp(inst, draws, no_incentive=True)
        pins = [c for c in art.model.constraints if c.name.startswith("noinc[")]
        assert len(pins) == len(art.index["r"])
        assert all(c.sense == "=" and c.rhs == 0.0 for c in pins)
        assert art.model.n_constraints == expected_constraint_count(inst, 2, "lazy", no_incentive=True)

    def test_dimension_mismatch_rejected(self):
        inst = three_station_instance()
        with pytest.raises(ValueError, match="does not match"):
            build_elp(inst, sample_draws(0, 2, 4, 1))


class TestBigM:
    def test_incentive_bound_is_product(self):
        inst = three_station_instance(total=0)
        q = np.zeros((3, 3), dtype=np.int64)
        q[0, 2] = 5
        inst = make_instance(inst.network, DemandMatrix(q=q), inst.fleet, inst.incentives, inst.costs)
        bm = compute_big_m(inst, sample_draws(0, 2, 3, 1))
        assert bm.incentive[0, 2] == pytest.approx(15.0)  # ic_max 3 x demand 5

    def test_utility_bound_formula(self):
        inst = three_station_instance()
        xi = np.zeros((3, 1, 1, 2))
        xi[:, :, 0] = (0.2, -0.5)
        bm = compute_big_m(inst, DrawSet(xi=xi, seed=0))
        # (cons + ic_max) + |xi1| + |xi2| + 1 = 4 + 0.7 + 1
        assert bm.utility[0, 0, 0] == pytest.approx(5.7)

    def test_route_cost_bound_from_duration(self):
        inst = three_station_instance()
        # speed 30 km/h for at most 26 min reaches 13 km
        inst = make_instance(
            inst.network,
            inst.demand,
            FleetSpec(num_routes=1, unit_capacity=10, types=(BusType(1, 0.7),), max_units=1),
            inst.incentives,
            CostParams(c_t=6.0, c_e=3.7, weights=(0.4, 0.4, 0.2), max_route_duration=26.0 / 60.0),
        )
        bm = compute_big_m(inst, sample_draws(0, 1, 3, 1))
        assert bm.route_cost[0, 0] == pytest.approx(9.1)

    def test_transfer_bounds_equal_demand(self):
        inst = three_station_instance(total=3)
        bm = compute_big_m(inst, sample_draws(0, 2, 3, 1))
        assert bm.transfer[0, 2] == 3 and bm.saa[0, 2] == 3


class TestZeroDemand:
    def test_optimal_objective_zero(self):
        inst = three_station_instance(total=0)
        draws = sample_draws(1, 2, 3, 1)
        art = build_elp(inst, draws)
        sol = solve_milp(art.model, DENSE, lazy=make_lazy_separator(art))
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(0.0, abs=1e-9)
        for key, vid in art.index["z"].items():
            assert sol.values[vid] == pytest.approx(0.0, abs=1e-6)
        for (m, k, s), vid in art.index["p"].items():
            if s == 1:
                assert sol.values[vid] == pytest.approx(1.0, abs=1e-6)


class TestSubtourSeparation:
    def test_detached_cycle_found(self):
        cuts = subtour_cut_sets({("s", 1), (1, "t"), (2, 3), (3, 2)}, 4)
        assert cuts == [frozenset({2, 3})]

    def test_simple_path_clean(self):
        assert subtour_cut_sets({("s", 1), (1, 2), (2, "t")}, 3) == []

    def test_two_disjoint_cycles_two_cuts(self):
        arcs = {("s", 0), (0, "t"), (1, 2), (2, 1), (3, 4), (4, 3)}
        cuts = subtour_cut_sets(arcs, 5)
        assert sorted(map(sorted, cuts)) == [[1, 2], [3, 4]]

    def test_spanning_lasso_detected(self):
        # s->1->2->3->1->t revisits station 1; proper-subset cuts alone miss it
        arcs = {("s", 1), (1, 2), (2, 3), (3, 1), (1, "t")}
        cuts = subtour_cut_sets(arcs, 3)
        assert cuts, "lasso support must produce a cut"
        assert any(len(fs) >= 2 for fs in cuts)

    def test_separator_requires_integral_x(self):
        inst = three_station_instance()
        draws = sample_draws(0, 1, 3, 1)
        art = build_elp(inst, draws)
        from modularbus.solver import Solution

        values = {vid: 0.0 for vid in range(art.model.n_variables)}
        values[art.var("x", "s", 0, 0)] = 0.5
        with pytest.raises(ValueError, match="integral"):
            separate_subtours(art, Solution("optimal", 0.0, values, 0.0))

    def test_cut_terms_reference_one_bus(self):
        inst = relay_tiny_instance(2)[0]
        draws = sample_draws(0, 2, inst.n_stations, inst.fleet.num_routes)
        art = build_elp(inst, draws)
        from modularbus.solver import Solution

        values = {vid: 0.0 for vid in range(art.model.n_variables)}
        # bus 0: s->0, 0->t plus detached 1<->2 cycle
        values[art.var("x", "s", 0, 0)] = 1.0
        values[art.var("x", 0, "t", 0)] = 1.0
        values[art.var("x", 1, 2, 0)] = 1.0
        values[art.var("x", 2, 1, 0)] = 1.0
        values[art.var("x", "s", 0, 1)] = 1.0
        values[art.var("x", 0, "t", 1)] = 1.0
        cuts = separate_subtours(art, Solution("optimal", 0.0, values, 0.0))
        assert len(cuts) == 1
        terms, sense, rhs = cuts[0]
        assert sense == "<=" and rhs == 1.0
        assert sorted(vid for vid, _ in terms) == sorted(
            [art.var("x", 1, 2, 0), art.var("x", 2, 1, 0)]
        )


class TestModesAgree:
    # the acceptance gate re-checks this on the full tiny-instance bed
    @pytest.mark.parametrize("seed", [0, 2, 4])
    def test_lazy_equals_mtz(self, seed):
        inst, D = (relay_tiny_instance(seed) if seed % 3 == 2 else random_tiny_instance(seed))
        draws = sample_draws(seed + 50, D, inst.n_stations, inst.fleet.num_routes)
        lazy_art = build_elp(inst, draws)
        lazy_sol = solve_milp(lazy_art.model, SolverConfig(), lazy=make_lazy_separator(lazy_art))
        mtz_art = build_mtz_variant(inst, draws)
        mtz_sol = solve_milp(mtz_art.model, SolverConfig())
        assert lazy_sol.status == mtz_sol.status == "optimal"
        assert lazy_sol.objective == pytest.approx(mtz_sol.objective, abs=1e-6)


# ---------------------------------------------------------------------------
# linearization fidelity on miniature models
# ---------------------------------------------------------------------------

def _pin(model, name, value):
    vid = model.add_variable(name, BINARY)
    model.add_constraint(f"fix_{name}", [(vid, 1.0)], "=", float(value))
    return vid


@pytest.mark.parametrize("direction", [1.0, -1.0])
def test_max_linearization_reproduces_max(direction):
    rng = np.random.default_rng(61)
    for _ in range(60):
        arr = int(rng.integers(0, 6))
        dep = int(rng.integers(0, 6))
        big = 10.0
        m = MilpModel()
        r = m.add_variable("r", CONTINUOUS, 0, big)
        b = m.add_variable("b", BINARY)
        diff = float(arr - dep)
        m.add_constraint("lb", [(r, 1.0)], ">=", diff)
        m.add_constraint("ub", [(r, 1.0), (b, big)], "<=", diff + big)
        m.add_constraint("ind", [(r, 1.0), (b, -big)], "<=", 0.0)
        m.set_objective([(r, direction)])
        sol = solve_milp(m, DENSE)
        assert sol.status == "optimal"
        assert sol.values[r] == pytest.approx(max(diff, 0.0), abs=1e-7)


@pytest.mark.parametrize("direction", [1.0, -1.0])
def test_indicator_product_reproduces_gated_copy(direction):
    rng = np.random.default_rng(62)
    for _ in range(60):
        arr = float(rng.integers(0, 7))
        won = int(rng.integers(0, 2))
        big = 10.0
        m = MilpModel()
        t = m.add_variable("t", CONTINUOUS, 0, big)
        w = _pin(m, "w", won)
        m.add_constraint("lb", [(t, 1.0), (w, -big)], ">=", arr - big)
        m.add_constraint("ub", [(t, 1.0), (w, big)], "<=", arr + big)
        m.add_constraint("ind", [(t, 1.0), (w, -big)], "<=", 0.0)
        m.set_objective([(t, direction)])
        sol = solve_milp(m, DENSE)
        assert sol.status == "optimal"
        assert sol.values[t] == pytest.approx(arr if won else 0.0, abs=1e-7)


@pytest.mark.parametrize("direction", [1.0, -1.0])
def test_binary_value_product_reproduces_product(direction):
    rng = np.random.default_rng(63)
    for _ in range(60):
        value = float(rng.integers(0, 9)) * 0.7
        active = int(rng.integers(0, 2))
        big = 12.0
        m = MilpModel()
        c = m.add_variable("c", CONTINUOUS, 0, big)
        y = _pin(m, "y", active)
        m.add_constraint("lb", [(c, 1.0), (y, -big)], ">=", value - big)
        m.add_constraint("ub", [(c, 1.0), (y, big)], "<=", value + big)
        m.add_constraint("ind", [(c, 1.0), (y, -big)], "<=", 0.0)
        m.set_objective([(c, direction)])
        sol = solve_milp(m, DENSE)
        assert sol.status == "optimal"
        assert sol.values[c] == pytest.approx(value * active, abs=1e-7)


def test_big_m_never_cuts_optimal_behaviour():
    """At solved optima the attained bracketed expressions stay within their big-M."""
    for seed in (2, 5, 8):
        inst, D = (relay_tiny_instance(seed) if seed % 3 == 2 else random_tiny_instance(seed))
        draws = sample_draws(seed, D, inst.n_stations, inst.fleet.num_routes)
        art = build_elp(inst, draws)
        sol = solve_milp(art.model, SolverConfig(), lazy=make_lazy_separator(art))
        assert sol.status == "optimal"
        vals = sol.values
        inst_q = inst.demand.q
        for (i, j, m, k), rid in art.index["r"].items():
            arr = sum(
                vals[art.index["z"][(i, j, u, m, k)]]
                for u in range(inst.n_stations)
                if u != m and u != j
            )
            assert arr <= art.big_m.transfer[i, j] + 1e-6
            assert vals[rid] <= art.big_m.transfer[i, j] + 1e-6
        for (m, k, d), vid in art.index["AU"].items():
            xi = draws.xi[m, k, d]
            spread = abs(vals[vid] - xi[0])
            assert spread <= art.big_m.utility[m, k, d] + 1e-6
        for (k, p), vid in art.index["Co"].items():
            ti = [t.p for t in inst.fleet.types].index(p)
            assert vals[vid] <= art.big_m.route_cost[k, ti] + 1e-6


def test_two_station_instance_has_no_transfer_machinery():
    inst = two_station_instance()
    draws = sample_draws(3, 2, 2, 1)
    art = build_elp(inst, draws)
    assert len(art.index["r"]) == 0 and len(art.index["T"]) == 0 and len(art.index["R"]) == 0
    sol = solve_milp(art.model, DENSE, lazy=make_lazy_separator(art))
    assert sol.status == "optimal"
