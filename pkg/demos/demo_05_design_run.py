"""End-to-end design on a small relay network where transfers genuinely help.

The duration cap is deliberately too short for one bus to run the whole
line, so through-passengers must change buses midway; the optimizer picks
the cheapest incentive level that makes enough passengers willing.
"""

import numpy as np

from modularbus import (
    BusType,
    CostParams,
    DemandMatrix,
    FleetSpec,
    IncentiveSpec,
    RoadNetwork,
    SolverConfig,
    Station,
    build_mtz_variant,
    compute_kpis,
    decode,
    make_instance,
    sample_draws,
    solve_milp,
    validate_nonlinear,
)

net = RoadNetwork(
    stations=tuple(Station(i, f"S{i}") for i in range(4)),
    edges=((0, 1, 2.0), (1, 2, 2.0), (2, 3, 2.0)),
    bus_speed=30.0,
)
q = np.zeros((4, 4), dtype=np.int64)
q[0, 3] = 2  # end-to-end passengers: they will need to change buses
q[0, 2] = 1
inst = make_instance(
    net,
    DemandMatrix(q=q),
    FleetSpec(num_routes=2, unit_capacity=2, types=(BusType(1, 0.35), BusType(2, 0.5)), max_units=3),
    IncentiveSpec(cons=1.0, costs=(0.0, 1.0, 2.0, 3.0)),
    CostParams(c_t=6.0, c_e=10.0, weights=(0.4, 0.4, 0.2), max_route_duration=9.0 / 60.0),
)

# the ordering variant + delegated solve keeps this demo snappy; demo 04
# shows the built-in branch-and-bound itself
draws = sample_draws(seed=0, n_draws=5, n_stations=4, n_buses=2)
art = build_mtz_variant(inst, draws)
sol = solve_milp(art.model, SolverConfig(milp_backend="highs"))
print(f"status={sol.status} objective={sol.objective:.4f}")

outcome = decode(sol, art)
for plan in outcome.bus_plans:
    route = "->".join(str(s) for s in plan.route)
    print(f"bus {plan.k + 1}: {plan.p} units (cap {plan.capacity}), route {route}, serves {plan.served}")
for tp in outcome.transfer_plans:
    print(
        f"transfer at S{tp.station} off bus {tp.k + 1}: {tp.count} passengers, "
        f"level {inst.incentives.level_name(tp.strategy)} (ic={tp.incentive_cost}$)"
    )

report = validate_nonlinear(outcome, inst, draws)
print(report)

kp = compute_kpis(outcome, inst)
print(
    f"KPIs: TTD {kp.ttd_km:.1f} km | AIVTT {kp.aivtt_min:.2f} min | TR {kp.tr_pct:.1f}% | "
    f"SR {kp.sr_pct:.0f}% | TSC {kp.tsc:.2f} $"
)
assert abs(kp.tsc - sol.objective) < 1e-6  # the reported cost is the solved objective
