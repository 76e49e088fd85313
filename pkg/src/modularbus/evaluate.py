"""Decode solver output into a design, re-check it against the original
nonlinear model, and compute the reporting indicators.

The validation pass deliberately re-derives everything from the decoded
integer quantities: conservation and capacity in exact integer arithmetic,
the transfer count against its max-form definition, and the willingness cap
against the same noise draws the model embedded (checking against the
analytic logit would wrongly flag sampling error; that distance is reported
separately as a diagnostic).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import choice
from .choice import DrawSet, UtilitySpec
from .instance import Instance


@dataclass
class BusPlan:
    k: int
    p: int  # modular units
    capacity: int
    route: list[int]  # visited stations in order
    loads: dict[tuple[int, int], int]  # (m, n) -> onboard passengers
    length_km: float
    time_h: float
    served: int  # passengers whose first leg is on this bus


@dataclass
class TransferPlan:
    station: int
    k: int
    strategy: int  # 1-based level
    incentive_cost: float
    count: int


@dataclass
class Kpis:
    ttd_km: float
    aivtt_min: float | None  # None when nobody is served
    tr_pct: float | None
    sr_pct: float
    tsc: float
    co1: float
    co2: float
    ct: float
    ce: float


@dataclass
class DesignOutcome:
    bus_plans: list[BusPlan]
    transfer_plans: list[TransferPlan]
    z: dict[tuple, int]  # (i, j, m, n, k) -> passengers, nonzero entries
    r: dict[tuple, int]  # (i, j, m, k) -> transfers, nonzero entries
    strategy: dict[tuple, int]  # (m, k) -> 1-based level
    served_od: dict[tuple, int]  # (i, j) -> served passengers
    objective: float | None

    @property
    def served_total(self) -> int:
        return sum(self.served_od.values())

    @property
    def transfer_total(self) -> int:
        return sum(self.r.values())


@dataclass
class ValidationReport:
    violations: list[str]
    saa_gap: dict[tuple, float] = field(default_factory=dict)  # (m,k) -> |empirical - logit|

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "nonlinear validation: OK"
        return "nonlinear validation: VIOLATED\n" + "\n".join(f"  {v}" for v in self.violations)


def _as_int(val: float, what: str, tol: float = 1e-5) -> int:
    r = round(val)
    if abs(val - r) > tol:
        raise ValueError(f"{what} = {val} is not integral")
    return int(r)


def decode(solution, artifacts, instance: Instance | None = None) -> DesignOutcome:
    """Recover the design from variable names and values.

    Routes are rebuilt by following the served arcs from the start depot;
    anything but a simple depot-to-depot path per bus is a hard error (the
    subtour machinery guarantees it cannot happen for optimal output).
    """
    inst = instance or artifacts.instance
    n = inst.n_stations
    K = inst.fleet.num_routes
    vals = solution.values
    idx = artifacts.index

    z: dict[tuple, int] = {}
    for key, vid in idx["z"].items():
        count = _as_int(vals[vid], f"z{key}")
        if count:
            z[key] = count
    r: dict[tuple, int] = {}
    for key, vid in idx["r"].items():
        count = _as_int(vals[vid], f"r{key}")
        if count:
            r[key] = count
    strategy: dict[tuple, int] = {}
    for (m, k, s), vid in idx["p"].items():
        if _as_int(vals[vid], f"p[{m},{k},{s}]"):
            if (m, k) in strategy:
                raise ValueError(f"two strategies active at station {m}, bus {k}")
            strategy[(m, k)] = s

    bus_plans = []
    for k in range(K):
        nxt: dict = {}
        start = None
        for (i, j, kk), vid in idx["x"].items():
            if kk != k or not _as_int(vals[vid], f"x[{i},{j},{k}]"):
                continue
            if i == "s":
                if start is not None:
                    raise ValueError(f"bus {k}: two depot departures")
                start = j
            else:
                if i in nxt:
                    raise ValueError(f"bus {k}: branching route at station {i}")
                nxt[i] = j
        if start is None:
            raise ValueError(f"bus {k}: no depot departure")
        route = [start]
        cur = start
        while True:
            step = nxt.pop(cur, None)
            if step is None or step == "t":
                break
            if step in route:
                raise ValueError(f"bus {k}: route revisits station {step}")
            route.append(step)
            cur = step
        if nxt:
            raise ValueError(f"bus {k}: disconnected arcs {sorted(nxt.items())!r}")
        p_sel = [t.p for t in inst.fleet.types if _as_int(vals[idx["y"][(t.p, k)]], f"y[{t.p},{k}]")]
        if len(p_sel) != 1:
            raise ValueError(f"bus {k}: expected exactly one type, got {p_sel}")
        p = p_sel[0]
        loads: dict[tuple[int, int], int] = {}
        for (i, j, m, nn, kk), count in z.items():
            if kk == k:
                loads[(m, nn)] = loads.get((m, nn), 0) + count
        length = sum(inst.metrics.dist[a, b] for a, b in zip(route, route[1:]))
        time_h = sum(inst.metrics.time[a, b] for a, b in zip(route, route[1:]))
        served_k = sum(count for (i, j, m, nn, kk), count in z.items() if kk == k and m == i)
        bus_plans.append(
            BusPlan(
                k=k,
                p=p,
                capacity=p * inst.fleet.unit_capacity,
                route=route,
                loads=loads,
                length_km=float(length),
                time_h=float(time_h),
                served=served_k,
            )
        )

    transfer_plans = []
    totals: dict[tuple, int] = {}
    for (i, j, m, k), count in r.items():
        totals[(m, k)] = totals.get((m, k), 0) + count
    for (m, k), count in sorted(totals.items()):
        s = strategy.get((m, k), 1)
        transfer_plans.append(
            TransferPlan(
                station=m,
                k=k,
                strategy=s,
                incentive_cost=inst.incentives.costs[s - 1],
                count=count,
            )
        )

    served_od: dict[tuple, int] = {}
    for (i, j, m, nn, k), count in z.items():
        if m == i:
            served_od[(i, j)] = served_od.get((i, j), 0) + count

    return DesignOutcome(
        bus_plans=bus_plans,
        transfer_plans=transfer_plans,
        z=z,
        r=r,
        strategy=strategy,
        served_od=served_od,
        objective=solution.objective,
    )


def validate_nonlinear(outcome: DesignOutcome, instance: Instance, draws: DrawSet) -> ValidationReport:
    """Check a decoded design against the original (pre-linearization) model."""
    inst = instance
    n = inst.n_stations
    K = inst.fleet.num_routes
    q = inst.demand.q
    bad: list[str] = []
    spec = UtilitySpec(cons=inst.incentives.cons, incentive_costs=inst.incentives.costs)

    plans = {plan.k: plan for plan in outcome.bus_plans}
    arcs = {
        k: set(zip(plan.route, plan.route[1:])) for k, plan in plans.items()
    }

    # served within demand
    for (i, j), served in outcome.served_od.items():
        if served > q[i, j]:
            bad.append(f"demand[{i},{j}]: served {served} > demand {q[i, j]}")
    # ride only served links, within demand per link
    for (i, j, m, nn, k), count in outcome.z.items():
        if (m, nn) not in arcs.get(k, set()):
            bad.append(f"link[{i},{j},{m},{nn},{k}]: flow {count} on unserved link")
        if count > q[i, j]:
            bad.append(f"link[{i},{j},{m},{nn},{k}]: flow {count} > demand {q[i, j]}")

    arr_count: dict[tuple, int] = {}
    dep_count: dict[tuple, int] = {}
    for (i, j, m, nn, k), count in outcome.z.items():
        dep_count[(i, j, m, k)] = dep_count.get((i, j, m, k), 0) + count
        arr_count[(i, j, nn, k)] = arr_count.get((i, j, nn, k), 0) + count

    def arr(i, j, m, k):
        return arr_count.get((i, j, m, k), 0)

    def dep(i, j, m, k):
        return dep_count.get((i, j, m, k), 0)

    # conservation at intermediate stations (all buses pooled) and od arrival balance
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for m in range(n):
                if m in (i, j):
                    continue
                ain = sum(arr(i, j, m, k) for k in range(K))
                aout = sum(dep(i, j, m, k) for k in range(K))
                if ain != aout:
                    bad.append(f"conserve[{i},{j},{m}]: in {ain} != out {aout}")
            arrivals = sum(arr(i, j, j, k) for k in range(K))
            departures = sum(dep(i, j, i, k) for k in range(K))
            if arrivals != departures:
                bad.append(f"odbalance[{i},{j}]: arrivals {arrivals} != departures {departures}")

    # capacity
    for plan in outcome.bus_plans:
        for link, load in plan.loads.items():
            if load > plan.capacity:
                bad.append(f"capacity[{link[0]},{link[1]},{plan.k}]: load {load} > {plan.capacity}")
    # fleet and duration
    units = sum(plan.p for plan in outcome.bus_plans)
    if units > inst.fleet.max_units:
        bad.append(f"fleet: {units} units > {inst.fleet.max_units}")
    for plan in outcome.bus_plans:
        if plan.time_h > inst.costs.max_route_duration + 1e-9:
            bad.append(f"duration[{plan.k}]: {plan.time_h:.4f} h > {inst.costs.max_route_duration:.4f} h")

    # transfer count equals its max-form definition
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for m in range(n):
                if m in (i, j):
                    continue
                for k in range(K):
                    expect = max(arr(i, j, m, k) - dep(i, j, m, k), 0)
                    got = outcome.r.get((i, j, m, k), 0)
                    if got != expect:
                        bad.append(f"transfercount[{i},{j},{m},{k}]: r {got} != max-form {expect}")

    # strategy simplex + gating
    seen_mk = set()
    for (m, k), s in outcome.strategy.items():
        seen_mk.add((m, k))
        if not (1 <= s <= inst.incentives.n_levels):
            bad.append(f"strategy[{m},{k}]: level {s} out of range")
    transfers_at: dict[tuple, int] = {}
    for (i, j, m, k), count in outcome.r.items():
        transfers_at[(m, k)] = transfers_at.get((m, k), 0) + count
    for (m, k), s in outcome.strategy.items():
        if s > 1 and transfers_at.get((m, k), 0) == 0:
            bad.append(f"gate[{m},{k}]: paid level {s} with no transfers")

    # willingness cap, same draws as the solve
    saa_gap: dict[tuple, float] = {}
    for (m, k) in sorted(set(transfers_at) | set(outcome.strategy)):
        s = outcome.strategy.get((m, k), 1)
        frac = choice.saa_probability(draws, spec, s, m, k)
        saa_gap[(m, k)] = abs(frac - choice.logit_probability(spec, s))
        for i in range(n):
            for j in range(n):
                if i == j or m in (i, j):
                    continue
                got = outcome.r.get((i, j, m, k), 0)
                if got > frac * arr(i, j, m, k) + 1e-9:
                    bad.append(
                        f"willingness[{i},{j},{m},{k}]: r {got} > {frac:.4f} x arrivals {arr(i, j, m, k)}"
                    )

    return ValidationReport(violations=bad, saa_gap=saa_gap)


def compute_kpis(outcome: DesignOutcome, instance: Instance) -> Kpis:
    inst = instance
    ttd = sum(plan.length_km for plan in outcome.bus_plans)
    co1 = 0.0
    for plan in outcome.bus_plans:
        cost_per_km = next(t.cost_per_km for t in inst.fleet.types if t.p == plan.p)
        co1 += cost_per_km * plan.length_km
    co2 = 0.0
    for (m, k), count in _transfer_totals(outcome).items():
        s = outcome.strategy.get((m, k), 1)
        co2 += inst.incentives.costs[s - 1] * count
    ride_hours = sum(
        count * inst.metrics.time[m, nn] for (i, j, m, nn, k), count in outcome.z.items()
    )
    ct = inst.costs.c_t * ride_hours
    total_q = int(inst.demand.q.sum())
    served = outcome.served_total
    ce = inst.costs.c_e * (total_q - served)
    w1, w2, w3 = inst.costs.weights
    tsc = w1 * (co1 + co2) + w2 * ct + w3 * ce
    aivtt = 60.0 * ride_hours / served if served > 0 else None
    tr = 100.0 * outcome.transfer_total / served if served > 0 else None
    sr = 100.0 * served / total_q if total_q > 0 else 100.0
    return Kpis(
        ttd_km=float(ttd),
        aivtt_min=aivtt,
        tr_pct=tr,
        sr_pct=float(sr),
        tsc=float(tsc),
        co1=float(co1),
        co2=float(co2),
        ct=float(ct),
        ce=float(ce),
    )


def _transfer_totals(outcome: DesignOutcome) -> dict[tuple, int]:
    totals: dict[tuple, int] = {}
    for (i, j, m, k), count in outcome.r.items():
        totals[(m, k)] = totals.get((m, k), 0) + count
    return totals


KPI_CSV_HEADER = "TTD_km,AIVTT_min,TR_pct,SR_pct,TSC,Co1,Co2,CT,CE"


def kpi_csv_row(kpis: Kpis) -> str:
    def num(x):
        return "nan" if x is None else f"{x:.6g}"

    return ",".join(
        [
            num(kpis.ttd_km),
            num(kpis.aivtt_min),
            num(kpis.tr_pct),
            num(kpis.sr_pct),
            num(kpis.tsc),
            num(kpis.co1),
            num(kpis.co2),
            num(kpis.ct),
            num(kpis.ce),
        ]
    )
