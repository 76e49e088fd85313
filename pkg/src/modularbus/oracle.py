"""Exhaustive optimizer for tiny instances, used to certify the MILP pipeline.

Completely independent of the model builder and solver: it enumerates route
tuples, per-passenger itineraries, derived minimal bus types, and derived
cheapest incentive levels, evaluating the exact nonlinear objective for each
complete candidate. Optimal flows never contain circulation (cycles only add
ride or incentive cost), so itineraries are enumerated as station-simple
paths over the buses' arc graphs; transfer counts still come from the
aggregated flows via the max-form definition, and the willingness cap is
checked against the same noise draws the linearized model embeds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import choice
from .choice import DrawSet, UtilitySpec
from .evaluate import BusPlan, DesignOutcome, TransferPlan
from .instance import Instance


@dataclass(frozen=True)
class TinyLimits:
    max_stations: int = 4
    max_routes: int = 2
    max_total_demand: int = 4
    max_draws: int = 5


class TinyLimitError(ValueError):
    pass


def _route_candidates(inst: Instance) -> list[tuple[int, ...]]:
    """All station-simple route sequences within the duration cap."""
    n = inst.n_stations
    tmat = inst.metrics.time
    cap = inst.costs.max_route_duration + 1e-12
    out: list[tuple[int, ...]] = []

    def extend(seq: list[int], hours: float):
        out.append(tuple(seq))
        for nxt in range(n):
            if nxt in seq:
                continue
            add = tmat[seq[-1], nxt]
            if hours + add <= cap:
                seq.append(nxt)
                extend(seq, hours + add)
                seq.pop()

    for start in range(n):
        extend([start], 0.0)
    return out


def _paths(origin: int, dest: int, arcs_from: dict, allow_transfers: bool):
    """Station-simple itineraries as tuples of (m, n, bus) legs."""
    found: list[tuple] = []

    def dfs(cur: int, legs: list, visited: set):
        if cur == dest:
            found.append(tuple(legs))
            return
        for nxt, k in arcs_from.get(cur, ()):
            if nxt in visited:
                continue
            if not allow_transfers and legs and k != legs[0][2]:
                continue
            legs.append((cur, nxt, k))
            visited.add(nxt)
            dfs(nxt, legs, visited)
            visited.discard(nxt)
            legs.pop()

    dfs(origin, [], {origin})
    found.sort()
    return found


def enumerate_optimal(
    instance: Instance,
    draws: DrawSet,
    limits: TinyLimits | None = None,
    allow_transfers: bool = True,
) -> tuple[float, DesignOutcome | None]:
    """Global optimum by exhaustive enumeration; (inf, None) when infeasible.

    Raises TinyLimitError rather than running on anything beyond the stated
    limits: exceeding them is a caller bug, not a reason to burn hours.
    """
    lim = limits or TinyLimits()
    inst = instance
    n = inst.n_stations
    K = inst.fleet.num_routes
    total_q = int(inst.demand.q.sum())
    if n > lim.max_stations:
        raise TinyLimitError(f"{n} stations exceeds tiny limit {lim.max_stations}")
    if K > lim.max_routes:
        raise TinyLimitError(f"{K} routes exceeds tiny limit {lim.max_routes}")
    if total_q > lim.max_total_demand:
        raise TinyLimitError(f"total demand {total_q} exceeds tiny limit {lim.max_total_demand}")
    if draws.n_draws > lim.max_draws:
        raise TinyLimitError(f"{draws.n_draws} draws exceeds tiny limit {lim.max_draws}")

    q = inst.demand.q
    dist = inst.metrics.dist
    tmat = inst.metrics.time
    types = inst.fleet.types
    v = inst.fleet.unit_capacity
    ic = inst.incentives.costs
    S = inst.incentives.n_levels
    w1, w2, w3 = inst.costs.weights
    c_t, c_e = inst.costs.c_t, inst.costs.c_e
    spec = UtilitySpec(cons=inst.incentives.cons, incentive_costs=ic)
    cheapest_km = types[0].cost_per_km

    demanded = [(i, j) for i in range(n) for j in range(n) if q[i, j] > 0]
    candidates = _route_candidates(inst)
    combos = sorted(
        itertools.product(candidates, repeat=K),
        key=lambda routes: (sum(dist[a, b] for r in routes for a, b in zip(r, r[1:])), routes),
    )

    best_obj = math.inf
    best_key = None
    best = None

    for routes in combos:
        route_len = [sum(dist[a, b] for a, b in zip(r, r[1:])) for r in routes]
        # every later combo is at least this expensive in running cost alone
        if w1 * cheapest_km * sum(route_len) >= best_obj - 1e-12:
            break
        arcs_from: dict[int, list] = {}
        for k, r in enumerate(routes):
            for a, b in zip(r, r[1:]):
                arcs_from.setdefault(a, []).append((b, k))
        options: list[list] = []
        for (i, j) in demanded:
            options.append([None] + _paths(i, j, arcs_from, allow_transfers))
        choice_sets = [
            list(itertools.combinations_with_replacement(range(len(opt)), int(q[i, j])))
            for opt, (i, j) in zip(options, demanded)
        ]
        for pick in itertools.product(*choice_sets):
            z: dict[tuple, int] = {}
            ride_hours = 0.0
            unserved = 0
            for (i, j), opt, chosen in zip(demanded, options, pick):
                for pidx in chosen:
                    path = opt[pidx]
                    if path is None:
                        unserved += 1
                        continue
                    for (m, nn, k) in path:
                        z[(i, j, m, nn, k)] = z.get((i, j, m, nn, k), 0) + 1
                        ride_hours += tmat[m, nn]
            loads: dict[tuple, int] = {}
            for (i, j, m, nn, k), count in z.items():
                loads[(m, nn, k)] = loads.get((m, nn, k), 0) + count
            chosen_p = []
            feasible = True
            for k in range(K):
                peak = max((c for (m, nn, kk), c in loads.items() if kk == k), default=0)
                p_fit = next((t.p for t in types if t.p * v >= peak), None)
                if p_fit is None:
                    feasible = False
                    break
                chosen_p.append(p_fit)
            if not feasible or sum(chosen_p) > inst.fleet.max_units:
                continue
            # transfers from aggregated flows
            arr: dict[tuple, int] = {}
            dep: dict[tuple, int] = {}
            for (i, j, m, nn, k), count in z.items():
                dep[(i, j, m, k)] = dep.get((i, j, m, k), 0) + count
                arr[(i, j, nn, k)] = arr.get((i, j, nn, k), 0) + count
            r: dict[tuple, int] = {}
            for (i, j, m, k), a_count in arr.items():
                if m == i or m == j:
                    continue
                diff = a_count - dep.get((i, j, m, k), 0)
                if diff > 0:
                    r[(i, j, m, k)] = diff
            strategy: dict[tuple, int] = {}
            transfers_at: dict[tuple, int] = {}
            for (i, j, m, k), count in r.items():
                transfers_at[(m, k)] = transfers_at.get((m, k), 0) + count
            inc_cost = 0.0
            for (m, k), count in transfers_at.items():
                level = None
                for s in range(1, S + 1):
                    frac = choice.saa_probability(draws, spec, s, m, k)
                    if all(
                        r[(i, j, mm, kk)] <= frac * arr.get((i, j, mm, kk), 0) + 1e-9
                        for (i, j, mm, kk) in r
                        if (mm, kk) == (m, k)
                    ):
                        level = s
                        break
                if level is None:
                    feasible = False
                    break
                strategy[(m, k)] = level
                inc_cost += ic[level - 1] * count
            if not feasible:
                continue
            run_cost = sum(
                next(t.cost_per_km for t in types if t.p == pk) * lk
                for pk, lk in zip(chosen_p, route_len)
            )
            obj = w1 * (run_cost + inc_cost) + w2 * c_t * ride_hours + w3 * c_e * unserved
            if obj < best_obj - 1e-12:
                better = True
            elif obj <= best_obj + 1e-12:
                key = (routes, tuple(chosen_p), tuple(sorted(z.items())), tuple(sorted(strategy.items())))
                better = best_key is None or key < best_key
            else:
                better = False
            if better:
                best_obj = obj
                best_key = (routes, tuple(chosen_p), tuple(sorted(z.items())), tuple(sorted(strategy.items())))
                best = (routes, tuple(chosen_p), dict(z), dict(r), dict(strategy), unserved)

    if best is None:
        return math.inf, None
    routes, chosen_p, z, r, strategy, unserved = best
    plans = []
    for k, (route, p) in enumerate(zip(routes, chosen_p)):
        loads = {}
        for (i, j, m, nn, kk), count in z.items():
            if kk == k:
                loads[(m, nn)] = loads.get((m, nn), 0) + count
        plans.append(
            BusPlan(
                k=k,
                p=p,
                capacity=p * v,
                route=list(route),
                loads=loads,
                length_km=float(sum(dist[a, b] for a, b in zip(route, route[1:]))),
                time_h=float(sum(tmat[a, b] for a, b in zip(route, route[1:]))),
                served=sum(c for (i, j, m, nn, kk), c in z.items() if kk == k and m == i),
            )
        )
    transfers_at: dict[tuple, int] = {}
    for (i, j, m, k), count in r.items():
        transfers_at[(m, k)] = transfers_at.get((m, k), 0) + count
    transfer_plans = [
        TransferPlan(station=m, k=k, strategy=strategy[(m, k)], incentive_cost=ic[strategy[(m, k)] - 1], count=count)
        for (m, k), count in sorted(transfers_at.items())
    ]
    served_od: dict[tuple, int] = {}
    for (i, j, m, nn, k), count in z.items():
        if m == i:
            served_od[(i, j)] = served_od.get((i, j), 0) + count
    outcome = DesignOutcome(
        bus_plans=plans,
        transfer_plans=transfer_plans,
        z=z,
        r=r,
        strategy=strategy,
        served_od=served_od,
        objective=best_obj,
    )
    return best_obj, outcome
