"""Emit the full linearized design model from an instance and a draw set.

Families and index conventions (the decode contract used by reports and
validation; stations and draws are 0-based, incentive levels 1-based):

=========  ============================  =====================================
family     indices                       meaning
=========  ============================  =====================================
x          [i,j,k], i/j may be s or t    bus k travels link (i, j)
y          [p,k]                         bus k assembled from p modular units
z          [i,j,m,n,k]                   OD (i,j) passengers on bus k, link (m,n)
r          [i,j,m,k]                     OD (i,j) passengers leaving bus k at m
b          [i,j,m,k]                     1 if such transfers happen
p          [m,k,s]                       incentive level s offered at (m, bus k)
w          [m,k,d,c]                     draw-d choice; c=1 means transfer wins
AU         [m,k,d]                       winning utility in draw d
T          [i,j,m,k,d]                   draw-d transfer-willing arrivals
R          [i,j,m,k,s]                   incentive spend on OD (i,j) at (m,k,s)
Co         [k,p]                         running cost of route k if type p
u          [j,k]                         visit order (ordering variant only)
=========  ============================  =====================================

The transfer count r is pinned to max(arrivals - departures, 0) by an
indicator sandwich, the per-draw discrete choice is embedded with big-M
utility-argmax rows, and the bilinear cost products (type x route length,
level x transfers, willingness x arrivals) are each replaced by the standard
three-row big-M product linearization. Subtour exclusion is either left to
lazily separated cuts (default) or pre-built with ordering variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choice import DrawSet
from .instance import Instance
from .milp import BINARY, CONTINUOUS, INTEGER, MilpModel, format_var_name
from .solver import Solution

S_NODE = "s"
T_NODE = "t"


@dataclass(frozen=True)
class BigMSet:
    """Per-index big-M constants, each a provable bound on its bracketed term.

    transfer/saa: an OD's arrivals at a station on one bus never exceed q_ij
    (a route enters a station at most once and per-link flow is capped at
    q_ij). utility: deterministic-utility span plus both noise magnitudes,
    plus one. route_cost: at the duration cap a route covers at most
    speed * T_bar km. incentive: dearest level paid for at most q_ij movers.
    """

    transfer: np.ndarray  # (n, n) by OD
    saa: np.ndarray  # (n, n) by OD
    utility: np.ndarray  # (n, K, D)
    route_cost: np.ndarray  # (K, P)
    incentive: np.ndarray  # (n, n) by OD


@dataclass
class FormulationArtifacts:
    model: MilpModel
    index: dict[str, dict[tuple, int]]
    big_m: BigMSet
    subtour_mode: str
    no_incentive: bool
    instance: Instance
    draws: DrawSet

    def var(self, family: str, *idx) -> int:
        return self.index[family][tuple(idx)]


def compute_big_m(instance: Instance, draws: DrawSet) -> BigMSet:
    q = instance.demand.q.astype(float)
    ic_max = instance.incentives.costs[-1]
    cons = instance.incentives.cons
    xi = draws.xi
    utility = (cons + ic_max) + np.abs(xi[:, :, :, 0]) + np.abs(xi[:, :, :, 1]) + 1.0
    reach = instance.network.bus_speed * instance.costs.max_route_duration
    route_cost = np.array(
        [[t.cost_per_km * reach for t in instance.fleet.types] for _ in range(instance.fleet.num_routes)]
    )
    return BigMSet(
        transfer=q.copy(),
        saa=q.copy(),
        utility=utility,
        route_cost=route_cost,
        incentive=ic_max * q,
    )


def expected_variable_count(instance: Instance, n_draws: int, subtour_mode: str = "lazy") -> int:
    n = instance.n_stations
    K = instance.fleet.num_routes
    P = len(instance.fleet.types)
    S = instance.incentives.n_levels
    D = n_draws
    od = n * (n - 1)
    interior = od * (n - 2)
    count = (
        K * (od + 2 * n)  # x
        + K * P  # y
        + od * (n - 1) ** 2 * K  # z
        + 2 * interior * K  # r, b
        + n * K * S  # p
        + 2 * n * K * D  # w
        + n * K * D  # AU
        + interior * K * D  # T
        + interior * K * S  # R
        + K * P  # Co
    )
    if subtour_mode == "mtz":
        count += n * K
    return count


def expected_constraint_count(
    instance: Instance, n_draws: int, subtour_mode: str = "lazy", no_incentive: bool = False
) -> int:
    n = instance.n_stations
    K = instance.fleet.num_routes
    P = len(instance.fleet.types)
    S = instance.incentives.n_levels
    D = n_draws
    od = n * (n - 1)
    interior = od * (n - 2)
    count = (
        2 * K  # depot departure / arrival
        + n * K  # station flow balance
        + od  # served <= demand
        + interior  # passenger conservation
        + od  # arrivals = departures
        + od * (n - 1) ** 2 * K  # ride only served links
        + od * K  # link capacity
        + K  # one type each
        + n * K  # one strategy each
        + n * K  # incentive gating
        + K  # duration
        + 1  # fleet units
        + 3 * interior * K  # transfer max sandwich
        + n * K * D  # one choice per draw
        + 4 * n * K * D  # utility argmax rows
        + 2 * interior * K  # willingness cap + dearest-level tightener
        + 3 * interior * K * D  # willing-arrivals product rows
        + 3 * K * P + K  # route-cost product rows + cheapest-rate tightener
        + 3 * interior * K * S  # incentive-cost product rows
    )
    if subtour_mode == "mtz":
        count += od * K
    if no_incentive:
        count += interior * K
    return count


def build_elp(
    instance: Instance,
    draws: DrawSet,
    subtour_mode: str = "lazy",
    no_incentive: bool = False,
) -> FormulationArtifacts:
    """Assemble the complete linearized model.

    ``subtour_mode="lazy"`` leaves subtour exclusion to separated cuts (the
    solver's lazy hook); ``"mtz"`` pre-builds the polynomial ordering variant
    for one-shot export. ``no_incentive`` pins every transfer count to zero
    (the baseline scheme).
    """
    n = instance.n_stations
    K = instance.fleet.num_routes
    types = instance.fleet.types
    S = instance.incentives.n_levels
    D = draws.n_draws
    if subtour_mode not in ("lazy", "mtz"):
        raise ValueError(f"unknown subtour mode {subtour_mode!r}")
    if draws.xi.shape[0] != n or draws.xi.shape[1] != K:
        raise ValueError(
            f"draw set shaped {draws.xi.shape[:2]} does not match instance ({n} stations, {K} buses)"
        )
    q = instance.demand.q
    dist = instance.metrics.dist
    tmat = instance.metrics.time
    ic = instance.incentives.costs
    cons = instance.incentives.cons
    v_unit = instance.fleet.unit_capacity
    w1, w2, w3 = instance.costs.weights
    big_m = compute_big_m(instance, draws)

    model = MilpModel("modularbus-elp")
    model.metadata = {
        "instance": instance.digest(),
        "draw_seed": draws.seed,
        "n_draws": D,
        "subtour_mode": subtour_mode,
        "no_incentive": no_incentive,
    }
    index: dict[str, dict[tuple, int]] = {
        fam: {} for fam in ("x", "y", "z", "r", "b", "p", "w", "AU", "T", "R", "Co", "u")
    }

    # routes and types branch first, then incentive levels; the flow and
    # choice binaries mostly follow once those are pinned
    branch_class = {"x": 0, "y": 0, "p": 1, "z": 2, "b": 3, "w": 4}

    def add(family, idx, kind, lo=0.0, hi=None):
        vid = model.add_variable(
            format_var_name(family, idx),
            kind,
            lo,
            np.inf if hi is None else hi,
            priority=branch_class.get(family, 0),
        )
        index[family][idx] = vid
        return vid

    stations = range(n)
    ods = [(i, j) for i in stations for j in stations if i != j]
    links = [(m, nn) for m in stations for nn in stations if m != nn]

    # --- variables -------------------------------------------------------
    for k in range(K):
        for m, nn in links:
            add("x", (m, nn, k), BINARY)
        for j in stations:
            add("x", (S_NODE, j, k), BINARY)
            add("x", (j, T_NODE, k), BINARY)
    for k in range(K):
        for t in types:
            add("y", (t.p, k), BINARY)
    for (i, j) in ods:
        for (m, nn) in links:
            if m == j:
                continue  # passengers never depart the destination
            for k in range(K):
                add("z", (i, j, m, nn, k), INTEGER, 0, float(q[i, j]))
    for (i, j) in ods:
        for m in stations:
            if m == i or m == j:
                continue
            for k in range(K):
                add("r", (i, j, m, k), CONTINUOUS, 0, float(q[i, j]))
                add("b", (i, j, m, k), BINARY)
    for m in stations:
        for k in range(K):
            for s in range(1, S + 1):
                add("p", (m, k, s), BINARY)
    for m in stations:
        for k in range(K):
            for d in range(D):
                for c in (1, 2):
                    add("w", (m, k, d, c), BINARY)
                xi1 = draws.xi[m, k, d, 0]
                xi2 = draws.xi[m, k, d, 1]
                au_lo = min(xi1, xi2 - cons)
                au_hi = max(xi1, xi2 - cons + ic[-1])
                add("AU", (m, k, d), CONTINUOUS, au_lo, au_hi)
    for (i, j) in ods:
        for m in stations:
            if m == i or m == j:
                continue
            for k in range(K):
                for d in range(D):
                    add("T", (i, j, m, k, d), CONTINUOUS, 0, float(q[i, j]))
                for s in range(1, S + 1):
                    add("R", (i, j, m, k, s), CONTINUOUS, 0, float(big_m.incentive[i, j]))
    for k in range(K):
        for ti, t in enumerate(types):
            add("Co", (k, t.p), CONTINUOUS, 0, float(big_m.route_cost[k, ti]))
    if subtour_mode == "mtz":
        for j in stations:
            for k in range(K):
                add("u", (j, k), CONTINUOUS, 1.0, float(n))

    X = index["x"]
    Z = index["z"]
    Rv = index["r"]
    Bv = index["b"]
    Pv = index["p"]
    Wv = index["w"]
    AUv = index["AU"]
    Tv = index["T"]
    Rinc = index["R"]
    Cov = index["Co"]

    # arrivals/departures term lists per (i, j, m, k), reused heavily below
    def arr_ids(i, j, m, k):
        return [Z[(i, j, u, m, k)] for u in stations if u != m and u != j]

    def dep_ids(i, j, m, k):
        return [Z[(i, j, m, u, k)] for u in stations if u != m] if m != j else []

    # --- vehicle flow ------------------------------------------------------
    for k in range(K):
        model.add_constraint(
            f"depart[{k}]", [(X[(S_NODE, j, k)], 1.0) for j in stations], "=", 1.0
        )
        model.add_constraint(
            f"arrive[{k}]", [(X[(j, T_NODE, k)], 1.0) for j in stations], "=", 1.0
        )
        for j in stations:
            terms = [(X[(S_NODE, j, k)], 1.0)]
            terms += [(X[(i, j, k)], 1.0) for i in stations if i != j]
            terms.append((X[(j, T_NODE, k)], -1.0))
            terms += [(X[(j, i, k)], -1.0) for i in stations if i != j]
            model.add_constraint(f"flowbal[{j},{k}]", terms, "=", 0.0)

    # --- passenger flow ----------------------------------------------------
    for (i, j) in ods:
        model.add_constraint(
            f"odcap[{i},{j}]",
            [(Z[(i, j, i, u, k)], 1.0) for u in stations if u != i for k in range(K)],
            "<=",
            float(q[i, j]),
        )
        for m in stations:
            if m == i or m == j:
                continue
            terms = [(vid, 1.0) for k in range(K) for vid in arr_ids(i, j, m, k)]
            terms += [(vid, -1.0) for k in range(K) for vid in dep_ids(i, j, m, k)]
            model.add_constraint(f"consrv[{i},{j},{m}]", terms, "=", 0.0)
        terms = [(vid, 1.0) for k in range(K) for vid in arr_ids(i, j, j, k)]
        terms += [(Z[(i, j, i, u, k)], -1.0) for u in stations if u != i for k in range(K)]
        model.add_constraint(f"odarr[{i},{j}]", terms, "=", 0.0)
    for (i, j, m, nn, k), zid in Z.items():
        model.add_constraint(
            f"link[{i},{j},{m},{nn},{k}]",
            [(zid, 1.0), (X[(m, nn, k)], -float(q[i, j]))],
            "<=",
            0.0,
        )

    # --- capacity and type -------------------------------------------------
    for (m, nn) in links:
        for k in range(K):
            terms = [(Z[(i, j, m, nn, k)], 1.0) for (i, j) in ods if m != j]
            terms += [(index["y"][(t.p, k)], -float(t.p * v_unit)) for t in types]
            model.add_constraint(f"cap[{m},{nn},{k}]", terms, "<=", 0.0)
    for k in range(K):
        model.add_constraint(
            f"type[{k}]", [(index["y"][(t.p, k)], 1.0) for t in types], "=", 1.0
        )

    # --- transfer counting: r = max(arrivals - departures, 0) ---------------
    for (i, j, m, k), rid in Rv.items():
        arr = arr_ids(i, j, m, k)
        dep = dep_ids(i, j, m, k)
        m11 = float(big_m.transfer[i, j])
        bid = Bv[(i, j, m, k)]
        terms = [(rid, 1.0)] + [(vid, -1.0) for vid in arr] + [(vid, 1.0) for vid in dep]
        model.add_constraint(f"rlb[{i},{j},{m},{k}]", terms, ">=", 0.0)
        terms = [(rid, 1.0)] + [(vid, -1.0) for vid in arr] + [(vid, 1.0) for vid in dep]
        terms.append((bid, m11))
        model.add_constraint(f"rub[{i},{j},{m},{k}]", terms, "<=", m11)
        model.add_constraint(f"rind[{i},{j},{m},{k}]", [(rid, 1.0), (bid, -m11)], "<=", 0.0)

    # --- per-draw discrete choice -------------------------------------------
    for m in stations:
        for k in range(K):
            for d in range(D):
                xi1 = draws.xi[m, k, d, 0]
                xi2 = draws.xi[m, k, d, 1]
                mu = float(big_m.utility[m, k, d])
                au = AUv[(m, k, d)]
                wt = Wv[(m, k, d, 1)]  # transfer wins draw d
                ws = Wv[(m, k, d, 2)]
                model.add_constraint(f"wsum[{m},{k},{d}]", [(wt, 1.0), (ws, 1.0)], "=", 1.0)
                model.add_constraint(f"umaxs[{m},{k},{d}]", [(au, 1.0)], ">=", xi1)
                terms = [(au, 1.0)] + [(Pv[(m, k, s)], -ic[s - 1]) for s in range(1, S + 1)]
                model.add_constraint(f"umaxt[{m},{k},{d}]", terms, ">=", xi2 - cons)
                model.add_constraint(
                    f"uforces[{m},{k},{d}]", [(au, 1.0), (ws, mu)], "<=", xi1 + mu
                )
                terms = [(au, 1.0)] + [(Pv[(m, k, s)], -ic[s - 1]) for s in range(1, S + 1)]
                terms.append((wt, mu))
                model.add_constraint(f"uforcet[{m},{k},{d}]", terms, "<=", xi2 - cons + mu)

    # --- willingness cap on transfers ----------------------------------------
    max_frac = np.zeros((n, K))
    for m in stations:
        for k in range(K):
            wins = (draws.xi[m, k, :, 1] - cons + ic[-1]) > draws.xi[m, k, :, 0]
            max_frac[m, k] = float(np.count_nonzero(wins)) / D
    for (i, j, m, k), rid in Rv.items():
        terms = [(rid, 1.0)] + [(Tv[(i, j, m, k, d)], -1.0 / D) for d in range(D)]
        model.add_constraint(f"saa[{i},{j},{m},{k}]", terms, "<=", 0.0)
        arr = arr_ids(i, j, m, k)
        # relaxation tightener: no level buys more willingness than the dearest one
        terms = [(rid, 1.0)] + [(vid, -max_frac[m, k]) for vid in arr]
        model.add_constraint(f"rwill[{i},{j},{m},{k}]", terms, "<=", 0.0)
        msaa = float(big_m.saa[i, j])
        for d in range(D):
            tid = Tv[(i, j, m, k, d)]
            wt = Wv[(m, k, d, 1)]
            terms = [(tid, 1.0)] + [(vid, -1.0) for vid in arr] + [(wt, -msaa)]
            model.add_constraint(f"Tlb[{i},{j},{m},{k},{d}]", terms, ">=", -msaa)
            terms = [(tid, 1.0)] + [(vid, -1.0) for vid in arr] + [(wt, msaa)]
            model.add_constraint(f"Tub[{i},{j},{m},{k},{d}]", terms, "<=", msaa)
            model.add_constraint(
                f"Tind[{i},{j},{m},{k},{d}]", [(tid, 1.0), (wt, -msaa)], "<=", 0.0
            )

    # --- strategy selection ---------------------------------------------------
    for m in stations:
        for k in range(K):
            model.add_constraint(
                f"strat[{m},{k}]", [(Pv[(m, k, s)], 1.0) for s in range(1, S + 1)], "=", 1.0
            )
            terms = [(Pv[(m, k, s)], 1.0) for s in range(2, S + 1)]
            terms += [
                (Rv[(i, j, m, k)], -1.0) for (i, j) in ods if m != i and m != j
            ]
            model.add_constraint(f"gate[{m},{k}]", terms, "<=", 0.0)

    # --- duration and fleet -----------------------------------------------------
    for k in range(K):
        terms = [(X[(m, nn, k)], float(tmat[m, nn])) for (m, nn) in links]
        model.add_constraint(f"dur[{k}]", terms, "<=", instance.costs.max_route_duration)
    model.add_constraint(
        "fleet",
        [(index["y"][(t.p, k)], float(t.p)) for k in range(K) for t in types],
        "<=",
        float(instance.fleet.max_units),
    )

    # --- route cost product: Co = c_p * length when type chosen ------------------
    for k in range(K):
        length_terms = [(X[(m, nn, k)], float(dist[m, nn])) for (m, nn) in links]
        for ti, t in enumerate(types):
            mp = float(big_m.route_cost[k, ti])
            co = Cov[(k, t.p)]
            y = index["y"][(t.p, k)]
            terms = [(co, 1.0)] + [(vid, -t.cost_per_km * coef) for vid, coef in length_terms]
            model.add_constraint(f"colb[{k},{t.p}]", terms + [(y, -mp)], ">=", -mp)
            terms = [(co, 1.0)] + [(vid, -t.cost_per_km * coef) for vid, coef in length_terms]
            model.add_constraint(f"coub[{k},{t.p}]", terms + [(y, mp)], "<=", mp)
            model.add_constraint(f"coind[{k},{t.p}]", [(co, 1.0), (y, -mp)], "<=", 0.0)
        # relaxation tightener: whatever the type, running cost is at least the
        # cheapest rate times route length (redundant for integral points)
        terms = [(Cov[(k, t.p)], 1.0) for t in types]
        terms += [(vid, -types[0].cost_per_km * coef) for vid, coef in length_terms]
        model.add_constraint(f"comin[{k}]", terms, ">=", 0.0)

    # --- incentive cost product: R = ic_s * r when level chosen -------------------
    for (i, j, m, k), rid in Rv.items():
        minc = float(big_m.incentive[i, j])
        for s in range(1, S + 1):
            ics = ic[s - 1]
            rv = Rinc[(i, j, m, k, s)]
            pv = Pv[(m, k, s)]
            model.add_constraint(
                f"rilb[{i},{j},{m},{k},{s}]",
                [(rv, 1.0), (rid, -ics), (pv, -minc)],
                ">=",
                -minc,
            )
            model.add_constraint(
                f"riub[{i},{j},{m},{k},{s}]",
                [(rv, 1.0), (rid, -ics), (pv, minc)],
                "<=",
                minc,
            )
            model.add_constraint(
                f"riind[{i},{j},{m},{k},{s}]", [(rv, 1.0), (pv, -minc)], "<=", 0.0
            )

    # --- baseline scheme: no transfers at all -------------------------------------
    if no_incentive:
        for (i, j, m, k), rid in Rv.items():
            model.add_constraint(f"noinc[{i},{j},{m},{k}]", [(rid, 1.0)], "=", 0.0)

    # --- ordering variant (subtour exclusion without cuts) -------------------------
    if subtour_mode == "mtz":
        U = index["u"]
        for k in range(K):
            for (i, j) in links:
                model.add_constraint(
                    f"mtz[{i},{j},{k}]",
                    [(U[(i, k)], 1.0), (U[(j, k)], -1.0), (X[(i, j, k)], float(n))],
                    "<=",
                    float(n - 1),
                )

    # --- objective ------------------------------------------------------------------
    obj = []
    for (_p, k), vid in Cov.items():
        obj.append((vid, w1))
    for key, vid in Rinc.items():
        obj.append((vid, w1))
    for (i, j, m, nn, k), vid in Z.items():
        coef = w2 * instance.costs.c_t * float(tmat[m, nn])
        if m == i:
            coef -= w3 * instance.costs.c_e
        obj.append((vid, coef))
    model.set_objective(obj, constant=w3 * instance.costs.c_e * float(q.sum()))

    model.freeze()
    return FormulationArtifacts(
        model=model,
        index=index,
        big_m=big_m,
        subtour_mode=subtour_mode,
        no_incentive=no_incentive,
        instance=instance,
        draws=draws,
    )


def build_mtz_variant(instance: Instance, draws: DrawSet, no_incentive: bool = False) -> FormulationArtifacts:
    """Ordering-variable variant: polynomial size, safe for one-shot export."""
    return build_elp(instance, draws, subtour_mode="mtz", no_incentive=no_incentive)


# ---------------------------------------------------------------------------
# subtour separation
# ---------------------------------------------------------------------------

def subtour_cut_sets(arcs, n_stations: int) -> list[frozenset]:
    """Station sets whose internal arcs must be cut for one bus's arc support.

    The support of a depot-balanced integral assignment decomposes into one
    depot-to-depot trail plus detached cycles. Detached cycles surface as
    leftover components after walking the trail; a trail that revisits a
    station contains a cycle between the two visits. Either way the returned
    set F satisfies sum of internal arcs >= |F|, so the standard cut
    (internal arcs <= |F| - 1) is violated. Empty iff the support is a simple
    depot-to-depot path.
    """
    arcs = set(arcs)
    succ: dict = {}
    for i, j in arcs:
        succ.setdefault(i, []).append(j)
    for lst in succ.values():
        lst.sort(key=lambda v: (isinstance(v, str), v))
    cuts: list[frozenset] = []
    used: set = set()
    walk = [S_NODE]
    cur = S_NODE
    while cur != T_NODE:
        options = [j for j in succ.get(cur, []) if (cur, j) not in used]
        if not options:
            break  # not flow-balanced; caller guarantees this cannot happen
        nxt = options[0]
        used.add((cur, nxt))
        walk.append(nxt)
        cur = nxt
    seen_at: dict = {}
    for pos, st in enumerate(walk):
        if st in (S_NODE, T_NODE):
            continue
        if st in seen_at:
            cycle = frozenset(w for w in walk[seen_at[st] : pos] if not isinstance(w, str))
            if cycle not in cuts:
                cuts.append(cycle)
        else:
            seen_at[st] = pos
    leftovers = arcs - used
    if leftovers:
        parent = {}

        def root(a):
            while parent.get(a, a) != a:
                parent[a] = parent.get(parent[a], parent[a])
                a = parent[a]
            return a

        for i, j in leftovers:
            parent.setdefault(i, i)
            parent.setdefault(j, j)
            parent[root(i)] = root(j)
        comps: dict = {}
        for i, j in leftovers:
            comps.setdefault(root(i), set()).update((i, j))
        for comp in comps.values():
            fs = frozenset(v for v in comp if not isinstance(v, str))
            if len(fs) >= 2 and fs not in cuts:
                cuts.append(fs)
    return cuts


def separate_subtours(artifacts: FormulationArtifacts, solution: Solution, tol: float = 1e-6):
    """Lazy-cut hook: violated subtour cuts for every bus at an integral point."""
    inst = artifacts.instance
    n = inst.n_stations
    X = artifacts.index["x"]
    cuts = []
    for k in range(inst.fleet.num_routes):
        arcs = []
        for (i, j, kk), vid in X.items():
            if kk != k:
                continue
            val = solution.values[vid]
            if abs(val - round(val)) > tol:
                raise ValueError(f"subtour separation needs integral x; x[{i},{j},{k}]={val}")
            if round(val) == 1:
                arcs.append((i, j))
        for fs in subtour_cut_sets(arcs, n):
            members = sorted(fs)
            terms = [
                (X[(i, j, k)], 1.0) for i in members for j in members if i != j
            ]
            cuts.append((terms, "<=", float(len(members) - 1)))
    return cuts


def make_lazy_separator(artifacts: FormulationArtifacts):
    """Bind the separation routine to one build, for the solver's lazy hook."""

    def callback(solution: Solution):
        return separate_subtours(artifacts, solution)

    return callback
