"""Problem instances: station network, travel metrics, demand, fleet, incentives, costs.

An :class:`Instance` bundles everything a design run needs. Instances are
read from a JSON document (see :func:`load_instance` for the schema) or built
programmatically with :func:`make_instance`. All arrays are frozen after
construction so an instance can be shared across workers.

Station indices are ``0..n-1``; two virtual depot nodes (route start and
route end) are appended after the real stations and carry zero-length,
zero-time arcs to and from every station.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np


class SchemaError(ValueError):
    """Instance document failed validation. ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Station:
    id: int
    name: str


@dataclass(frozen=True)
class RoadNetwork:
    """Undirected road graph with bidirectional edges in km and a single bus speed."""

    stations: tuple[Station, ...]
    edges: tuple[tuple[int, int, float], ...]
    bus_speed: float  # km/h

    def __post_init__(self):
        n = len(self.stations)
        ids = [st.id for st in self.stations]
        if ids != list(range(n)):
            raise SchemaError("network.stations", "station ids must be 0..n-1 and unique")
        if self.bus_speed <= 0:
            raise SchemaError("network.bus_speed", "must be positive")
        for idx, (i, j, length) in enumerate(self.edges):
            if i == j:
                raise SchemaError(f"network.edges[{idx}]", "self-loop not allowed")
            if not (0 <= i < n and 0 <= j < n):
                raise SchemaError(f"network.edges[{idx}]", f"endpoint out of range 0..{n - 1}")
            if length <= 0:
                raise SchemaError(f"network.edges[{idx}]", "edge length must be positive")
        # connectivity check (union-find)
        parent = list(range(n))

        def root(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j, _ in self.edges:
            parent[root(i)] = root(j)
        if n > 1 and len({root(i) for i in range(n)}) != 1:
            raise SchemaError("network.edges", "network is not connected")

    @property
    def n(self) -> int:
        return len(self.stations)


@dataclass(frozen=True)
class TravelMetrics:
    """All-pairs distances (km) and travel times (h) under shortest-path closure."""

    dist: np.ndarray
    time: np.ndarray

    def __post_init__(self):
        _freeze(self.dist)
        _freeze(self.time)


@dataclass(frozen=True)
class DemandMatrix:
    """Non-negative integer OD demand with zero diagonal."""

    q: np.ndarray

    def __post_init__(self):
        q = self.q
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise SchemaError("demand.matrix", "must be square")
        if (q < 0).any():
            raise SchemaError("demand.matrix", "entries must be non-negative")
        if np.diagonal(q).any():
            raise SchemaError("demand.matrix", "diagonal must be zero")
        _freeze(q)

    @property
    def total(self) -> int:
        return int(self.q.sum())


@dataclass(frozen=True)
class BusType:
    p: int  # number of modular units in the assembled bus
    cost_per_km: float


@dataclass(frozen=True)
class FleetSpec:
    num_routes: int  # K
    unit_capacity: int  # seats per modular unit (v)
    types: tuple[BusType, ...]
    max_units: int  # N, total modular units available

    def __post_init__(self):
        if self.num_routes < 1:
            raise SchemaError("fleet.num_routes", "need at least one route")
        if self.unit_capacity < 1:
            raise SchemaError("fleet.unit_capacity", "must be positive")
        if not self.types:
            raise SchemaError("fleet.types", "need at least one bus type")
        ps = [t.p for t in self.types]
        cs = [t.cost_per_km for t in self.types]
        if any(p < 1 for p in ps) or sorted(set(ps)) != ps:
            raise SchemaError("fleet.types", "unit counts p must be positive and strictly increasing")
        if any(b <= a for a, b in zip(cs, cs[1:])) or cs[0] <= 0:
            raise SchemaError("fleet.types", "per-km costs must be positive and strictly increasing")
        # every route consumes at least one unit, so fewer units than routes is trivially infeasible
        if self.max_units < self.num_routes:
            raise SchemaError("fleet.max_units", "must be >= num_routes")

    def capacity(self, p: int) -> int:
        return p * self.unit_capacity


@dataclass(frozen=True)
class IncentiveSpec:
    """Discrete incentive levels; level 1 is always the free no-incentive option."""

    cons: float  # reluctance constant, enters transfer utility as -cons
    costs: tuple[float, ...]  # ic_s, dollars, indexed by level s = 1..S

    def __post_init__(self):
        if self.cons <= 0:
            raise SchemaError("incentives.cons", "must be positive")
        if not self.costs or self.costs[0] != 0:
            raise SchemaError("incentives.costs", "first level must cost 0 (no incentive)")
        if any(b <= a for a, b in zip(self.costs, self.costs[1:])):
            raise SchemaError("incentives.costs", "must be strictly increasing")

    @property
    def n_levels(self) -> int:
        return len(self.costs)

    def level_name(self, s: int) -> str:
        """Human label for 1-based level s."""
        if len(self.costs) == 4:
            return ("none", "low", "middle", "high")[s - 1]
        return f"level-{s}"


@dataclass(frozen=True)
class CostParams:
    c_t: float  # value of travel time, $/passenger-hour
    c_e: float  # extra cost per unserved passenger, $/passenger
    weights: tuple[float, float, float]  # operator, travel, unserved
    max_route_duration: float  # hours

    def __post_init__(self):
        vals = (self.c_t, self.c_e, *self.weights, self.max_route_duration)
        if any(v < 0 for v in vals):
            raise SchemaError("costs", "all cost parameters must be non-negative")


@dataclass(frozen=True)
class Instance:
    network: RoadNetwork
    metrics: TravelMetrics
    demand: DemandMatrix
    fleet: FleetSpec
    incentives: IncentiveSpec
    costs: CostParams
    demand_seed: int | None = None  # recorded when demand was synthesized

    @property
    def n_stations(self) -> int:
        return self.network.n

    @property
    def depot_start(self) -> int:
        """Virtual route-start node index (appended after real stations)."""
        return self.network.n

    @property
    def depot_end(self) -> int:
        return self.network.n + 1

    def digest(self) -> str:
        """Stable content hash, recorded in emitted model metadata."""
        doc = to_document(self)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def derive_metrics(network: RoadNetwork) -> TravelMetrics:
    """All-pairs shortest-path distances over edge lengths; time = dist / speed.

    The closure makes every ordered station pair a usable routing link with
    the correct cost even when the road graph has no direct edge.
    """
    n = network.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for i, j, length in network.edges:
        d[i, j] = min(d[i, j], length)
        d[j, i] = min(d[j, i], length)
    for m in range(n):  # Floyd-Warshall
        np.minimum(d, d[:, m, None] + d[None, m, :], out=d)
    if np.isinf(d).any():
        raise SchemaError("network.edges", "network is not connected")
    return TravelMetrics(dist=d, time=d / network.bus_speed)


def apportion_largest_remainder(weights: dict, total: int) -> dict:
    """Integer shares proportional to weights, summing to ``total`` exactly.

    Floors the exact quotas, then hands the remaining units to the largest
    fractional remainders; remainder ties go to the lexicographically
    smaller key.
    """
    keys = sorted(weights)
    shares = {key: 0 for key in keys}
    if total > 0:
        wsum = sum(weights[key] for key in keys)
        quota = {key: total * weights[key] / wsum for key in keys}
        for key in keys:
            shares[key] = int(np.floor(quota[key]))
        leftover = total - sum(shares.values())
        by_remainder = sorted(keys, key=lambda key: (-(quota[key] - np.floor(quota[key])), key))
        for key in by_remainder[:leftover]:
            shares[key] += 1
    return shares


def generate_demand(seed: int, total: int, n_stations: int) -> DemandMatrix:
    """Synthesize an OD demand matrix summing exactly to ``total``.

    Each ordered pair (i, j), i != j, draws an integer weight in 1..5 (pairs
    visited in lexicographic order from a PCG64 generator seeded with
    ``seed``); demand is apportioned to the weights by the largest-remainder
    rule, ties broken toward the lexicographically smaller pair.
    """
    if n_stations < 2:
        raise ValueError("need at least 2 stations")
    if total < 0:
        raise ValueError("total demand must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = n_stations
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    weights = {pair: int(rng.integers(1, 6)) for pair in pairs}
    q = np.zeros((n, n), dtype=np.int64)
    for pair, share in apportion_largest_remainder(weights, total).items():
        q[pair] = share
    return DemandMatrix(q=q)


def make_instance(
    network: RoadNetwork,
    demand: DemandMatrix,
    fleet: FleetSpec,
    incentives: IncentiveSpec,
    costs: CostParams,
    metrics: TravelMetrics | None = None,
    demand_seed: int | None = None,
) -> Instance:
    """Assemble and cross-validate an Instance; metrics derived when not given."""
    if metrics is None:
        metrics = derive_metrics(network)
    n = network.n
    if metrics.dist.shape != (n, n):
        raise SchemaError("metrics.dist", f"shape must be {n}x{n}")
    if demand.q.shape != (n, n):
        raise SchemaError("demand.matrix", f"shape must be {n}x{n}")
    return Instance(
        network=network,
        metrics=metrics,
        demand=demand,
        fleet=fleet,
        incentives=incentives,
        costs=costs,
        demand_seed=demand_seed,
    )


# ---------------------------------------------------------------------------
# JSON document schema
# ---------------------------------------------------------------------------

def _get(doc: dict, path: str, typ, required: bool = True, default=None):
    cur = doc
    parts = path.split(".")
    for idx, part in enumerate(parts):
        if not isinstance(cur, dict) or part not in cur:
            if required:
                raise SchemaError(".".join(parts[: idx + 1]), "missing required field")
            return default
        cur = cur[part]
    if typ is float and isinstance(cur, int):
        cur = float(cur)
    if typ is not None and not isinstance(cur, typ):
        raise SchemaError(path, f"expected {typ.__name__}, got {type(cur).__name__}")
    return cur


def load_instance(source) -> Instance:
    """Load and validate an instance from a JSON document.

    ``source`` may be a mapping, a filesystem path, or a JSON string. Layout::

        {
          "network":    {"stations": ["A", ...], "edges": [[i, j, km], ...],
                         "bus_speed": 30},
          "demand":     {"matrix": [[...]]} | {"seed": 1, "total": 100},
          "fleet":      {"num_routes": 3, "unit_capacity": 10, "max_units": 8,
                         "types": [{"p": 1, "cost_per_km": 0.35}, ...]},
          "incentives": {"cons": 1.0, "costs": [0, 1, 2, 3]},
          "costs":      {"c_t": 6.0, "c_e": 3.7, "weights": [0.4, 0.4, 0.2],
                         "T_bar_minutes": 26}
        }

    An optional ``"metrics": {"dist": [[...]]}`` section overrides the derived
    shortest-path closure; it must already be a valid closure. Validation
    errors name the offending field path.
    """
    if isinstance(source, (str, os.PathLike)):
        if isinstance(source, os.PathLike) or os.path.exists(source):
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            try:
                doc = json.loads(source)
            except json.JSONDecodeError as exc:
                raise SchemaError("<document>", f"not a readable path or JSON text: {exc}") from exc
    elif isinstance(source, dict):
        doc = source
    else:
        raise SchemaError("<document>", f"unsupported source type {type(source).__name__}")

    raw_stations = _get(doc, "network.stations", list)
    stations = []
    for idx, entry in enumerate(raw_stations):
        if isinstance(entry, str):
            stations.append(Station(id=idx, name=entry))
        elif isinstance(entry, dict):
            stations.append(Station(id=int(entry.get("id", idx)), name=str(entry.get("name", idx))))
        else:
            raise SchemaError(f"network.stations[{idx}]", "expected name or {id, name}")
    raw_edges = _get(doc, "network.edges", list)
    edges = []
    for idx, e in enumerate(raw_edges):
        if not isinstance(e, (list, tuple)) or len(e) != 3:
            raise SchemaError(f"network.edges[{idx}]", "expected [i, j, length_km]")
        edges.append((int(e[0]), int(e[1]), float(e[2])))
    network = RoadNetwork(
        stations=tuple(stations),
        edges=tuple(edges),
        bus_speed=_get(doc, "network.bus_speed", (int, float)),
    )

    metrics = None
    if "metrics" in doc:
        dist = np.asarray(_get(doc, "metrics.dist", list), dtype=float)
        if dist.shape != (network.n, network.n):
            raise SchemaError("metrics.dist", f"shape must be {network.n}x{network.n}")
        if not np.allclose(dist, dist.T) or np.abs(np.diagonal(dist)).max() > 0:
            raise SchemaError("metrics.dist", "must be symmetric with zero diagonal")
        closure = np.minimum.reduce([dist[:, m, None] + dist[None, m, :] for m in range(network.n)])
        if (dist - closure > 1e-9).any():
            raise SchemaError("metrics.dist", "violates triangle inequality (not a shortest-path closure)")
        metrics = TravelMetrics(dist=dist, time=dist / network.bus_speed)

    demand_sec = _get(doc, "demand", dict)
    demand_seed = None
    if "matrix" in demand_sec:
        q = np.asarray(demand_sec["matrix"], dtype=np.int64)
        if q.shape != (network.n, network.n):
            raise SchemaError("demand.matrix", f"shape must be {network.n}x{network.n}")
        demand = DemandMatrix(q=q)
        if "total" in demand_sec and demand.total != int(demand_sec["total"]):
            raise SchemaError("demand.total", f"matrix sums to {demand.total}, not {demand_sec['total']}")
    elif "seed" in demand_sec and "total" in demand_sec:
        demand_seed = int(demand_sec["seed"])
        demand = generate_demand(demand_seed, int(demand_sec["total"]), network.n)
    else:
        raise SchemaError("demand", "need either matrix or {seed, total}")

    types = []
    for idx, t in enumerate(_get(doc, "fleet.types", list)):
        if not isinstance(t, dict):
            raise SchemaError(f"fleet.types[{idx}]", "expected {p, cost_per_km}")
        types.append(BusType(p=int(_get(t, "p", int)), cost_per_km=float(_get(t, "cost_per_km", (int, float)))))
    fleet = FleetSpec(
        num_routes=_get(doc, "fleet.num_routes", int),
        unit_capacity=_get(doc, "fleet.unit_capacity", int),
        types=tuple(types),
        max_units=_get(doc, "fleet.max_units", int),
    )

    incentives = IncentiveSpec(
        cons=_get(doc, "incentives.cons", (int, float)),
        costs=tuple(float(c) for c in _get(doc, "incentives.costs", list)),
    )

    weights = _get(doc, "costs.weights", list)
    if len(weights) != 3:
        raise SchemaError("costs.weights", "expected three weights")
    costs = CostParams(
        c_t=_get(doc, "costs.c_t", (int, float)),
        c_e=_get(doc, "costs.c_e", (int, float)),
        weights=tuple(float(w) for w in weights),
        max_route_duration=_get(doc, "costs.T_bar_minutes", (int, float)) / 60.0,
    )

    return make_instance(network, demand, fleet, incentives, costs, metrics, demand_seed)


def to_document(inst: Instance) -> dict:
    """Serialize an Instance back to the JSON document layout (explicit matrix)."""
    return {
        "network": {
            "stations": [st.name for st in inst.network.stations],
            "edges": [[i, j, length] for i, j, length in inst.network.edges],
            "bus_speed": inst.network.bus_speed,
        },
        "demand": {"matrix": inst.demand.q.tolist()},
        "fleet": {
            "num_routes": inst.fleet.num_routes,
            "unit_capacity": inst.fleet.unit_capacity,
            "max_units": inst.fleet.max_units,
            "types": [{"p": t.p, "cost_per_km": t.cost_per_km} for t in inst.fleet.types],
        },
        "incentives": {"cons": inst.incentives.cons, "costs": list(inst.incentives.costs)},
        "costs": {
            "c_t": inst.costs.c_t,
            "c_e": inst.costs.c_e,
            "weights": list(inst.costs.weights),
            "T_bar_minutes": inst.costs.max_route_duration * 60.0,
        },
    }


def with_demand(inst: Instance, demand: DemandMatrix, demand_seed: int | None = None) -> Instance:
    """Copy of ``inst`` with the demand matrix replaced (used by demand sweeps)."""
    return Instance(
        network=inst.network,
        metrics=inst.metrics,
        demand=demand,
        fleet=inst.fleet,
        incentives=inst.incentives,
        costs=inst.costs,
        demand_seed=demand_seed if demand_seed is not None else inst.demand_seed,
    )
