"""Exact MILP solving at desk scale: LP relaxation, branch-and-bound, lazy cuts.

The built-in path pairs the dense simplex with a best-first branch-and-bound
(most-fractional branching, deterministic tie-breaks, user lazy-cut hook run
at every integral node). Large models can delegate the LP relaxations or the
whole MILP to HiGHS through scipy (``lp_backend``/``milp_backend``); results
carry the same Solution surface either way.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .milp import INF, MilpModel
from .simplex import SimplexNumericsError, solve_dense

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
LIMIT = "limit"

# beyond this dense-tableau cell count the auto backend hands LPs to HiGHS
_DENSE_CELL_LIMIT = 300_000


@dataclass
class SolverConfig:
    integrality_tol: float = 1e-6
    gap_tol: float = 1e-9  # absolute optimality gap
    node_limit: int | None = None
    time_limit: float | None = None  # seconds
    branching: str = "most-fractional"  # or "pseudo-cost"
    seed: int = 0
    lp_backend: str = "auto"  # auto | dense | highs
    milp_backend: str = "builtin"  # builtin | highs
    log_nodes: bool = False

    def __post_init__(self):
        if self.integrality_tol <= 0 or self.gap_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.branching not in ("most-fractional", "pseudo-cost"):
            raise ValueError(f"unknown branching rule {self.branching!r}")


@dataclass
class Solution:
    status: str
    objective: float | None
    values: dict[int, float]
    bound: float | None
    node_count: int = 0
    wall_time: float = 0.0
    node_log: list[tuple[int, float, int]] = field(default_factory=list)  # depth, bound, n_frac

    def value(self, model: MilpModel, name: str) -> float:
        return self.values[model.var_id(name)]

    def named_values(self, model: MilpModel) -> dict[str, float]:
        return {model.variables[vid].name: val for vid, val in self.values.items()}


def format_node_log(sol: Solution) -> str:
    lines = ["depth\tbound\tn_fractional"]
    lines += [f"{d}\t{b:.9g}\t{nf}" for d, b, nf in sol.node_log]
    return "\n".join(lines) + "\n"


def dump_solution(model: MilpModel, sol: Solution) -> str:
    """Text dump, one ``name value`` line per variable (name-sorted)."""
    named = sol.named_values(model)
    return "\n".join(f"{name} {named[name]:.12g}" for name in sorted(named)) + "\n"


# ---------------------------------------------------------------------------
# prepared numeric form
# ---------------------------------------------------------------------------

class _Prepared:
    def __init__(self, model: MilpModel):
        self.model = model
        self.c, self.c0 = model.objective_vector()
        self.lo, self.hi = model.bounds_arrays()
        self.int_mask = model.integrality_mask()
        self.int_ids = np.nonzero(self.int_mask)[0]
        self.A, self.senses, self.b = model.rows_sparse()
        self.n = model.n_variables
        self.priority = np.array([model.branch_priority.get(i, 0) for i in range(self.n)])
        self._dense_A = None

    def dense_rows(self, cuts):
        base = self.A.toarray() if self._dense_A is None else self._dense_A
        self._dense_A = base
        if not cuts:
            return base, list(self.senses), self.b
        extra = np.zeros((len(cuts), self.n))
        senses = list(self.senses)
        rhs = list(self.b)
        for r, (terms, sense, c_rhs) in enumerate(cuts):
            for vid, coef in terms:
                extra[r, vid] += coef
            senses.append(sense)
            rhs.append(c_rhs)
        return np.vstack([base, extra]), senses, np.array(rhs)

    def pick_backend(self, backend: str) -> str:
        if backend != "auto":
            return backend
        m = self.A.shape[0]
        cells = (m + 2) * (self.n + 2 * m + 2)
        return "dense" if cells <= _DENSE_CELL_LIMIT else "highs"


def _lp_highs(prep: _Prepared, cuts, lo, hi):
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix, vstack

    A = prep.A
    senses = list(prep.senses)
    b = list(prep.b)
    if cuts:
        data, indices, indptr = [], [], [0]
        for terms, sense, rhs in cuts:
            for vid, coef in terms:
                indices.append(vid)
                data.append(coef)
            indptr.append(len(indices))
            senses.append(sense)
            b.append(rhs)
        extra = csr_matrix((data, indices, indptr), shape=(len(cuts), prep.n))
        A = vstack([A, extra], format="csr")
    b = np.array(b)
    sense_arr = np.array(senses)
    is_le = sense_arr == "<="
    is_ge = sense_arr == ">="
    is_eq = sense_arr == "="
    A_ub = None
    b_ub = None
    if is_le.any() or is_ge.any():
        from scipy.sparse import vstack as svstack

        parts = []
        rhs_parts = []
        if is_le.any():
            parts.append(A[is_le])
            rhs_parts.append(b[is_le])
        if is_ge.any():
            parts.append(-A[is_ge])
            rhs_parts.append(-b[is_ge])
        A_ub = svstack(parts, format="csr") if len(parts) > 1 else parts[0]
        b_ub = np.concatenate(rhs_parts)
    A_eq = A[is_eq] if is_eq.any() else None
    b_eq = b[is_eq] if is_eq.any() else None
    res = linprog(
        prep.c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=np.column_stack([lo, hi]),
        method="highs",
    )
    if res.status == 0:
        return OPTIMAL, res.x, float(res.fun)
    if res.status == 2:
        return INFEASIBLE, None, None
    if res.status == 3:
        return UNBOUNDED, None, None
    raise SimplexNumericsError(f"HiGHS LP failed with status {res.status}: {res.message}")


def _lp_solve(prep: _Prepared, cuts, lo, hi, backend: str):
    if backend == "highs":
        return _lp_highs(prep, cuts, lo, hi)
    A, senses, b = prep.dense_rows(cuts)
    res = solve_dense(prep.c, A, senses, b, lo, hi)
    return res.status, res.x, res.objective


def solve_lp(model: MilpModel, config: SolverConfig | None = None) -> Solution:
    """Solve the continuous relaxation (integrality dropped, bounds kept)."""
    config = config or SolverConfig()
    prep = _Prepared(model)
    t0 = time.perf_counter()
    backend = prep.pick_backend(config.lp_backend)
    status, x, obj = _lp_solve(prep, [], prep.lo, prep.hi, backend)
    wall = time.perf_counter() - t0
    if status != OPTIMAL:
        return Solution(status, None, {}, None, 0, wall)
    total = obj + prep.c0
    return Solution(OPTIMAL, total, {i: float(v) for i, v in enumerate(x)}, total, 0, wall)


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------

def _fractional(x, int_ids, tol):
    vals = x[int_ids]
    frac = np.abs(vals - np.round(vals))
    mask = frac > tol
    return int_ids[mask], frac[mask]


class _PseudoCosts:
    """Average objective gain per unit of fractionality, per direction."""

    def __init__(self, c):
        init = np.abs(c) + 1.0
        self.down_sum = init.copy()
        self.down_n = np.ones_like(c)
        self.up_sum = init.copy()
        self.up_n = np.ones_like(c)

    def record(self, var, direction, gain, dist):
        if dist <= 1e-12:
            return
        rate = max(gain, 0.0) / dist
        if direction < 0:
            self.down_sum[var] += rate
            self.down_n[var] += 1
        else:
            self.up_sum[var] += rate
            self.up_n[var] += 1

    def score(self, var, frac_part):
        down = (self.down_sum[var] / self.down_n[var]) * frac_part
        up = (self.up_sum[var] / self.up_n[var]) * (1.0 - frac_part)
        return down * up


def solve_milp(model: MilpModel, config: SolverConfig | None = None, lazy=None) -> Solution:
    """Best-first branch-and-bound; ``lazy(solution) -> [(terms, sense, rhs)]``
    runs at every integral node, returned cuts join the model and the node is
    re-solved.
    """
    config = config or SolverConfig()
    if config.milp_backend == "highs":
        return _milp_highs(model, config, lazy)
    t0 = time.perf_counter()
    prep = _Prepared(model)
    backend = prep.pick_backend(config.lp_backend)
    tol = config.integrality_tol
    cuts: list = []
    pseudo = _PseudoCosts(prep.c) if config.branching == "pseudo-cost" else None

    incumbent_x = None
    incumbent_obj = np.inf  # excludes the constant
    node_log: list[tuple[int, float, int]] = []
    global_lb = -np.inf
    # heap entries: (lp bound estimate, insertion counter, depth, bounds overlay, parent info).
    # After branching, the search plunges into one child immediately (the other
    # goes on the heap): pure bound-ordered exploration finds no incumbent at
    # desk scale on flat-bound models, and without an incumbent nothing prunes.
    counter = 0
    heap: list = []
    dive = (-np.inf, 0, 0, {}, None)
    n_nodes = 0
    hit_limit = False

    while dive is not None or heap:
        if dive is not None:
            bound_est, _, depth, overlay, parent = dive
            dive = None
        else:
            bound_est, _, depth, overlay, parent = heapq.heappop(heap)
        if bound_est >= incumbent_obj - config.gap_tol:
            continue
        if config.time_limit is not None and time.perf_counter() - t0 > config.time_limit:
            hit_limit = True
            break
        if config.node_limit is not None and n_nodes >= config.node_limit:
            hit_limit = True
            break
        lo = prep.lo.copy()
        hi = prep.hi.copy()
        for vid, (l, h) in overlay.items():
            lo[vid] = max(lo[vid], l)
            hi[vid] = min(hi[vid], h)
        n_nodes += 1
        while True:  # re-solve loop for lazy cuts at this node
            status, x, obj = _lp_solve(prep, cuts, lo, hi, backend)
            if status == UNBOUNDED:
                if incumbent_x is None and not overlay:
                    return Solution(UNBOUNDED, None, {}, None, n_nodes, time.perf_counter() - t0)
                status = INFEASIBLE  # unbounded subproblem cannot improve a bounded root
            if status == INFEASIBLE:
                x = None
                break
            frac_ids, fracs = _fractional(x, prep.int_ids, tol)
            if config.log_nodes:
                open_est = min([obj] + [e[0] for e in heap[:1]])
                if np.isfinite(open_est):
                    global_lb = max(global_lb, open_est)
                node_log.append((depth, global_lb + prep.c0, len(frac_ids)))
            if pseudo is not None and parent is not None:
                pvar, pdir, pobj, pdist = parent
                pseudo.record(pvar, pdir, obj - pobj, pdist)
                parent = None
            if obj >= incumbent_obj - config.gap_tol:
                x = None
                break
            if frac_ids.size == 0:
                if lazy is not None:
                    sol = Solution(OPTIMAL, obj + prep.c0, {i: float(v) for i, v in enumerate(x)}, None)
                    new_cuts = lazy(sol)
                    if new_cuts:
                        cuts.extend(new_cuts)
                        continue
                incumbent_x = x.copy()
                incumbent_obj = obj
                x = None
                break
            # branch within the lowest (most structural) priority class present
            prios = prep.priority[frac_ids]
            in_class = prios == prios.min()
            frac_ids = frac_ids[in_class]
            vals = x[frac_ids]
            frac_parts = vals - np.floor(vals)
            if pseudo is not None:
                scores = np.array([pseudo.score(v, fp) for v, fp in zip(frac_ids, frac_parts)])
            else:
                scores = np.minimum(frac_parts, 1.0 - frac_parts)
            best = np.lexsort((frac_ids, -scores))[0]
            bvar = int(frac_ids[best])
            bval = float(x[bvar])
            frac_part = bval - np.floor(bval)
            down = dict(overlay)
            down[bvar] = (lo[bvar], np.floor(bval))
            up = dict(overlay)
            up[bvar] = (np.ceil(bval), hi[bvar])
            down_node = (obj, 0, depth + 1, down, (bvar, -1, obj, frac_part))
            up_node = (obj, 0, depth + 1, up, (bvar, +1, obj, 1.0 - frac_part))
            # plunge toward the nearer integer; the sibling joins the queue
            dive, shelved = (up_node, down_node) if frac_part >= 0.5 else (down_node, up_node)
            counter += 1
            heapq.heappush(heap, (shelved[0], counter, *shelved[2:]))
            break

    wall = time.perf_counter() - t0
    if hit_limit:
        open_bounds = [e[0] for e in heap]
        if dive is not None:
            open_bounds.append(dive[0])
        lb = min(open_bounds) if open_bounds else incumbent_obj
        lb_total = lb + prep.c0 if np.isfinite(lb) else None
        if incumbent_x is not None:
            values = {i: float(v) for i, v in enumerate(incumbent_x)}
            return Solution(LIMIT, incumbent_obj + prep.c0, values, lb_total, n_nodes, wall, node_log)
        return Solution(LIMIT, None, {}, lb_total, n_nodes, wall, node_log)
    if incumbent_x is None:
        return Solution(INFEASIBLE, None, {}, None, n_nodes, wall, node_log)
    values = {i: float(v) for i, v in enumerate(incumbent_x)}
    total = incumbent_obj + prep.c0
    return Solution(OPTIMAL, total, values, total, n_nodes, wall, node_log)


def _milp_highs(model: MilpModel, config: SolverConfig, lazy=None) -> Solution:
    """Whole-model HiGHS solve; lazy cuts looped outside (solve, separate, re-solve)."""
    from scipy.optimize import Bounds, milp
    from scipy.optimize import LinearConstraint as SpLinearConstraint
    from scipy.sparse import csr_matrix, vstack

    t0 = time.perf_counter()
    prep = _Prepared(model)
    sense_arr = np.array(prep.senses)
    base_lb = np.where(sense_arr == "<=", -np.inf, prep.b)
    base_ub = np.where(sense_arr == ">=", np.inf, prep.b)
    integrality = prep.int_mask.astype(int)
    cuts: list = []
    nodes = 0
    while True:
        A = prep.A
        lb = base_lb
        ub = base_ub
        if cuts:
            data, indices, indptr = [], [], [0]
            clb, cub = [], []
            for terms, sense, rhs in cuts:
                for vid, coef in terms:
                    indices.append(vid)
                    data.append(coef)
                indptr.append(len(indices))
                clb.append(-np.inf if sense == "<=" else rhs)
                cub.append(np.inf if sense == ">=" else rhs)
            extra = csr_matrix((data, indices, indptr), shape=(len(cuts), prep.n))
            A = vstack([prep.A, extra], format="csr")
            lb = np.concatenate([base_lb, clb])
            ub = np.concatenate([base_ub, cub])
        options = {}
        if config.time_limit is not None:
            remaining = config.time_limit - (time.perf_counter() - t0)
            options["time_limit"] = max(remaining, 0.01)
        if config.node_limit is not None:
            options["node_limit"] = config.node_limit
        res = milp(
            c=prep.c,
            constraints=SpLinearConstraint(A, lb, ub),
            integrality=integrality,
            bounds=Bounds(prep.lo, prep.hi),
            options=options,
        )
        nodes += int(getattr(res, "mip_node_count", 0) or 0)
        wall = time.perf_counter() - t0
        if res.status == 1:
            if res.x is not None:
                values = {i: float(v) for i, v in enumerate(res.x)}
                bound = getattr(res, "mip_dual_bound", None)
                bound = bound + prep.c0 if bound is not None else None
                return Solution(LIMIT, float(res.fun) + prep.c0, values, bound, nodes, wall)
            return Solution(LIMIT, None, {}, None, nodes, wall)
        if res.status == 2:
            return Solution(INFEASIBLE, None, {}, None, nodes, wall)
        if res.status == 3:
            return Solution(UNBOUNDED, None, {}, None, nodes, wall)
        if res.status != 0:
            raise SimplexNumericsError(f"HiGHS MILP failed: {res.message}")
        total = float(res.fun) + prep.c0
        sol = Solution(OPTIMAL, total, {i: float(v) for i, v in enumerate(res.x)}, total, nodes, wall)
        if lazy is not None:
            new_cuts = lazy(sol)
            if new_cuts:
                cuts.extend(new_cuts)
                continue
        return sol


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    ok: bool
    max_violation: float
    by_family: dict[str, float]
    messages: list[str]

    def __str__(self):
        lines = [f"verify: {'OK' if self.ok else 'VIOLATED'} (max {self.max_violation:.3g})"]
        for fam in sorted(self.by_family):
            lines.append(f"  {fam}: max violation {self.by_family[fam]:.3g}")
        lines.extend(f"  ! {m}" for m in self.messages)
        return "\n".join(lines)


def verify(model: MilpModel, solution: Solution, tol: float = 1e-6) -> VerifyReport:
    """Re-evaluate every row, bound, and integrality requirement at a solution."""
    x = np.zeros(model.n_variables)
    for vid, val in solution.values.items():
        x[vid] = val
    by_family: dict[str, float] = {}
    messages: list[str] = []
    worst = 0.0
    for con in model.constraints:
        lhs = sum(coef * x[vid] for vid, coef in con.terms)
        if con.sense == "<=":
            viol = max(0.0, lhs - con.rhs)
        elif con.sense == ">=":
            viol = max(0.0, con.rhs - lhs)
        else:
            viol = abs(lhs - con.rhs)
        fam = con.name.partition("[")[0]
        by_family[fam] = max(by_family.get(fam, 0.0), viol)
        if viol > tol:
            messages.append(f"{con.name}: violation {viol:.3g}")
        worst = max(worst, viol)
    for v in model.variables:
        viol = max(0.0, v.lo - x[v.id], x[v.id] - v.hi)
        if viol > tol:
            messages.append(f"bounds {v.name}: violation {viol:.3g}")
            worst = max(worst, viol)
        if v.kind in ("binary", "integer"):
            gap = abs(x[v.id] - round(x[v.id]))
            if gap > tol:
                messages.append(f"integrality {v.name}: off by {gap:.3g}")
                worst = max(worst, gap)
    return VerifyReport(ok=worst <= tol, max_violation=worst, by_family=by_family, messages=messages)
