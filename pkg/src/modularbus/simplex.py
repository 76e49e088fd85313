"""Dense two-phase primal simplex with variable upper bounds.

Correctness-first LP engine for desk-scale models: full tableau, upper
bounds handled by the flip substitution (a nonbasic variable parked at its
upper bound is replaced by its reflection, so every nonbasic sits at zero),
Dantzig pricing with an automatic switch to Bland's rule after a degenerate
stall, which guarantees termination.

The driver below works on the general form

    min c.x   s.t.  A x (<=, =, >=) b,   lo <= x <= hi

with infinite bounds allowed; free variables are split into differences of
non-negatives and (-inf, hi] variables are reflected before the tableau is
built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RC_TOL = 1e-9  # reduced-cost threshold for entering
_PIVOT_TOL = 1e-10
_FEAS_TOL = 1e-7  # phase-1 residual considered infeasible above this
_STALL_LIMIT = 120  # degenerate pivots before switching to Bland


class SimplexNumericsError(RuntimeError):
    """Iteration cap hit; message carries size/iteration diagnostics."""


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int


def solve_dense(c, A, senses, b, lo, hi, max_iter: int | None = None) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m, n = A.shape if A.size else (len(b), len(c))
    if A.size == 0:
        A = A.reshape(m, n)

    # --- normalize variables to [0, u], u possibly +inf -----------------
    # kept[j] describes how to map the tableau variable back to x[j]:
    #   ("shift", j, lo_j)      x_j = lo_j + t
    #   ("reflect", j, hi_j)    x_j = hi_j - t
    #   ("split+", j) ("split-", j)   x_j = t_plus - t_minus
    cols: list[np.ndarray] = []
    ccols: list[float] = []
    ucols: list[float] = []
    recipe: list[tuple] = []
    shift_b = np.zeros(m)
    const = 0.0
    for j in range(n):
        aj = A[:, j] if A.size else np.zeros(m)
        if lo[j] == -np.inf and hi[j] == np.inf:
            cols.append(aj)
            ccols.append(c[j])
            ucols.append(np.inf)
            recipe.append(("split+", j))
            cols.append(-aj)
            ccols.append(-c[j])
            ucols.append(np.inf)
            recipe.append(("split-", j))
        elif lo[j] == -np.inf:
            # x = hi - t, t in [0, inf)
            shift_b += aj * hi[j]
            const += c[j] * hi[j]
            cols.append(-aj)
            ccols.append(-c[j])
            ucols.append(np.inf)
            recipe.append(("reflect", j, hi[j]))
        else:
            if lo[j] > hi[j]:
                return SimplexResult(INFEASIBLE, None, None, 0)
            shift_b += aj * lo[j]
            const += c[j] * lo[j]
            u = hi[j] - lo[j]
            if u <= 0.0:
                recipe_entry = ("fixed", j, lo[j])
                recipe.append(recipe_entry)
                continue  # fixed variable: constant, no column
            cols.append(aj)
            ccols.append(c[j])
            ucols.append(u)
            recipe.append(("shift", j, lo[j]))
    b2 = b - shift_b

    nstruct = len(cols)
    # slacks: <= gets +1, >= gets -1, = none
    slack_rows = [i for i, s in enumerate(senses) if s != "="]
    slack_pos = {i: nstruct + pos for pos, i in enumerate(slack_rows)}
    T_cols = nstruct + len(slack_rows)
    ncols = T_cols + m  # artificials appended per row (some unused)
    body = np.zeros((m, ncols + 1))
    if nstruct:
        body[:, :nstruct] = np.column_stack(cols)
    u_all = np.full(ncols, np.inf)
    u_all[:nstruct] = ucols
    for pos, i in enumerate(slack_rows):
        body[i, nstruct + pos] = 1.0 if senses[i] == "<=" else -1.0
    body[:, -1] = b2
    # flip rows to non-negative rhs
    neg = body[:, -1] < 0
    body[neg, :] *= -1.0

    basis = np.empty(m, dtype=np.int64)
    art_cols = []
    for i in range(m):
        # a slack with +1 coefficient can start basic; otherwise artificial
        sc = None
        if senses[i] != "=":
            pos = slack_pos[i]
            if body[i, pos] == 1.0:
                sc = pos
        if sc is not None:
            basis[i] = sc
        else:
            col = T_cols + i
            body[i, col] = 1.0
            basis[i] = col
            art_cols.append(col)
    is_art = np.zeros(ncols, dtype=bool)
    for col in art_cols:
        is_art[col] = True

    flipped = np.zeros(ncols, dtype=bool)
    c2 = np.zeros(ncols)
    c2[:nstruct] = ccols

    if max_iter is None:
        max_iter = 5000 + 40 * (m + ncols)
    iters = 0

    def build_cost_row(cost_vec):
        row = np.append(cost_vec.copy(), 0.0)
        # account for flipped columns (x = u - t substitution)
        for j in np.nonzero(flipped)[0]:
            row[-1] -= row[j] * u_all[j]
            row[j] = -row[j]
        for i in range(m):
            cb = row[basis[i]]
            if cb != 0.0:
                row -= cb * body[i, :]
        return row

    def run_phase(cost_row, allow_art_enter: bool):
        nonlocal iters
        stall = 0
        bland = False
        while True:
            if iters >= max_iter:
                raise SimplexNumericsError(
                    f"simplex iteration cap {max_iter} hit (m={m}, n={ncols}, obj={-cost_row[-1]:.6g})"
                )
            rc = cost_row[:-1]
            eligible = rc < -_RC_TOL
            if not allow_art_enter:
                eligible &= ~is_art
            eligible[basis] = False
            idx = np.nonzero(eligible)[0]
            if idx.size == 0:
                return OPTIMAL, cost_row
            j = idx[0] if bland else idx[np.argmin(rc[idx])]
            d = body[:, j]
            xb = body[:, -1]
            t_best = u_all[j]
            leave = -1
            leave_at_upper = False
            pos_rows = np.nonzero(d > _PIVOT_TOL)[0]
            if pos_rows.size:
                ratios = xb[pos_rows] / d[pos_rows]
                k = np.argmin(ratios)
                # Bland: smallest basis index among ties
                if bland:
                    near = pos_rows[np.abs(ratios - ratios[k]) <= 1e-12]
                    k_row = near[np.argmin(basis[near])]
                    t_pos = xb[k_row] / d[k_row]
                else:
                    k_row = pos_rows[k]
                    t_pos = ratios[k]
                if t_pos < t_best - 1e-15:
                    t_best, leave, leave_at_upper = t_pos, k_row, False
                elif t_pos <= t_best:
                    t_best, leave, leave_at_upper = t_pos, k_row, False
            ub = u_all[basis]
            neg_rows = np.nonzero((d < -_PIVOT_TOL) & np.isfinite(ub))[0]
            if neg_rows.size:
                ratios = (ub[neg_rows] - xb[neg_rows]) / (-d[neg_rows])
                k = np.argmin(ratios)
                k_row = neg_rows[k]
                t_neg = ratios[k]
                if t_neg < t_best - 1e-15:
                    t_best, leave, leave_at_upper = t_neg, k_row, True
            if not np.isfinite(t_best):
                return UNBOUNDED, cost_row
            iters += 1
            obj_gain = cost_row[j] * t_best
            if leave == -1:
                # bound flip: j travels to its upper bound, basis unchanged
                body[:, -1] -= d * t_best
                cost_row[-1] -= cost_row[j] * t_best
                body[:, j] *= -1.0
                cost_row[j] = -cost_row[j]
                flipped[j] = ~flipped[j]
            else:
                if leave_at_upper:
                    # reflect the leaving basic so it exits at zero
                    lb_col = basis[leave]
                    body[leave, -1] -= u_all[lb_col]
                    body[:, lb_col] *= -1.0
                    cost_row[lb_col] = -cost_row[lb_col]
                    flipped[lb_col] = ~flipped[lb_col]
                piv = body[leave, j]
                body[leave, :] /= piv
                col = body[:, j].copy()
                col[leave] = 0.0
                body[:, :] -= np.outer(col, body[leave, :])
                cost_row[:] -= cost_row[j] * body[leave, :]
                basis[leave] = j
            if abs(obj_gain) <= 1e-12:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
            else:
                stall = 0

    # ---- phase 1 -------------------------------------------------------
    if art_cols:
        c1 = np.zeros(ncols)
        c1[is_art] = 1.0
        row1 = build_cost_row(c1)
        status, row1 = run_phase(row1, allow_art_enter=True)
        phase1_obj = -row1[-1]
        if status == UNBOUNDED or phase1_obj > _FEAS_TOL:
            return SimplexResult(INFEASIBLE, None, None, iters)
        # drive lingering artificials out of the basis where possible
        for i in range(m):
            if is_art[basis[i]]:
                row = body[i, :-1]
                cands = np.nonzero((np.abs(row) > _PIVOT_TOL) & ~is_art)[0]
                cands = cands[~np.isin(cands, basis)]
                if cands.size:
                    j = cands[0]
                    piv = body[i, j]
                    body[i, :] /= piv
                    col = body[:, j].copy()
                    col[i] = 0.0
                    body[:, :] -= np.outer(col, body[i, :])
                    basis[i] = j
                # else: redundant row, artificial stays basic at zero

    # ---- phase 2 -------------------------------------------------------
    row2 = build_cost_row(c2)
    status, row2 = run_phase(row2, allow_art_enter=False)
    if status == UNBOUNDED:
        return SimplexResult(UNBOUNDED, None, None, iters)

    # recover x
    t_val = np.zeros(ncols)
    t_val[basis] = body[:, -1]
    t_val[flipped] = u_all[flipped] - t_val[flipped]
    # guard tiny negatives from roundoff
    np.clip(t_val, 0.0, None, out=t_val)
    x = np.zeros(n)
    pos = 0
    for entry in recipe:
        tag = entry[0]
        if tag == "fixed":
            x[entry[1]] = entry[2]
            continue
        val = t_val[pos]
        if tag == "shift":
            x[entry[1]] = entry[2] + val
        elif tag == "reflect":
            x[entry[1]] = entry[2] - val
        elif tag == "split+":
            x[entry[1]] += val
        elif tag == "split-":
            x[entry[1]] -= val
        pos += 1
    obj = float(c @ x)
    return SimplexResult(OPTIMAL, x, obj, iters)
