"""Incentive scheme vs the no-incentive baseline on identical noise draws.

The baseline pins every transfer count to zero, so its feasible set is a
restriction of the incentive scheme's: the optimal system cost can only be
equal or worse, and on relay-style demand the service rate drops too.
"""

from demo_05_design_run import draws, inst  # same instance and draws

from modularbus import SolverConfig, build_mtz_variant, compute_kpis, decode, solve_milp

rows = []
for label, no_incentive in (("incentive", False), ("no-incentive", True)):
    model_art = build_mtz_variant(inst, draws, no_incentive=no_incentive)
    sol = solve_milp(model_art.model, SolverConfig(milp_backend="highs"))
    outcome = decode(sol, model_art)
    kp = compute_kpis(outcome, inst)
    rows.append((label, kp, outcome.transfer_total))

print(f"{'scheme':>13} | {'TSC':>7} | {'SR':>5} | {'TR':>5} | transfers")
for label, kp, transfers in rows:
    tr = "n/a" if kp.tr_pct is None else f"{kp.tr_pct:.0f}%"
    print(f"{label:>13} | {kp.tsc:7.3f} | {kp.sr_pct:4.0f}% | {tr:>5} | {transfers}")

inc, base = rows[0][1], rows[1][1]
assert inc.tsc <= base.tsc + 1e-6  # restriction argument, always true
print("\nrestriction property holds: incentive TSC <= baseline TSC")
