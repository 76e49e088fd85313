"""The built-in exact solver on a small integer program, with a lazy cut.

Best-first branch-and-bound over the dense-simplex relaxation; a user hook
runs at every integral node and may reject the point with new rows, which is
how subtour exclusion works during design solves.
"""

from modularbus import BINARY, INTEGER, MilpModel, SolverConfig, solve_milp, verify

m = MilpModel("lot-sizing-toy")
build = [m.add_variable(f"build[{i}]", BINARY) for i in range(4)]
units = m.add_variable("units", INTEGER, 0, 10)
m.add_constraint("land", [(b, 1.0) for b in build], "<=", 2.0)
m.add_constraint("supply", [(units, 1.0)] + [(b, -4.0) for b in build], "<=", 0.0)
m.add_constraint("need", [(units, 1.0)], ">=", 5.0)
m.set_objective([(units, 1.0)] + [(b, 2.5) for b in build])

sol = solve_milp(m, SolverConfig(log_nodes=True))
print(f"status={sol.status} objective={sol.objective} nodes={sol.node_count}")
print("chosen:", {v.name: sol.values[v.id] for v in m.variables if sol.values[v.id] > 0.5})

report = verify(m, sol)
print(report)

# a lazy hook can veto integral points it dislikes
def no_first_two_together(s):
    if s.values[build[0]] > 0.5 and s.values[build[1]] > 0.5:
        return [([(build[0], 1.0), (build[1], 1.0)], "<=", 1.0)]
    return []

sol2 = solve_milp(m, SolverConfig(), lazy=no_first_two_together)
print(f"\nwith the veto: objective={sol2.objective}, " f"pair={sol2.values[build[0]], sol2.values[build[1]]}")
