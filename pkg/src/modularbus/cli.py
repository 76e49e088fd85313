"""Command-line entry point: run a design, compare schemes, sweep demand.

Exit codes: 0 solved to optimality, 2 infeasible, 3 a limit was hit,
4 input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import choice
from .evaluate import KPI_CSV_HEADER, compute_kpis, decode, kpi_csv_row, validate_nonlinear
from .formulation import build_elp, expected_variable_count, make_lazy_separator
from .instance import Instance, SchemaError, generate_demand, load_instance, with_demand
from .milp import ModelError
from .milpio import export_model
from .solver import LIMIT, OPTIMAL, SolverConfig, dump_solution, format_node_log, solve_milp

_EXIT_OK = 0
_EXIT_INFEASIBLE = 2
_EXIT_LIMIT = 3
_EXIT_INPUT = 4

# under --backend auto the built-in engine takes only genuinely tiny jobs:
# hardness scales with the integer flow ranges (total demand), not just with
# the variable count
_AUTO_BUILTIN_VARS = 1200
_AUTO_BUILTIN_DEMAND = 20


def _status_exit(status: str) -> int:
    return {OPTIMAL: _EXIT_OK, LIMIT: _EXIT_LIMIT}.get(status, _EXIT_INFEASIBLE)


def _apply_demand(inst: Instance, demand: int | None) -> Instance:
    if demand is None:
        return inst
    if inst.demand_seed is None:
        raise SchemaError("demand", "--demand override needs a seed-based demand section")
    return with_demand(inst, generate_demand(inst.demand_seed, demand, inst.n_stations))


def _resolve_modes(args, inst: Instance) -> tuple[str, str]:
    backend = args.backend
    if backend == "auto":
        tiny = (
            expected_variable_count(inst, args.draws) <= _AUTO_BUILTIN_VARS
            and inst.demand.total <= _AUTO_BUILTIN_DEMAND
        )
        backend = "builtin" if tiny else "highs"
    subtour = args.subtour
    if subtour == "auto":
        # the HiGHS path has no callback hook, so separated cuts mean repeated
        # full solves; the ordering variant solves once
        subtour = "mtz" if backend == "highs" else "lazy"
    return backend, subtour


def _solve(inst: Instance, args, no_incentive: bool):
    draws = choice.sample_draws(args.seed, args.draws, inst.n_stations, inst.fleet.num_routes)
    backend, subtour = _resolve_modes(args, inst)
    art = build_elp(inst, draws, subtour_mode=subtour, no_incentive=no_incentive)
    config = SolverConfig(
        time_limit=args.time_limit,
        milp_backend=backend,
        log_nodes=backend == "builtin",
    )
    lazy = make_lazy_separator(art) if subtour == "lazy" else None
    sol = solve_milp(art.model, config, lazy=lazy)
    return art, draws, sol


def _route_text(inst: Instance, plan) -> str:
    return "->".join(inst.network.stations[s].name for s in plan.route)


def _design_table(inst: Instance, outcome) -> str:
    header = ["Bus No.", "Capacity", "Path route", "Transfer node", "Transfer incentive", "Transferred demand", "Served demand"]
    rows = [header]
    per_bus_transfers: dict[int, list] = {}
    for tp in outcome.transfer_plans:
        per_bus_transfers.setdefault(tp.k, []).append(tp)
    for plan in outcome.bus_plans:
        tps = per_bus_transfers.get(plan.k, [])
        if tps:
            nodes = "+".join(inst.network.stations[tp.station].name for tp in tps)
            levels = "+".join(inst.incentives.level_name(tp.strategy) for tp in tps)
            moved = str(sum(tp.count for tp in tps))
        else:
            nodes = levels = moved = "n/a"
        rows.append(
            [str(plan.k + 1), str(plan.capacity), _route_text(inst, plan), nodes, levels, moved, str(plan.served)]
        )
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def _kpi_text(kpis) -> str:
    def num(x, suffix=""):
        return "n/a" if x is None else f"{x:.4g}{suffix}"

    return (
        f"TTD {num(kpis.ttd_km, ' km')} | AIVTT {num(kpis.aivtt_min, ' min')} | "
        f"TR {num(kpis.tr_pct, '%')} | SR {num(kpis.sr_pct, '%')} | TSC {num(kpis.tsc, ' $')}\n"
    )


def _write_export(inst: Instance, args) -> None:
    # exported models must stand alone, so subtour exclusion is always the
    # built-in ordering variant rather than cuts an external solver can't ask for
    draws = choice.sample_draws(args.seed, args.draws, inst.n_stations, inst.fleet.num_routes)
    art = build_elp(inst, draws, subtour_mode="mtz", no_incentive=args.no_incentive)
    fmt, path = args.export
    Path(path).write_text(export_model(art.model, fmt))


def cmd_design(args) -> int:
    inst = _apply_demand(load_instance(args.instance), args.demand)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.export_only:
        if not args.export:
            print("--export-only needs --export FORMAT PATH", file=sys.stderr)
            return _EXIT_INPUT
        _write_export(inst, args)
        return _EXIT_OK
    if args.export:
        _write_export(inst, args)
    art, draws, sol = _solve(inst, args, args.no_incentive)
    (out_dir / "draws.tsv").write_text(choice.export_draws(draws))
    if sol.status not in (OPTIMAL, LIMIT) or sol.objective is None:
        print(f"solve status: {sol.status}", file=sys.stderr)
        return _status_exit(sol.status)
    try:
        outcome = decode(sol, art)
    except ValueError as exc:
        # a time-limited incumbent can predate the last round of subtour cuts
        (out_dir / "solution.txt").write_text(dump_solution(art.model, sol))
        print(f"solve status: {sol.status}; incumbent not decodable ({exc})", file=sys.stderr)
        return _status_exit(sol.status)
    report = validate_nonlinear(outcome, inst, draws)
    kpis = compute_kpis(outcome, inst)
    text = _design_table(inst, outcome) + "\n" + _kpi_text(kpis) + f"status: {sol.status}\n{report}\n"
    (out_dir / "design.txt").write_text(text)
    (out_dir / "kpis.csv").write_text(KPI_CSV_HEADER + "\n" + kpi_csv_row(kpis) + "\n")
    (out_dir / "solution.txt").write_text(dump_solution(art.model, sol))
    if sol.node_log:
        (out_dir / "node_log.txt").write_text(format_node_log(sol))
    print(text, end="")
    return _status_exit(sol.status)


def cmd_compare(args) -> int:
    inst = _apply_demand(load_instance(args.instance), args.demand)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    worst = _EXIT_OK
    results = {}
    for scheme, no_inc in (("incentive", False), ("no-incentive", True)):
        art, draws, sol = _solve(inst, args, no_inc)
        worst = max(worst, _status_exit(sol.status))
        if sol.objective is None:
            print(f"{scheme}: {sol.status}", file=sys.stderr)
            return _status_exit(sol.status)
        outcome = decode(sol, art)
        kpis = compute_kpis(outcome, inst)
        results[scheme] = kpis
        rows.append(f"{scheme},{kpi_csv_row(kpis)}")
    a, b = results["incentive"], results["no-incentive"]

    def delta(x, y):
        return "nan" if x is None or y is None else f"{x - y:.6g}"

    rows.append(
        "delta,"
        + ",".join(
            [
                delta(a.ttd_km, b.ttd_km),
                delta(a.aivtt_min, b.aivtt_min),
                delta(a.tr_pct, b.tr_pct),
                delta(a.sr_pct, b.sr_pct),
                delta(a.tsc, b.tsc),
                delta(a.co1, b.co1),
                delta(a.co2, b.co2),
                delta(a.ct, b.ct),
                delta(a.ce, b.ce),
            ]
        )
    )
    csv = "scheme," + KPI_CSV_HEADER + "\n" + "\n".join(rows) + "\n"
    (out_dir / "compare.csv").write_text(csv)
    print(csv, end="")
    return worst


_GNUPLOT = """set datafile separator ','
set key autotitle columnhead
set xlabel 'total demand'
set ylabel 'service rate (%)'
set y2label 'transfers'
set y2tics
set terminal png size 800,500
set output 'sweep.png'
plot 'sweep.csv' using 1:2 with linespoints axis x1y1, \\
     'sweep.csv' using 1:3 with linespoints axis x1y1, \\
     'sweep.csv' using 1:4 with linespoints axis x1y2
"""


def cmd_sweep(args) -> int:
    inst = load_instance(args.instance)
    if inst.demand_seed is None:
        print("sweep needs a seed-based demand section", file=sys.stderr)
        return _EXIT_INPUT
    try:
        lo, hi, step = (int(tok) for tok in args.sweep.split(":"))
    except ValueError:
        print("--sweep expects LO:HI:STEP", file=sys.stderr)
        return _EXIT_INPUT
    if step <= 0 or hi < lo:
        print("--sweep expects LO <= HI and STEP > 0", file=sys.stderr)
        return _EXIT_INPUT
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    worst = _EXIT_OK
    lines = ["demand,SR_incentive,SR_noincentive,transfer_count"]
    for total in range(lo, hi + 1, step):
        level_inst = _apply_demand(inst, total)
        srs = {}
        transfers = 0
        for scheme, no_inc in (("incentive", False), ("no-incentive", True)):
            art, draws, sol = _solve(level_inst, args, no_inc)
            worst = max(worst, _status_exit(sol.status))
            if sol.objective is None:
                print(f"demand {total} {scheme}: {sol.status}", file=sys.stderr)
                return _status_exit(sol.status)
            outcome = decode(sol, art)
            kpis = compute_kpis(outcome, level_inst)
            srs[scheme] = kpis.sr_pct
            if not no_inc:
                transfers = outcome.transfer_total
        lines.append(f"{total},{srs['incentive']:.6g},{srs['no-incentive']:.6g},{transfers}")
    csv = "\n".join(lines) + "\n"
    (out_dir / "sweep.csv").write_text(csv)
    (out_dir / "sweep.gp").write_text(_GNUPLOT)
    print(csv, end="")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modularbus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--instance", required=True, help="instance document (JSON)")
        p.add_argument("--seed", type=int, default=1, help="noise draw seed")
        p.add_argument("--draws", type=int, default=30, help="number of noise draws")
        p.add_argument("--subtour", choices=("auto", "lazy", "mtz"), default="auto")
        p.add_argument("--out", default="out", help="report directory")
        p.add_argument("--demand", type=int, default=None, help="override total demand (seed-based instances)")
        p.add_argument("--time-limit", type=float, default=None, help="seconds")
        p.add_argument("--backend", choices=("auto", "builtin", "highs"), default="auto")

    p = sub.add_parser("design", help="solve one design and write reports")
    common(p)
    p.add_argument("--no-incentive", action="store_true", help="baseline scheme: transfers pinned to zero")
    p.add_argument("--export", nargs=2, metavar=("FORMAT", "PATH"), help="write the model (lp-text | mps-fixed)")
    p.add_argument("--export-only", action="store_true", help="write the model and skip solving")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("compare", help="incentive vs no-incentive on identical draws")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="solve both schemes across a demand range")
    common(p)
    p.add_argument("--sweep", required=True, metavar="LO:HI:STEP")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ModelError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return _EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
