"""Command-line harness: generate instances, solve, verify, aggregate.

Exit codes: 0 for success (including time-limited solves, which carry a
``time_limit`` status column), 1 for a verification failure, 2 for usage or
parse errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .dcg import DcgConfig, brute_force_robust, solve_robust
from .ratio import maximize_single, solve_ratio_robust
from .water import Instance, ParseError, generate_instance, parse_instance, serialize_instance

CSV_HEADER = ["instance", "mode", "reduce", "stop_pt", "time_s", "gap_pct",
              "iterations", "cuts", "eta", "ub", "lb", "status"]


@dataclass(frozen=True)
class RunRecord:
    instance: str
    mode: str
    reduce: bool
    stop_pt: int
    time_s: float
    gap_pct: float
    iterations: int
    cuts: int
    eta: float
    ub: float
    lb: float
    status: str

    def to_csv_row(self) -> list:
        return [self.instance, self.mode, "true" if self.reduce else "false",
                str(self.stop_pt), repr(self.time_s), repr(self.gap_pct),
                str(self.iterations), str(self.cuts), repr(self.eta),
                repr(self.ub), repr(self.lb), self.status]

    @classmethod
    def from_csv_row(cls, row: list) -> "RunRecord":
        (instance, mode, reduce, stop_pt, time_s, gap_pct, iterations, cuts,
         eta, ub, lb, status) = row
        return cls(instance=instance, mode=mode, reduce=reduce == "true",
                   stop_pt=int(stop_pt), time_s=float(time_s),
                   gap_pct=float(gap_pct), iterations=int(iterations),
                   cuts=int(cuts), eta=float(eta), ub=float(ub), lb=float(lb),
                   status=status)


def _load_instance(path: str) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _resolve_alphas(instance: Instance, fns, alpha_spec, costs, budget):
    """Alpha vector from the CLI flag, falling back to the instance file."""
    mode = alpha_spec[0] if alpha_spec else instance.alpha_mode
    if mode == "unit":
        return [1.0] * len(fns)
    if mode == "values":
        values = [float(v) for v in alpha_spec[1:]] if alpha_spec else list(instance.alpha_values)
        if len(values) != len(fns):
            raise ValueError(f"expected {len(fns)} alpha values, found {len(values)}")
        if any(v <= 0 for v in values):
            raise ValueError("alpha values must be positive")
        return values
    if mode == "solve":
        alphas = []
        for fn in fns:
            bounds, _, _ = maximize_single(fn, costs, budget)
            if bounds.lower <= 0:
                raise ValueError("a scenario optimum is nonpositive; cannot scale by it")
            alphas.append(bounds.lower)
        return alphas
    raise ValueError(f"unknown alpha mode {mode!r}")


def _solve_one(path: str, mode: str, alpha_spec, args_dict) -> RunRecord:
    instance = _load_instance(path)
    fns = instance.build_oracles()
    costs = instance.network.sensor_costs
    budget = instance.network.budget
    config = DcgConfig(reduce=args_dict["reduce"], stop_pt=args_dict["stop_pt"],
                       epsilon=args_dict["epsilon"], time_limit=args_dict["time_limit"],
                       filter_dominated=args_dict["filter_dominated"])
    if mode == "rsm":
        alphas = _resolve_alphas(instance, fns, alpha_spec, costs, budget)
        report = solve_robust(fns, alphas, costs, budget, config)
        return RunRecord(instance=path, mode=mode, reduce=config.reduce,
                         stop_pt=config.stop_pt, time_s=report.wall_time,
                         gap_pct=100.0 * report.gap, iterations=report.iterations,
                         cuts=report.cuts_added, eta=report.eta,
                         ub=report.upper_bound, lb=report.eta, status=report.status)
    report = solve_ratio_robust(fns, costs, budget,
                                per_scenario_budget=args_dict["scenario_budget"],
                                config=config)
    return RunRecord(instance=path, mode=mode, reduce=config.reduce,
                     stop_pt=config.stop_pt, time_s=report.wall_time,
                     gap_pct=100.0 * report.gap, iterations=report.iterations,
                     cuts=report.cuts_added, eta=report.eta,
                     ub=report.upper_bound, lb=report.lower_bound,
                     status=report.status)


def _append_csv(path: str, records):
    target = Path(path)
    fresh = not target.exists() or target.stat().st_size == 0
    with target.open("a", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if fresh:
            writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.to_csv_row())


def cmd_generate(args) -> int:
    try:
        instance = generate_instance(n=args.nodes, edge_factor=args.edges / args.nodes,
                                     m=args.scenarios, j_count=args.sources,
                                     budget=args.budget, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = serialize_instance(instance)
    try:
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    if instance.budget_infeasible:
        print("warning: budget is below the cheapest sensor; only the empty "
              "placement is feasible", file=sys.stderr)
    print(f"{digest}  {args.out}")
    return 0


def cmd_solve(args) -> int:
    args_dict = dict(reduce=args.reduce, stop_pt=args.stop_pt, epsilon=args.epsilon,
                     time_limit=args.time_limit, filter_dominated=args.filter_dominated,
                     scenario_budget=args.scenario_budget)
    jobs = [(path, args.mode, args.alpha, args_dict) for path in args.instance]
    try:
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                records = list(pool.map(_solve_one_star, jobs))
        else:
            records = [_solve_one(*job) for job in jobs]
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    writer = csv.writer(sys.stdout)
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.to_csv_row())
    if args.csv:
        _append_csv(args.csv, records)
    return 0


def _solve_one_star(job):
    return _solve_one(*job)


def cmd_verify(args) -> int:
    failures = 0
    for path in args.instance:
        try:
            instance = _load_instance(path)
        except (ParseError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        n = instance.network.node_count
        if n > 22:
            print(f"error: {path}: {n} nodes exceeds the brute-force guard (22)",
                  file=sys.stderr)
            return 2
        fns = instance.build_oracles()
        costs = instance.network.sensor_costs
        budget = instance.network.budget
        alphas = [1.0] * len(fns)
        reference, _ = brute_force_robust(fns, alphas, costs, budget)
        if args.corrupt:
            reference += 1.0  # fault-injection hook for the FAIL path
        worst = 0.0
        for reduce in (False, True):
            for stop_pt in (0, 2):
                config = DcgConfig(reduce=reduce, stop_pt=stop_pt)
                report = solve_robust(fns, alphas, costs, budget, config)
                worst = max(worst, abs(report.eta - reference))
        verdict = "PASS" if worst <= 1e-9 else "FAIL"
        print(f"{verdict} {path} max|eta-brute|={worst:.3g}")
        failures += verdict == "FAIL"
    return 1 if failures else 0


def cmd_report(args) -> int:
    records = []
    for path in args.csv_files:
        try:
            with open(path, newline="", encoding="utf-8") as handle:
                reader = csv.reader(handle)
                header = next(reader, None)
                if header != CSV_HEADER:
                    print(f"error: {path}: unexpected header", file=sys.stderr)
                    return 2
                records.extend(RunRecord.from_csv_row(row) for row in reader if row)
        except (OSError, ValueError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 2
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.mode, rec.reduce, rec.stop_pt), []).append(rec)
    out_rows = []
    for (mode, reduce, stop_pt), recs in sorted(groups.items()):
        k = len(recs)
        out_rows.append([mode, "true" if reduce else "false", str(stop_pt), str(k),
                         f"{sum(r.time_s for r in recs) / k:.3f}",
                         f"{sum(r.gap_pct for r in recs) / k:.4f}",
                         f"{sum(r.iterations for r in recs) / k:.1f}",
                         f"{sum(r.cuts for r in recs) / k:.1f}"])
    header = ["mode", "reduce", "stop_pt", "runs", "mean_time_s", "mean_gap_pct",
              "mean_iterations", "mean_cuts"]
    widths = [max(len(h), *(len(r[i]) for r in out_rows)) if out_rows else len(h)
              for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in out_rows:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(out_rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustmax",
        description="Exact worst-case sensor placement on water networks")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded random instance file")
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--edges", type=int, required=True)
    gen.add_argument("--scenarios", type=int, required=True)
    gen.add_argument("--sources", type=int, required=True)
    gen.add_argument("--budget", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    solve = sub.add_parser("solve", help="run a solver and emit report rows")
    solve.add_argument("instance", nargs="+")
    solve.add_argument("--mode", choices=["rsm", "rsm3"], default="rsm")
    solve.add_argument("--alpha", nargs="+", default=None,
                       metavar="MODE", help="unit | values v1 .. vm | solve")
    solve.add_argument("--reduce", action=argparse.BooleanOptionalAction, default=True)
    solve.add_argument("--stop-pt", dest="stop_pt", type=int, default=2)
    solve.add_argument("--epsilon", type=float, default=0.0)
    solve.add_argument("--time-limit", dest="time_limit", type=float, default=None)
    solve.add_argument("--scenario-budget", dest="scenario_budget", type=float, default=None)
    solve.add_argument("--filter-dominated", dest="filter_dominated",
                       action=argparse.BooleanOptionalAction, default=True)
    solve.add_argument("--jobs", type=int, default=1)
    solve.add_argument("--csv", default=None, help="append rows to this CSV file")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="cross-check the solver against enumeration")
    verify.add_argument("instance", nargs="+")
    verify.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    verify.set_defaults(func=cmd_verify)

    report = sub.add_parser("report", help="aggregate solve CSVs into per-setting means")
    report.add_argument("csv_files", nargs="+")
    report.add_argument("--out", default=None)
    report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
