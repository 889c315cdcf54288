"""Command-line interface.

Subcommands: ``solve`` one instance, ``bench`` a directory of instances,
``oracle`` for exhaustive optima on tiny instances, ``gen`` for synthetic
benchmark instances, and ``validate`` to re-evaluate a solution file.

Exit codes: 0 success, 1 infeasible or no solution, 2 input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from greenvrp.bench import BKS, RunRecord, write_report
from greenvrp.instances import (
    ParseError,
    generate_instance,
    parse_instance,
    parse_solution,
    write_instance,
    write_solution,
)
from greenvrp.model import (
    MalformedSolutionError,
    PenaltyWeights,
    check_feasibility,
    evaluate,
)
from greenvrp.oracle import InstanceTooLargeError, oracle_solve
from greenvrp.solver import (
    InfeasibleInstanceError,
    NoFeasibleSolutionError,
    RunResult,
    SolverConfig,
    TraceRecord,
    run,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2


def _load_instance(path: str):
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ParseError(0, 0, f"cannot read {path}: {err}")
    return parse_instance(text, name=Path(path).stem)


def _trace_line(rec: TraceRecord) -> str:
    best = f"{rec.best_distance:.6f}" if rec.best_distance != float("inf") else ""
    w = rec.weights
    r = rec.satisfaction_rates
    return (
        f"{rec.iteration},{best},{rec.feasible_size},{rec.infeasible_size},"
        f"{w[0]:.6f},{w[1]:.6f},{w[2]:.6f},{r[0]:.4f},{r[1]:.4f},{r[2]:.4f}"
    )


TRACE_HEADER = (
    "iteration,best_distance,feasible_size,infeasible_size,"
    "w_overtime,w_mileage,w_capacity,rate_overtime,rate_mileage,rate_capacity"
)


def _make_config(args: argparse.Namespace, seed: int) -> SolverConfig:
    kwargs = {"seed": seed}
    if args.max_iter is not None:
        kwargs["max_iters"] = args.max_iter
    if args.no_improve is not None:
        kwargs["max_no_improve"] = args.no_improve
    if args.time_limit is not None:
        kwargs["max_time"] = args.time_limit
    return SolverConfig(**kwargs)


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    trace_rows: list[str] = []
    sink = (lambda rec: trace_rows.append(_trace_line(rec))) if args.trace else None
    try:
        result = run(inst, _make_config(args, args.seed), trace=sink)
    except NoFeasibleSolutionError as err:
        print(f"no feasible solution: {err}", file=sys.stderr)
        if args.trace:
            Path(args.trace).write_text(TRACE_HEADER + "\n" + "\n".join(trace_rows) + "\n")
        return EXIT_INFEASIBLE
    if args.trace:
        Path(args.trace).write_text(TRACE_HEADER + "\n" + "\n".join(trace_rows) + "\n")
    if args.out:
        Path(args.out).write_text(write_solution(result.best))
    print(f"instance: {inst.name}")
    print(f"best_distance: {result.best_distance:.4f}")
    print(f"routes: {len(result.best.routes)}")
    print(f"iterations: {result.iterations}")
    print(f"time_to_best_s: {result.time_to_best:.3f}")
    print(f"total_time_s: {result.total_time:.3f}")
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    paths = sorted(Path(args.dir).glob("*.txt"))
    if not paths:
        print(f"no *.txt instances under {args.dir}", file=sys.stderr)
        return EXIT_INPUT
    records: list[RunRecord] = []
    for path in paths:
        inst = _load_instance(str(path))
        for k in range(args.runs):
            seed = args.seeds + k
            try:
                result = run(inst, _make_config(args, seed))
                records.append(
                    RunRecord(
                        instance=inst.name,
                        seed=seed,
                        best_distance=result.best_distance,
                        feasible=True,
                        time_to_best=result.time_to_best,
                        total_time=result.total_time,
                        iterations=result.iterations,
                    )
                )
            except NoFeasibleSolutionError:
                records.append(
                    RunRecord(
                        instance=inst.name,
                        seed=seed,
                        best_distance=float("inf"),
                        feasible=False,
                        time_to_best=0.0,
                        total_time=0.0,
                        iterations=0,
                    )
                )
    csv_text, summary = write_report(records, BKS)
    Path(args.out).write_text(csv_text)
    print(summary, end="")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    try:
        result = oracle_solve(inst)
    except InstanceTooLargeError as err:
        print(str(err), file=sys.stderr)
        return EXIT_INPUT
    except NoFeasibleSolutionError as err:
        print(f"no feasible solution: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"optimal_distance: {result.distance:.6f}")
    for route in result.solution.routes:
        print(" ".join(str(v) for v in route))
    return EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    try:
        inst = generate_instance(args.profile, args.seed, n=args.n)
    except ValueError as err:
        print(str(err), file=sys.stderr)
        return EXIT_INPUT
    text = write_instance(inst)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    try:
        sol = parse_solution(Path(args.solution).read_text())
    except OSError as err:
        raise ParseError(0, 0, f"cannot read {args.solution}: {err}")
    weights = PenaltyWeights(1.0, 1.0, 1.0)
    try:
        report = evaluate(sol, inst, weights, scheduled=True)
        verdict = check_feasibility(report, inst)
    except MalformedSolutionError as err:
        print(f"malformed solution: {err}", file=sys.stderr)
        return EXIT_INPUT
    print(f"total_distance: {report.total_distance:.4f}")
    print(f"routes: {len(sol.routes)}")
    print(f"duration_ok: {verdict.duration_ok}")
    print(f"energy_ok: {verdict.energy_ok}")
    print(f"fleet_ok: {verdict.fleet_ok}")
    print(f"feasible: {verdict.feasible}")
    return EXIT_OK if verdict.feasible else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenvrp",
        description="Solve and benchmark green vehicle routing with "
        "capacity-limited private refueling stations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--no-improve", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--trace", default=None, help="write per-iteration CSV here")
    p.add_argument("--out", default=None, help="write the best solution here")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="run all instances in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seeds", type=int, default=1, help="base seed (run k uses base+k)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--no-improve", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("oracle", help="exhaustive optimum of a tiny instance")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--profile", required=True, choices=["s_central", "m_central", "beijing", "tiny"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("validate", help="re-evaluate a solution file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleInstanceError as err:
        print(f"infeasible instance: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
