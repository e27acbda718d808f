"""Command-line entry point: ``trussmcts <command> <problem> ...``.

``<problem>`` is a shipped benchmark name (see ``trussmcts list``) or a path
to a problem file. Exit codes: 0 success, 1 input error, 2 no feasible
design.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import bench, fem
from .driver import (
    TECHNIQUES,
    DriverConfig,
    InstanceTooLarge,
    OptimizationResult,
    brute_force,
    optimize,
    write_convergence,
)
from .problem import ProblemError, TrussProblem

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2


class InputError(Exception):
    pass


def parse_seeds(text: str) -> list[int]:
    """``"1..10"``, ``"3"`` or ``"1,4,7"``."""
    try:
        if ".." in text:
            lo, hi = (int(s) for s in text.split("..", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InputError(f"bad seed range {text!r}; use a..b or a comma list") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InputError(f"bad number list {text!r}") from None


def read_areas(path: str) -> list[float]:
    """Areas (mm²) from a design file: JSON with an ``areas`` key, a JSON list, or CSV text."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return parse_floats(text.replace("\n", ","))
    if isinstance(data, dict):
        data = data.get("areas")
    if not isinstance(data, list):
        raise InputError(f"{path}: expected a list of areas or an object with 'areas'")
    return [float(a) for a in data]


def write_design(problem: TrussProblem, result: OptimizationResult, path: Path) -> None:
    data = {"problem": problem.name, "areas": list(result.areas), "weight": result.weight,
            "seed": result.seed, "config": result.config.label()}
    path.write_text(json.dumps(data, indent=2) + "\n")


def config_from_args(args) -> DriverConfig:
    return DriverConfig(
        technique=args.technique,
        backprop=args.backprop,
        multi_root=not args.single_root,
        alpha_mode=args.alpha,
        seed=getattr(args, "seed", 1),
        budget_scale=args.budget_scale,
        max_rounds=args.max_rounds,
    )


def _out_dir(args) -> Path | None:
    if not getattr(args, "out", None):
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_list(args) -> int:
    for name in bench.BENCHMARKS:
        p = bench.load_benchmark(name)
        print(f"{name:24s} {len(p.members):3d} members, {p.g:2d} groups, {p.b:2d} sections")
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = bench.resolve_problem(args.problem)
    areas = read_areas(args.areas) if args.areas else [problem.catalog[-1]] * problem.g
    if args.dump_analysis:
        result = fem.dump_analysis(problem, areas, args.dump_analysis)
    else:
        result = fem.solve(problem, areas)
    print(f"weight {result.weight:.4f} kg")
    for n in range(result.stresses.shape[0]):
        s = result.stresses[n]
        print(f"case {n + 1}: stress {s.min():.3f}..{s.max():.3f} MPa, "
              f"max |displacement| {abs(result.displacements[n]).max():.4f} mm")
    print("feasible" if result.feasible else f"INFEASIBLE (violation {result.violation:.4f})")
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_optimize(args) -> int:
    problem = bench.resolve_problem(args.problem)
    config = config_from_args(args)
    result = optimize(problem, config, trace_path=args.trace)
    print(result.summary())
    out = _out_dir(args)
    if out is not None:
        write_convergence(result, out / "convergence.csv")
        report = bench.BatchReport([result])
        report.write_csv(out / "report.csv")
        if result.feasible:
            write_design(problem, result, out / "best_design.json")
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_batch(args) -> int:
    problem = bench.resolve_problem(args.problem)
    config = config_from_args(args)
    report = bench.run_batch(problem, config, parse_seeds(args.seeds), args.workers)
    for r in report.results:
        status = f"{r.weight:.2f} kg" if r.feasible else "infeasible"
        print(f"seed {r.seed:3d}: {status}, {r.n_rounds} rounds, {r.evaluations} evaluations")
    for seed, err in report.failures.items():
        print(f"seed {seed:3d}: failed: {err}")
    print(report.summary())
    out = _out_dir(args)
    if out is not None:
        report.write_csv(out / "report.csv")
        if report.weights:
            best = report.best_result()
            write_convergence(best, out / "convergence.csv")
            write_design(problem, best, out / "best_design.json")
    return EXIT_OK if report.weights else EXIT_INFEASIBLE


def cmd_ablate(args) -> int:
    problem = bench.resolve_problem(args.problem)
    base = replace(config_from_args(args), technique="geometric", backprop="best",
                   multi_root=True, alpha_mode="min")
    configs = bench.ablation_configs(base, full=not args.quick)
    report = bench.ablation_matrix(problem, parse_seeds(args.seeds), configs, args.workers)
    print(f"{'config':36s} {'best':>10s} {'median':>10s} {'evals':>10s}")
    for row in report.rows:
        best = f"{row.batch.best:.2f}" if row.batch.weights else "-"
        print(f"{row.label:36s} {best:>10s} {row.median_weight:10.2f} {row.median_evaluations:10.0f}")
    for name, ok in report.orderings().items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    out = _out_dir(args)
    if out is not None:
        report.write_csv(out / "ablation.csv")
        report.write_timings(out / "timings.csv")
    return EXIT_OK


def cmd_pareto(args) -> int:
    problem = bench.resolve_problem(args.problem)
    config = config_from_args(args)
    sweep = bench.pareto_sweep(problem, parse_floats(args.limits), config)
    for p in sweep.front:
        print(f"limit {p.limit:g} mm: {p.weight:.2f} kg, max |displacement| {p.max_displacement:.4f} mm")
    for limit in sweep.gaps:
        print(f"limit {limit:g} mm: no feasible design")
    out = _out_dir(args)
    if out is not None:
        sweep.write_csv(out / "pareto.csv")
    return EXIT_OK if sweep.points else EXIT_INFEASIBLE


def _golden_entries(source: str, problem: TrussProblem) -> list[tuple[str, dict]]:
    shipped = bench.golden_designs()
    if source in shipped:
        return [(source, shipped[source])]
    try:
        data = json.loads(Path(source).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read golden table {source}: {exc}") from None
    if "areas" in data:
        return [(Path(source).stem, data)]
    entries = [(k, v) for k, v in data.items() if v.get("benchmark") in (None, problem.name)]
    if not entries:
        raise InputError(f"{source}: no design for problem {problem.name}")
    return entries


def cmd_verify(args) -> int:
    problem = bench.resolve_problem(args.problem)
    ok = True
    for name, entry in _golden_entries(args.golden, problem):
        reported = entry.get("reported_weight")
        if reported is None:
            raise InputError(f"{name}: missing reported_weight")
        report = bench.verify_golden(problem, entry["areas"], float(reported), name, strict=False)
        print(report.line())
        ok &= report.feasible and abs(report.delta_pct) <= args.tolerance
    return EXIT_OK if ok else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    problem = bench.resolve_problem(args.problem)
    areas, weight = brute_force(problem, limit=args.limit)
    if areas is None:
        print("no feasible design")
        return EXIT_INFEASIBLE
    print(f"optimum {weight:.4f} kg; areas mm2: {', '.join(f'{a:.2f}' for a in areas)}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _search_options(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--technique", choices=TECHNIQUES, default="geometric")
    p.add_argument("--backprop", choices=("best", "average"), default="best")
    p.add_argument("--single-root", action="store_true", help="one round over the full catalog")
    p.add_argument("--alpha", choices=("min", "max"), default="min")
    p.add_argument("--budget-scale", type=float, default=1.0, help="multiplier on iteration budgets")
    p.add_argument("--max-rounds", type=int, default=100)
    if seed:
        p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="directory for CSV reports and the best design")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trussmcts", description="Discrete truss sizing by tree search.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list shipped benchmarks").set_defaults(func=cmd_list)

    p = sub.add_parser("solve", help="analyse one design")
    p.add_argument("problem")
    p.add_argument("--areas", help="design file; default is every group at the largest section")
    p.add_argument("--dump-analysis", metavar="CSV", help="write member stresses and node displacements")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("optimize", help="run one seeded optimization")
    p.add_argument("problem")
    _search_options(p)
    p.add_argument("--trace", help="per-iteration CSV trace")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("batch", help="run several seeds and report statistics")
    p.add_argument("problem")
    p.add_argument("--seeds", default="1..10")
    p.add_argument("--workers", type=int, default=1)
    _search_options(p, seed=False)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("ablate", help="compare search variants")
    p.add_argument("problem")
    p.add_argument("--seeds", default="1..10")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quick", action="store_true", help="vary one factor at a time")
    _search_options(p, seed=False)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("pareto", help="weight against displacement-limit sweep")
    p.add_argument("problem")
    p.add_argument("--limits", required=True, help="ascending displacement limits in mm, comma separated")
    _search_options(p)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("verify", help="check a published design")
    p.add_argument("problem")
    p.add_argument("--golden", required=True, help="benchmark name of a shipped published design, or a JSON file")
    p.add_argument("--tolerance", type=float, default=0.5, help="allowed weight difference in percent")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive search on a small instance")
    p.add_argument("problem")
    p.add_argument("--limit", type=int, default=10**6, help="maximum number of designs to enumerate")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if hasattr(args, "max_rounds"):
            config_from_args(args)  # validate early
        return args.func(args)
    except (InputError, ProblemError, InstanceTooLarge, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except fem.UnstableStructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
