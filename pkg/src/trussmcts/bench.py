"""Benchmark harness: shipped problems, seeded batches, ablations, Pareto sweeps."""

from __future__ import annotations

import csv
import json
import math
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import fem
from .driver import TECHNIQUES, DriverConfig, OptimizationResult, optimize
from .problem import (
    Catalog,
    LoadCase,
    Member,
    Node3D,
    ProblemError,
    TrussProblem,
    load_problem,
    member_length,
)

BENCHMARKS = (
    "ten_bar_case1",
    "ten_bar_case2",
    "seventy_two_bar_case1",
    "seventy_two_bar_case2",
    "seventy_two_bar_case3",
    "two_bar",
)


def benchmark_path(name: str) -> Path:
    path = resources.files("trussmcts") / "data" / f"{name}.json"
    return Path(str(path))


def load_benchmark(name: str) -> TrussProblem:
    if name not in BENCHMARKS:
        raise ProblemError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
    return load_problem(benchmark_path(name))


def resolve_problem(source: str) -> TrussProblem:
    """A shipped benchmark name or a path to a problem file."""
    if source in BENCHMARKS:
        return load_benchmark(source)
    return load_problem(source)


def golden_designs() -> dict[str, dict]:
    path = resources.files("trussmcts") / "data" / "golden.json"
    return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# golden designs
# ---------------------------------------------------------------------------


class GoldenDesignError(RuntimeError):
    """A published design violates constraints under our analysis."""


@dataclass(frozen=True)
class GoldenReport:
    name: str
    weight: float
    reported_weight: float
    delta_pct: float
    feasible: bool
    max_stress_ratio: float
    max_displacement_ratio: float

    def line(self) -> str:
        status = "feasible" if self.feasible else "INFEASIBLE"
        return (f"{self.name}: {self.weight:.2f} kg (reported {self.reported_weight:.2f}, "
                f"{self.delta_pct:+.3f}%), {status}, stress ratio {self.max_stress_ratio:.4f}, "
                f"displacement ratio {self.max_displacement_ratio:.4f}")


def verify_golden(problem: TrussProblem, areas: Sequence[float], reported_weight: float,
                  name: str = "design", strict: bool = True) -> GoldenReport:
    result = fem.solve(problem, areas)
    smin, smax = (s / 1e6 for s in problem.stress_limits)
    dmin, dmax = (d * 1e3 for d in problem.displacement_limits)
    s = result.stresses
    d = result.displacements
    stress_ratio = float(max((s[s > 0] / smax).max(initial=0.0), (s[s < 0] / smin).max(initial=0.0)))
    disp_ratio = float(max((d[d > 0] / dmax).max(initial=0.0), (d[d < 0] / dmin).max(initial=0.0)))
    report = GoldenReport(
        name=name,
        weight=result.weight,
        reported_weight=reported_weight,
        delta_pct=(result.weight - reported_weight) / reported_weight * 100.0,
        feasible=result.feasible,
        max_stress_ratio=stress_ratio,
        max_displacement_ratio=disp_ratio,
    )
    if strict and not report.feasible:
        raise GoldenDesignError(f"published design {name} is infeasible: {report.line()}")
    return report


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------


@dataclass
class BatchReport:
    results: list[OptimizationResult]
    failures: dict[int, str] = field(default_factory=dict)

    @property
    def weights(self) -> list[float]:
        return [r.weight for r in self.results if r.feasible]

    @property
    def best(self) -> float:
        return min(self.weights)

    @property
    def worst(self) -> float:
        return max(self.weights)

    @property
    def mean(self) -> float:
        # clamp away summation rounding so best <= mean <= worst holds exactly
        return min(max(statistics.fmean(self.weights), self.best), self.worst)

    @property
    def stddev(self) -> float:
        return statistics.pstdev(self.weights)

    def best_result(self) -> OptimizationResult:
        return min((r for r in self.results if r.feasible), key=lambda r: (r.weight, r.seed))

    def summary(self) -> str:
        if not self.weights:
            return f"no feasible result in {len(self.results)} runs"
        return (f"best {self.best:.2f} kg, worst {self.worst:.2f} kg, mean {self.mean:.2f} kg, "
                f"std {self.stddev:.2f} over {len(self.weights)} runs")

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["seed", "weight", "feasible", "rounds", "evaluations", "fem_solves", "areas"])
            for r in self.results:
                areas = ";".join(f"{a:.2f}" for a in r.areas) if r.areas else ""
                w.writerow([r.seed, f"{r.weight:.6f}", int(r.feasible), r.n_rounds,
                            r.evaluations, r.fem_solves, areas])
            for seed, err in sorted(self.failures.items()):
                w.writerow([seed, "", 0, "", "", "", f"error: {err}"])


def _run_one(args: tuple[TrussProblem, DriverConfig]) -> OptimizationResult:
    problem, config = args
    return optimize(problem, config)


def run_batch(problem: TrussProblem, config: DriverConfig, seeds: Iterable[int], workers: int = 1) -> BatchReport:
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    jobs = [(problem, replace(config, seed=s)) for s in seeds]
    report = BatchReport([])
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(s, pool.submit(_run_one, job)) for s, job in zip(seeds, jobs)]
            for seed, fut in futures:
                try:
                    report.results.append(fut.result())
                except Exception as exc:  # recorded, not fatal
                    report.failures[seed] = repr(exc)
    else:
        for seed, job in zip(seeds, jobs):
            try:
                report.results.append(_run_one(job))
            except Exception as exc:
                report.failures[seed] = repr(exc)
    return report


# ---------------------------------------------------------------------------
# ablations
# ---------------------------------------------------------------------------


def ablation_configs(base: DriverConfig = DriverConfig(), full: bool = True) -> list[DriverConfig]:
    """Configurations for the ablation study.

    ``full`` gives the whole technique x backprop x root x alpha product
    (single-root runs ignore the technique, so those collapse to one);
    otherwise one factor is varied at a time around ``base``.
    """
    if not full:
        out = [replace(base, technique=t) for t in TECHNIQUES]
        out += [replace(base, backprop="average"), replace(base, multi_root=False),
                replace(base, alpha_mode="max")]
        return out
    out = []
    for multi in (True, False):
        for technique in (TECHNIQUES if multi else ("none",)):
            for backprop in ("best", "average"):
                for alpha in ("min", "max"):
                    out.append(replace(base, technique=technique, backprop=backprop,
                                       multi_root=multi, alpha_mode=alpha))
    return out


@dataclass
class AblationRow:
    config: DriverConfig
    batch: BatchReport
    wall_clock: float

    @property
    def label(self) -> str:
        return self.config.label()

    @property
    def median_weight(self) -> float:
        return statistics.median(r.weight if r.feasible else math.inf for r in self.batch.results)

    @property
    def median_evaluations(self) -> float:
        return statistics.median(r.evaluations for r in self.batch.results)

    @property
    def median_fem_solves(self) -> float:
        return statistics.median(r.fem_solves for r in self.batch.results)

    def hits(self, target: float, rel: float = 1e-9) -> int:
        return sum(1 for r in self.batch.results if r.feasible and r.weight <= target * (1 + rel))


@dataclass
class AblationReport:
    rows: list[AblationRow]

    def row(self, **match) -> AblationRow:
        for r in self.rows:
            if all(getattr(r.config, k) == v for k, v in match.items()):
                return r
        raise KeyError(match)

    def orderings(self, target: float | None = None) -> dict[str, bool]:
        """Qualitative checks on the default-configuration neighbours."""
        base = dict(backprop="best", multi_root=True, alpha_mode="min")
        evals = {t: self.row(technique=t, **base).median_evaluations for t in TECHNIQUES}
        geo = self.row(technique="geometric", **base)
        single = self.row(multi_root=False, backprop="best", alpha_mode="min")
        avg = self.row(technique="geometric", backprop="average", multi_root=True, alpha_mode="min")
        amax = self.row(technique="geometric", backprop="best", multi_root=True, alpha_mode="max")
        checks = {
            "multi_root_beats_single_root": geo.batch.best <= single.batch.best,
            "evaluations_geometric<linear<step<none":
                evals["geometric"] < evals["linear"] < evals["step"] < evals["none"],
            "alpha_min_beats_alpha_max": geo.median_weight < amax.median_weight,
        }
        if target is not None:
            checks["best_reward_hits_target_more_than_average"] = (
                geo.hits(target) >= 1 and avg.hits(target) < geo.hits(target))
        return checks

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["technique", "backprop", "root", "alpha", "best", "median", "worst",
                        "median_evaluations", "median_fem_solves"])
            for r in self.rows:
                c = r.config
                w.writerow([c.technique, c.backprop, "multi" if c.multi_root else "single",
                            c.alpha_mode, f"{r.batch.best:.6f}", f"{r.median_weight:.6f}",
                            f"{r.batch.worst:.6f}", r.median_evaluations, r.median_fem_solves])

    def write_timings(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["config", "wall_clock_s"])
            for r in self.rows:
                w.writerow([r.label, f"{r.wall_clock:.3f}"])


def ablation_matrix(problem: TrussProblem, seeds: Iterable[int],
                    configs: Sequence[DriverConfig] | None = None, workers: int = 1) -> AblationReport:
    seeds = list(seeds)
    rows = []
    for config in configs if configs is not None else ablation_configs():
        start = time.perf_counter()
        batch = run_batch(problem, config, seeds, workers)
        rows.append(AblationRow(config, batch, time.perf_counter() - start))
    return AblationReport(rows)


# ---------------------------------------------------------------------------
# Pareto sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParetoPoint:
    weight: float  # kg
    max_displacement: float  # mm
    areas: tuple[float, ...]
    limit: float  # mm


def dominates(a: ParetoPoint, b: ParetoPoint) -> bool:
    return (a.weight <= b.weight and a.max_displacement <= b.max_displacement
            and (a.weight < b.weight or a.max_displacement < b.max_displacement))


def non_dominated(points: Iterable[ParetoPoint]) -> list[ParetoPoint]:
    pts = list(points)
    front = [p for p in pts if not any(dominates(q, p) for q in pts)]
    unique: dict[tuple, ParetoPoint] = {}
    for p in front:
        unique.setdefault((p.weight, p.max_displacement), p)
    return sorted(unique.values(), key=lambda p: (p.weight, p.max_displacement))


Solver = Callable[[TrussProblem], "tuple[Sequence[float] | None, float]"]


def optimize_solver(config: DriverConfig = DriverConfig(), seeds: Sequence[int] | None = None) -> Solver:
    seeds = list(seeds) if seeds is not None else [config.seed]

    def solve(problem: TrussProblem):
        batch = run_batch(problem, config, seeds)
        if not batch.weights:
            return None, math.nan
        best = batch.best_result()
        return best.areas, best.weight

    return solve


@dataclass
class ParetoSweep:
    points: list[ParetoPoint]  # every feasible solution, in limit order
    gaps: list[float]  # limits without a feasible design

    @property
    def front(self) -> list[ParetoPoint]:
        return non_dominated(self.points)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["limit_mm", "weight_kg", "max_displacement_mm", "areas"])
            for p in self.front:
                w.writerow([p.limit, f"{p.weight:.6f}", f"{p.max_displacement:.6f}",
                            ";".join(f"{a:.2f}" for a in p.areas)])


def pareto_sweep(problem: TrussProblem, limits: Sequence[float], config: DriverConfig = DriverConfig(),
                 solver: Solver | None = None) -> ParetoSweep:
    """Epsilon-constraint sweep over symmetric displacement limits (mm)."""
    limits = list(limits)
    if any(l <= 0 for l in limits):
        raise ValueError("displacement limits must be positive")
    if limits != sorted(limits):
        raise ValueError("displacement limits must be ascending")
    solver = solver or optimize_solver(config)
    points, gaps = [], []
    for limit in limits:
        sub = problem.with_displacement_limit(limit)
        areas, weight = solver(sub)
        if areas is None:
            gaps.append(limit)
            continue
        result = fem.solve(sub, areas)
        points.append(ParetoPoint(result.weight, result.max_displacement, tuple(areas), limit))
    return ParetoSweep(points, gaps)


# ---------------------------------------------------------------------------
# random tiny instances for oracle checks
# ---------------------------------------------------------------------------


def random_tiny_problem(seed: int, max_groups: int = 3, max_sections: int = 5) -> TrussProblem:
    """A small planar truss with randomised geometry, catalog and limits.

    One or two free nodes hang off pinned supports; limits are scaled from
    the all-largest design so that design is feasible but lighter ones may
    not be.
    """
    rng = random.Random(seed)
    supports = [(0.0, 0.0), (2.0, 0.0), (4.0, 0.0)]
    free = [(rng.uniform(0.5, 3.5), rng.uniform(1.0, 3.0))]
    if rng.random() < 0.4:
        free.append((rng.uniform(0.5, 3.5), free[0][1] + rng.uniform(1.0, 2.0)))
    coords = supports + free
    nodes = tuple(
        Node3D(k + 1, (x, y, 0.0), (k < len(supports),) * 2 + (True,))
        for k, (x, y) in enumerate(coords)
    )
    pairs = []
    first = len(supports) + 1
    for s in rng.sample(range(1, len(supports) + 1), rng.choice((2, 3))):
        pairs.append((s, first))
    if len(free) == 2:
        pairs.append((first, first + 1))
        pairs.append((rng.choice([s for s in range(1, len(supports) + 1)]), first + 1))
    g = rng.randint(1, min(max_groups, len(pairs)))
    groups = list(range(1, g + 1)) + [rng.randint(1, g) for _ in range(len(pairs) - g)]
    rng.shuffle(groups)
    members = tuple(
        Member(k + 1, groups[k], a, b, member_length(nodes[a - 1], nodes[b - 1]))
        for k, (a, b) in enumerate(pairs)
    )
    b = rng.randint(2, max_sections)
    catalog = Catalog(tuple(sorted(round(rng.uniform(50.0, 1000.0), 2) for _ in range(b))))
    while len(set(catalog.areas)) < b:  # pragma: no cover - vanishingly rare
        catalog = Catalog(tuple(sorted(round(rng.uniform(50.0, 1000.0), 2) for _ in range(b))))
    load_node = len(coords)
    force = (rng.uniform(-20e3, 20e3), -rng.uniform(10e3, 40e3), 0.0)
    base = TrussProblem(
        nodes=nodes,
        members=members,
        load_cases=(LoadCase(((load_node, force),)),),
        density=7850.0,
        elastic_modulus=200e9,
        stress_limits=(-1e12, 1e12),
        displacement_limits=(-1.0, 1.0),
        catalog=catalog,
        name=f"tiny-{seed}",
    )
    heavy = fem.Analyzer(base).solve([catalog[-1]] * base.g)
    smax = max(float(abs(heavy.stresses).max()), 1.0) * 1e6 * rng.uniform(1.05, 4.0)
    dmax = max(float(abs(heavy.displacements).max()), 1e-6) * 1e-3 * rng.uniform(1.05, 4.0)
    return replace(base, stress_limits=(-smax, smax), displacement_limits=(-dmax, dmax))
