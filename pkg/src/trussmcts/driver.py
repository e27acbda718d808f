"""Multi-round search driver.

Every round searches a tree rooted at the previous round's final design,
restricted to a window of candidate areas around it. Window width shrinks
according to the chosen schedule. The run stops once ``theta_max`` rounds
have failed to move the best weight by at least ``eta_min`` percent.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from . import fem
from .mcts import DEFAULT_C, SearchBudget, TraceWriter, policy_improvement
from .mdp import CandidateLists, SizingEnv, initial_state
from .problem import TrussProblem

Technique = Literal["none", "geometric", "linear", "step"]
TECHNIQUES: tuple[str, ...] = ("none", "geometric", "linear", "step")


def _odd_up(n: int) -> int:
    return n if n % 2 else n + 1


@dataclass(frozen=True)
class DriverConfig:
    technique: str = "geometric"
    backprop: str = "best"
    multi_root: bool = True
    alpha_mode: str = "min"
    C: float = DEFAULT_C
    gamma_geo: float = 0.5
    eps_geo: int = 3
    gamma_lin: int = 2
    gamma_red: int = 2
    eps_red: int = 3
    eta_min: float = 0.01  # percent
    theta_max: int = 3
    max_rounds: int = 100
    budget_scale: float = 1.0
    seed: int = 1

    def __post_init__(self) -> None:
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown technique {self.technique!r}")
        if self.backprop not in ("best", "average"):
            raise ValueError(f"unknown backprop mode {self.backprop!r}")
        if self.alpha_mode not in ("min", "max"):
            raise ValueError(f"unknown alpha mode {self.alpha_mode!r}")
        positive = (self.gamma_geo, self.eps_geo, self.gamma_lin, self.gamma_red, self.eps_red,
                    self.eta_min, self.budget_scale)
        if any(v <= 0 for v in positive):
            raise ValueError("schedule constants, eta_min and budget_scale must be positive")
        if self.theta_max < 1 or self.max_rounds < 1:
            raise ValueError("theta_max and max_rounds must be at least 1")

    def label(self) -> str:
        root = "multi" if self.multi_root else "single"
        return f"{self.technique}/{self.backprop}/{root}/alpha-{self.alpha_mode}"


def width_schedule(technique: str, b: int, p: int, config: DriverConfig | None = None) -> int:
    """Candidate-window width for round ``p``."""
    if b < 2 or p < 1:
        raise ValueError("need b >= 2 and p >= 1")
    cfg = config or DriverConfig()
    full = b if b % 2 else b + 1
    if technique == "none":
        return full
    if technique == "geometric":
        if p == 1:
            return full
        phi = math.floor(full * cfg.gamma_geo ** math.ceil((p - 1) / cfg.eps_geo))
        return max(3, _odd_up(phi))
    half = b // 2 if b % 2 else b // 2 + 1
    first = max(3, _odd_up(half))
    if technique == "linear":
        width = first - cfg.gamma_lin * (p - 1)
    elif technique == "step":
        width = first - cfg.gamma_red * ((p - 1) // cfg.eps_red)
    else:
        raise ValueError(f"unknown technique {technique!r}")
    return max(3, _odd_up(width))


def improvement_factor(weight: float, history_min: float) -> float:
    """Percentage change of ``weight`` against the incumbent ``history_min``."""
    if history_min <= 0:
        raise ValueError("incumbent weight must be positive")
    return abs((weight - history_min) / history_min * 100.0)


@dataclass(frozen=True)
class RoundPlan:
    p: int
    beta: int
    x0: tuple[float, ...]
    lists: CandidateLists
    budgets: SearchBudget

    @classmethod
    def build(cls, problem: TrussProblem, p: int, x0, config: DriverConfig) -> RoundPlan:
        technique = config.technique if config.multi_root else "none"
        beta = width_schedule(technique, problem.b, p, config)
        return cls(
            p=p,
            beta=beta,
            x0=tuple(x0),
            lists=CandidateLists.build(problem, x0, beta),
            budgets=SearchBudget.for_round(problem.b, beta, problem.g, config.C, config.budget_scale),
        )


@dataclass(frozen=True)
class RoundRecord:
    p: int
    beta: int
    weight: float
    feasible: bool
    best_weight: float
    eta: float
    theta: int
    evaluations: int
    fem_solves: int
    elapsed: float
    areas: tuple[float, ...]


@dataclass
class OptimizationResult:
    areas: tuple[float, ...] | None
    weight: float
    feasible: bool
    history: list[float]  # S = [W0, W1, ...]
    rounds: list[RoundRecord]
    seed: int
    config: DriverConfig
    evaluations: int = 0
    fem_solves: int = 0
    elapsed: float = 0.0
    initial_feasible: bool = True

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def summary(self) -> str:
        if not self.feasible:
            return f"no feasible design found after {self.n_rounds} rounds (seed {self.seed})"
        areas = ", ".join(f"{a:.2f}" for a in self.areas)
        return (f"weight {self.weight:.2f} kg after {self.n_rounds} rounds "
                f"(seed {self.seed}, {self.evaluations} evaluations)\nareas mm2: {areas}")

    def comparable(self) -> dict:
        """Everything except wall-clock timings."""
        d = asdict(self)
        d.pop("elapsed")
        for r in d["rounds"]:
            r.pop("elapsed")
        return d


def run_round(
    problem: TrussProblem,
    plan: RoundPlan,
    config: DriverConfig,
    rng: random.Random,
    env: SizingEnv | None = None,
    trace: TraceWriter | None = None,
) -> tuple[tuple[float, ...], float, bool]:
    """One tree search; returns the final areas, their weight and feasibility."""
    env = env or SizingEnv(problem, config.alpha_mode)
    env.set_lists(plan.lists)
    final = policy_improvement(env, initial_state(plan.p, plan.x0), plan.budgets, rng,
                               config.backprop, trace)
    evaluation = env.evaluate(final.areas)
    return final.areas, evaluation.weight, evaluation.feasible


def optimize(problem: TrussProblem, config: DriverConfig = DriverConfig(), trace_path=None) -> OptimizationResult:
    rng = random.Random(config.seed)
    env = SizingEnv(problem, config.alpha_mode)
    start = time.perf_counter()

    x0 = (problem.catalog[-1],) * problem.g
    first = env.evaluate(x0)
    history = [first.weight]
    # (weight, areas) of feasible members of S
    feasible = [(first.weight, x0)] if first.feasible else []
    theta = 0
    rounds: list[RoundRecord] = []

    fh = open(trace_path, "w") if trace_path else None
    trace = TraceWriter(fh) if fh else None
    try:
        p = 1
        while theta < config.theta_max and p <= config.max_rounds:
            plan = RoundPlan.build(problem, p, x0, config)
            areas, weight, ok = run_round(problem, plan, config, rng, env, trace)
            if ok and feasible:
                eta = improvement_factor(weight, min(feasible)[0])
            else:
                eta = math.inf
            if eta < config.eta_min:
                theta += 1
            history.append(weight)
            if ok:
                feasible.append((weight, areas))
            rounds.append(RoundRecord(
                p=p, beta=plan.beta, weight=weight, feasible=ok,
                best_weight=min(feasible)[0] if feasible else math.nan,
                eta=eta, theta=theta, evaluations=env.evaluations, fem_solves=env.fem_solves,
                elapsed=time.perf_counter() - start, areas=areas,
            ))
            x0 = areas
            p += 1
            if not config.multi_root:
                break
    finally:
        if fh:
            fh.close()

    if feasible:
        best_weight, best_areas = min(feasible)
    else:
        best_weight, best_areas = math.nan, None
    return OptimizationResult(
        areas=best_areas,
        weight=best_weight,
        feasible=bool(feasible),
        history=history,
        rounds=rounds,
        seed=config.seed,
        config=config,
        evaluations=env.evaluations,
        fem_solves=env.fem_solves,
        elapsed=time.perf_counter() - start,
        initial_feasible=first.feasible,
    )


def write_convergence(result: OptimizationResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "beta", "weight", "feasible", "min_S", "eta", "theta",
                    "evaluations", "fem_solves", "elapsed_s"])
        for r in result.rounds:
            w.writerow([r.p, r.beta, f"{r.weight:.6f}", int(r.feasible), f"{r.best_weight:.6f}",
                        f"{r.eta:.6g}", r.theta, r.evaluations, r.fem_solves, f"{r.elapsed:.3f}"])


class InstanceTooLarge(ValueError):
    pass


def brute_force(problem: TrussProblem, limit: int = 10**6) -> tuple[tuple[float, ...] | None, float]:
    """Exhaustive minimum-weight feasible design.

    Designs are checked in order of (weight, areas) so the first feasible
    one is the answer. Returns ``(None, nan)`` when nothing is feasible.
    """
    g, b = problem.g, problem.b
    if b**g > limit:
        raise InstanceTooLarge(f"{b}^{g} designs exceed the enumeration limit {limit}")
    areas = np.array(problem.catalog.areas)
    combos = np.array(list(itertools.product(range(b), repeat=g)), dtype=np.int64)
    designs = areas[combos]
    weights = designs @ (np.array(problem.group_lengths()) * problem.density * 1e-6)
    order = np.lexsort(tuple(designs[:, k] for k in reversed(range(g))) + (weights,))
    analyzer = fem.analyzer(problem)
    for idx in order:
        candidate = tuple(float(a) for a in designs[idx])
        if analyzer.evaluate(candidate).feasible:
            return candidate, analyzer.weight(candidate)
    return None, math.nan
